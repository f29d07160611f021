//! Define a new noisy black box, optimize a quantile formulation of it and
//! compare with the exact robust optimum.
//!
//! Minimize (x₁ − 1)² + (x₂ − 2)² + θ₀ subject to x₁ + x₂ − 2 + θ₁ ≤ 0 with
//! θ ~ U[−½, ½]². The 95 % quantile of the constraint is x₁ + x₂ − 1.55, so the
//! robust optimum lies on x₁ + x₂ = 1.55.

use std::sync::Arc;

use snowpac::engine::{run, OptimizerConfig};
use snowpac::problems::{make_robust, oracle_reference, Formulation, StochasticBlackBox};

fn main() -> snowpac::Result<()> {
    let base = StochasticBlackBox::additive(
        "bowl",
        2,
        1,
        Arc::new(|x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2)),
        Arc::new(|x: &[f64], c: &mut [f64]| c[0] = x[0] + x[1] - 2.0),
        0.5,
        vec![0.0, 0.0],
    )?
    .with_domain(vec![(-3.0, 3.0); 2])?;

    let f = Formulation::MeanQuantile95;
    let problem = make_robust(base, f, 200, 9)?;
    let result = run(&problem, &OptimizerConfig { n_max: 150, seed: 9, ..OptimizerConfig::default() })?;
    let exact = oracle_reference(problem.base(), f)?;
    println!("found   {:.4?} (exact objective {:.4})", result.best_point, problem.base().exact_objective(f, &result.best_point)?);
    println!("optimum {:.4?} (value {:.4})", exact.point, exact.value);
    Ok(())
}

//! Minimize the expected value of the two-dimensional demonstration problem
//! under expected-value constraints and compare with the exact optimum.

use snowpac::engine::{run, OptimizerConfig};
use snowpac::problems::{example_2d, make_robust, reference, Formulation};

fn main() -> snowpac::Result<()> {
    let formulation = Formulation::MeanMean;
    let problem = make_robust(example_2d(), formulation, 50, 1)?;
    let config = OptimizerConfig { n_max: 97, seed: 1, ..OptimizerConfig::default() };
    let result = run(&problem, &config)?;

    for it in result.iterations.iter().step_by(5) {
        println!(
            "k {:3}  evals {:3}  ρ {:.4}  floor {:.4}  x {:.4?}  best {:.4}",
            it.k, it.evaluations_used, it.rho, it.floor, it.x, it.best_value
        );
    }
    let opt = reference(problem.base(), formulation)?;
    let dist = result.best_point.iter().zip(&opt.point).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    println!("stopped: {}", result.termination);
    println!("best {:.4?} (exact mean objective {:.4})", result.best_point, problem.base().exact_objective(formulation, &result.best_point)?);
    println!("optimum {:.4?} value {:.4}, distance {dist:.4}", opt.point, opt.value);
    Ok(())
}

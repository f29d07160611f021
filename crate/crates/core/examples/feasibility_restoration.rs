//! Start a quantile-constrained problem from an infeasible design and watch
//! the optimizer restore feasibility before it optimizes.

use snowpac::engine::{run, OptimizerConfig};
use snowpac::problems::{make_robust, problem_by_name, Formulation};
use snowpac::subsolver::Mode;

fn main() -> snowpac::Result<()> {
    let f = Formulation::MeanQuantile95;
    let base = problem_by_name("hs29")?.with_start(vec![4.0, 3.0, 2.5])?;
    let problem = make_robust(base, f, 200, 3)?;
    let config = OptimizerConfig { max_iterations: 100, n_max: 5000, seed: 3, ..OptimizerConfig::default() };
    let result = run(&problem, &config)?;

    let mut last_mode = None;
    for it in &result.iterations {
        if last_mode != Some(it.mode) || it.k % 20 == 0 {
            let c = problem.base().exact_constraints(f, &it.x)?;
            println!("k {:3} mode {:?} ρ {:.4} exact q95 constraint {:+.4}", it.k, it.mode, it.rho, c[0]);
        }
        last_mode = Some(it.mode);
    }
    let entered = result.iterations.iter().any(|it| it.mode == Mode::M2);
    let c = problem.base().exact_constraints(f, &result.best_point)?;
    println!("restoration used: {entered}; best point {:.4?}, exact constraint {:+.2e}", result.best_point, c[0]);
    Ok(())
}

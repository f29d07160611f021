//! Solve trust-region subproblems directly: the plain ball-constrained
//! quadratic, an optimality step with a constraint model, and a feasibility
//! restoration step.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snowpac::subsolver::{criticality, solve_trial_step, SubproblemSpec};
use snowpac::surrogate::LocalModel;
use snowpac::trs::minimize_quadratic_on_ball;

fn main() -> snowpac::Result<()> {
    // An indefinite quadratic: the minimizer sits on the boundary.
    let g = DVector::from_vec(vec![1.0, 0.5]);
    let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
    let ball = minimize_quadratic_on_ball(&g, &h, 1.0);
    println!("ball minimum: step {:.4?}, value {:.4}", ball.step.as_slice(), ball.value);

    let center = DVector::zeros(2);
    let objective = LocalModel { constant: 0.0, gradient: DVector::from_vec(vec![-1.0, -1.0]), hessian: DMatrix::identity(2, 2) * 0.1, center: center.clone() };
    // Constraint x + y - 0.5 <= 0, currently satisfied.
    let c = LocalModel::linear(center.clone(), -0.5, DVector::from_vec(vec![1.0, 1.0]));
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let m1 = SubproblemSpec::optimality(objective.clone(), vec![c.clone()], 1.0);
    let step = solve_trial_step(&m1, &mut rng)?;
    println!("optimality step {:.4?}, model value {:.4}, criticality {:.4}", step.step.as_slice(), step.model_objective_at_step, criticality(&m1, &mut rng)?);

    // The same constraint shifted so the center violates it.
    let violated = LocalModel::linear(center, 0.8, DVector::from_vec(vec![1.0, 1.0]));
    let m2 = SubproblemSpec::restoration(objective, vec![violated], 1.0, 1e-4);
    let step = solve_trial_step(&m2, &mut rng)?;
    let s = &step.step;
    println!("restoration step {:.4?}, constraint model after step {:.4}", s.as_slice(), 0.8 + s[0] + s[1]);
    Ok(())
}

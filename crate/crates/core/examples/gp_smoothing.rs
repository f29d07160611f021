//! Fit a Gaussian process to noisy evaluations and blend it with the raw
//! estimates, as the optimizer does with every new measure evaluation.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use snowpac::gp::{correct_evaluation, fit_hyperparameters, GaussianSurrogate, GpBounds, KernelForm, KernelParams, Training};

fn main() -> snowpac::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.2).unwrap();
    let t = 2.0;
    let mut training = Training::default();
    for i in 0..40 {
        let x = -3.0 + 6.0 * (i as f64 + 0.5) / 40.0;
        training.push(DVector::from_vec(vec![x]), x.sin() + noise.sample(&mut rng), t * 0.2);
    }
    let bounds = GpBounds::from_data(&training, 6.0);
    let fit = fit_hyperparameters(&training, KernelForm::Literal, &bounds, &KernelParams::new(1.0, vec![1.0])?, 2, t, &mut rng)?;
    println!("σ = {:.3}, length = {:.3}, log-likelihood {:.2}", fit.params.sigma, fit.params.lengths[0], fit.log_likelihood);
    let gp = GaussianSurrogate::new(fit.params, KernelForm::Literal, training.clone(), t)?;

    println!("{:>6} {:>8} {:>8} {:>8} {:>8} {:>6}", "x", "sin", "raw", "gp", "blend", "w");
    for k in (0..40).step_by(5) {
        let x = &training.points[k];
        let c = correct_evaluation(&gp, x, training.values[k], training.errors[k], t)?;
        let (mean, _) = gp.posterior(x)?;
        println!("{:6.2} {:8.4} {:8.4} {:8.4} {:8.4} {:6.3}", x[0], x[0].sin(), training.values[k], mean, c.value_hat, c.weight);
    }
    Ok(())
}

//! Derivative-free trust-region optimization of robustness measures that
//! can only be estimated from samples.
//!
//! The objective and constraints are measures such as the mean, a quantile
//! or the conditional value at risk of a noisy black box. Each evaluation
//! returns an estimate and an error bound. The optimizer builds local
//! surrogate models, smooths the estimates with Gaussian processes, keeps the
//! trust-region radius above a floor tied to the current noise level, and
//! switches to feasibility restoration when the current design looks
//! infeasible.
//!
//! Modules, bottom up:
//!
//! - [`measures`]: sample estimators with error bounds.
//! - [`surrogate`] and [`trs`]: local models, poisedness, ball-constrained quadratics.
//! - [`gp`]: Gaussian-process smoothing of noisy evaluations.
//! - [`subsolver`]: trial steps in optimality and restoration mode.
//! - [`engine`]: the optimizer loop ([`engine::run`]).
//! - [`problems`]: benchmark black boxes and exact reference optima.
//! - [`harness`]: campaigns, CSV exports and data profiles.
//! - [`cli`]: the `snowpac` command-line front end.
//!
//! The `examples/` directory has one runnable program per capability, for
//! instance `cargo run --release --example optimize_example2d`.
//!
//! ```no_run
//! use snowpac::engine::{run, OptimizerConfig};
//! use snowpac::problems::{example_2d, make_robust, Formulation};
//!
//! let problem = make_robust(example_2d(), Formulation::MeanMean, 50, 1)?;
//! let result = run(&problem, &OptimizerConfig { n_max: 97, ..OptimizerConfig::default() })?;
//! println!("{:?} after {} iterations", result.best_point, result.iterations.len() - 1);
//! # Ok::<(), snowpac::SnowpacError>(())
//! ```

// Argument checks are written as `!(x > 0.0)` on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod engine;
pub mod error;
pub mod gp;
pub mod harness;
pub mod measures;
pub mod problems;
pub mod subsolver;
pub mod surrogate;
pub mod trs;

pub use error::{Result, SnowpacError};

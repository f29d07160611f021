//! Localized Gaussian-process smoothing of noisy measure estimates.
//!
//! One [`GaussianSurrogate`] is kept per black box. Its posterior is blended
//! with the raw estimates by [`correct_evaluation`]: the weight on the GP mean
//! is `exp(−σ_post)`, so well-resolved regions lean on the GP while sparse
//! ones keep the raw value.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;

use crate::error::{invalid, Result, SnowpacError};

/// How the length scales enter the squared-exponential kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelForm {
    /// `σ² Π_i exp(−½ (‖x−y‖ / l_i)²)`: every factor sees the full distance.
    #[default]
    Literal,
    /// Per-coordinate (ARD) form `σ² exp(−½ Σ_i ((x_i−y_i) / l_i)²)`.
    Ard,
}

impl KernelForm {
    pub fn name(self) -> &'static str {
        match self {
            KernelForm::Literal => "literal",
            KernelForm::Ard => "ard",
        }
    }
}

impl std::str::FromStr for KernelForm {
    type Err = SnowpacError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(KernelForm::Literal),
            "ard" => Ok(KernelForm::Ard),
            _ => Err(SnowpacError::InvalidArgument(format!("unknown kernel '{s}' (expected literal or ard)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    pub sigma: f64,
    pub lengths: Vec<f64>,
}

impl KernelParams {
    pub fn new(sigma: f64, lengths: Vec<f64>) -> Result<Self> {
        let p = KernelParams { sigma, lengths };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.sigma) || !self.lengths.iter().all(|&l| ok(l)) {
            return Err(invalid("kernel parameters must be positive and finite"));
        }
        Ok(())
    }
}

/// Kernel in the literal product form.
pub fn kernel(params: &KernelParams, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    eval_kernel(KernelForm::Literal, params, x, y)
}

/// Kernel in either form.
pub fn eval_kernel(form: KernelForm, params: &KernelParams, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(SnowpacError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if form == KernelForm::Ard && params.lengths.len() != x.len() {
        return Err(SnowpacError::DimensionMismatch { expected: x.len(), got: params.lengths.len() });
    }
    Ok(kernel_unchecked(form, params, x, y))
}

fn inv_sq_sum(lengths: &[f64]) -> f64 {
    lengths.iter().map(|l| 1.0 / (l * l)).sum()
}

fn kernel_unchecked(form: KernelForm, p: &KernelParams, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let s2 = p.sigma * p.sigma;
    match form {
        KernelForm::Literal => s2 * (-0.5 * (x - y).norm_squared() * inv_sq_sum(&p.lengths)).exp(),
        KernelForm::Ard => {
            let q: f64 = x.iter().zip(y.iter()).zip(&p.lengths).map(|((a, b), l)| ((a - b) / l).powi(2)).sum();
            s2 * (-0.5 * q).exp()
        }
    }
}

/// Training data: points, raw estimates and their error half-widths.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Training {
    pub points: Vec<DVector<f64>>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl Training {
    pub fn push(&mut self, point: DVector<f64>, value: f64, error: f64) {
        self.points.push(point);
        self.values.push(value);
        self.errors.push(error);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let m = self.points.len();
        if self.values.len() != m || self.errors.len() != m {
            return Err(invalid("training arrays have different lengths"));
        }
        if let Some(p) = self.points.first() {
            if let Some(bad) = self.points.iter().find(|q| q.len() != p.len()) {
                return Err(SnowpacError::DimensionMismatch { expected: p.len(), got: bad.len() });
            }
        }
        if !self.values.iter().all(|v| v.is_finite()) || !self.errors.iter().all(|e| *e >= 0.0 && e.is_finite()) {
            return Err(invalid("training values must be finite and errors non-negative"));
        }
        Ok(())
    }
}

/// Relative jitter levels tried in turn when factorizing the covariance.
const JITTER_LADDER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// A fitted GP with a cached Cholesky factor.
#[derive(Debug, Clone)]
pub struct GaussianSurrogate {
    params: KernelParams,
    form: KernelForm,
    training: Training,
    prior_mean: f64,
    chol: Option<Cholesky<f64, Dyn>>,
    alpha: DVector<f64>,
    jitter: f64,
}

fn covariance(form: KernelForm, p: &KernelParams, tr: &Training, t_quantile: f64) -> DMatrix<f64> {
    let m = tr.len();
    let mut k = DMatrix::from_fn(m, m, |i, j| kernel_unchecked(form, p, &tr.points[i], &tr.points[j]));
    for i in 0..m {
        k[(i, i)] += (tr.errors[i] / t_quantile).powi(2);
    }
    k
}

fn factorize(k: &DMatrix<f64>, sigma: f64) -> Option<(Cholesky<f64, Dyn>, f64)> {
    let s2 = sigma * sigma;
    JITTER_LADDER.iter().find_map(|&rel| {
        let mut kj = k.clone();
        let jitter = rel * s2;
        for i in 0..kj.nrows() {
            kj[(i, i)] += jitter;
        }
        Cholesky::new(kj).map(|c| (c, jitter))
    })
}

impl GaussianSurrogate {
    /// Condition the GP on `training`. Noise variances are `(ε̄_i / t)²`.
    pub fn new(params: KernelParams, form: KernelForm, training: Training, t_quantile: f64) -> Result<Self> {
        params.validate()?;
        training.validate()?;
        if !(t_quantile > 0.0) {
            return Err(invalid("t_quantile must be positive"));
        }
        if let Some(p) = training.points.first() {
            if form == KernelForm::Ard && params.lengths.len() != p.len() {
                return Err(SnowpacError::DimensionMismatch { expected: p.len(), got: params.lengths.len() });
            }
        }
        let m = training.len();
        let prior_mean = if m == 0 { 0.0 } else { training.values.iter().sum::<f64>() / m as f64 };
        if m == 0 {
            return Ok(GaussianSurrogate { params, form, training, prior_mean, chol: None, alpha: DVector::zeros(0), jitter: 0.0 });
        }
        let k = covariance(form, &params, &training, t_quantile);
        let (chol, jitter) = factorize(&k, params.sigma).ok_or(SnowpacError::NotPositiveDefinite)?;
        let y = DVector::from_iterator(m, training.values.iter().map(|v| v - prior_mean));
        let alpha = chol.solve(&y);
        Ok(GaussianSurrogate { params, form, training, prior_mean, chol: Some(chol), alpha, jitter })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn training(&self) -> &Training {
        &self.training
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    /// Diagonal jitter that was needed for the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Posterior mean and standard deviation at `x`.
    pub fn posterior(&self, x: &DVector<f64>) -> Result<(f64, f64)> {
        let prior_var = self.params.sigma * self.params.sigma;
        let Some(chol) = &self.chol else {
            return Ok((self.prior_mean, self.params.sigma));
        };
        if x.len() != self.training.points[0].len() {
            return Err(SnowpacError::DimensionMismatch { expected: self.training.points[0].len(), got: x.len() });
        }
        let m = self.training.len();
        let kx = DVector::from_iterator(m, self.training.points.iter().map(|p| kernel_unchecked(self.form, &self.params, x, p)));
        let mean = self.prior_mean + kx.dot(&self.alpha);
        let v = chol.l_dirty().solve_lower_triangular(&kx).ok_or(SnowpacError::NotPositiveDefinite)?;
        // Round-off can push the variance slightly negative at training inputs.
        let var = (prior_var - v.norm_squared()).max(0.0);
        Ok((mean, var.sqrt()))
    }

    /// Log marginal likelihood of the training values.
    pub fn log_likelihood(&self) -> f64 {
        match &self.chol {
            None => 0.0,
            Some(chol) => {
                let m = self.training.len() as f64;
                let y = DVector::from_iterator(self.training.len(), self.training.values.iter().map(|v| v - self.prior_mean));
                let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
                -0.5 * y.dot(&self.alpha) - 0.5 * logdet - 0.5 * m * std::f64::consts::TAU.ln()
            }
        }
    }
}

/// Search box for the hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpBounds {
    pub sigma: (f64, f64),
    pub length: (f64, f64),
}

impl GpBounds {
    /// `l ∈ [1e-3, 10]·scale`, `σ ∈ [1e-6, 10·range]` (range floored at 1e-4).
    pub fn from_data(training: &Training, domain_scale: f64) -> Self {
        let (lo, hi) = training
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let range = if training.is_empty() { 1.0 } else { (hi - lo).max(1e-4) };
        GpBounds { sigma: (1e-6, 10.0 * range), length: (1e-3 * domain_scale, 10.0 * domain_scale) }
    }
}

/// Outcome of a hyperparameter fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub params: KernelParams,
    pub log_likelihood: f64,
    /// Some parameter ended on its bound.
    pub at_bounds: bool,
    /// No start produced a factorizable covariance; `params` are the fallback.
    pub failed: bool,
}

struct Objective<'a> {
    form: KernelForm,
    training: &'a Training,
    t_quantile: f64,
    dim: usize,
    /// Squared distances: one matrix for the literal form, one per
    /// coordinate for ARD.
    sq_dist: Vec<DMatrix<f64>>,
}

impl<'a> Objective<'a> {
    fn new(form: KernelForm, training: &'a Training, t_quantile: f64, dim: usize) -> Self {
        let m = training.len();
        let pts = &training.points;
        let sq_dist = match form {
            KernelForm::Literal => vec![DMatrix::from_fn(m, m, |i, j| (&pts[i] - &pts[j]).norm_squared())],
            KernelForm::Ard => (0..dim).map(|d| DMatrix::from_fn(m, m, |i, j| (pts[i][d] - pts[j][d]).powi(2))).collect(),
        };
        Objective { form, training, t_quantile, dim, sq_dist }
    }

    fn unpack(&self, z: &[f64]) -> KernelParams {
        KernelParams { sigma: z[0].exp(), lengths: z[1..].iter().map(|v| v.exp()).collect() }
    }

    /// Log likelihood and its gradient in log-parameters.
    fn eval(&self, z: &[f64]) -> Option<(f64, Vec<f64>)> {
        let p = self.unpack(z);
        let tr = self.training;
        let m = tr.len();
        let s2 = p.sigma * p.sigma;
        let signal = match self.form {
            KernelForm::Literal => {
                let c = -0.5 * inv_sq_sum(&p.lengths);
                self.sq_dist[0].map(|r2| s2 * (c * r2).exp())
            }
            KernelForm::Ard => {
                let mut q = DMatrix::zeros(m, m);
                for (d, r2) in self.sq_dist.iter().enumerate() {
                    q += r2 / (p.lengths[d] * p.lengths[d]);
                }
                q.map(|v| s2 * (-0.5 * v).exp())
            }
        };
        let mut k = signal.clone();
        for i in 0..m {
            k[(i, i)] += (tr.errors[i] / self.t_quantile).powi(2);
        }
        let (chol, _) = factorize(&k, p.sigma)?;
        let mean = tr.values.iter().sum::<f64>() / m as f64;
        let y = DVector::from_iterator(m, tr.values.iter().map(|v| v - mean));
        let alpha = chol.solve(&y);
        let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        let ll = -0.5 * y.dot(&alpha) - 0.5 * logdet - 0.5 * m as f64 * std::f64::consts::TAU.ln();
        if !ll.is_finite() {
            return None;
        }
        // W = ααᵀ − K⁻¹; dℓ/dθ = ½ tr(W ∂K/∂θ).
        let ws = (&alpha * alpha.transpose() - chol.inverse()).component_mul(&signal);
        let mut grad = vec![0.0; z.len()];
        grad[0] = ws.sum(); // ½ tr(W · 2K)
        match self.form {
            KernelForm::Literal => {
                let base = 0.5 * ws.dot(&self.sq_dist[0]);
                for d in 0..self.dim {
                    grad[1 + d] = base / (p.lengths[d] * p.lengths[d]);
                }
            }
            KernelForm::Ard => {
                for d in 0..self.dim {
                    grad[1 + d] = 0.5 * ws.dot(&self.sq_dist[d]) / (p.lengths[d] * p.lengths[d]);
                }
            }
        }
        Some((ll, grad))
    }
}

/// Maximize the log marginal likelihood by projected gradient ascent in
/// log-parameter space from `init` plus `restarts` random starts.
///
/// Deterministic for a given `rng` state.
pub fn fit_hyperparameters<R: Rng + ?Sized>(
    training: &Training,
    form: KernelForm,
    bounds: &GpBounds,
    init: &KernelParams,
    restarts: usize,
    t_quantile: f64,
    rng: &mut R,
) -> Result<FitOutcome> {
    training.validate()?;
    if training.len() < 3 {
        return Err(invalid("hyperparameter fitting needs at least 3 training points"));
    }
    let dim = init.lengths.len();
    if dim == 0 || dim != training.points[0].len() {
        return Err(SnowpacError::DimensionMismatch { expected: training.points[0].len(), got: dim });
    }
    let obj = Objective::new(form, training, t_quantile, dim);
    let lo: Vec<f64> = std::iter::once(bounds.sigma.0.ln()).chain(std::iter::repeat_n(bounds.length.0.ln(), dim)).collect();
    let hi: Vec<f64> = std::iter::once(bounds.sigma.1.ln()).chain(std::iter::repeat_n(bounds.length.1.ln(), dim)).collect();
    let project = |z: &mut Vec<f64>| z.iter_mut().enumerate().for_each(|(i, v)| *v = v.clamp(lo[i], hi[i]));

    let mut starts = Vec::with_capacity(restarts + 1);
    let mut z0: Vec<f64> = std::iter::once(init.sigma.ln()).chain(init.lengths.iter().map(|l| l.ln())).collect();
    project(&mut z0);
    starts.push(z0);
    for _ in 0..restarts {
        starts.push((0..=dim).map(|i| rng.random_range(lo[i]..=hi[i])).collect());
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starts {
        if let Some((ll, z)) = ascend(&obj, start, &project) {
            if best.as_ref().is_none_or(|(b, _)| ll > *b) {
                best = Some((ll, z));
            }
        }
    }
    Ok(match best {
        Some((ll, z)) => {
            let at_bounds = z.iter().enumerate().any(|(i, &v)| (v - lo[i]).abs() < 1e-6 || (hi[i] - v).abs() < 1e-6);
            FitOutcome { params: obj.unpack(&z), log_likelihood: ll, at_bounds, failed: false }
        }
        None => FitOutcome { params: init.clone(), log_likelihood: f64::NEG_INFINITY, at_bounds: false, failed: true },
    })
}

fn ascend(obj: &Objective, mut z: Vec<f64>, project: &dyn Fn(&mut Vec<f64>)) -> Option<(f64, Vec<f64>)> {
    let (mut ll, mut g) = obj.eval(&z)?;
    let mut step = 0.5;
    for _ in 0..60 {
        let mut improved = false;
        for _ in 0..20 {
            let mut trial: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            project(&mut trial);
            let moved: f64 = trial.iter().zip(&z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if moved < 1e-9 {
                break;
            }
            if let Some((tll, tg)) = obj.eval(&trial) {
                if tll > ll {
                    let gain = tll - ll;
                    z = trial;
                    ll = tll;
                    g = tg;
                    step *= 1.5;
                    improved = gain > 1e-10 * (1.0 + ll.abs());
                    break;
                }
            }
            step *= 0.3;
        }
        if !improved {
            break;
        }
    }
    Some((ll, z))
}

/// GP-corrected estimate at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedEvaluation {
    pub value_hat: f64,
    pub err_hat: f64,
    /// Weight `exp(−σ_post)` on the GP mean.
    pub weight: f64,
}

/// Blend a raw estimate with the GP posterior.
pub fn blend(gp_mean: f64, gp_std: f64, raw: f64, raw_err: f64, t_quantile: f64) -> CorrectedEvaluation {
    let weight = (-gp_std).exp();
    let value_hat = if weight == 0.0 { raw } else { weight * gp_mean + (1.0 - weight) * raw };
    let err_hat = if weight == 0.0 { raw_err } else { weight * t_quantile * gp_std + (1.0 - weight) * raw_err };
    CorrectedEvaluation { value_hat, err_hat, weight }
}

/// Corrected estimate for a raw evaluation at `x`.
pub fn correct_evaluation(
    gp: &GaussianSurrogate,
    x: &DVector<f64>,
    raw: f64,
    raw_err: f64,
    t_quantile: f64,
) -> Result<CorrectedEvaluation> {
    let (mean, std) = gp.posterior(x)?;
    Ok(blend(mean, std, raw, raw_err, t_quantile))
}

/// Corrected estimates for every node of a set, one black box.
pub fn correct_evaluations(
    gp: &GaussianSurrogate,
    nodes: &crate::surrogate::NodeSet,
    t_quantile: f64,
) -> Result<Vec<CorrectedEvaluation>> {
    nodes
        .nodes()
        .iter()
        .map(|nd| correct_evaluation(gp, &nd.point, nd.value, nd.error, t_quantile))
        .collect()
}

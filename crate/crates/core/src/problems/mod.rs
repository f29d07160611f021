//! Benchmark problems, robust formulations and exact references.
//!
//! A [`StochasticBlackBox`] maps a design `x` and a parameter sample `θ` to
//! an objective value and constraint values (`c(x, θ) ≤ 0` is feasible).
//! [`make_robust`] wraps it into a [`RobustProblem`] that estimates robustness
//! measures from fresh samples at every evaluation.

pub mod example2d;
pub mod hock;
pub mod reference;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::RobustEvaluator;
use crate::error::{invalid, Result, SnowpacError};
use crate::measures::{estimate, EstimateWithError, MeasureSpec, SampleSet};
use example2d::ObjectiveQuadrature;
use reference::{grid_minimize_2d, multistart, OracleProblem};

/// Probability level shared by the quantile and CVaR formulations.
pub const BETA: f64 = 0.95;

/// The three robust formulations used by the benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formulation {
    /// Expected objective, expected constraints.
    MeanMean,
    /// Expected objective, 95 % quantile constraints.
    MeanQuantile95,
    /// 95 % CVaR objective (with auxiliary VaR coordinate), expected constraints.
    CVaR95Mean,
}

impl Formulation {
    pub const ALL: [Formulation; 3] = [Formulation::MeanMean, Formulation::MeanQuantile95, Formulation::CVaR95Mean];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::MeanMean => "mean-mean",
            Formulation::MeanQuantile95 => "mean-q95",
            Formulation::CVaR95Mean => "cvar95-mean",
        }
    }

    pub fn objective_spec(self) -> MeasureSpec {
        match self {
            Formulation::CVaR95Mean => MeasureSpec::cvar(BETA),
            _ => MeasureSpec::mean(),
        }
    }

    pub fn constraint_spec(self) -> MeasureSpec {
        match self {
            Formulation::MeanQuantile95 => MeasureSpec::quantile(BETA),
            _ => MeasureSpec::mean(),
        }
    }

    /// Number of extra design coordinates the optimizer sees.
    pub fn extra_dims(self) -> usize {
        usize::from(self.objective_spec().extends_design())
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = SnowpacError;

    fn from_str(s: &str) -> Result<Self> {
        Formulation::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid(format!("unknown formulation '{s}' (expected mean-mean, mean-q95 or cvar95-mean)")))
    }
}

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type SampleFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Structure {
    /// `f(x) + s·θ₀`, `c_i(x) + s·θ_i` with `θ ~ U[−1, 1]^{1+r}`.
    Additive { f: ScalarFn, c: VectorFn, scale: f64 },
    Example2d(Arc<ObjectiveQuadrature>),
    /// Arbitrary evaluator with `θ ~ U[−1, 1]^theta_dim`; no exact measures.
    General { eval: SampleFn },
}

/// A known solution of a robust formulation, in the optimizer's coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub point: Vec<f64>,
    pub value: f64,
}

/// A black box `(x, θ) ↦ (f, c)` with uniform parameters and metadata.
#[derive(Clone)]
pub struct StochasticBlackBox {
    name: String,
    dim: usize,
    num_constraints: usize,
    theta_dim: usize,
    structure: Structure,
    start: Vec<f64>,
    domain: Vec<(f64, f64)>,
    optimum: Option<Reference>,
}

impl fmt::Debug for StochasticBlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StochasticBlackBox")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("num_constraints", &self.num_constraints)
            .field("theta_dim", &self.theta_dim)
            .field("start", &self.start)
            .finish_non_exhaustive()
    }
}

impl StochasticBlackBox {
    /// Deterministic functions with additive `U[−noise, noise]` perturbations
    /// on the objective and on every constraint.
    pub fn additive(
        name: impl Into<String>,
        dim: usize,
        num_constraints: usize,
        objective: ScalarFn,
        constraints: VectorFn,
        noise: f64,
        start: Vec<f64>,
    ) -> Result<Self> {
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(invalid("noise amplitude must be finite and non-negative"));
        }
        Self::checked(StochasticBlackBox {
            name: name.into(),
            dim,
            num_constraints,
            theta_dim: 1 + num_constraints,
            structure: Structure::Additive { f: objective, c: constraints, scale: noise },
            domain: vec![(-10.0, 10.0); dim],
            start,
            optimum: None,
        })
    }

    /// A general evaluator `(x, θ, c_out) ↦ f` with `θ ~ U[−1, 1]^theta_dim`.
    /// Such problems have no exact robust functions.
    pub fn general(
        name: impl Into<String>,
        dim: usize,
        num_constraints: usize,
        theta_dim: usize,
        eval: SampleFn,
        start: Vec<f64>,
    ) -> Result<Self> {
        Self::checked(StochasticBlackBox {
            name: name.into(),
            dim,
            num_constraints,
            theta_dim,
            structure: Structure::General { eval },
            domain: vec![(-10.0, 10.0); dim],
            start,
            optimum: None,
        })
    }

    fn checked(self) -> Result<Self> {
        if self.dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if self.start.len() != self.dim {
            return Err(SnowpacError::DimensionMismatch { expected: self.dim, got: self.start.len() });
        }
        Ok(self)
    }

    /// Box used for random oracle starts and GP length-scale bounds.
    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        if domain.len() != self.dim || domain.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(invalid("domain must give lo < hi for every coordinate"));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Result<Self> {
        if start.len() != self.dim {
            return Err(SnowpacError::DimensionMismatch { expected: self.dim, got: start.len() });
        }
        self.start = start;
        Ok(self)
    }

    /// Record the known deterministic optimum.
    pub fn with_optimum(mut self, point: Vec<f64>, value: f64) -> Self {
        self.optimum = Some(Reference { point, value });
        self
    }

    /// Same problem with the additive noise amplitude replaced.
    /// Fails for problems without additive structure.
    pub fn with_noise(mut self, noise: f64) -> Result<Self> {
        match &mut self.structure {
            Structure::Additive { scale, .. } if noise >= 0.0 && noise.is_finite() => *scale = noise,
            Structure::Additive { .. } => return Err(invalid("noise amplitude must be finite and non-negative")),
            _ => return Err(invalid(format!("problem '{}' has no additive noise", self.name))),
        }
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn theta_dim(&self) -> usize {
        self.theta_dim
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// Known deterministic optimum, if recorded.
    pub fn optimum(&self) -> Option<&Reference> {
        self.optimum.as_ref()
    }

    /// Evaluate one sample: returns `f(x, θ)` and fills `c`.
    pub fn evaluate(&self, x: &[f64], theta: &[f64], c: &mut [f64]) -> f64 {
        match &self.structure {
            Structure::Additive { f, c: cf, scale } => {
                cf(x, c);
                for (ci, t) in c.iter_mut().zip(&theta[1..]) {
                    *ci += scale * t;
                }
                f(x) + scale * theta[0]
            }
            Structure::Example2d(_) => example2d::evaluate(x, theta, c),
            Structure::General { eval } => eval(x, theta, c),
        }
    }

    /// Draw one `θ ~ U[−1, 1]^theta_dim`.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R, theta: &mut [f64]) {
        for t in theta.iter_mut() {
            *t = rng.random_range(-1.0..=1.0);
        }
    }

    /// True when exact robust functions are available for oracle use.
    pub fn has_exact(&self) -> bool {
        !matches!(self.structure, Structure::General { .. })
    }

    fn missing(&self) -> SnowpacError {
        SnowpacError::MissingOracle(format!("problem '{}' has no exact robust functions", self.name))
    }

    /// Exact robust objective at an optimizer-coordinate point (the CVaR
    /// formulation includes the auxiliary level as the last coordinate).
    pub fn exact_objective(&self, formulation: Formulation, z: &[f64]) -> Result<f64> {
        let x = &z[..self.dim];
        match (&self.structure, formulation) {
            (Structure::Additive { f, .. }, Formulation::CVaR95Mean) => {
                let (fx, s, gamma) = (f(x), self.noise_scale(), z[self.dim]);
                Ok(gamma + expected_positive_part(fx - gamma, s) / (1.0 - BETA))
            }
            (Structure::Additive { f, .. }, _) => Ok(f(x)),
            (Structure::Example2d(q), Formulation::CVaR95Mean) => Ok(q.cvar_auxiliary(x, z[self.dim], BETA)),
            (Structure::Example2d(_), _) => Ok(example2d::mean_objective(x)),
            (Structure::General { .. }, _) => Err(self.missing()),
        }
    }

    /// Exact robust objective minimized over the auxiliary level, as a
    /// function of the design alone. Returns the value and the minimizing level.
    pub fn exact_design_objective(&self, formulation: Formulation, x: &[f64]) -> Result<(f64, Option<f64>)> {
        match (&self.structure, formulation) {
            (Structure::Additive { f, .. }, Formulation::CVaR95Mean) => {
                let s = self.noise_scale();
                let fx = f(x);
                // CVaR of s·U[−1, 1] at level β is s·β, attained at γ = f + s(2β − 1).
                Ok((fx + s * BETA, Some(fx + s * (2.0 * BETA - 1.0))))
            }
            (Structure::Example2d(q), Formulation::CVaR95Mean) => {
                let (v, g) = q.cvar(x, BETA);
                Ok((v, Some(g)))
            }
            _ => {
                let mut z = x.to_vec();
                z.extend(std::iter::repeat_n(0.0, formulation.extra_dims()));
                Ok((self.exact_objective(formulation, &z)?, None))
            }
        }
    }

    /// Exact robust constraints at a design point.
    pub fn exact_constraints(&self, formulation: Formulation, x: &[f64]) -> Result<Vec<f64>> {
        let x = &x[..self.dim];
        let mut c = vec![0.0; self.num_constraints];
        match &self.structure {
            Structure::Additive { c: cf, scale, .. } => {
                cf(x, &mut c);
                if formulation == Formulation::MeanQuantile95 {
                    // β-quantile of s·U[−1, 1] is s(2β − 1).
                    for ci in c.iter_mut() {
                        *ci += scale * (2.0 * BETA - 1.0);
                    }
                }
            }
            Structure::Example2d(_) => {
                let v = if formulation == Formulation::MeanQuantile95 {
                    example2d::quantile_constraints(x, BETA)
                } else {
                    example2d::mean_constraints(x)
                };
                c.copy_from_slice(&v);
            }
            Structure::General { .. } => return Err(self.missing()),
        }
        Ok(c)
    }

    fn noise_scale(&self) -> f64 {
        match self.structure {
            Structure::Additive { scale, .. } => scale,
            _ => 0.0,
        }
    }
}

/// `E[(u + s θ)⁺]` for `θ ~ U[−1, 1]`.
pub fn expected_positive_part(u: f64, s: f64) -> f64 {
    let s = s.abs();
    if s == 0.0 || u >= s {
        return u.max(0.0);
    }
    if u <= -s {
        return 0.0;
    }
    (u + s).powi(2) / (4.0 * s)
}

/// The two-dimensional demonstration problem, started at `(4, 3)`.
pub fn example_2d() -> StochasticBlackBox {
    StochasticBlackBox {
        name: "example2d".into(),
        dim: 2,
        num_constraints: 2,
        theta_dim: 4,
        structure: Structure::Example2d(Arc::new(ObjectiveQuadrature::new(20_000))),
        start: vec![4.0, 3.0],
        domain: vec![(-2.0, 5.0); 2],
        optimum: Some(Reference { point: EXAMPLE2D_MEAN.0.to_vec(), value: EXAMPLE2D_MEAN.1 }),
    }
}

/// The eight Hock–Schittkowski problems with additive `U[−1, 1]` noise.
pub fn noisy_suite() -> Vec<StochasticBlackBox> {
    hock::definitions()
        .into_iter()
        .map(|d| {
            let f = d.objective;
            let c = d.constraints;
            StochasticBlackBox {
                name: d.name.into(),
                dim: d.dim,
                num_constraints: d.num_constraints,
                theta_dim: 1 + d.num_constraints,
                structure: Structure::Additive { f: Arc::new(f), c: Arc::new(c), scale: 1.0 },
                start: d.start.to_vec(),
                domain: vec![d.domain; d.dim],
                optimum: Some(Reference { point: d.optimum.to_vec(), value: d.optimum_value }),
            }
        })
        .collect()
}

/// Names accepted by [`problem_by_name`].
pub fn problem_names() -> Vec<String> {
    std::iter::once("example2d".to_string())
        .chain(hock::definitions().iter().map(|d| d.name.to_string()))
        .collect()
}

/// Look up a registry problem by name.
pub fn problem_by_name(name: &str) -> Result<StochasticBlackBox> {
    if name == "example2d" {
        return Ok(example_2d());
    }
    noisy_suite()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| SnowpacError::UnknownProblem(name.to_string()))
}

// Example problem references, cross-checked with an independent SQP solver.
const EXAMPLE2D_MEAN: ([f64; 2], f64) = ([0.12201873876456229, 2.505955429043853], -2.6588158253078222);
const EXAMPLE2D_Q95: ([f64; 2], f64) = ([1.3229728675057746, 2.029189147002316], 0.17227041849229696);
const EXAMPLE2D_CVAR: ([f64; 3], f64) =
    ([0.12201873876456071, 2.505955429043859, -1.4552105950872083], -1.3704911356297145);

// Suite references under quantile constraints (the constraints shift by 0.9).
// hs227 has no feasible point once shifted.
const SUITE_Q95: &[(&str, &[f64], f64)] = &[
    ("hs29", &[-3.962322551277896, -2.801785145238938, 1.9811612755886836], -21.99401339008),
    ("hs43", &[-0.10420298130882433, 0.9344466504413489, 1.8178210434352167, -1.043472202050319], -41.047935939956),
    (
        "hs100",
        &[2.2762139641708714, 1.9498497635936254, -0.4608882443196331, 4.357730722235646, -0.6248664903032409, 1.027787964992214, 1.6068603752626593],
        682.006449782425,
    ),
    (
        "hs113",
        &[
            2.16429423759161, 2.29708972279186, 8.739085636688971, 5.100077821651055, 0.9184788187565871, 1.446040252190606,
            1.397352178318004, 9.794381219386128, 8.154571876978965, 8.47634246461993,
        ],
        28.167794502755,
    ),
    ("hs228", &[0.0, -2.8460498941557026], -2.846049894156),
    (
        "hs268",
        &[0.9608682811358121, 1.9567159228225561, -0.9910952600865061, 2.9058306664536473, -3.8406559140513044],
        0.000984987542,
    ),
    (
        "hs285",
        &[
            0.9988038273779836, 0.9987101022879292, 0.9978880022854516, 0.9997086093827252, 0.9986230567674432,
            1.0000102995239597, 0.9996217243654518, 0.9986349754932162, 1.0007364545177342, 0.9983828492863892,
            0.9990419801621481, 0.9996522883100878, 0.9998873490759501, 0.9972211657859765, 0.9985901805184051,
        ],
        -8243.982805331365,
    ),
];

/// Frozen reference for a registry problem, if one is known.
///
/// `None` means either the problem is not in the registry or the formulation
/// is infeasible.
pub fn frozen_reference(problem: &StochasticBlackBox, formulation: Formulation) -> Option<Reference> {
    if problem.name == "example2d" {
        let (p, v): (&[f64], f64) = match formulation {
            Formulation::MeanMean => (&EXAMPLE2D_MEAN.0, EXAMPLE2D_MEAN.1),
            Formulation::MeanQuantile95 => (&EXAMPLE2D_Q95.0, EXAMPLE2D_Q95.1),
            Formulation::CVaR95Mean => (&EXAMPLE2D_CVAR.0, EXAMPLE2D_CVAR.1),
        };
        return Some(Reference { point: p.to_vec(), value: v });
    }
    let def = hock::definitions().into_iter().find(|d| d.name == problem.name)?;
    if problem.noise_scale() != 1.0 {
        return None;
    }
    match formulation {
        Formulation::MeanMean => Some(Reference { point: def.optimum.to_vec(), value: def.optimum_value }),
        Formulation::CVaR95Mean => {
            let mut p = def.optimum.to_vec();
            p.push(def.optimum_value + 2.0 * BETA - 1.0);
            Some(Reference { point: p, value: def.optimum_value + BETA })
        }
        Formulation::MeanQuantile95 => SUITE_Q95
            .iter()
            .find(|(n, _, _)| *n == def.name)
            .map(|(_, p, v)| Reference { point: p.to_vec(), value: *v }),
    }
}

/// Reference optimum found by multi-start local search (100 starts) on the
/// exact robust functions, cross-checked on a refined grid for `n = 2`.
///
/// Fails when no feasible point is found or the grid disagrees beyond 1e−3.
pub fn oracle_reference(problem: &StochasticBlackBox, formulation: Formulation) -> Result<Reference> {
    if !problem.has_exact() {
        return Err(problem.missing());
    }
    let obj = |x: &[f64]| problem.exact_design_objective(formulation, x).map(|v| v.0).unwrap_or(f64::NAN);
    let cons = |x: &[f64], c: &mut [f64]| {
        let v = problem.exact_constraints(formulation, x).unwrap_or_else(|_| vec![f64::NAN; c.len()]);
        c.copy_from_slice(&v);
    };
    let oracle = OracleProblem {
        dim: problem.dim,
        num_constraints: problem.num_constraints,
        objective: &obj,
        constraints: &cons,
        domain: problem.domain.clone(),
    };
    let mut starts = Vec::new();
    if let Some(o) = &problem.optimum {
        starts.push(o.point.clone());
    }
    starts.push(problem.start.clone());
    let random = 100usize.saturating_sub(starts.len());
    let best = multistart(&oracle, &starts, random, 0x5eed, 1e-8).ok_or_else(|| {
        SnowpacError::MissingOracle(format!("{} / {formulation}: no feasible point found", problem.name))
    })?;
    if problem.dim == 2 {
        let grid = grid_minimize_2d(&oracle, 401, 6)
            .ok_or_else(|| SnowpacError::MissingOracle(format!("{} / {formulation}: grid found no feasible point", problem.name)))?;
        let scale = best.value.abs().max(1.0);
        if (grid.value - best.value).abs() > 1e-3 * scale {
            return Err(SnowpacError::MissingOracle(format!(
                "{} / {formulation}: local search ({}) and grid ({}) disagree",
                problem.name, best.value, grid.value
            )));
        }
    }
    let mut point = best.point.clone();
    if let (_, Some(gamma)) = problem.exact_design_objective(formulation, &best.point)? {
        point.push(gamma);
    }
    Ok(Reference { point, value: best.value })
}

/// Frozen reference when available, otherwise [`oracle_reference`].
pub fn reference(problem: &StochasticBlackBox, formulation: Formulation) -> Result<Reference> {
    if let Some(r) = frozen_reference(problem, formulation) {
        return Ok(r);
    }
    if problem.name == "hs227" && formulation == Formulation::MeanQuantile95 && problem.noise_scale() == 1.0 {
        return Err(SnowpacError::MissingOracle("hs227 / mean-q95: no feasible point exists".into()));
    }
    oracle_reference(problem, formulation)
}

/// A black box bound to a formulation and sample size.
///
/// Evaluation `k` draws its `N` samples from the ChaCha stream `k` of the
/// problem seed, so results depend only on `(seed, k, x)`.
#[derive(Debug, Clone)]
pub struct RobustProblem {
    base: StochasticBlackBox,
    formulation: Formulation,
    n_samples: usize,
    seed: u64,
    gamma0: Option<f64>,
}

/// Bind `base` to a formulation with `n_samples` fresh samples per estimate.
///
/// For the CVaR formulation the auxiliary coordinate starts at the sample
/// 0.95-quantile of the objective at the starting point.
pub fn make_robust(base: StochasticBlackBox, formulation: Formulation, n_samples: usize, seed: u64) -> Result<RobustProblem> {
    if n_samples < 2 {
        return Err(SnowpacError::InsufficientSamples { needed: 2, got: n_samples });
    }
    let mut p = RobustProblem { base, formulation, n_samples, seed, gamma0: None };
    if formulation.extra_dims() > 0 {
        let (f, _) = p.draw(&p.base.start, u64::MAX);
        let mut sorted = f;
        sorted.sort_by(f64::total_cmp);
        let k = crate::measures::quantile_index(n_samples, BETA, 0.0).clamp(1, n_samples);
        p.gamma0 = Some(sorted[k - 1]);
    }
    Ok(p)
}

impl RobustProblem {
    pub fn base(&self) -> &StochasticBlackBox {
        &self.base
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Objective samples and constraint samples (row per constraint).
    fn draw(&self, x: &[f64], index: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut rng = self.stream(index);
        let r = self.base.num_constraints;
        let mut theta = vec![0.0; self.base.theta_dim];
        let mut c = vec![0.0; r];
        let mut fs = Vec::with_capacity(self.n_samples);
        let mut cs = vec![Vec::with_capacity(self.n_samples); r];
        for _ in 0..self.n_samples {
            self.base.sample_theta(&mut rng, &mut theta);
            fs.push(self.base.evaluate(x, &theta, &mut c));
            for (row, v) in cs.iter_mut().zip(&c) {
                row.push(*v);
            }
        }
        (fs, cs)
    }
}

impl RobustEvaluator for RobustProblem {
    fn dim(&self) -> usize {
        self.base.dim + self.formulation.extra_dims()
    }

    fn num_constraints(&self) -> usize {
        self.base.num_constraints
    }

    fn initial_point(&self) -> Vec<f64> {
        let mut x = self.base.start.clone();
        x.extend(self.gamma0);
        x
    }

    fn domain_scale(&self) -> f64 {
        self.base.domain.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max)
    }

    fn evaluate(&self, z: &[f64], eval_index: u64, t_quantile: f64) -> Result<Vec<EstimateWithError>> {
        if z.len() != self.dim() {
            return Err(SnowpacError::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        let x = &z[..self.base.dim];
        let (fs, cs) = self.draw(x, eval_index);
        let mut u_rng = self.stream(eval_index ^ (1 << 63));
        let gamma = z.get(self.base.dim).copied().unwrap_or(0.0);
        let mut out = Vec::with_capacity(1 + cs.len());
        let of = SampleSet::new(fs).map_err(|e| SnowpacError::Evaluation(e.to_string()))?;
        out.push(estimate(&self.formulation.objective_spec(), &of, gamma, t_quantile, u_rng.random())?);
        let cspec = self.formulation.constraint_spec();
        for row in cs {
            let set = SampleSet::new(row).map_err(|e| SnowpacError::Evaluation(e.to_string()))?;
            out.push(estimate(&cspec, &set, 0.0, t_quantile, u_rng.random())?);
        }
        Ok(out)
    }
}

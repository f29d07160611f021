//! Trust-region subproblems of both modes and the criticality measure.
//!
//! In the optimality mode (M1) the objective model is minimized subject to
//! `m_c(s) + h(s) ≤ 0`. In the restoration mode (M2) the sum
//! `Σ_{i∈I} m_ci(s)² + λ_g m_ci(s)` over currently violated constraints is
//! minimized subject to `m_c(s) + h(s) ≤ τ`. Here `h(s) = scale·‖s‖²` is the
//! inner boundary path that keeps trial points strictly inside.
//!
//! Both problems are solved with a log-barrier method whose inner iterations
//! are damped Newton steps, started from several strictly feasible points;
//! the constrained Cauchy point is always a candidate, so the result never
//! does worse than a fixed fraction of the Cauchy decrease.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result, SnowpacError};
use crate::surrogate::LocalModel;

/// Which subproblem the outer loop is solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Minimize the objective subject to the augmented constraint models.
    M1,
    /// Feasibility restoration: reduce the modeled constraint violation.
    M2,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::M1 => "M1",
            Mode::M2 => "M2",
        })
    }
}

/// Offset `scale·‖s‖²` added to every constraint model.
pub fn inner_boundary_path(s: &DVector<f64>, scale: f64) -> f64 {
    scale * s.norm_squared()
}

/// `max(1, max_i ‖H_i‖₂) / 2` over the constraint model Hessians.
pub fn default_path_scale(constraints: &[LocalModel]) -> f64 {
    let hmax = constraints.iter().map(|m| spectral_norm(&m.hessian)).fold(0.0, f64::max);
    hmax.max(1.0) / 2.0
}

fn spectral_norm(h: &DMatrix<f64>) -> f64 {
    if h.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    SymmetricEigen::new((h + h.transpose()) * 0.5).eigenvalues.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Everything needed to pose one subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSpec {
    pub mode: Mode,
    pub objective_model: LocalModel,
    pub constraint_models: Vec<LocalModel>,
    pub radius: f64,
    /// `τ_i = max(R̂_ci, 0)` in M2, zero in M1.
    pub slacks: Vec<f64>,
    /// Constraints with positive corrected value (M2 only).
    pub active_index_set: Vec<usize>,
    pub lambda_g: f64,
    /// Scale of the inner boundary path.
    pub path_scale: f64,
}

impl SubproblemSpec {
    /// Optimality-mode subproblem with the default inner boundary path.
    pub fn optimality(objective: LocalModel, constraints: Vec<LocalModel>, radius: f64) -> Self {
        let path_scale = default_path_scale(&constraints);
        let r = constraints.len();
        SubproblemSpec {
            mode: Mode::M1,
            objective_model: objective,
            constraint_models: constraints,
            radius,
            slacks: vec![0.0; r],
            active_index_set: Vec::new(),
            lambda_g: 0.0,
            path_scale,
        }
    }

    /// Restoration-mode subproblem; slacks and active set come from the
    /// model values at the center.
    pub fn restoration(objective: LocalModel, constraints: Vec<LocalModel>, radius: f64, lambda_g: f64) -> Self {
        let path_scale = default_path_scale(&constraints);
        let slacks: Vec<f64> = constraints.iter().map(|m| m.constant.max(0.0)).collect();
        let active_index_set = constraints.iter().enumerate().filter(|(_, m)| m.constant > 0.0).map(|(i, _)| i).collect();
        SubproblemSpec {
            mode: Mode::M2,
            objective_model: objective,
            constraint_models: constraints,
            radius,
            slacks,
            active_index_set,
            lambda_g,
            path_scale,
        }
    }

    pub fn with_path_scale(mut self, scale: f64) -> Self {
        self.path_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective_model.dim();
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid("radius must be positive and finite"));
        }
        if self.constraint_models.iter().any(|m| m.dim() != n) {
            return Err(invalid("constraint models must share the objective's dimension"));
        }
        if self.slacks.len() != self.constraint_models.len() {
            return Err(invalid("one slack per constraint is required"));
        }
        if self.active_index_set.iter().any(|&i| i >= self.constraint_models.len()) {
            return Err(invalid("active index out of range"));
        }
        if !(self.path_scale >= 0.0) || !(self.lambda_g >= 0.0) {
            return Err(invalid("path scale and lambda_g must be non-negative"));
        }
        if self.mode == Mode::M1 && (self.slacks.iter().any(|&t| t != 0.0) || !self.active_index_set.is_empty()) {
            return Err(invalid("optimality mode has zero slacks and no active set"));
        }
        Ok(())
    }

    /// Gradient entering the criticality measure of the current mode.
    pub fn mode_gradient(&self) -> DVector<f64> {
        match self.mode {
            Mode::M1 => self.objective_model.gradient.clone(),
            Mode::M2 => self.active_index_set.iter().fold(DVector::zeros(self.objective_model.dim()), |acc, &i| {
                let m = &self.constraint_models[i];
                acc + &m.gradient * (2.0 * m.constant + self.lambda_g)
            }),
        }
    }
}

/// Approximate subproblem minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub step: DVector<f64>,
    pub model_objective_at_step: f64,
    pub feasible_for_models: bool,
}

/// `c + gᵀu + ½ uᵀHu` in scaled coordinates `u = s/ρ`.
#[derive(Debug, Clone)]
struct Quad {
    c: f64,
    g: DVector<f64>,
    h: DMatrix<f64>,
}

impl Quad {
    fn from_model(m: &LocalModel, rho: f64) -> Self {
        Quad { c: m.constant, g: &m.gradient * rho, h: &m.hessian * (rho * rho) }
    }

    fn value(&self, u: &DVector<f64>) -> f64 {
        self.c + self.g.dot(u) + 0.5 * u.dot(&(&self.h * u))
    }

    fn grad(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.g + &self.h * u
    }

    fn scaled(mut self, k: f64) -> Self {
        self.c *= k;
        self.g *= k;
        self.h *= k;
        self
    }
}

enum Objective {
    Model(Quad),
    /// `Σ q_i² + λ q_i`.
    Restoration { terms: Vec<Quad>, lambda: f64 },
}

impl Objective {
    fn value(&self, u: &DVector<f64>) -> f64 {
        match self {
            Objective::Model(q) => q.value(u),
            Objective::Restoration { terms, lambda } => terms.iter().map(|q| {
                let v = q.value(u);
                v * v + lambda * v
            }).sum(),
        }
    }

    fn grad_hess(&self, u: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        match self {
            Objective::Model(q) => (q.grad(u), q.h.clone()),
            Objective::Restoration { terms, lambda } => {
                let n = u.len();
                let mut g = DVector::zeros(n);
                let mut h = DMatrix::zeros(n, n);
                for q in terms {
                    let v = q.value(u);
                    let gq = q.grad(u);
                    g += &gq * (2.0 * v + lambda);
                    h += &gq * gq.transpose() * 2.0 + &q.h * (2.0 * v + lambda);
                }
                (g, h)
            }
        }
    }
}

/// Normalized constraints `ψ_i(u) ≤ δ` inside the unit ball.
struct Barrier<'a> {
    obj: &'a Objective,
    obj_scale: f64,
    cons: Vec<Quad>,
    delta: f64,
}

const RELAX: f64 = 1e-9;

impl Barrier<'_> {
    fn strictly_feasible(&self, u: &DVector<f64>) -> bool {
        u.norm_squared() < 1.0 && self.cons.iter().all(|c| c.value(u) < self.delta)
    }

    fn feasible(&self, u: &DVector<f64>) -> bool {
        u.norm_squared() <= 1.0 + 1e-12 && self.cons.iter().all(|c| c.value(u) <= self.delta)
    }

    fn merit(&self, u: &DVector<f64>, mu: f64) -> Option<f64> {
        let r = 1.0 - u.norm_squared();
        if r <= 0.0 {
            return None;
        }
        let mut v = self.obj.value(u) / self.obj_scale - mu * r.ln();
        for c in &self.cons {
            let slack = self.delta - c.value(u);
            if slack <= 0.0 {
                return None;
            }
            v -= mu * slack.ln();
        }
        Some(v)
    }

    fn derivatives(&self, u: &DVector<f64>, mu: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = u.len();
        let (g0, h0) = self.obj.grad_hess(u);
        let mut g = g0 / self.obj_scale;
        let mut h = h0 / self.obj_scale;
        let r = 1.0 - u.norm_squared();
        g += u * (2.0 * mu / r);
        h += DMatrix::identity(n, n) * (2.0 * mu / r) + u * u.transpose() * (4.0 * mu / (r * r));
        for c in &self.cons {
            let slack = self.delta - c.value(u);
            let gc = c.grad(u);
            g += &gc * (mu / slack);
            h += &c.h * (mu / slack) + &gc * gc.transpose() * (mu / (slack * slack));
        }
        (g, h)
    }

    fn center(&self, mut u: DVector<f64>, mu: f64) -> DVector<f64> {
        let n = u.len();
        for _ in 0..60 {
            let Some(f0) = self.merit(&u, mu) else { break };
            let (g, h) = self.derivatives(&u, mu);
            let hnorm = h.norm();
            let mut tau = 0.0;
            let d = loop {
                let hm = &h + DMatrix::identity(n, n) * tau;
                if let Some(ch) = Cholesky::new(hm) {
                    break -ch.solve(&g);
                }
                tau = if tau == 0.0 { 1e-10 * (1.0 + hnorm) } else { tau * 10.0 };
            };
            let slope = g.dot(&d);
            if -slope < 1e-14 {
                break;
            }
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial = &u + &d * t;
                if let Some(f1) = self.merit(&trial, mu) {
                    if f1 <= f0 + 1e-4 * t * slope {
                        u = trial;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        u
    }

    fn solve(&self, start: DVector<f64>) -> DVector<f64> {
        let mut u = start;
        let mut mu = 0.1;
        while mu > 1e-12 {
            u = self.center(u, mu);
            mu *= 0.1;
        }
        u
    }
}

/// Largest `t ∈ [0, t_max]` keeping `ψ(τ d) ≤ δ` for every `τ ≤ t`.
fn ray_limit(cons: &[Quad], d: &DVector<f64>, delta: f64, t_max: f64) -> f64 {
    let mut t_lim = t_max;
    for c in cons {
        // ψ(t d) = a + b t + ½ k t²
        let a = c.c - delta;
        let b = c.g.dot(d);
        let k = d.dot(&(&c.h * d));
        if a > 0.0 {
            return 0.0;
        }
        let roots = if k.abs() < 1e-300 {
            if b > 0.0 { vec![-a / b] } else { vec![] }
        } else {
            let disc = b * b - 2.0 * k * a;
            if disc < 0.0 {
                vec![]
            } else {
                let sq = disc.sqrt();
                vec![(-b - sq) / k, (-b + sq) / k]
            }
        };
        if let Some(r) = roots.into_iter().filter(|&r| r > 0.0).reduce(f64::min) {
            t_lim = t_lim.min(r);
        }
    }
    t_lim.max(0.0)
}

/// Minimize `obj(t d)` over `t ∈ [0, t_max]` by sampling plus golden section.
fn line_minimum(obj: &Objective, d: &DVector<f64>, t_max: f64) -> f64 {
    if t_max <= 0.0 {
        return 0.0;
    }
    let f = |t: f64| obj.value(&(d * t));
    let k = 64;
    let (mut best_t, mut best_f) = (0.0, f(0.0));
    for i in 1..=k {
        let t = t_max * i as f64 / k as f64;
        let v = f(t);
        if v < best_f {
            best_f = v;
            best_t = t;
        }
    }
    let h = t_max / k as f64;
    let (mut a, mut b) = ((best_t - h).max(0.0), (best_t + h).min(t_max));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if f(x1) < f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let t = 0.5 * (a + b);
    if f(t) < best_f {
        t
    } else {
        best_t
    }
}

struct Posed {
    obj: Objective,
    cons: Vec<Quad>,
}

fn pose(spec: &SubproblemSpec, objective: Objective) -> Posed {
    let rho = spec.radius;
    let n = spec.objective_model.dim();
    let path = spec.path_scale * rho * rho;
    let cons = spec
        .constraint_models
        .iter()
        .zip(&spec.slacks)
        .map(|(m, &tau)| {
            let mut q = Quad::from_model(m, rho);
            q.c -= tau;
            q.h += DMatrix::identity(n, n) * (2.0 * path);
            let scale = q.c.abs().max(q.g.norm()).max(q.h.norm()).max(1e-300);
            q.scaled(1.0 / scale)
        })
        .collect();
    Posed { obj: objective, cons }
}

fn mode_objective(spec: &SubproblemSpec) -> Objective {
    let rho = spec.radius;
    match spec.mode {
        Mode::M1 => Objective::Model(Quad::from_model(&spec.objective_model, rho)),
        Mode::M2 => Objective::Restoration {
            terms: spec.active_index_set.iter().map(|&i| Quad::from_model(&spec.constraint_models[i], rho)).collect(),
            lambda: spec.lambda_g,
        },
    }
}

fn random_in_ball<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    let d = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let r = rng.random::<f64>().powf(1.0 / n as f64) * 0.95;
    let norm = d.norm();
    if norm == 0.0 {
        d
    } else {
        d * (r / norm)
    }
}

/// Multi-start barrier minimization; returns the best feasible point in
/// scaled coordinates (the center when nothing better is found).
fn minimize<R: Rng + ?Sized>(posed: &Posed, n: usize, rng: &mut R) -> DVector<f64> {
    let zero = DVector::zeros(n);
    let (g0, h0) = posed.obj.grad_hess(&zero);
    let obj_scale = g0.norm() + h0.norm();
    if obj_scale == 0.0 {
        return zero;
    }
    let barrier = Barrier { obj: &posed.obj, obj_scale, cons: posed.cons.clone(), delta: RELAX };

    let mut candidates = vec![zero.clone()];
    let mut starts = Vec::new();
    if barrier.strictly_feasible(&zero) {
        starts.push(zero.clone());
    }
    let gnorm = g0.norm();
    if gnorm > 0.0 {
        let d = -&g0 / gnorm;
        let t_max = ray_limit(&barrier.cons, &d, RELAX, 1.0);
        let t = line_minimum(&posed.obj, &d, t_max);
        let cauchy = &d * t;
        candidates.push(cauchy.clone());
        let inner = &cauchy * (1.0 - 1e-6);
        if t > 0.0 && barrier.strictly_feasible(&inner) {
            starts.push(inner);
        }
    }
    let mut tries = 0;
    let mut found = 0;
    while found < 3 && tries < 200 {
        tries += 1;
        let u = random_in_ball(n, rng);
        if barrier.strictly_feasible(&u) {
            starts.push(u);
            found += 1;
        }
    }
    for s in starts {
        candidates.push(barrier.solve(s));
    }
    let mut best = zero;
    let mut best_val = posed.obj.value(&best);
    for c in candidates {
        if !barrier.feasible(&c) {
            continue;
        }
        let v = posed.obj.value(&c);
        if v < best_val {
            best_val = v;
            best = c;
        }
    }
    if best.norm() > 1.0 {
        let k = best.norm();
        best /= k;
    }
    best
}

fn check_center(spec: &SubproblemSpec, posed: &Posed) -> Result<()> {
    if spec.mode == Mode::M1 && posed.cons.iter().any(|c| c.c > RELAX) {
        return Err(SnowpacError::CenterInfeasible);
    }
    Ok(())
}

/// Approximately solve the trial-step subproblem of `spec.mode`.
///
/// Returns [`SnowpacError::CenterInfeasible`] in M1 when `s = 0` violates an
/// augmented constraint model; the caller should switch to M2.
pub fn solve_trial_step<R: Rng + ?Sized>(spec: &SubproblemSpec, rng: &mut R) -> Result<StepResult> {
    spec.validate()?;
    let n = spec.objective_model.dim();
    let posed = pose(spec, mode_objective(spec));
    check_center(spec, &posed)?;
    let u = minimize(&posed, n, rng);
    let feasible = posed.cons.iter().all(|c| c.value(&u) <= RELAX);
    Ok(StepResult {
        model_objective_at_step: posed.obj.value(&u),
        step: u * spec.radius,
        feasible_for_models: feasible,
    })
}

/// Criticality measure `|min ⟨g, d⟩| / ρ` over model-feasible `‖d‖ ≤ ρ`.
pub fn criticality<R: Rng + ?Sized>(spec: &SubproblemSpec, rng: &mut R) -> Result<f64> {
    spec.validate()?;
    let n = spec.objective_model.dim();
    let g = spec.mode_gradient();
    let lin = Quad { c: 0.0, g: &g * spec.radius, h: DMatrix::zeros(n, n) };
    let posed = pose(spec, Objective::Model(lin));
    check_center(spec, &posed)?;
    let u = minimize(&posed, n, rng);
    Ok(g.dot(&u).min(0.0).abs())
}

//! The two-dimensional demonstration problem with four uniform parameters.
//!
//! ```text
//! f(x, y, θ)  = sin(x − 1 + θ₁) + sin²(y/2 − 1 + θ₁) + ½(x + ½)² − y
//! c₁(x, y, θ) = −4x²(1 + θ₂) − 10θ₃ + 10y − 25
//! c₂(x, y, θ) = −2y²(1 + θ₄) − 10(θ₄ + θ₂) − 20x + 15
//! ```
//! with `θ ~ U[−1, 1]⁴` and start `(4, 3)`.

/// Objective and constraints for one parameter sample.
pub fn evaluate(x: &[f64], theta: &[f64], c: &mut [f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    c[0] = -4.0 * a * a * (1.0 + theta[1]) - 10.0 * theta[2] + 10.0 * b - 25.0;
    c[1] = -2.0 * b * b * (1.0 + theta[3]) - 10.0 * (theta[3] + theta[1]) - 20.0 * a + 15.0;
    objective(x, theta[0])
}

/// Objective as a function of the only parameter it depends on.
pub fn objective(x: &[f64], theta1: f64) -> f64 {
    let (a, b) = (x[0], x[1]);
    (a - 1.0 + theta1).sin() + (0.5 * b - 1.0 + theta1).sin().powi(2) + 0.5 * (a + 0.5).powi(2) - b
}

/// Closed-form `E[f]`, using `E[sin(u + θ)] = sin 1 · sin u` and
/// `E[sin²(v + θ)] = ½ − cos(2v) sin 2 / 4` for `θ ~ U[−1, 1]`.
pub fn mean_objective(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    1f64.sin() * (a - 1.0).sin() + 0.5 - (2.0 * (0.5 * b - 1.0)).cos() * 2f64.sin() / 4.0 + 0.5 * (a + 0.5).powi(2) - b
}

/// Closed-form constraint means.
pub fn mean_constraints(x: &[f64]) -> [f64; 2] {
    let (a, b) = (x[0], x[1]);
    [-4.0 * a * a + 10.0 * b - 25.0, -2.0 * b * b - 20.0 * a + 15.0]
}

/// Coefficients `(p, q)` with `c_i − E[c_i] = −(p U + q V)` for independent
/// `U, V ~ U[−1, 1]`.
fn constraint_noise(x: &[f64]) -> [(f64, f64); 2] {
    let (a, b) = (x[0], x[1]);
    [(4.0 * a * a, 10.0), (2.0 * b * b + 10.0, 10.0)]
}

/// CDF of `p U + q V` for independent `U, V ~ U[−1, 1]`.
pub fn two_uniform_cdf(z: f64, p: f64, q: f64) -> f64 {
    let (lo, hi) = if p.abs() <= q.abs() { (p.abs(), q.abs()) } else { (q.abs(), p.abs()) };
    if hi == 0.0 {
        return if z >= 0.0 { 1.0 } else { 0.0 };
    }
    let al = (z / hi + 1.0) / 2.0;
    let be = lo / (2.0 * hi);
    if be < 1e-14 {
        return al.clamp(0.0, 1.0);
    }
    let g = |t: f64| {
        if t <= 0.0 {
            0.0
        } else if t <= 1.0 {
            0.5 * t * t
        } else {
            t - 0.5
        }
    };
    ((g(al + be) - g(al - be)) / (2.0 * be)).clamp(0.0, 1.0)
}

/// β-quantile of `p U + q V` by bisection on the exact CDF.
pub fn two_uniform_quantile(beta: f64, p: f64, q: f64) -> f64 {
    let span = p.abs() + q.abs();
    let (mut lo, mut hi) = (-span - 1.0, span + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if two_uniform_cdf(mid, p, q) < beta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + span) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact β-quantiles of both constraints.
pub fn quantile_constraints(x: &[f64], beta: f64) -> [f64; 2] {
    let m = mean_constraints(x);
    let noise = constraint_noise(x);
    [
        m[0] + two_uniform_quantile(beta, noise[0].0, noise[0].1),
        m[1] + two_uniform_quantile(beta, noise[1].0, noise[1].1),
    ]
}

/// Midpoint quadrature of the objective over `θ₁`.
///
/// Angle-addition tables make each node a handful of multiplications.
#[derive(Debug, Clone)]
pub struct ObjectiveQuadrature {
    cos1: Vec<f64>,
    sin1: Vec<f64>,
    cos2: Vec<f64>,
    sin2: Vec<f64>,
}

impl ObjectiveQuadrature {
    pub fn new(nodes: usize) -> Self {
        let theta: Vec<f64> = (0..nodes).map(|j| -1.0 + (j as f64 + 0.5) * 2.0 / nodes as f64).collect();
        ObjectiveQuadrature {
            cos1: theta.iter().map(|t| t.cos()).collect(),
            sin1: theta.iter().map(|t| t.sin()).collect(),
            cos2: theta.iter().map(|t| (2.0 * t).cos()).collect(),
            sin2: theta.iter().map(|t| (2.0 * t).sin()).collect(),
        }
    }

    /// Objective values at all nodes.
    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0], x[1]);
        let (su, cu) = (a - 1.0).sin_cos();
        let (s2v, c2v) = (2.0 * (0.5 * b - 1.0)).sin_cos();
        let base = 0.5 * (a + 0.5).powi(2) - b + 0.5;
        (0..self.cos1.len())
            .map(|j| {
                let s = su * self.cos1[j] + cu * self.sin1[j];
                let cos_2w = c2v * self.cos2[j] - s2v * self.sin2[j];
                base + s - 0.5 * cos_2w
            })
            .collect()
    }

    /// `γ + E[(f − γ)⁺] / (1 − β)`.
    pub fn cvar_auxiliary(&self, x: &[f64], gamma: f64, beta: f64) -> f64 {
        let v = self.values(x);
        let tail: f64 = v.iter().map(|f| (f - gamma).max(0.0)).sum::<f64>() / v.len() as f64;
        gamma + tail / (1.0 - beta)
    }

    /// Conditional value-at-risk `min_γ cvar_auxiliary(x, γ)` and its minimizer.
    pub fn cvar(&self, x: &[f64], beta: f64) -> (f64, f64) {
        let mut v = self.values(x);
        v.sort_by(f64::total_cmp);
        let m = v.len();
        let k = ((beta * m as f64).ceil() as usize).min(m - 1);
        let gamma = v[k];
        let tail: f64 = v[k..].iter().map(|f| f - gamma).sum::<f64>() / m as f64;
        (gamma + tail / (1.0 - beta), gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn odd_expectation_vanishes() {
        let q = ObjectiveQuadrature::new(4000);
        let mean: f64 = q.sin1.iter().sum::<f64>() / 4000.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn constraint_one_at_zero_abscissa() {
        let m = mean_constraints(&[0.0, 2.0]);
        assert_eq!(m[0], 10.0 * 2.0 - 25.0);
    }

    #[test]
    fn closed_form_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = [4.0, 3.0];
        let n = 2_000_000;
        let mut c = [0.0; 2];
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let th: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let f = evaluate(&x, &th, &mut c);
            s += f;
            s2 += f * f;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - mean_objective(&x)).abs() < 3.0 * se + 1e-12);
        assert!((mean_objective(&x) - 7.620924518049764).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form_mean() {
        let q = ObjectiveQuadrature::new(4000);
        for x in [[4.0, 3.0], [0.1, 2.5], [-1.0, 0.3]] {
            let v = q.values(&x);
            let m = v.iter().sum::<f64>() / v.len() as f64;
            assert!((m - mean_objective(&x)).abs() < 1e-6);
            for (j, f) in v.iter().enumerate().step_by(397) {
                let t = -1.0 + (j as f64 + 0.5) * 2.0 / 4000.0;
                assert!((f - objective(&x, t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantile_of_uniform_sum() {
        // Single uniform: the 0.95-quantile of 10 U is 9.
        assert!((two_uniform_quantile(0.95, 0.0, 10.0) - 9.0).abs() < 1e-9);
        // Equal weights give a triangular law: P(Z ≤ z) = 1 − (2 − z)² / 8 for z ≥ 0.
        let z = two_uniform_quantile(0.95, 1.0, 1.0);
        assert!((1.0 - (2.0 - z).powi(2) / 8.0 - 0.95).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 400_000;
        let hits = (0..n)
            .filter(|_| 3.0 * rng.random_range(-1.0..1.0) + 10.0 * rng.random_range(-1.0..1.0) <= two_uniform_quantile(0.95, 3.0, 10.0))
            .count();
        assert!((hits as f64 / n as f64 - 0.95).abs() < 0.002);
    }

    #[test]
    fn cvar_minimizer_consistent() {
        let q = ObjectiveQuadrature::new(2000);
        let x = [0.5, 2.0];
        let (cv, g) = q.cvar(&x, 0.95);
        assert!((q.cvar_auxiliary(&x, g, 0.95) - cv).abs() < 1e-9);
        for dg in [-0.05, 0.05] {
            assert!(q.cvar_auxiliary(&x, g + dg, 0.95) >= cv - 1e-12);
        }
    }
}

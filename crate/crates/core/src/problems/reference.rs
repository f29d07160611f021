//! Multi-start local search for deterministic constrained problems.
//!
//! Each start runs a PHR augmented Lagrangian whose inner problems are solved
//! by BFGS on central finite differences. Two-dimensional problems can be
//! cross-checked with a refined grid search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A local minimizer found by the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub point: Vec<f64>,
    pub value: f64,
    pub max_violation: f64,
}

/// Deterministic problem handed to the oracle.
pub struct OracleProblem<'a> {
    pub dim: usize,
    pub num_constraints: usize,
    pub objective: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub constraints: &'a (dyn Fn(&[f64], &mut [f64]) + Sync),
    /// Per-coordinate box for random starts and the grid.
    pub domain: Vec<(f64, f64)>,
}

impl OracleProblem<'_> {
    fn violation(&self, x: &[f64]) -> f64 {
        let mut c = vec![0.0; self.num_constraints];
        (self.constraints)(x, &mut c);
        c.iter().fold(0.0f64, |m, v| m.max(v.max(0.0)))
    }
}

fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], g: &mut [f64]) {
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
}

/// BFGS with Armijo backtracking; returns the final iterate.
pub fn bfgs(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], max_iter: usize, gtol: f64) -> Vec<f64> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = vec![0.0; n];
    fd_gradient(f, &x, &mut g);
    let mut h = nalgebra::DMatrix::<f64>::identity(n, n);
    for _ in 0..max_iter {
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !gn.is_finite() || gn <= gtol * fx.abs().max(1.0) {
            break;
        }
        let gv = nalgebra::DVector::from_column_slice(&g);
        let mut d = -(&h * &gv);
        let mut slope = d.dot(&gv);
        if slope >= 0.0 {
            h.fill_with_identity();
            d = -gv.clone();
            slope = d.dot(&gv);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + step * b).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let mut gn_vec = vec![0.0; n];
        fd_gradient(f, &xn, &mut gn_vec);
        let s = nalgebra::DVector::from_iterator(n, xn.iter().zip(&x).map(|(a, b)| a - b));
        let y = nalgebra::DVector::from_iterator(n, gn_vec.iter().zip(&g).map(|(a, b)| a - b));
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let small = (fx - fnew).abs() <= 1e-16 * fx.abs().max(1.0);
        x = xn;
        fx = fnew;
        g = gn_vec;
        if small && step < 1e-10 {
            break;
        }
    }
    x
}

/// Augmented-Lagrangian local solve from one start.
pub fn local_solve(problem: &OracleProblem<'_>, x0: &[f64]) -> Option<OracleSolution> {
    let r = problem.num_constraints;
    let mut lambda = vec![0.0; r];
    let mut mu = 10.0;
    let mut x = x0.to_vec();
    let mut prev_viol = f64::INFINITY;
    let mut c = vec![0.0; r];
    for _ in 0..40 {
        let lam = lambda.clone();
        let merit = |z: &[f64]| {
            let mut cz = vec![0.0; r];
            (problem.constraints)(z, &mut cz);
            let pen: f64 = cz
                .iter()
                .zip(&lam)
                .map(|(ci, li)| (li + mu * ci).max(0.0).powi(2) - li * li)
                .sum();
            (problem.objective)(z) + pen / (2.0 * mu)
        };
        x = bfgs(&merit, &x, 400, 1e-11);
        if x.iter().any(|v| !v.is_finite() || v.abs() > 1e8) {
            return None;
        }
        (problem.constraints)(&x, &mut c);
        for (li, ci) in lambda.iter_mut().zip(&c) {
            *li = (*li + mu * ci).max(0.0);
        }
        let viol = c
            .iter()
            .zip(&lambda)
            .map(|(ci, li)| ci.max(-li / mu).abs())
            .fold(0.0, f64::max);
        if viol < 1e-10 {
            break;
        }
        if viol > 0.25 * prev_viol {
            mu = (mu * 10.0).min(1e10);
        }
        prev_viol = viol;
    }
    let value = (problem.objective)(&x);
    value.is_finite().then(|| OracleSolution { max_violation: problem.violation(&x), point: x, value })
}

/// Best feasible (to `feas_tol`) local solution over the given starts plus
/// `random_starts` uniform draws from the domain box.
pub fn multistart(
    problem: &OracleProblem<'_>,
    starts: &[Vec<f64>],
    random_starts: usize,
    seed: u64,
    feas_tol: f64,
) -> Option<OracleSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<Vec<f64>> = starts.to_vec();
    for _ in 0..random_starts {
        all.push(problem.domain.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect());
    }
    all.iter()
        .filter_map(|s| local_solve(problem, s))
        .filter(|s| s.max_violation <= feas_tol)
        .min_by(|a, b| a.value.total_cmp(&b.value))
}

/// Feasible grid minimum on a 2-D box with repeated zooming around the best
/// cell. Returns `None` if no grid point is feasible.
pub fn grid_minimize_2d(problem: &OracleProblem<'_>, points: usize, zooms: usize) -> Option<OracleSolution> {
    assert_eq!(problem.dim, 2, "grid search is two-dimensional");
    let mut bx = [problem.domain[0], problem.domain[1]];
    let mut best: Option<OracleSolution> = None;
    let mut c = vec![0.0; problem.num_constraints];
    for _ in 0..=zooms {
        let h = [(bx[0].1 - bx[0].0) / (points - 1) as f64, (bx[1].1 - bx[1].0) / (points - 1) as f64];
        for i in 0..points {
            for j in 0..points {
                let x = [bx[0].0 + i as f64 * h[0], bx[1].0 + j as f64 * h[1]];
                (problem.constraints)(&x, &mut c);
                if c.iter().any(|v| *v > 0.0) {
                    continue;
                }
                let v = (problem.objective)(&x);
                if best.as_ref().is_none_or(|b| v < b.value) {
                    best = Some(OracleSolution { point: x.to_vec(), value: v, max_violation: 0.0 });
                }
            }
        }
        let b = best.as_ref()?;
        for k in 0..2 {
            bx[k] = (b.point[k] - 10.0 * h[k], b.point[k] + 10.0 * h[k]);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfgs_rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let x = bfgs(&f, &[-1.2, 1.0], 2000, 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 1.0).abs() < 1e-5, "{x:?}");
    }

    #[test]
    fn disk_constrained_linear() {
        // min x + y on the unit disk: optimum −√2 at (−1/√2, −1/√2).
        let f = |x: &[f64]| x[0] + x[1];
        let c = |x: &[f64], c: &mut [f64]| c[0] = x[0] * x[0] + x[1] * x[1] - 1.0;
        let p = OracleProblem { dim: 2, num_constraints: 1, objective: &f, constraints: &c, domain: vec![(-2.0, 2.0); 2] };
        let s = multistart(&p, &[vec![1.0, 1.0]], 5, 1, 1e-8).unwrap();
        assert!((s.value + 2f64.sqrt()).abs() < 1e-7);
        let g = grid_minimize_2d(&p, 201, 4).unwrap();
        assert!((g.value - s.value).abs() < 1e-4);
    }
}

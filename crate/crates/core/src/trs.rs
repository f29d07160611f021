//! Exact minimization of a quadratic over a Euclidean ball.
//!
//! Solves `min gᵀs + ½ sᵀHs` subject to `‖s‖ ≤ r` for small dense `H` via
//! an eigendecomposition and bisection on the secular equation, including
//! the so-called hard case where `g` is orthogonal to the leftmost
//! eigenspace.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Global minimizer of a quadratic on a ball.
#[derive(Debug, Clone)]
pub struct BallMinimum {
    pub step: DVector<f64>,
    pub value: f64,
}

/// Globally minimize `gᵀs + ½ sᵀHs` over `‖s‖ ≤ radius`.
pub fn minimize_quadratic_on_ball(g: &DVector<f64>, h: &DMatrix<f64>, radius: f64) -> BallMinimum {
    let n = g.len();
    let sym = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    let lam = &eig.eigenvalues;
    let q = &eig.eigenvectors;
    let gh = q.transpose() * g;

    let scale = lam.iter().fold(1.0f64, |a, &l| a.max(l.abs()));
    let (imin, lmin) = lam.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &l)| {
        if l < acc.1 {
            (i, l)
        } else {
            acc
        }
    });
    let step_for = |mu: f64| DVector::from_fn(n, |j, _| {
        let d = lam[j] + mu;
        if d > 0.0 {
            -gh[j] / d
        } else {
            0.0
        }
    });
    let finish = |sh: DVector<f64>| {
        let mut s = q * sh;
        let norm = s.norm();
        if norm > radius {
            s *= radius / norm;
        }
        let value = g.dot(&s) + 0.5 * s.dot(&(&sym * &s));
        BallMinimum { step: s, value }
    };

    let gnorm = g.norm();
    if lmin > 1e-14 * scale {
        let s0 = step_for(0.0);
        if s0.norm() <= radius {
            return finish(s0);
        }
    }

    // Hard case: g has no weight on the leftmost eigenspace.
    let lam_tol = 1e-12 * scale;
    let g_tol = 1e-14 * gnorm.max(1e-300);
    if lmin <= lam_tol {
        let leftmost: Vec<usize> = (0..n).filter(|&j| lam[j] <= lmin + lam_tol).collect();
        if leftmost.iter().all(|&j| gh[j].abs() <= g_tol.max(1e-300)) {
            let mu = -lmin.min(0.0);
            let sh = DVector::from_fn(n, |j, _| {
                if leftmost.contains(&j) {
                    0.0
                } else {
                    -gh[j] / (lam[j] + mu)
                }
            });
            let norm = sh.norm();
            if norm <= radius {
                let tau = (radius * radius - norm * norm).max(0.0).sqrt();
                let mut sh = sh;
                sh[imin] += tau;
                return finish(sh);
            }
        }
    }

    // Boundary solution: find mu with ‖s(mu)‖ = radius by bisection.
    let mut lo = (-lmin).max(0.0);
    let mut hi = lo + gnorm / radius + scale;
    while step_for(hi).norm() > radius {
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if step_for(mid).norm() > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    finish(step_for(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(g: &DVector<f64>, h: &DMatrix<f64>, r: f64) -> f64 {
        let mut best = 0.0f64;
        let k = 400;
        for i in 0..=k {
            for j in 0..=k {
                let s = DVector::from_vec(vec![
                    -r + 2.0 * r * i as f64 / k as f64,
                    -r + 2.0 * r * j as f64 / k as f64,
                ]);
                if s.norm() <= r {
                    best = best.min(g.dot(&s) + 0.5 * s.dot(&(h * &s)));
                }
            }
        }
        // Boundary points are better resolved on a circle.
        for t in 0..4000 {
            let a = t as f64 / 4000.0 * std::f64::consts::TAU;
            let s = DVector::from_vec(vec![r * a.cos(), r * a.sin()]);
            best = best.min(g.dot(&s) + 0.5 * s.dot(&(h * &s)));
        }
        best
    }

    #[test]
    fn linear_objective_goes_to_boundary() {
        let g = DVector::from_vec(vec![3.0, 4.0]);
        let m = minimize_quadratic_on_ball(&g, &DMatrix::zeros(2, 2), 2.0);
        assert!((m.value + 10.0).abs() < 1e-12);
        assert!((m.step - DVector::from_vec(vec![-1.2, -1.6])).norm() < 1e-10);
    }

    #[test]
    fn interior_newton_step() {
        let g = DVector::from_vec(vec![1.0, -1.0]);
        let h = DMatrix::from_diagonal_element(2, 2, 4.0);
        let m = minimize_quadratic_on_ball(&g, &h, 1.0);
        assert!((m.step - DVector::from_vec(vec![-0.25, 0.25])).norm() < 1e-12);
    }

    #[test]
    fn hard_case_uses_leftmost_eigenvector() {
        let g = DVector::from_vec(vec![1.0, 0.0]);
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -2.0]));
        let m = minimize_quadratic_on_ball(&g, &h, 1.0);
        assert!((m.step.norm() - 1.0).abs() < 1e-10);
        assert!((m.value - brute_force(&g, &h, 1.0)).abs() < 1e-4);
        assert!(m.value <= brute_force(&g, &h, 1.0) + 1e-10);
    }

    #[test]
    fn random_instances_match_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let g = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
            let h = (&a + a.transpose()) * 0.5;
            let r = rng.random_range(0.1..2.0);
            let m = minimize_quadratic_on_ball(&g, &h, r);
            let grid = brute_force(&g, &h, r);
            assert!(m.step.norm() <= r * (1.0 + 1e-12));
            assert!(m.value <= grid + 1e-9, "{} vs {}", m.value, grid);
            assert!(m.value >= grid - 1e-2 * (1.0 + grid.abs()));
        }
    }
}

//! Reference optima against independent recomputation.

use snowpac::problems::reference::{grid_minimize_2d, OracleProblem};
use snowpac::problems::{example_2d, frozen_reference, noisy_suite, oracle_reference, Formulation, StochasticBlackBox};

fn grid(p: &StochasticBlackBox, f: Formulation, points: usize) -> (Vec<f64>, f64) {
    let obj = |x: &[f64]| p.exact_objective(f, x).unwrap();
    let cons = |x: &[f64], c: &mut [f64]| c.copy_from_slice(&p.exact_constraints(f, x).unwrap());
    let o = OracleProblem {
        dim: 2,
        num_constraints: p.num_constraints(),
        objective: &obj,
        constraints: &cons,
        domain: p.domain().to_vec(),
    };
    let s = grid_minimize_2d(&o, points, 6).unwrap();
    (s.point, s.value)
}

#[test]
fn example2d_grids_agree() {
    let p = example_2d();
    for f in [Formulation::MeanMean, Formulation::MeanQuantile95] {
        let (x1, v1) = grid(&p, f, 401);
        let (x2, v2) = grid(&p, f, 801);
        assert!((v1 - v2).abs() <= 1e-2 * v2.abs().max(1.0), "{f}: {v1} vs {v2}");
        let d = ((x1[0] - x2[0]).powi(2) + (x1[1] - x2[1]).powi(2)).sqrt();
        assert!(d < 1e-2, "{f}: {x1:?} vs {x2:?}");
        let frozen = frozen_reference(&p, f).unwrap();
        assert!((frozen.value - v2).abs() <= 1e-3 * v2.abs().max(1.0), "{f}: frozen {} grid {v2}", frozen.value);
    }
}

#[test]
fn frozen_suite_optima_are_feasible_and_consistent() {
    for p in noisy_suite() {
        let f = Formulation::MeanMean;
        let r = frozen_reference(&p, f).unwrap();
        let value = p.exact_objective(f, &r.point).unwrap();
        assert!((value - r.value).abs() <= 1e-6 * r.value.abs().max(1.0), "{}: {value} vs {}", p.name(), r.value);
        let viol = p.exact_constraints(f, &r.point).unwrap().into_iter().fold(0.0, f64::max);
        assert!(viol <= 1e-6, "{}: violation {viol}", p.name());
    }
}

#[test]
fn frozen_quantile_optimum_matches_local_search() {
    let p = noisy_suite().into_iter().find(|p| p.name() == "hs29").unwrap();
    let f = Formulation::MeanQuantile95;
    let frozen = frozen_reference(&p, f).unwrap();
    let fresh = oracle_reference(&p, f).unwrap();
    assert!((frozen.value - fresh.value).abs() <= 1e-4 * fresh.value.abs().max(1.0), "{} vs {}", frozen.value, fresh.value);
}

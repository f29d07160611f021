use proptest::prelude::*;

use snowpac::harness::profile_from_times;
use snowpac::measures::{binomial_coverage, estimate_cvar, estimate_mean, estimate_quantile, SampleSet};

proptest! {
    #[test]
    fn mean_is_translation_equivariant(xs in prop::collection::vec(-100.0f64..100.0, 2..60), shift in -50.0f64..50.0) {
        let a = estimate_mean(&SampleSet::new(xs.clone()).unwrap(), 2.0).unwrap();
        let b = estimate_mean(&SampleSet::new(xs.iter().map(|x| x + shift).collect()).unwrap(), 2.0).unwrap();
        prop_assert!((b.value - a.value - shift).abs() <= 1e-9 * (1.0 + a.value.abs() + shift.abs()));
        prop_assert!((b.err_bound - a.err_bound).abs() <= 1e-7 * (1.0 + a.err_bound));
    }

    #[test]
    fn coverage_grows_with_the_interval(n in 3usize..400, beta in 0.02f64..0.98, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let l = 1 + ((n - 2) as f64 * a.min(b)) as usize;
        let u = (l + 1 + ((n - l - 1) as f64 * a.max(b)) as usize).min(n);
        let inner = binomial_coverage(l, u, n, beta).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&inner));
        if u < n {
            prop_assert!(binomial_coverage(l, u + 1, n, beta).unwrap() >= inner);
        }
        if l > 1 {
            prop_assert!(binomial_coverage(l - 1, u, n, beta).unwrap() >= inner);
        }
    }

    #[test]
    fn quantile_is_an_order_statistic(xs in prop::collection::vec(-10.0f64..10.0, 80..200), u in 0.0f64..1.0) {
        let e = estimate_quantile(&SampleSet::new(xs.clone()).unwrap(), 0.9, 0.9, u).unwrap();
        prop_assert!(xs.contains(&e.value));
        prop_assert!(e.err_bound >= 0.0);
    }

    #[test]
    fn cvar_dominates_its_level(xs in prop::collection::vec(-10.0f64..10.0, 2..80), gamma in -10.0f64..10.0) {
        let e = estimate_cvar(&SampleSet::new(xs).unwrap(), 0.9, gamma, 2.0).unwrap();
        prop_assert!(e.value >= gamma - 1e-12);
    }

    #[test]
    fn profile_is_monotone_and_bounded(times in prop::collection::vec((prop::option::of(0usize..300), 1usize..10), 1..40)) {
        let alphas: Vec<f64> = (0..60).map(|a| a as f64).collect();
        let p = profile_from_times(&times, &alphas);
        prop_assert!(p.fraction_solved.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(p.fraction_solved.iter().all(|d| (0.0..=1.0).contains(d)));
    }
}

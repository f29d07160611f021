//! Sample-based robustness measures and their probabilistic error bounds.
//!
//! Every estimator consumes the integrand values `b(x, θ_i)` drawn at a single
//! design point and returns an [`EstimateWithError`]: the estimate together
//! with a half-width `ε̄` that bounds the sampling error with high probability.
//!
//! Mean-type measures (mean, variance, mean/variance trade-off, chance
//! constraint, CVaR in its auxiliary-variable form) are sample averages of an
//! integrand, so their bound is `t · s_N / √N`. Quantiles use an order
//! statistic and a distribution-free binomial coverage argument instead.

use crate::error::{invalid, Result, SnowpacError};

/// Which robustness functional to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Mean,
    Variance,
    MeanVariance,
    ChanceProb,
    Quantile,
    CVaR,
}

impl MeasureKind {
    fn name(self) -> &'static str {
        match self {
            MeasureKind::Mean => "Mean",
            MeasureKind::Variance => "Variance",
            MeasureKind::MeanVariance => "MeanVariance",
            MeasureKind::ChanceProb => "ChanceProb",
            MeasureKind::Quantile => "Quantile",
            MeasureKind::CVaR => "CVaR",
        }
    }
}

/// A fully parameterized robustness measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    /// Probability level for chance constraints, quantiles and CVaR.
    pub beta: f64,
    /// Trade-off weight of the mean/variance combination.
    pub gamma_weight: f64,
    pub c1: f64,
    pub c2: f64,
    /// Target confidence of the error bound (used by quantiles).
    pub confidence: f64,
}

impl MeasureSpec {
    const DEFAULT_CONFIDENCE: f64 = 0.95;

    fn with_kind(kind: MeasureKind) -> Self {
        MeasureSpec {
            kind,
            beta: 0.5,
            gamma_weight: 0.5,
            c1: 1.0,
            c2: 1.0,
            confidence: Self::DEFAULT_CONFIDENCE,
        }
    }

    pub fn mean() -> Self {
        Self::with_kind(MeasureKind::Mean)
    }

    pub fn variance() -> Self {
        Self::with_kind(MeasureKind::Variance)
    }

    pub fn mean_variance(gamma_weight: f64, c1: f64, c2: f64) -> Self {
        MeasureSpec { gamma_weight, c1, c2, ..Self::with_kind(MeasureKind::MeanVariance) }
    }

    pub fn chance(beta: f64) -> Self {
        MeasureSpec { beta, ..Self::with_kind(MeasureKind::ChanceProb) }
    }

    pub fn quantile(beta: f64) -> Self {
        MeasureSpec { beta, ..Self::with_kind(MeasureKind::Quantile) }
    }

    pub fn cvar(beta: f64) -> Self {
        MeasureSpec { beta, ..Self::with_kind(MeasureKind::CVaR) }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    /// True when optimizing this measure needs the auxiliary VaR coordinate.
    pub fn extends_design(&self) -> bool {
        self.kind == MeasureKind::CVaR
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if matches!(self.kind, MeasureKind::ChanceProb | MeasureKind::Quantile | MeasureKind::CVaR)
            && !open_unit(self.beta)
        {
            return Err(invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.kind == MeasureKind::MeanVariance {
            if !(0.0..=1.0).contains(&self.gamma_weight) {
                return Err(invalid(format!("gamma_weight must lie in [0, 1], got {}", self.gamma_weight)));
            }
            if !(self.c1 > 0.0 && self.c2 > 0.0) {
                return Err(invalid("c1 and c2 must be positive"));
            }
        }
        if !open_unit(self.confidence) {
            return Err(invalid(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        Ok(())
    }
}

/// Integrand values `b(x, θ_i)` at one design point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(SnowpacError::InsufficientSamples { needed: 2, got: values.len() });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("sample value {bad} is not finite")));
        }
        Ok(SampleSet { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// A measure estimate with its high-probability error half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub value: f64,
    pub err_bound: f64,
    pub n_samples: usize,
    /// Confidence attained (quantiles) or nominally implied by `t` (averages).
    pub confidence: f64,
}

impl EstimateWithError {
    /// An exact value with no sampling error.
    pub fn exact(value: f64) -> Self {
        EstimateWithError { value, err_bound: 0.0, n_samples: 0, confidence: 1.0 }
    }
}

/// Integrand of a sample-average measure evaluated at one sample.
///
/// `mean_hint` is the mean estimate used by the variance-type measures and
/// `cvar_gamma` the auxiliary VaR level of the CVaR formulation.
pub fn integrand(spec: &MeasureSpec, b_value: f64, mean_hint: f64, cvar_gamma: f64) -> Result<f64> {
    let dev2 = (b_value - mean_hint).powi(2);
    Ok(match spec.kind {
        MeasureKind::Mean => b_value,
        MeasureKind::Variance => dev2,
        MeasureKind::MeanVariance => {
            spec.gamma_weight * spec.c1 * b_value + (1.0 - spec.gamma_weight) * spec.c2 * dev2
        }
        MeasureKind::ChanceProb => {
            let hit = if b_value >= 0.0 { 1.0 } else { 0.0 };
            hit - (1.0 - spec.beta)
        }
        MeasureKind::CVaR => cvar_gamma + (b_value - cvar_gamma).max(0.0) / (1.0 - spec.beta),
        MeasureKind::Quantile => return Err(SnowpacError::NoIntegrand(spec.kind.name())),
    })
}

/// Sample mean with error bound `t · s_N / √N` (unbiased `s_N`).
pub fn estimate_mean(samples: &SampleSet, t_quantile: f64) -> Result<EstimateWithError> {
    if !(t_quantile > 0.0) {
        return Err(invalid("t_quantile must be positive"));
    }
    let v = samples.values();
    let n = v.len() as f64;
    // Shifting by the first sample keeps constant sets exact.
    let mean = v[0] + v.iter().map(|x| x - v[0]).sum::<f64>() / n;
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    let s = (ss / (n - 1.0)).sqrt();
    Ok(EstimateWithError {
        value: mean,
        err_bound: t_quantile * s / n.sqrt(),
        n_samples: v.len(),
        confidence: statrs::function::erf::erf(t_quantile / std::f64::consts::SQRT_2),
    })
}

/// CVaR in auxiliary-variable form: mean of `γ + [b − γ]⁺ / (1 − β)`.
pub fn estimate_cvar(samples: &SampleSet, beta: f64, gamma: f64, t_quantile: f64) -> Result<EstimateWithError> {
    let spec = MeasureSpec::cvar(beta);
    spec.validate()?;
    let mapped = samples
        .values()
        .iter()
        .map(|&b| integrand(&spec, b, 0.0, gamma))
        .collect::<Result<Vec<_>>>()?;
    estimate_mean(&SampleSet::new(mapped)?, t_quantile)
}

/// Estimate any measure except quantiles through its integrand.
///
/// Variance-type measures center on the sample mean of `samples`.
pub fn estimate_integral(
    spec: &MeasureSpec,
    samples: &SampleSet,
    cvar_gamma: f64,
    t_quantile: f64,
) -> Result<EstimateWithError> {
    spec.validate()?;
    let v = samples.values();
    let mean_hint = v.iter().sum::<f64>() / v.len() as f64;
    let mapped = v
        .iter()
        .map(|&b| integrand(spec, b, mean_hint, cvar_gamma))
        .collect::<Result<Vec<_>>>()?;
    estimate_mean(&SampleSet::new(mapped)?, t_quantile)
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0)
}

/// 1-based index of the order statistic estimating the β-quantile.
///
/// When `Nβ` is an integer and `β = 0.5` the two central order statistics
/// tie; `u_draw ≤ 0.5` selects the upper one, so each is chosen with
/// probability one half.
pub fn quantile_index(n: usize, beta: f64, u_draw: f64) -> usize {
    let nb = n as f64 * beta;
    if is_integer(nb) {
        let k = nb.round() as usize;
        if (beta - 0.5).abs() <= 1e-12 {
            k + usize::from(u_draw <= 0.5)
        } else if beta < 0.5 {
            k
        } else {
            k + 1
        }
    } else {
        nb.floor() as usize + 1
    }
}

/// Binomial probability mass function for integer arguments, accurate to a
/// few ulps.
///
/// Uses the saddle-point expansion of C. Loader ("Fast and accurate
/// computation of binomial probabilities", 2000), which avoids the
/// cancellation of the naive `ln C(N, i) + i ln β + …` form.
pub fn binomial_pmf(x: usize, n: usize, p: f64) -> f64 {
    let q = 1.0 - p;
    if x > n {
        return 0.0;
    }
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if x == 0 {
        return (nf * (-p).ln_1p()).exp();
    }
    if x == n {
        return (nf * p.ln()).exp();
    }
    let xf = x as f64;
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = std::f64::consts::TAU.ln() + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `ln n! − ((n + ½) ln n − n + ½ ln 2π)`.
fn stirlerr(n: usize) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        // n! is exact in f64 up to 15!, so the direct form loses almost nothing.
        let nf = n as f64;
        if n == 0 {
            return 0.0;
        }
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        return fact.ln() - (nf + 0.5) * nf.ln() + nf - 0.5 * std::f64::consts::TAU.ln();
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x/np) + np − x`, evaluated without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * (x / np).ln() + np - x
}

/// `π(l, u, N, β) = Σ_{i=l}^{u−1} C(N,i) β^i (1−β)^{N−i}`: probability that
/// the interval `[b_{l:N}, b_{u:N}]` covers the β-quantile.
pub fn binomial_coverage(l: usize, u: usize, n: usize, beta: f64) -> Result<f64> {
    if !(1 <= l && l < u && u <= n) {
        return Err(invalid(format!("coverage needs 1 <= l < u <= N, got l={l}, u={u}, N={n}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    let mut acc = NeumaierSum::default();
    for i in l..u {
        acc.add(binomial_pmf(i, n, beta));
    }
    Ok(acc.total().min(1.0))
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Order-statistic quantile estimate with a distribution-free error bound.
///
/// The bound is the larger distance from `b_{β̄:N}` to `b_{β̄−i:N}` and
/// `b_{β̄+i:N}` for the smallest `i` whose (clamped) interval covers the
/// quantile with probability at least `confidence`.
pub fn estimate_quantile(
    samples: &SampleSet,
    beta: f64,
    confidence: f64,
    u_draw: f64,
) -> Result<EstimateWithError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let sorted = samples.sorted();
    let n = sorted.len();
    let bar = quantile_index(n, beta, u_draw).clamp(1, n);
    let b = |k: usize| sorted[k - 1];
    let value = b(bar);

    // Grow the clamped interval one index at a time, adding only the new mass.
    let (mut lo, mut hi) = (bar, bar);
    let mut coverage = NeumaierSum::default();
    for i in 1..=n {
        let new_lo = bar.saturating_sub(i).max(1);
        let new_hi = (bar + i).min(n);
        while lo > new_lo {
            lo -= 1;
            coverage.add(binomial_pmf(lo, n, beta));
        }
        while hi < new_hi {
            coverage.add(binomial_pmf(hi, n, beta));
            hi += 1;
        }
        let attained = coverage.total().min(1.0);
        if attained >= confidence {
            return Ok(EstimateWithError {
                value,
                err_bound: (value - b(lo)).max(b(hi) - value),
                n_samples: n,
                confidence: attained,
            });
        }
        if lo == 1 && hi == n {
            return Err(SnowpacError::CoverageUnreachable { target: confidence, attainable: attained });
        }
    }
    unreachable!("the interval reaches [1, N] after at most N widenings")
}

/// Estimate `spec` from raw integrand samples, dispatching quantiles to the
/// order-statistic estimator.
pub fn estimate(
    spec: &MeasureSpec,
    samples: &SampleSet,
    cvar_gamma: f64,
    t_quantile: f64,
    u_draw: f64,
) -> Result<EstimateWithError> {
    spec.validate()?;
    match spec.kind {
        MeasureKind::Quantile => estimate_quantile(samples, spec.beta, spec.confidence, u_draw),
        _ => estimate_integral(spec, samples, cvar_gamma, t_quantile),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn integrand_rows() {
        assert_eq!(integrand(&MeasureSpec::mean(), 3.5, 0.0, 0.0).unwrap(), 3.5);
        let chance = integrand(&MeasureSpec::chance(0.9), -1.0, 0.0, 0.0).unwrap();
        assert!((chance + 0.1).abs() < 1e-15);
        assert!((integrand(&MeasureSpec::cvar(0.5), 0.8, 0.0, 0.0).unwrap() - 1.6).abs() < 1e-15);
        assert!(matches!(
            integrand(&MeasureSpec::quantile(0.9), 1.0, 0.0, 0.0),
            Err(SnowpacError::NoIntegrand(_))
        ));
        let mv = MeasureSpec::mean_variance(0.25, 2.0, 3.0);
        let got = integrand(&mv, 2.0, 1.0, 0.0).unwrap();
        assert!((got - (0.25 * 2.0 * 2.0 + 0.75 * 3.0 * 1.0)).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(MeasureSpec::quantile(1.0).validate().is_err());
        assert!(MeasureSpec::mean_variance(1.5, 1.0, 1.0).validate().is_err());
        assert!(MeasureSpec::mean_variance(0.5, 0.0, 1.0).validate().is_err());
        assert!(MeasureSpec::mean().with_confidence(1.0).validate().is_err());
        assert!(MeasureSpec::cvar(0.95).validate().is_ok());
    }

    #[test]
    fn sample_set_rejects_short_or_nonfinite() {
        assert!(SampleSet::new(vec![1.0]).is_err());
        assert!(SampleSet::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn mean_of_constant_and_two_point_sets() {
        let c = estimate_mean(&set(&[4.2; 10]), 2.0).unwrap();
        assert_eq!(c.value, 4.2);
        assert_eq!(c.err_bound, 0.0);
        let two = estimate_mean(&set(&[-1.0, 1.0]), 2.0).unwrap();
        assert_eq!(two.value, 0.0);
        assert!((two.err_bound - 2.0).abs() < 1e-15);
        assert!((two.confidence - 0.9545).abs() < 1e-4);
    }

    #[test]
    fn mean_half_width_for_uniform_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut widths = 0.0;
        for _ in 0..200 {
            let v: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
            widths += estimate_mean(&set(&v), 2.0).unwrap().err_bound;
        }
        let expected = 2.0 / 3f64.sqrt() / 200f64.sqrt();
        assert!((widths / 200.0 - expected).abs() < 0.005);
    }

    #[test]
    fn quantile_index_cases() {
        assert_eq!(quantile_index(1000, 0.95, 0.3), 951);
        assert_eq!(quantile_index(10, 0.33, 0.3), 4);
        assert_eq!(quantile_index(100, 0.05, 0.3), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [false; 2];
        for _ in 0..100 {
            let k = quantile_index(10, 0.5, rng.random());
            assert!(k == 5 || k == 6);
            seen[k - 5] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn quantile_of_permutation_and_constant() {
        let mut v: Vec<f64> = (1..=100).map(f64::from).collect();
        v.reverse();
        let e = estimate_quantile(&set(&v), 0.95, 0.95, 0.5).unwrap();
        assert_eq!(e.value, 96.0);
        assert!(e.confidence >= 0.95);
        let c = estimate_quantile(&set(&[7.0; 50]), 0.9, 0.95, 0.5).unwrap();
        assert_eq!((c.value, c.err_bound), (7.0, 0.0));
    }

    #[test]
    fn quantile_error_bound_recomputes_from_order_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let e = estimate_quantile(&set(&v), 0.9, 0.95, 0.5).unwrap();
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let bar = quantile_index(300, 0.9, 0.5);
        let i = (1..300)
            .find(|&i| {
                let l = bar.saturating_sub(i).max(1);
                let u = (bar + i).min(300);
                binomial_coverage(l, u, 300, 0.9).unwrap() >= 0.95
            })
            .unwrap();
        let l = bar.saturating_sub(i).max(1);
        let u = (bar + i).min(300);
        let expect = (s[bar - 1] - s[l - 1]).max(s[u - 1] - s[bar - 1]);
        assert!((e.err_bound - expect).abs() < 1e-15);
        assert!(v.contains(&e.value));
    }

    #[test]
    fn quantile_coverage_unreachable_reports_best() {
        match estimate_quantile(&set(&[1.0, 2.0, 3.0]), 0.95, 0.99, 0.5) {
            Err(SnowpacError::CoverageUnreachable { attainable, .. }) => {
                let exact = 1.0 - 0.95f64.powi(3) - 0.05f64.powi(3);
                assert!((attainable - exact).abs() < 1e-14);
            }
            other => panic!("expected unreachable coverage, got {other:?}"),
        }
    }

    #[test]
    fn coverage_identities() {
        assert!((binomial_coverage(1, 2, 2, 0.5).unwrap() - 0.5).abs() < 1e-15);
        for &(n, beta) in &[(5usize, 0.3), (40, 0.95), (2000, 0.01)] {
            let full = binomial_coverage(1, n, n, beta).unwrap();
            let exact = 1.0 - f64::powi(beta, n as i32) - f64::powi(1.0 - beta, n as i32);
            assert!((full - exact).abs() < 1e-13, "n={n}: {full} vs {exact}");
        }
        assert!(binomial_coverage(1, 3, 2, 0.5).is_err());
        assert!(binomial_coverage(2, 2, 5, 0.5).is_err());
    }

    #[test]
    fn pmf_sums_to_one() {
        for &(n, p) in &[(1usize, 0.4), (17, 0.5), (333, 0.02), (5000, 0.73)] {
            let total: f64 = (0..=n).map(|x| binomial_pmf(x, n, p)).sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}, p={p}: {total}");
        }
    }

    #[test]
    fn cvar_examples() {
        let e = estimate_cvar(&set(&[-3.0, -1.0, 0.5]), 0.9, 1.0, 2.0).unwrap();
        assert_eq!((e.value, e.err_bound), (1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..2000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let e = estimate_cvar(&set(&v), 0.5, 0.0, 2.0).unwrap();
        assert!((e.value - 0.5).abs() < 0.05, "{}", e.value);
    }

    #[test]
    fn cvar_at_true_quantile_matches_closed_form() {
        // For U[-1,1], CVaR_β = β and the β-quantile is 2β - 1.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let beta = 0.9;
        let v: Vec<f64> = (0..200_000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let e = estimate_cvar(&set(&v), beta, 2.0 * beta - 1.0, 2.0).unwrap();
        assert!((e.value - beta).abs() < 3.0 * e.err_bound.max(1e-3));
    }

    #[test]
    fn variance_estimate_through_dispatch() {
        let e = estimate(&MeasureSpec::variance(), &set(&[1.0, 3.0]), 0.0, 2.0, 0.5).unwrap();
        assert_eq!(e.value, 1.0);
        // Five samples cannot reach 95 % coverage for the median (at most 15/16).
        let q = estimate(&MeasureSpec::quantile(0.5).with_confidence(0.9), &set(&[1.0, 2.0, 3.0, 4.0, 5.0]), 0.0, 2.0, 0.5);
        assert_eq!(q.unwrap().value, 3.0);
    }
}

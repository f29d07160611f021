//! Local surrogate models built from (corrected) noisy evaluations.
//!
//! Models are linear interpolants for `n + 1` nodes, minimum-Frobenius-norm
//! quadratics for fewer than `(n+1)(n+2)/2` nodes and weighted least-squares
//! quadratics beyond that. All systems are assembled in scaled displacements
//! `(x − x_k)/ρ` so their conditioning does not depend on the radius.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{invalid, Result, SnowpacError};
use crate::trs::minimize_quadratic_on_ball;

/// One interpolation node.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub point: DVector<f64>,
    pub value: f64,
    pub error: f64,
}

impl Node {
    pub fn new(point: DVector<f64>, value: f64, error: f64) -> Self {
        Node { point, value, error }
    }
}

/// Nodes inside `B(center, 2ρ)`; the node at the center always comes first.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    center: DVector<f64>,
    radius: f64,
    nodes: Vec<Node>,
}

impl NodeSet {
    pub fn new(center: DVector<f64>, radius: f64, mut nodes: Vec<Node>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("radius must be positive and finite, got {radius}")));
        }
        let n = center.len();
        for node in &nodes {
            if node.point.len() != n {
                return Err(SnowpacError::DimensionMismatch { expected: n, got: node.point.len() });
            }
            if !node.value.is_finite() || !(node.error >= 0.0) {
                return Err(invalid("node values must be finite and errors non-negative"));
            }
            if (&node.point - &center).norm() > 2.0 * radius * (1.0 + 1e-12) {
                return Err(invalid("node lies outside B(center, 2ρ)"));
            }
        }
        let tol = 1e-12 * radius;
        let at = nodes
            .iter()
            .position(|nd| (&nd.point - &center).norm() <= tol)
            .ok_or_else(|| invalid("node set must contain the center"))?;
        let c = nodes.remove(at);
        nodes.insert(0, c);
        Ok(NodeSet { center, radius, nodes })
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same geometry carrying different data (another black box).
    pub fn with_data(&self, values: &[f64], errors: &[f64]) -> Result<Self> {
        if values.len() != self.len() || errors.len() != self.len() {
            return Err(SnowpacError::DimensionMismatch { expected: self.len(), got: values.len() });
        }
        let nodes = self
            .nodes
            .iter()
            .zip(values.iter().zip(errors))
            .map(|(nd, (&v, &e))| Node::new(nd.point.clone(), v, e))
            .collect();
        Ok(NodeSet { center: self.center.clone(), radius: self.radius, nodes })
    }

    fn scaled(&self) -> Vec<DVector<f64>> {
        self.nodes.iter().map(|nd| (&nd.point - &self.center) / self.radius).collect()
    }
}

/// Quadratic model `c + gᵀs + ½ sᵀHs` in the step `s = x − center`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    pub constant: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub center: DVector<f64>,
}

impl LocalModel {
    pub fn linear(center: DVector<f64>, constant: f64, gradient: DVector<f64>) -> Self {
        let n = center.len();
        LocalModel { constant, gradient, hessian: DMatrix::zeros(n, n), center }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn value_at_step(&self, s: &DVector<f64>) -> f64 {
        self.constant + self.gradient.dot(s) + 0.5 * s.dot(&(&self.hessian * s))
    }

    pub fn gradient_at_step(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.gradient + &self.hessian * s
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.value_at_step(&(x - &self.center))
    }

    pub fn is_linear(&self) -> bool {
        self.hessian.iter().all(|&h| h == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fit {
    Linear,
    MinFrobenius,
    Regression,
}

/// Factorized linear map from node values to model coefficients.
struct ModelSystem {
    fit: Fit,
    n: usize,
    points: Vec<DVector<f64>>,
    svd: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    row_scale: Vec<f64>,
}

fn quad_terms(n: usize) -> usize {
    n * (n + 1) / 2
}

fn full_quadratic_size(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// Quadratic monomials `½ s_i², s_i s_j (i<j)` in row-major upper order.
fn quad_row(s: &DVector<f64>) -> Vec<f64> {
    let n = s.len();
    let mut out = Vec::with_capacity(quad_terms(n));
    for i in 0..n {
        for j in i..n {
            out.push(if i == j { 0.5 * s[i] * s[i] } else { s[i] * s[j] });
        }
    }
    out
}

fn affine_rank(points: &[DVector<f64>], n: usize) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let d = DMatrix::from_fn(points.len() - 1, n, |r, c| points[r + 1][c] - points[0][c]);
    let sv = d.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-10 * smax.max(1.0)).count()
}

fn regression_weights(errors: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
    let mut floor = 0.1 * median;
    if floor <= 0.0 {
        let pos: Vec<f64> = sorted.iter().cloned().filter(|&e| e > 0.0).collect();
        if pos.is_empty() {
            return vec![1.0; m];
        }
        floor = 0.1 * pos.iter().sum::<f64>() / pos.len() as f64;
    }
    errors.iter().map(|&e| 1.0 / e.max(floor)).collect()
}

impl ModelSystem {
    fn new(set: &NodeSet) -> Result<Self> {
        let n = set.dim();
        let m = set.len();
        if m < n + 1 {
            return Err(SnowpacError::DegenerateGeometry(format!("{m} nodes cannot determine a model in {n} dimensions")));
        }
        let points = set.scaled();
        if affine_rank(&points, n) < n {
            return Err(SnowpacError::DegenerateGeometry("nodes do not span the space".into()));
        }
        let q = full_quadratic_size(n);
        let (fit, mat, row_scale) = if m == n + 1 {
            let mat = DMatrix::from_fn(m, n + 1, |r, c| if c == 0 { 1.0 } else { points[r][c - 1] });
            (Fit::Linear, mat, vec![1.0; m])
        } else if m < q {
            let size = m + n + 1;
            let mut mat = DMatrix::zeros(size, size);
            for i in 0..m {
                for j in 0..m {
                    mat[(i, j)] = 0.5 * points[i].dot(&points[j]).powi(2);
                }
                mat[(i, m)] = 1.0;
                mat[(m, i)] = 1.0;
                for k in 0..n {
                    mat[(i, m + 1 + k)] = points[i][k];
                    mat[(m + 1 + k, i)] = points[i][k];
                }
            }
            (Fit::MinFrobenius, mat, vec![1.0; m])
        } else {
            // Center is interpolated exactly; the rest is a weighted fit of the
            // remaining coefficients.
            let errors: Vec<f64> = set.nodes().iter().map(|nd| nd.error).collect();
            let w: Vec<f64> = regression_weights(&errors).iter().map(|w| w.sqrt()).collect();
            let cols = n + quad_terms(n);
            let mut mat = DMatrix::zeros(m - 1, cols);
            for r in 1..m {
                let quad = quad_row(&points[r]);
                for c in 0..n {
                    mat[(r - 1, c)] = w[r] * points[r][c];
                }
                for (c, v) in quad.into_iter().enumerate() {
                    mat[(r - 1, n + c)] = w[r] * v;
                }
            }
            (Fit::Regression, mat, w)
        };
        let svd = SVD::new(mat, true, true);
        let sv = &svd.singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smax > 0.0) || smin <= 1e-13 * smax {
            return Err(SnowpacError::DegenerateGeometry("interpolation system is singular".into()));
        }
        Ok(ModelSystem { fit, n, points, svd, row_scale })
    }

    /// Coefficients `(c, g, H)` in scaled coordinates for the given values.
    fn solve(&self, values: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let m = self.points.len();
        let solve = |rhs: DVector<f64>| self.svd.solve(&rhs, 0.0).expect("svd has both factors");
        match self.fit {
            Fit::Linear => {
                let x = solve(DVector::from_column_slice(values));
                (x[0], x.rows(1, n).into_owned(), DMatrix::zeros(n, n))
            }
            Fit::MinFrobenius => {
                let mut rhs = DVector::zeros(m + n + 1);
                rhs.rows_mut(0, m).copy_from_slice(values);
                let x = solve(rhs);
                let mut h = DMatrix::zeros(n, n);
                for i in 0..m {
                    h += &self.points[i] * self.points[i].transpose() * x[i];
                }
                (x[m], x.rows(m + 1, n).into_owned(), h)
            }
            Fit::Regression => {
                let c = values[0];
                let rhs = DVector::from_fn(m - 1, |r, _| self.row_scale[r + 1] * (values[r + 1] - c));
                let x = solve(rhs);
                let g = x.rows(0, n).into_owned();
                let mut h = DMatrix::zeros(n, n);
                let mut k = n;
                for i in 0..n {
                    for j in i..n {
                        h[(i, j)] = x[k];
                        h[(j, i)] = x[k];
                        k += 1;
                    }
                }
                (c, g, h)
            }
        }
    }
}

/// Fit a local model to the node values.
///
/// Errors with [`SnowpacError::DegenerateGeometry`] when the nodes do not
/// determine a model.
pub fn build_model(nodes: &NodeSet) -> Result<LocalModel> {
    let sys = ModelSystem::new(nodes)?;
    let values: Vec<f64> = nodes.nodes().iter().map(|nd| nd.value).collect();
    let (c, g, h) = sys.solve(&values);
    let rho = nodes.radius();
    Ok(LocalModel {
        constant: c,
        gradient: g / rho,
        hessian: h / (rho * rho),
        center: nodes.center().clone(),
    })
}

/// Geometry quality of a node set.
#[derive(Debug, Clone, PartialEq)]
pub struct PoisednessReport {
    /// Largest absolute Lagrange polynomial value on `B(center, ρ)`.
    pub lambda: f64,
    /// Where the worst non-center Lagrange polynomial peaks.
    pub worst_point_suggestion: Option<DVector<f64>>,
    /// Index of the node owning that polynomial.
    pub worst_index: Option<usize>,
    pub meets_threshold: bool,
}

impl PoisednessReport {
    fn degenerate() -> Self {
        PoisednessReport {
            lambda: f64::INFINITY,
            worst_point_suggestion: None,
            worst_index: None,
            meets_threshold: false,
        }
    }
}

/// Poisedness constant `Λ` of the node set on `B(center, ρ)`.
pub fn poisedness(nodes: &NodeSet, lambda_max: f64) -> Result<PoisednessReport> {
    if nodes.len() < 2 {
        return Err(invalid("poisedness needs the center and at least one more node"));
    }
    let sys = match ModelSystem::new(nodes) {
        Ok(s) => s,
        Err(SnowpacError::DegenerateGeometry(_)) => return Ok(PoisednessReport::degenerate()),
        Err(e) => return Err(e),
    };
    let m = nodes.len();
    let mut lambda = 1.0f64;
    let mut worst = (f64::NEG_INFINITY, 0usize, DVector::zeros(nodes.dim()));
    let mut e = vec![0.0; m];
    for i in 0..m {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[i] = 1.0;
        let (c, g, h) = sys.solve(&e);
        let lo = minimize_quadratic_on_ball(&g, &h, 1.0);
        let hi = minimize_quadratic_on_ball(&(-&g), &(-&h), 1.0);
        let (min_val, max_val) = (c + lo.value, c - hi.value);
        let (peak, at) = if max_val.abs() >= min_val.abs() { (max_val.abs(), hi.step) } else { (min_val.abs(), lo.step) };
        if !peak.is_finite() {
            return Ok(PoisednessReport::degenerate());
        }
        lambda = lambda.max(peak);
        if i > 0 && peak > worst.0 {
            worst = (peak, i, at);
        }
    }
    let suggestion = nodes.center() + worst.2 * nodes.radius();
    Ok(PoisednessReport {
        lambda,
        worst_point_suggestion: Some(suggestion),
        worst_index: Some(worst.1),
        meets_threshold: lambda <= lambda_max,
    })
}

/// A proposed new node, optionally replacing an existing one.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySuggestion {
    pub replaces: Option<usize>,
    pub point: DVector<f64>,
}

fn null_direction(points: &[DVector<f64>], n: usize) -> DVector<f64> {
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for p in points.iter().skip(1) {
        let d = p - &points[0];
        gram += &d * d.transpose();
    }
    let eig = SymmetricEigen::new(gram);
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
    eig.eigenvectors.column(k).into_owned()
}

/// Points whose insertion (replacing the named nodes) brings `Λ` below
/// `lambda_max`. Empty when the set is already well poised.
pub fn improve_geometry(nodes: &NodeSet, lambda_max: f64) -> Result<Vec<GeometrySuggestion>> {
    let n = nodes.dim();
    let rho = nodes.radius();
    let center = nodes.center().clone();
    let mut points: Vec<DVector<f64>> = nodes.nodes().iter().map(|nd| nd.point.clone()).collect();
    let mut out = Vec::new();
    let rebuild = |pts: &[DVector<f64>]| {
        NodeSet::new(center.clone(), rho, pts.iter().map(|p| Node::new(p.clone(), 0.0, 0.0)).collect())
    };
    for _ in 0..(2 * points.len() + 2 * n + 2) {
        let scaled: Vec<DVector<f64>> = points.iter().map(|p| (p - &center) / rho).collect();
        let rank = affine_rank(&scaled, n);
        if rank < n {
            let dir = null_direction(&scaled, n);
            let point = &center + dir * rho;
            // Replace a node that does not contribute to the span, else append.
            let redundant = if points.len() > n {
                (1..points.len()).rev().find(|&j| {
                    let mut rest = scaled.clone();
                    rest.remove(j);
                    affine_rank(&rest, n) == rank
                })
            } else {
                None
            };
            match redundant {
                Some(j) => points[j] = point.clone(),
                None => points.push(point.clone()),
            }
            out.push(GeometrySuggestion { replaces: redundant, point });
            continue;
        }
        let report = poisedness(&rebuild(&points)?, lambda_max)?;
        if report.meets_threshold {
            break;
        }
        match (report.worst_index, report.worst_point_suggestion) {
            (Some(j), Some(point)) if report.lambda.is_finite() => {
                points[j] = point.clone();
                out.push(GeometrySuggestion { replaces: Some(j), point });
            }
            _ => {
                // Full rank but singular system: reset the last node along a
                // fresh coordinate direction.
                let j = points.len() - 1;
                let k = out.len() % n;
                let mut dir = DVector::zeros(n);
                dir[k] = if (out.len() / n).is_multiple_of(2) { 1.0 } else { -1.0 };
                let point = &center + dir * rho;
                points[j] = point.clone();
                out.push(GeometrySuggestion { replaces: Some(j), point });
            }
        }
    }
    Ok(out)
}

/// Empirical constants of the fully-linear error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceDiagnostics {
    /// `max value error / ρ²` over the sampled radii.
    pub kappa1_hat: f64,
    /// `max gradient error / ρ` over the sampled radii.
    pub kappa2_hat: f64,
    /// Least-squares slope of `log value error` against `log ρ`.
    pub value_slope: f64,
    /// Least-squares slope of `log gradient error` against `log ρ`.
    pub gradient_slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(f64::MIN_POSITIVE).ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

impl ConvergenceDiagnostics {
    pub fn from_errors(radii: &[f64], value_errors: &[f64], gradient_errors: &[f64]) -> Self {
        let k1 = radii.iter().zip(value_errors).map(|(r, e)| e / (r * r)).fold(0.0, f64::max);
        let k2 = radii.iter().zip(gradient_errors).map(|(r, e)| e / r).fold(0.0, f64::max);
        ConvergenceDiagnostics {
            kappa1_hat: k1,
            kappa2_hat: k2,
            value_slope: log_log_slope(radii, value_errors),
            gradient_slope: log_log_slope(radii, gradient_errors),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn set_from(center: &[f64], rho: f64, pts: &[&[f64]], f: impl Fn(&DVector<f64>) -> f64) -> NodeSet {
        let nodes = pts
            .iter()
            .map(|p| {
                let x = v(p);
                let y = f(&x);
                Node::new(x, y, 0.0)
            })
            .collect();
        NodeSet::new(v(center), rho, nodes).unwrap()
    }

    const SIX: [&[f64]; 6] = [&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0], &[0.7, 0.7]];

    #[test]
    fn node_set_validation() {
        let far = NodeSet::new(v(&[0.0]), 1.0, vec![Node::new(v(&[0.0]), 0.0, 0.0), Node::new(v(&[3.0]), 0.0, 0.0)]);
        assert!(far.is_err());
        let no_center = NodeSet::new(v(&[0.0]), 1.0, vec![Node::new(v(&[1.0]), 0.0, 0.0)]);
        assert!(no_center.is_err());
        let s = NodeSet::new(v(&[0.0]), 1.0, vec![Node::new(v(&[1.0]), 1.0, 0.0), Node::new(v(&[0.0]), 2.0, 0.0)]).unwrap();
        assert_eq!(s.nodes()[0].value, 2.0);
    }

    #[test]
    fn constant_function_reproduced() {
        for count in [3, 5, 6, 8] {
            let pts: Vec<&[f64]> = SIX.iter().cloned().chain([&[-0.6, 0.5][..], &[0.4, -0.8][..]]).take(count).collect();
            let m = build_model(&set_from(&[0.0, 0.0], 1.0, &pts, |_| 3.0)).unwrap();
            assert!((m.constant - 3.0).abs() < 1e-12);
            assert!(m.gradient.norm() < 1e-12);
            assert!(m.hessian.norm() < 1e-12);
        }
    }

    #[test]
    fn linear_function_reproduced() {
        let f = |x: &DVector<f64>| 2.0 * x[0] - 3.0 * x[1] + 0.5;
        let m = build_model(&set_from(&[1.0, 1.0], 0.5, &[&[1.0, 1.0], &[1.5, 1.0], &[1.0, 1.5]], f)).unwrap();
        assert!((m.gradient - v(&[2.0, -3.0])).norm() < 1e-10);
        assert!((m.constant - f(&v(&[1.0, 1.0]))).abs() < 1e-12);
    }

    #[test]
    fn quadratic_reproduced_with_six_points() {
        let m = build_model(&set_from(&[0.0, 0.0], 1.0, &SIX, |x| x.dot(x))).unwrap();
        assert!((m.hessian - DMatrix::identity(2, 2) * 2.0).norm() < 1e-8);
        assert!(m.gradient.norm() < 1e-10);
        let shifted = build_model(&set_from(&[0.0, 0.0], 0.01, &SIX.map(|p| [p[0] * 0.01, p[1] * 0.01]).iter().map(|p| &p[..]).collect::<Vec<_>>(), |x| x.dot(x) + x[0]));
        let shifted = shifted.unwrap();
        assert!((shifted.hessian - DMatrix::identity(2, 2) * 2.0).norm() < 1e-6);
    }

    #[test]
    fn regression_uniform_weights_match_unweighted_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<DVector<f64>> = std::iter::once(v(&[0.0, 0.0]))
            .chain((0..11).map(|_| DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0))))
            .collect();
        let noise: Vec<f64> = (0..12).map(|_| rng.random_range(-0.1..0.1)).collect();
        let make = |err: f64| {
            let nodes = pts
                .iter()
                .zip(&noise)
                .map(|(p, e)| Node::new(p.clone(), p[0].sin() + p[1] * p[1] + e, err))
                .collect();
            build_model(&NodeSet::new(v(&[0.0, 0.0]), 1.0, nodes).unwrap()).unwrap()
        };
        let (a, b) = (make(0.0), make(0.3));
        assert!((a.gradient - b.gradient).norm() < 1e-12);
        assert!((a.hessian - b.hessian).norm() < 1e-12);
    }

    #[test]
    fn regression_keeps_center_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let points: Vec<DVector<f64>> = std::iter::once(v(&[0.0, 0.0]))
            .chain((0..9).map(|_| DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0))))
            .collect();
        let nodes: Vec<Node> = points
            .into_iter()
            .map(|p| {
                let noise: f64 = rng.random_range(-0.2..0.2);
                Node::new(p.clone(), p[0] + noise, rng.random_range(0.05..0.2))
            })
            .collect();
        let c = nodes[0].value;
        let m = build_model(&NodeSet::new(v(&[0.0, 0.0]), 1.0, nodes).unwrap()).unwrap();
        assert!((m.constant - c).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sets_are_reported() {
        let dup = set_from(&[0.0, 0.0], 1.0, &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]], |x| x[0]);
        assert!(matches!(build_model(&dup), Err(SnowpacError::DegenerateGeometry(_))));
        let rep = poisedness(&dup, 100.0).unwrap();
        assert!(rep.lambda.is_infinite() && !rep.meets_threshold);
        let lonely = set_from(&[0.0, 0.0], 1.0, &[&[0.0, 0.0]], |_| 0.0);
        assert!(poisedness(&lonely, 100.0).is_err());
    }

    fn grid_lambda(set: &NodeSet) -> f64 {
        let sys = ModelSystem::new(set).unwrap();
        let mut best: f64 = 0.0;
        for i in 0..set.len() {
            let mut e = vec![0.0; set.len()];
            e[i] = 1.0;
            let (c, g, h) = sys.solve(&e);
            let k = 200;
            for a in 0..=k {
                for b in 0..=k {
                    let s = v(&[-1.0 + 2.0 * a as f64 / k as f64, -1.0 + 2.0 * b as f64 / k as f64]);
                    if s.norm() <= 1.0 {
                        best = best.max((c + g.dot(&s) + 0.5 * s.dot(&(&h * &s))).abs());
                    }
                }
            }
            for a in 0..20_000 {
                let t = a as f64 * std::f64::consts::TAU / 20_000.0;
                let s = v(&[t.cos(), t.sin()]);
                best = best.max((c + g.dot(&s) + 0.5 * s.dot(&(&h * &s))).abs());
            }
        }
        best
    }

    #[test]
    fn coordinate_simplex_is_well_poised() {
        let set = set_from(&[0.0, 0.0], 0.5, &[&[0.0, 0.0], &[0.5, 0.0], &[0.0, 0.5]], |_| 0.0);
        let rep = poisedness(&set, 100.0).unwrap();
        assert!(rep.lambda <= 3.0 && rep.meets_threshold, "{}", rep.lambda);
        assert!((rep.lambda - grid_lambda(&set)).abs() < 1e-3);
    }

    #[test]
    fn poisedness_matches_grid_for_quadratic_sets() {
        let set = set_from(&[0.0, 0.0], 1.0, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[-0.5, -0.5], &[0.3, -0.9]], |_| 0.0);
        let rep = poisedness(&set, 100.0).unwrap();
        let grid = grid_lambda(&set);
        assert!(rep.lambda >= grid - 1e-9 && rep.lambda <= grid * 1.01, "{} vs {}", rep.lambda, grid);
    }

    #[test]
    fn poisedness_rotation_invariant() {
        let pts = [[0.0, 0.0], [0.9, 0.1], [0.2, 0.8], [-0.6, 0.3]];
        let base = set_from(&[0.0, 0.0], 1.0, &pts.iter().map(|p| &p[..]).collect::<Vec<_>>(), |_| 0.0);
        let a = 0.7f64;
        let rot: Vec<[f64; 2]> = pts.iter().map(|p| [a.cos() * p[0] - a.sin() * p[1], a.sin() * p[0] + a.cos() * p[1]]).collect();
        let turned = set_from(&[0.0, 0.0], 1.0, &rot.iter().map(|p| &p[..]).collect::<Vec<_>>(), |_| 0.0);
        let (l1, l2) = (poisedness(&base, 100.0).unwrap().lambda, poisedness(&turned, 100.0).unwrap().lambda);
        assert!((l1 - l2).abs() < 1e-8 * l1);
    }

    #[test]
    fn improve_geometry_cases() {
        let good = set_from(&[0.0, 0.0], 1.0, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]], |_| 0.0);
        assert!(improve_geometry(&good, 100.0).unwrap().is_empty());

        let flat = set_from(&[0.0, 0.0], 1.0, &[&[0.0, 0.0], &[1.0, 0.0], &[-0.9, 0.001]], |_| 0.0);
        assert!(poisedness(&flat, 100.0).unwrap().lambda > 100.0);
        let sugg = improve_geometry(&flat, 100.0).unwrap();
        assert_eq!(sugg.len(), 1);
        let p = &sugg[0].point;
        assert!(p[1].abs() > 0.9, "suggestion {p} should leave the line");
        let mut pts: Vec<DVector<f64>> = flat.nodes().iter().map(|nd| nd.point.clone()).collect();
        pts[sugg[0].replaces.unwrap()] = p.clone();
        let fixed = NodeSet::new(v(&[0.0, 0.0]), 1.0, pts.into_iter().map(|x| Node::new(x, 0.0, 0.0)).collect()).unwrap();
        assert!(poisedness(&fixed, 100.0).unwrap().meets_threshold);

        let dup = set_from(&[0.0, 0.0], 1.0, &[&[0.0, 0.0], &[0.5, 0.0], &[0.5, 0.0]], |_| 0.0);
        let sugg = improve_geometry(&dup, 100.0).unwrap();
        assert!(!sugg.is_empty());
        let mut pts: Vec<DVector<f64>> = dup.nodes().iter().map(|nd| nd.point.clone()).collect();
        for s in &sugg {
            match s.replaces {
                Some(j) => pts[j] = s.point.clone(),
                None => pts.push(s.point.clone()),
            }
        }
        let fixed = NodeSet::new(v(&[0.0, 0.0]), 1.0, pts.into_iter().map(|x| Node::new(x, 0.0, 0.0)).collect()).unwrap();
        assert!(poisedness(&fixed, 100.0).unwrap().lambda.is_finite());
    }

    #[test]
    fn diagnostics_slopes() {
        let r = [0.5, 0.25, 0.125];
        let d = ConvergenceDiagnostics::from_errors(&r, &[0.25, 0.0625, 0.015625], &[0.5, 0.25, 0.125]);
        assert!((d.value_slope - 2.0).abs() < 1e-12);
        assert!((d.gradient_slope - 1.0).abs() < 1e-12);
        assert!((d.kappa1_hat - 1.0).abs() < 1e-12);
    }
}

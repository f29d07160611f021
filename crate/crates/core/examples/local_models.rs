//! Build local surrogate models from node sets, check their poisedness and
//! watch the model error shrink with the radius.

use nalgebra::DVector;
use snowpac::surrogate::{build_model, improve_geometry, poisedness, ConvergenceDiagnostics, Node, NodeSet};

fn f(x: &DVector<f64>) -> f64 {
    x[0].sin() + x[1] * x[1]
}

fn node_set(center: &DVector<f64>, rho: f64, pattern: &[[f64; 2]]) -> snowpac::Result<NodeSet> {
    let nodes = pattern
        .iter()
        .map(|p| {
            let x = center + DVector::from_column_slice(p) * rho;
            let y = f(&x);
            Node::new(x, y, 0.0)
        })
        .collect();
    NodeSet::new(center.clone(), rho, nodes)
}

fn main() -> snowpac::Result<()> {
    let center = DVector::from_vec(vec![0.4, -0.3]);
    let good = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [0.7, 0.7]];
    let bad = [[0.0, 0.0], [0.1, 0.0], [0.2, 0.0], [0.3, 0.0], [0.0, 0.1]];

    let report = poisedness(&node_set(&center, 0.5, &good)?, 100.0)?;
    println!("well spread set: Λ = {:.2}, acceptable {}", report.lambda, report.meets_threshold);
    let clustered = node_set(&center, 0.5, &bad)?;
    let report = poisedness(&clustered, 100.0)?;
    println!("clustered set:   Λ = {:.2}, acceptable {}", report.lambda, report.meets_threshold);
    for s in improve_geometry(&clustered, 100.0)? {
        println!("  suggest {:.3?} replacing node {:?}", s.point.as_slice(), s.replaces);
    }

    let radii: Vec<f64> = (1..=6).map(|k| 0.5f64.powi(k)).collect();
    let (mut ve, mut ge) = (Vec::new(), Vec::new());
    for &rho in &radii {
        let m = build_model(&node_set(&center, rho, &good)?)?;
        let s = DVector::from_vec(vec![0.6 * rho, -0.5 * rho]);
        let x = &center + &s;
        let g = DVector::from_vec(vec![x[0].cos(), 2.0 * x[1]]);
        ve.push((m.value_at_step(&s) - f(&x)).abs());
        ge.push((m.gradient_at_step(&s) - g).norm());
        println!("ρ = {rho:.4}: value error {:.2e}, gradient error {:.2e}", ve.last().unwrap(), ge.last().unwrap());
    }
    let d = ConvergenceDiagnostics::from_errors(&radii, &ve, &ge);
    println!("log-log slopes: value {:.2}, gradient {:.2}", d.value_slope, d.gradient_slope);
    Ok(())
}

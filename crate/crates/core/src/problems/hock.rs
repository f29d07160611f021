//! Eight constrained test problems from the Hock–Schittkowski collection.
//!
//! Constraints are stored in the `c(x) ≤ 0` convention (the collection writes
//! `g(x) ≥ 0`, so `c = −g`). Starting points are the collection's standard
//! ones; optima are the published solutions refined by local search.

/// A deterministic constrained problem `min f(x) s.t. c(x) ≤ 0`.
#[derive(Debug, Clone, Copy)]
pub struct HsDefinition {
    pub name: &'static str,
    pub dim: usize,
    pub num_constraints: usize,
    pub objective: fn(&[f64]) -> f64,
    pub constraints: fn(&[f64], &mut [f64]),
    pub start: &'static [f64],
    pub optimum: &'static [f64],
    pub optimum_value: f64,
    /// Box used for random starts and grids (same bounds in every coordinate).
    pub domain: (f64, f64),
}

fn hs29_f(x: &[f64]) -> f64 {
    -x[0] * x[1] * x[2]
}

fn hs29_c(x: &[f64], c: &mut [f64]) {
    c[0] = x[0] * x[0] + 2.0 * x[1] * x[1] + 4.0 * x[2] * x[2] - 48.0;
}

fn hs43_f(x: &[f64]) -> f64 {
    x[0] * x[0] + x[1] * x[1] + 2.0 * x[2] * x[2] + x[3] * x[3] - 5.0 * x[0] - 5.0 * x[1] - 21.0 * x[2] + 7.0 * x[3]
}

fn hs43_c(x: &[f64], c: &mut [f64]) {
    let sq: f64 = x.iter().map(|v| v * v).sum();
    c[0] = -(8.0 - sq - x[0] + x[1] - x[2] + x[3]);
    c[1] = -(10.0 - x[0] * x[0] - 2.0 * x[1] * x[1] - x[2] * x[2] - 2.0 * x[3] * x[3] + x[0] + x[3]);
    c[2] = -(5.0 - 2.0 * x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - 2.0 * x[0] + x[1] + x[3]);
}

fn hs100_f(x: &[f64]) -> f64 {
    (x[0] - 10.0).powi(2) + 5.0 * (x[1] - 12.0).powi(2) + x[2].powi(4) + 3.0 * (x[3] - 11.0).powi(2)
        + 10.0 * x[4].powi(6)
        + 7.0 * x[5] * x[5]
        + x[6].powi(4)
        - 4.0 * x[5] * x[6]
        - 10.0 * x[5]
        - 8.0 * x[6]
}

fn hs100_c(x: &[f64], c: &mut [f64]) {
    c[0] = -(127.0 - 2.0 * x[0] * x[0] - 3.0 * x[1].powi(4) - x[2] - 4.0 * x[3] * x[3] - 5.0 * x[4]);
    c[1] = -(282.0 - 7.0 * x[0] - 3.0 * x[1] - 10.0 * x[2] * x[2] - x[3] + x[4]);
    c[2] = -(196.0 - 23.0 * x[0] - x[1] * x[1] - 6.0 * x[5] * x[5] + 8.0 * x[6]);
    c[3] = -(-4.0 * x[0] * x[0] - x[1] * x[1] + 3.0 * x[0] * x[1] - 2.0 * x[2] * x[2] - 5.0 * x[5] + 11.0 * x[6]);
}

fn hs113_f(x: &[f64]) -> f64 {
    x[0] * x[0] + x[1] * x[1] + x[0] * x[1] - 14.0 * x[0] - 16.0 * x[1]
        + (x[2] - 10.0).powi(2)
        + 4.0 * (x[3] - 5.0).powi(2)
        + (x[4] - 3.0).powi(2)
        + 2.0 * (x[5] - 1.0).powi(2)
        + 5.0 * x[6] * x[6]
        + 7.0 * (x[7] - 11.0).powi(2)
        + 2.0 * (x[8] - 10.0).powi(2)
        + (x[9] - 7.0).powi(2)
        + 45.0
}

fn hs113_c(x: &[f64], c: &mut [f64]) {
    c[0] = -(105.0 - 4.0 * x[0] - 5.0 * x[1] + 3.0 * x[6] - 9.0 * x[7]);
    c[1] = -(-10.0 * x[0] + 8.0 * x[1] + 17.0 * x[6] - 2.0 * x[7]);
    c[2] = -(8.0 * x[0] - 2.0 * x[1] - 5.0 * x[8] + 2.0 * x[9] + 12.0);
    c[3] = -(-3.0 * (x[0] - 2.0).powi(2) - 4.0 * (x[1] - 3.0).powi(2) - 2.0 * x[2] * x[2] + 7.0 * x[3] + 120.0);
    c[4] = -(-5.0 * x[0] * x[0] - 8.0 * x[1] - (x[2] - 6.0).powi(2) + 2.0 * x[3] + 40.0);
    c[5] = -(-0.5 * (x[0] - 8.0).powi(2) - 2.0 * (x[1] - 4.0).powi(2) - 3.0 * x[4] * x[4] + x[5] + 30.0);
    c[6] = -(-x[0] * x[0] - 2.0 * (x[1] - 2.0).powi(2) + 2.0 * x[0] * x[1] - 14.0 * x[4] + 6.0 * x[5]);
    c[7] = -(3.0 * x[0] - 6.0 * x[1] - 12.0 * (x[8] - 8.0).powi(2) + 7.0 * x[9]);
}

fn hs227_f(x: &[f64]) -> f64 {
    (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2)
}

fn hs227_c(x: &[f64], c: &mut [f64]) {
    c[0] = -(-x[0] * x[0] + x[1]);
    c[1] = -(x[0] - x[1] * x[1]);
}

fn hs228_f(x: &[f64]) -> f64 {
    x[0] * x[0] + x[1]
}

fn hs228_c(x: &[f64], c: &mut [f64]) {
    c[0] = -(-x[0] - x[1] + 1.0);
    c[1] = -(9.0 - x[0] * x[0] - x[1] * x[1]);
}

const HS268_D: [[f64; 5]; 5] = [
    [10197.0, -12454.0, -1013.0, 1948.0, 329.0],
    [-12454.0, 20909.0, -1733.0, -4914.0, -186.0],
    [-1013.0, -1733.0, 1755.0, 1089.0, -174.0],
    [1948.0, -4914.0, 1089.0, 1515.0, -22.0],
    [329.0, -186.0, -174.0, -22.0, 27.0],
];
const HS268_B: [f64; 5] = [-9170.0, 17099.0, -2271.0, -4336.0, -43.0];

fn hs268_f(x: &[f64]) -> f64 {
    let mut quad = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            quad += x[i] * HS268_D[i][j] * x[j];
        }
    }
    let lin: f64 = (0..5).map(|i| HS268_B[i] * x[i]).sum();
    quad - 2.0 * lin + 14463.0
}

fn hs268_c(x: &[f64], c: &mut [f64]) {
    c[0] = -(-x[0] - x[1] - x[2] - x[3] - x[4] + 5.0);
    c[1] = -(10.0 * x[0] + 10.0 * x[1] - 3.0 * x[2] + 5.0 * x[3] + 4.0 * x[4] - 20.0);
    c[2] = -(-8.0 * x[0] + x[1] - 2.0 * x[2] - 5.0 * x[3] + 3.0 * x[4] + 40.0);
    c[3] = -(8.0 * x[0] - x[1] + 2.0 * x[2] + 5.0 * x[3] - 3.0 * x[4] - 11.0);
    c[4] = -(-4.0 * x[0] - 2.0 * x[1] + 3.0 * x[2] - 5.0 * x[3] + x[4] + 30.0);
}

const HS285_C: [f64; 15] = [
    486.0, 640.0, 758.0, 776.0, 477.0, 707.0, 175.0, 619.0, 627.0, 614.0, 475.0, 377.0, 524.0, 468.0, 529.0,
];
const HS285_B: [f64; 10] = [385.0, 470.0, 560.0, 565.0, 645.0, 430.0, 485.0, 455.0, 390.0, 460.0];
const HS285_A: [[f64; 15]; 10] = [
    [100.0, 100.0, 10.0, 5.0, 10.0, 0.0, 0.0, 25.0, 0.0, 10.0, 55.0, 5.0, 45.0, 20.0, 0.0],
    [90.0, 100.0, 10.0, 35.0, 20.0, 5.0, 0.0, 35.0, 55.0, 25.0, 20.0, 0.0, 40.0, 25.0, 10.0],
    [70.0, 50.0, 0.0, 55.0, 25.0, 100.0, 40.0, 50.0, 0.0, 30.0, 60.0, 10.0, 30.0, 0.0, 40.0],
    [50.0, 0.0, 0.0, 65.0, 35.0, 100.0, 35.0, 60.0, 0.0, 15.0, 0.0, 75.0, 35.0, 30.0, 65.0],
    [50.0, 10.0, 70.0, 60.0, 45.0, 45.0, 0.0, 35.0, 65.0, 5.0, 75.0, 100.0, 75.0, 10.0, 0.0],
    [40.0, 0.0, 50.0, 95.0, 50.0, 35.0, 10.0, 60.0, 0.0, 45.0, 15.0, 20.0, 0.0, 5.0, 5.0],
    [30.0, 60.0, 30.0, 90.0, 0.0, 30.0, 5.0, 25.0, 0.0, 70.0, 20.0, 25.0, 70.0, 15.0, 15.0],
    [20.0, 30.0, 40.0, 25.0, 40.0, 25.0, 15.0, 10.0, 80.0, 20.0, 30.0, 30.0, 5.0, 65.0, 20.0],
    [10.0, 70.0, 10.0, 35.0, 25.0, 65.0, 0.0, 30.0, 0.0, 0.0, 25.0, 0.0, 15.0, 50.0, 55.0],
    [5.0, 10.0, 100.0, 5.0, 20.0, 5.0, 10.0, 35.0, 95.0, 70.0, 20.0, 10.0, 35.0, 10.0, 30.0],
];

fn hs285_f(x: &[f64]) -> f64 {
    -HS285_C.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
}

fn hs285_c(x: &[f64], c: &mut [f64]) {
    for (i, row) in HS285_A.iter().enumerate() {
        let s: f64 = row.iter().zip(x).map(|(a, v)| a * v * v).sum();
        c[i] = -(HS285_B[i] - s);
    }
}

/// All eight definitions, in collection order.
pub fn definitions() -> Vec<HsDefinition> {
    vec![
        HsDefinition {
            name: "hs29",
            dim: 3,
            num_constraints: 1,
            objective: hs29_f,
            constraints: hs29_c,
            start: &[1.0, 1.0, 1.0],
            optimum: &[4.0, 2.0 * std::f64::consts::SQRT_2, 2.0],
            optimum_value: -16.0 * std::f64::consts::SQRT_2,
            domain: (-6.0, 6.0),
        },
        HsDefinition {
            name: "hs43",
            dim: 4,
            num_constraints: 3,
            objective: hs43_f,
            constraints: hs43_c,
            start: &[0.0, 0.0, 0.0, 0.0],
            optimum: &[0.0, 1.0, 2.0, -1.0],
            optimum_value: -44.0,
            domain: (-3.0, 3.0),
        },
        HsDefinition {
            name: "hs100",
            dim: 7,
            num_constraints: 4,
            objective: hs100_f,
            constraints: hs100_c,
            start: &[1.0, 2.0, 0.0, 4.0, 0.0, 1.0, 1.0],
            optimum: &[
                2.330499372030458,
                1.9513723663121223,
                -0.477541448786606,
                4.365726251536703,
                -0.6244869659086716,
                1.0381310220785356,
                1.5942267230979181,
            ],
            optimum_value: 680.630057375772,
            domain: (-5.0, 5.0),
        },
        HsDefinition {
            name: "hs113",
            dim: 10,
            num_constraints: 8,
            objective: hs113_f,
            constraints: hs113_c,
            start: &[2.0, 3.0, 5.0, 5.0, 1.0, 2.0, 7.0, 3.0, 6.0, 10.0],
            optimum: &[
                2.1719963678925893,
                2.3636829735223115,
                8.773925711114408,
                5.095984490458061,
                0.9906547712418463,
                1.4305739948335263,
                1.321644206282334,
                9.828725802460342,
                8.280091661699732,
                8.37592665462872,
            ],
            optimum_value: 24.306209261813,
            domain: (-2.0, 12.0),
        },
        HsDefinition {
            name: "hs227",
            dim: 2,
            num_constraints: 2,
            objective: hs227_f,
            constraints: hs227_c,
            start: &[0.5, 0.5],
            optimum: &[1.0, 1.0],
            optimum_value: 1.0,
            domain: (-3.0, 3.0),
        },
        HsDefinition {
            name: "hs228",
            dim: 2,
            num_constraints: 2,
            objective: hs228_f,
            constraints: hs228_c,
            start: &[0.0, 0.0],
            optimum: &[0.0, -3.0],
            optimum_value: -3.0,
            domain: (-4.0, 4.0),
        },
        HsDefinition {
            name: "hs268",
            dim: 5,
            num_constraints: 5,
            objective: hs268_f,
            constraints: hs268_c,
            start: &[1.0, 1.0, 1.0, 1.0, 1.0],
            optimum: &[1.0, 2.0, -1.0, 3.0, -4.0],
            optimum_value: 0.0,
            domain: (-6.0, 6.0),
        },
        HsDefinition {
            name: "hs285",
            dim: 15,
            num_constraints: 10,
            objective: hs285_f,
            constraints: hs285_c,
            start: &[0.0; 15],
            optimum: &[1.0; 15],
            optimum_value: -8252.0,
            domain: (-2.0, 2.0),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(name: &str, x: &[f64]) -> (f64, Vec<f64>) {
        let d = definitions().into_iter().find(|d| d.name == name).unwrap();
        let mut c = vec![0.0; d.num_constraints];
        (d.constraints)(x, &mut c);
        ((d.objective)(x), c)
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
    }

    // Hand-evaluated values at three points per problem.
    #[test]
    fn hs29_values() {
        let (f, c) = eval("hs29", &[1.0, 1.0, 1.0]);
        close(f, -1.0);
        close(c[0], -41.0);
        let (f, c) = eval("hs29", &[2.0, -1.0, 0.5]);
        close(f, 1.0);
        close(c[0], 4.0 + 2.0 + 1.0 - 48.0);
        let (f, c) = eval("hs29", &[0.0, 3.0, -2.0]);
        close(f, 0.0);
        close(c[0], 18.0 + 16.0 - 48.0);
    }

    #[test]
    fn hs43_values() {
        let (f, c) = eval("hs43", &[0.0; 4]);
        close(f, 0.0);
        assert_eq!(c, vec![-8.0, -10.0, -5.0]);
        let (f, c) = eval("hs43", &[1.0, 1.0, 1.0, 1.0]);
        close(f, 1.0 + 1.0 + 2.0 + 1.0 - 5.0 - 5.0 - 21.0 + 7.0);
        close(c[0], -(8.0 - 4.0 - 1.0 + 1.0 - 1.0 + 1.0));
        close(c[1], -(10.0 - 1.0 - 2.0 - 1.0 - 2.0 + 1.0 + 1.0));
        close(c[2], -(5.0 - 2.0 - 1.0 - 1.0 - 2.0 + 1.0 + 1.0));
        let (f, c) = eval("hs43", &[0.0, 1.0, 2.0, -1.0]);
        close(f, -44.0);
        close(c[0], 0.0);
        close(c[2], 0.0);
        close(c[1], -1.0);
    }

    #[test]
    fn hs100_values() {
        let (f, c) = eval("hs100", &[1.0, 2.0, 0.0, 4.0, 0.0, 1.0, 1.0]);
        close(f, 81.0 + 500.0 + 0.0 + 147.0 + 0.0 + 7.0 + 1.0 - 4.0 - 10.0 - 8.0);
        close(c[0], -(127.0 - 2.0 - 48.0 - 0.0 - 64.0 - 0.0));
        close(c[1], -(282.0 - 7.0 - 6.0 - 0.0 - 4.0 + 0.0));
        close(c[2], -(196.0 - 23.0 - 4.0 - 6.0 + 8.0));
        close(c[3], -(-4.0 - 4.0 + 6.0 - 0.0 - 5.0 + 11.0));
        let (f, _) = eval("hs100", &[0.0; 7]);
        close(f, 100.0 + 720.0 + 363.0);
        let (_, c) = eval("hs100", &[1.0; 7]);
        close(c[0], -(127.0 - 2.0 - 3.0 - 1.0 - 4.0 - 5.0));
        close(c[3], -(-4.0 - 1.0 + 3.0 - 2.0 - 5.0 + 11.0));
    }

    #[test]
    fn hs113_values() {
        let x = [2.0, 3.0, 5.0, 5.0, 1.0, 2.0, 7.0, 3.0, 6.0, 10.0];
        let (f, c) = eval("hs113", &x);
        close(f, 4.0 + 9.0 + 6.0 - 28.0 - 48.0 + 25.0 + 0.0 + 4.0 + 2.0 + 245.0 + 448.0 + 32.0 + 9.0 + 45.0);
        close(c[0], -(105.0 - 8.0 - 15.0 + 21.0 - 27.0));
        close(c[1], -(-20.0 + 24.0 + 119.0 - 6.0));
        close(c[2], -(16.0 - 6.0 - 30.0 + 20.0 + 12.0));
        close(c[3], -(0.0 - 0.0 - 50.0 + 35.0 + 120.0));
        close(c[4], -(-20.0 - 24.0 - 1.0 + 10.0 + 40.0));
        close(c[5], -(-18.0 - 2.0 - 3.0 + 2.0 + 30.0));
        close(c[6], -(-4.0 - 2.0 + 12.0 - 14.0 + 12.0));
        close(c[7], -(6.0 - 18.0 - 48.0 + 70.0));
        let (f, _) = eval("hs113", &[0.0; 10]);
        close(f, 100.0 + 100.0 + 9.0 + 2.0 + 847.0 + 200.0 + 49.0 + 45.0);
        let (_, c) = eval("hs113", &[1.0; 10]);
        close(c[7], -(3.0 - 6.0 - 588.0 + 7.0));
    }

    #[test]
    fn hs227_228_values() {
        let (f, c) = eval("hs227", &[0.5, 0.5]);
        close(f, 2.25 + 0.25);
        close(c[0], -0.25);
        close(c[1], -0.25);
        let (f, c) = eval("hs227", &[1.0, 1.0]);
        close(f, 1.0);
        assert_eq!(c, vec![0.0, 0.0]);
        let (_, c) = eval("hs227", &[2.0, 0.0]);
        assert_eq!(c, vec![4.0, -2.0]);
        let (f, c) = eval("hs228", &[0.0, 0.0]);
        close(f, 0.0);
        assert_eq!(c, vec![-1.0, -9.0]);
        let (f, c) = eval("hs228", &[0.0, -3.0]);
        close(f, -3.0);
        close(c[1], 0.0);
        assert!(c[0] < 0.0);
        let (f, c) = eval("hs228", &[1.0, 2.0]);
        close(f, 3.0);
        assert_eq!(c, vec![2.0, -4.0]);
    }

    #[test]
    fn hs268_values() {
        let (f, c) = eval("hs268", &[1.0, 2.0, -1.0, 3.0, -4.0]);
        close(f, 0.0);
        assert!(c.iter().all(|&v| v <= 1e-12));
        let (f, _) = eval("hs268", &[0.0; 5]);
        close(f, 14463.0);
        let (f, c) = eval("hs268", &[1.0; 5]);
        let dsum: f64 = HS268_D.iter().flatten().sum();
        close(f, dsum - 2.0 * HS268_B.iter().sum::<f64>() + 14463.0);
        close(c[0], 0.0);
        close(c[3], 0.0);
    }

    #[test]
    fn hs285_values() {
        let (f, c) = eval("hs285", &[1.0; 15]);
        close(f, -8252.0);
        for (i, row) in HS285_A.iter().enumerate() {
            close(c[i], row.iter().sum::<f64>() - HS285_B[i]);
        }
        assert!(c.iter().all(|&v| v <= 0.0));
        let (f, c) = eval("hs285", &[0.0; 15]);
        close(f, 0.0);
        close(c[9], -460.0);
    }

    #[test]
    fn dimensions_in_published_range() {
        for d in definitions() {
            assert!((2..=16).contains(&d.dim) && (1..=10).contains(&d.num_constraints), "{}", d.name);
            assert_eq!(d.start.len(), d.dim);
            assert_eq!(d.optimum.len(), d.dim);
        }
    }
}

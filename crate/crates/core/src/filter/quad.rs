//! Gauss-Legendre quadrature.

/// Nodes (ascending) and weights of the `n`-point Gauss-Legendre rule on
/// `[-1, 1]`, by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`, appended to `nodes`/`weights`.
pub(crate) fn push_panel(a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>), nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let (h, m) = ((b - a) / 2.0, (b + a) / 2.0);
    for (x, w) in rule.0.iter().zip(&rule.1) {
        nodes.push(m + h * x);
        weights.push(h * w);
    }
}

//! Gauss-Legendre quadrature, used for the inverse Fourier integrals of the
//! wavelet spectral density.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[a, b]`,
/// nodes ascending. Nodes are found by Newton iteration on the Legendre
/// recurrence; converges to machine precision in a handful of steps.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && b > a);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let m = n.div_ceil(2);
    // Legendre value and derivative at z, via the three-term recurrence.
    let eval = |z: f64| {
        let mut p1 = 1.0;
        let mut p2 = 0.0;
        for k in 0..n {
            let p3 = p2;
            p2 = p1;
            p1 = ((2.0 * k as f64 + 1.0) * z * p2 - k as f64 * p3) / (k as f64 + 1.0);
        }
        (p1, n as f64 * (z * p1 - p2) / (z * z - 1.0))
    };
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th root from the top.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p1, pp) = eval(z);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        // derivative refreshed at the settled node, the weight needs it there
        let (_, pp) = eval(z);
        nodes[i] = mid - half * z;
        nodes[n - 1 - i] = mid + half * z;
        let w = 2.0 * half / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_is_plus_minus_inv_sqrt3() {
        let (x, w) = gauss_legendre(2, -1.0, 1.0);
        let r = 1.0 / 3.0_f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_point_rule_matches_closed_form() {
        let (x, w) = gauss_legendre(3, -1.0, 1.0);
        let r = (3.0_f64 / 5.0).sqrt();
        assert!((x[0] + r).abs() < 1e-15 && x[1].abs() < 1e-15 && (x[2] - r).abs() < 1e-15);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn degree_2n_minus_1_polynomials_are_exact() {
        // 4-point rule integrates x^6 on [-1,1] exactly: 2/7.
        let (x, w) = gauss_legendre(4, -1.0, 1.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integral_on_shifted_interval() {
        // int_0^pi cos(5x) dx = 0; int_0^pi sin(x) dx = 2.
        let (x, w) = gauss_legendre(64, 0.0, std::f64::consts::PI);
        let c5: f64 = x.iter().zip(&w).map(|(x, w)| w * (5.0 * x).cos()).sum();
        let s1: f64 = x.iter().zip(&w).map(|(x, w)| w * x.sin()).sum();
        assert!(c5.abs() < 1e-13, "{c5}");
        assert!((s1 - 2.0).abs() < 1e-13);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let (_, w) = gauss_legendre(2048, -std::f64::consts::PI, std::f64::consts::PI);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0 * std::f64::consts::PI).abs() < 1e-11);
    }
}

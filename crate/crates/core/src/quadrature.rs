//! Gauss rules on `[-1, 1]` and square-root branch continuation.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Nodes (ascending) and weights of a Gauss rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Chebyshev rule of the second kind: weight `sqrt(1 - t^2)`.
pub fn chebyshev_second(n: usize) -> Rule {
    let h = PI / (n + 1) as f64;
    let (nodes, weights) = (1..=n)
        .rev()
        .map(|i| {
            let theta = i as f64 * h;
            (theta.cos(), h * theta.sin().powi(2))
        })
        .unzip();
    Rule { nodes, weights }
}

/// Gauss–Chebyshev rule of the first kind: weight `1 / sqrt(1 - t^2)`.
pub fn chebyshev_first(n: usize) -> Rule {
    let w = PI / n as f64;
    let nodes = (1..=n)
        .rev()
        .map(|i| ((2 * i - 1) as f64 * PI / (2 * n) as f64).cos())
        .collect();
    Rule { nodes, weights: vec![w; n] }
}

/// Gauss–Legendre rule by Newton iteration on `P_n`.
pub fn legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n <= 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Picks the square root of `w` closest to `prev`.
///
/// Returns `None` when both roots are equidistant to within `1e-3`
/// relative, i.e. the continuation cannot tell the branches apart.
pub fn continue_sqrt(prev: Complex64, w: Complex64) -> Option<Complex64> {
    let s = w.sqrt();
    let d_plus = (s - prev).norm();
    let d_minus = (s + prev).norm();
    if (d_plus - d_minus).abs() <= 1e-3 * (s.norm() + prev.norm()) {
        return None;
    }
    Some(if d_plus <= d_minus { s } else { -s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_second_integrates_semicircle_moments() {
        // int sqrt(1-t^2) t^2 dt = pi/8
        let r = chebyshev_second(8);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t * t).sum();
        assert!((s - PI / 8.0).abs() < 1e-14);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn chebyshev_first_integrates_even_moments() {
        // int t^4 / sqrt(1-t^2) dt = 3 pi / 8
        let r = chebyshev_first(5);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t.powi(4)).sum();
        assert!((s - 3.0 * PI / 8.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_exact_for_degree_2n_minus_1() {
        let r = legendre(6);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_continuation() {
        let prev = Complex64::new(-1.0, 0.0);
        let next = continue_sqrt(prev, Complex64::new(1.1, 0.0)).unwrap();
        assert!(next.re < 0.0);
        assert!(continue_sqrt(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)).is_none());
    }
}

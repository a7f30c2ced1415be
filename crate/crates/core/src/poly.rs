//! Dense complex polynomials in ascending coefficient order.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    /// Builds a polynomial from ascending coefficients, trimming zero
    /// leading terms.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Value together with first and second derivatives.
    pub fn eval_with_derivs(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut d1, mut d2) = (zero, zero, zero);
        for c in self.coeffs.iter().rev() {
            d2 = d2 * z + d1;
            d1 = d1 * z + p;
            p = p * z + c;
        }
        (p, d1, 2.0 * d2)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::new(vec![Complex64::new(0.0, 0.0)]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * j as f64)
                .collect(),
        )
    }

    /// Synthetic division by `(z - root)`; the remainder is dropped.
    pub fn deflate(&self, root: Complex64) -> Poly {
        let n = self.degree();
        if n == 0 {
            return Poly::new(vec![Complex64::new(0.0, 0.0)]);
        }
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        let mut carry = self.coeffs[n];
        for j in (0..n).rev() {
            q[j] = carry;
            carry = self.coeffs[j] + carry * root;
        }
        Poly::new(q)
    }

    /// All complex roots by simultaneous Aberth–Ehrlich iteration, polished
    /// with Newton steps on the undeflated polynomial.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[n];
        let monic: Vec<Complex64> = self.coeffs.iter().map(|c| c / lead).collect();
        let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
                Complex64::from_polar(0.5 * radius, theta)
            })
            .collect();
        let d = self.derivative();
        for _ in 0..500 {
            let mut max_step: f64 = 0.0;
            for i in 0..n {
                let p = self.eval(z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / d.eval(z[i]);
                let repulsion: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                    .sum();
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if step.is_finite() {
                    z[i] -= step;
                    max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }
        for root in z.iter_mut() {
            for _ in 0..3 {
                let (p, dp, _) = self.eval_with_derivs(*root);
                if dp.norm() > 0.0 {
                    let step = p / dp;
                    if step.is_finite() {
                        *root -= step;
                    }
                }
            }
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn horner_and_derivatives() {
        // 1 + 2z + 3z^2
        let p = Poly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let (v, d1, d2) = p.eval_with_derivs(c(2.0, 0.0));
        assert_eq!(v, c(17.0, 0.0));
        assert_eq!(d1, c(14.0, 0.0));
        assert_eq!(d2, c(6.0, 0.0));
    }

    #[test]
    fn deflation_is_exact_on_roots() {
        // (z - 1)(z + 2i) = z^2 + (2i - 1) z - 2i
        let p = Poly::new(vec![c(0.0, -2.0), c(-1.0, 2.0), c(1.0, 0.0)]);
        let q = p.deflate(c(1.0, 0.0));
        assert_eq!(q.degree(), 1);
        assert!((q.eval(c(0.0, -2.0))).norm() < 1e-15);
    }

    #[test]
    fn quartic_roots() {
        // z^4 - 1
        let p = Poly::new(vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let roots = p.roots();
        for e in [c(0.0, -1.0), c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)] {
            let nearest = roots.iter().map(|r| (r - e).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-12, "{e} missing from {roots:?}");
        }
    }

    #[test]
    fn trims_leading_zeros() {
        let p = Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.degree(), 0);
    }
}

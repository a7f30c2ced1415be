//! Polynomial PT-symmetric potentials `V_eps(x) = V0(x) + i eps W(x)`.
//!
//! `V0` is real and even, `W` is real and odd. Parity is enforced by
//! construction: a term with the wrong power parity is rejected instead of
//! being silently dropped.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// One monomial `coefficient * x^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub power: u32,
}

impl Term {
    pub fn new(coefficient: f64, power: u32) -> Self {
        Term { coefficient, power }
    }
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Window {
    pub fn new(re: [f64; 2], im: [f64; 2]) -> Self {
        Window { re, im }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re[0] && z.re <= self.re[1] && z.im >= self.im[0] && z.im <= self.im[1]
    }

    pub fn is_empty(&self) -> bool {
        !(self.re[0] < self.re[1] && self.im[0] <= self.im[1])
    }
}

/// Validated potential. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    v0_terms: Vec<Term>,
    w_terms: Vec<Term>,
    e0: f64,
    m0: u32,
    window: Window,
    v0: Vec<f64>,
    w: Vec<f64>,
}

/// On-disk JSON layout:
/// `{"v0":[[c,p],...], "w":[[c,p],...], "e0":num, "window":{"re":[a,b],"im":[c,d]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialFile {
    pub v0: Vec<(f64, u32)>,
    pub w: Vec<(f64, u32)>,
    pub e0: f64,
    pub window: Window,
}

impl PotentialFile {
    pub fn into_spec(self) -> Result<PotentialSpec> {
        let v0 = self.v0.into_iter().map(|(c, p)| Term::new(c, p)).collect();
        let w = self.w.into_iter().map(|(c, p)| Term::new(c, p)).collect();
        make_potential(v0, w, self.e0, self.window)
    }
}

/// Parses and validates a potential from its JSON text.
pub fn parse_spec(text: &str) -> Result<PotentialSpec> {
    let file: PotentialFile = serde_json::from_str(text).map_err(|e| Error::SpecFormat(e.to_string()))?;
    file.into_spec()
}

fn dense(terms: &[Term]) -> Vec<f64> {
    let len = terms.iter().map(|t| t.power as usize + 1).max().unwrap_or(1);
    let mut out = vec![0.0; len];
    for t in terms {
        out[t.power as usize] += t.coefficient;
    }
    while out.len() > 1 && out.last() == Some(&0.0) {
        out.pop();
    }
    out
}

fn degree(coeffs: &[f64]) -> u32 {
    coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0) as u32
}

/// Validates term lists and builds a [`PotentialSpec`].
pub fn make_potential(
    v0_terms: Vec<Term>,
    w_terms: Vec<Term>,
    e0: f64,
    window: Window,
) -> Result<PotentialSpec> {
    if v0_terms.is_empty() {
        return Err(Error::EmptySpec("v0"));
    }
    if w_terms.is_empty() {
        return Err(Error::EmptySpec("w"));
    }
    if let Some(t) = v0_terms.iter().find(|t| t.power % 2 != 0) {
        return Err(Error::ParityViolation { list: "v0", power: t.power });
    }
    if let Some(t) = w_terms.iter().find(|t| t.power % 2 != 1) {
        return Err(Error::ParityViolation { list: "w", power: t.power });
    }
    let all_finite = v0_terms.iter().chain(&w_terms).all(|t| t.coefficient.is_finite());
    if !all_finite || !e0.is_finite() {
        return Err(Error::InvalidArgument("non-finite coefficient or energy".into()));
    }
    if window.is_empty() {
        return Err(Error::InvalidArgument(format!("empty analytic window {window:?}")));
    }
    let v0 = dense(&v0_terms);
    let w = dense(&w_terms);
    let deg_v0 = degree(&v0);
    if deg_v0 == 0 || v0[deg_v0 as usize] <= 0.0 {
        return Err(Error::NonConfining(v0[deg_v0 as usize]));
    }
    let m0 = deg_v0.max(degree(&w));
    Ok(PotentialSpec { v0_terms, w_terms, e0, m0, window, v0, w })
}

impl PotentialSpec {
    pub fn v0_terms(&self) -> &[Term] {
        &self.v0_terms
    }

    pub fn w_terms(&self) -> &[Term] {
        &self.w_terms
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn v0_degree(&self) -> u32 {
        degree(&self.v0)
    }

    pub fn w_degree(&self) -> u32 {
        degree(&self.w)
    }

    /// Same potential with another reference energy.
    pub fn with_e0(&self, e0: f64) -> PotentialSpec {
        PotentialSpec { e0, ..self.clone() }
    }

    /// Same potential with another analytic window.
    pub fn with_window(&self, window: Window) -> PotentialSpec {
        PotentialSpec { window, ..self.clone() }
    }

    pub fn to_file(&self) -> PotentialFile {
        PotentialFile {
            v0: self.v0_terms.iter().map(|t| (t.coefficient, t.power)).collect(),
            w: self.w_terms.iter().map(|t| (t.coefficient, t.power)).collect(),
            e0: self.e0,
            window: self.window,
        }
    }

    /// `V_eps(z) = V0(z) + i eps W(z)`.
    pub fn eval(&self, z: Complex64, eps: impl Into<Complex64>) -> Complex64 {
        self.eval_with_derivs(z, eps).0
    }

    /// `V_eps'(z)`.
    pub fn eval_d1(&self, z: Complex64, eps: impl Into<Complex64>) -> Complex64 {
        self.eval_with_derivs(z, eps).1
    }

    /// `V_eps''(z)`.
    pub fn eval_d2(&self, z: Complex64, eps: impl Into<Complex64>) -> Complex64 {
        self.eval_with_derivs(z, eps).2
    }

    /// Value and first two derivatives in one Horner pass.
    pub fn eval_with_derivs(
        &self,
        z: Complex64,
        eps: impl Into<Complex64>,
    ) -> (Complex64, Complex64, Complex64) {
        let ieps = Complex64::i() * eps.into();
        let n = self.v0.len().max(self.w.len());
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut d1, mut d2) = (zero, zero, zero);
        for j in (0..n).rev() {
            let c = Complex64::new(self.v0.get(j).copied().unwrap_or(0.0), 0.0)
                + ieps * self.w.get(j).copied().unwrap_or(0.0);
            d2 = d2 * z + d1;
            d1 = d1 * z + p;
            p = p * z + c;
        }
        (p, d1, 2.0 * d2)
    }

    /// `V0(x)` on the real axis.
    pub fn v0_real(&self, x: f64) -> f64 {
        self.v0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `V0'(x)` on the real axis.
    pub fn v0_real_d1(&self, x: f64) -> f64 {
        self.v0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * x + c * j as f64)
    }

    /// `W(x)` on the real axis.
    pub fn w_real(&self, x: f64) -> f64 {
        self.w.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `V_eps(z) - E` as a dense polynomial in `z`.
    pub fn shifted_poly(&self, energy: Complex64, eps: impl Into<Complex64>) -> Poly {
        let ieps = Complex64::i() * eps.into();
        let n = self.v0.len().max(self.w.len());
        let mut coeffs: Vec<Complex64> = (0..n)
            .map(|j| {
                Complex64::new(self.v0.get(j).copied().unwrap_or(0.0), 0.0)
                    + ieps * self.w.get(j).copied().unwrap_or(0.0)
            })
            .collect();
        coeffs[0] -= energy;
        Poly::new(coeffs)
    }

    /// The two real crossings `alpha00 < beta00` of `V0(x) = E0` bounding
    /// the well, located by bracketing on the window's real range followed
    /// by bisection.
    pub fn well_interval(&self) -> Result<(f64, f64)> {
        well_interval_at(self, self.e0)
    }
}

pub(crate) fn well_interval_at(spec: &PotentialSpec, e0: f64) -> Result<(f64, f64)> {
    const SCAN: usize = 8192;
    let [a, b] = spec.window.re;
    let f = |x: f64| spec.v0_real(x) - e0;
    let dx = (b - a) / SCAN as f64;
    let mut crossings = Vec::new();
    let mut x_prev = a;
    let mut f_prev = f(a);
    for i in 1..=SCAN {
        let x = a + dx * i as f64;
        let fx = f(x);
        if (f_prev > 0.0) != (fx > 0.0) {
            crossings.push(bisect(&f, x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    if crossings.len() != 2 || f(a) <= 0.0 || f(b) <= 0.0 {
        return Err(Error::SingleWellViolation { crossings: crossings.len() });
    }
    let (alpha, beta) = (crossings[0], crossings[1]);
    for x in [alpha, beta] {
        let slope = spec.v0_real_d1(x);
        if slope.abs() < 1e-8 {
            return Err(Error::DegenerateTurningPoint { x, slope });
        }
    }
    if spec.v0_real_d1(alpha) >= 0.0 || spec.v0_real_d1(beta) <= 0.0 {
        return Err(Error::SingleWellViolation { crossings: 2 });
    }
    Ok((alpha, beta))
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo_pos = f(lo) > 0.0;
    while hi - lo > 1e-12 * (1.0 + lo.abs().max(hi.abs())) * 0.5 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == f_lo_pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Outcome of one sampled hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Advisory checks never make the report fail.
    pub advisory: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.advisory)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Sample-resolution certificates for the single-well hypotheses.
///
/// These can only falsify: a passing report means no violation was seen at
/// `sample_count` points.
pub fn verify_hypotheses(spec: &PotentialSpec, sample_count: usize) -> HypothesisReport {
    let n = sample_count.max(8);
    let mut checks = Vec::new();
    let [a, b] = spec.window.re;
    let [c, d] = spec.window.im;

    let structural = spec.v0_terms.iter().all(|t| t.power % 2 == 0)
        && spec.w_terms.iter().all(|t| t.power % 2 == 1);
    let mut parity_defect: f64 = 0.0;
    for i in 0..n {
        let x = a + (b - a) * (i as f64 + 0.5) / n as f64;
        let v = spec.v0_real(x);
        let w = spec.w_real(x);
        parity_defect = parity_defect
            .max((spec.v0_real(-x) - v).abs() / (1.0 + v.abs()))
            .max((spec.w_real(-x) + w).abs() / (1.0 + w.abs()));
    }
    checks.push(HypothesisCheck {
        name: "parity",
        passed: structural && parity_defect < 1e-14,
        advisory: false,
        detail: format!("max relative parity defect {parity_defect:.3e}"),
    });

    let mut pt_defect: f64 = 0.0;
    for i in 0..n {
        let t = (i as f64 + 0.5) / n as f64;
        // low-discrepancy sweep of the window
        let s = (t * 0.618_033_988_749_895 * n as f64).fract();
        let z = Complex64::new(a + (b - a) * t, c + (d - c) * s);
        for eps in [0.0, 0.1, 0.5] {
            let v = spec.eval(z, eps);
            let mirrored = spec.eval(-z.conj(), eps).conj();
            pt_defect = pt_defect.max((mirrored - v).norm() / (1.0 + v.norm()));
        }
    }
    checks.push(HypothesisCheck {
        name: "pt_symmetry",
        passed: pt_defect < 1e-13,
        advisory: false,
        detail: format!("max relative PT defect {pt_defect:.3e}"),
    });

    match spec.well_interval() {
        Ok((alpha, beta)) => {
            checks.push(HypothesisCheck {
                name: "single_well",
                passed: true,
                advisory: false,
                detail: format!("sublevel interval [{alpha:.12}, {beta:.12}]"),
            });
            let (sa, sb) = (spec.v0_real_d1(alpha), spec.v0_real_d1(beta));
            checks.push(HypothesisCheck {
                name: "slope_signs",
                passed: sa < 0.0 && sb > 0.0,
                advisory: false,
                detail: format!("V0'(alpha) = {sa:.6e}, V0'(beta) = {sb:.6e}"),
            });
        }
        Err(e) => {
            checks.push(HypothesisCheck {
                name: "single_well",
                passed: false,
                advisory: false,
                detail: e.to_string(),
            });
            checks.push(HypothesisCheck {
                name: "slope_signs",
                passed: false,
                advisory: false,
                detail: "no well interval".into(),
            });
        }
    }

    // |d^k V0(x)| <= C (1 + |x|)^(m0 - k): the ratio must stay bounded as
    // |x| grows along a geometric sweep.
    let m0 = spec.m0 as i32;
    let d1 = Poly::new(spec.v0.iter().map(|c| Complex64::new(*c, 0.0)).collect()).derivative();
    let d2 = d1.derivative();
    let mut growth_ok = true;
    let mut worst = 0.0_f64;
    for (order, poly) in [
        (0, Poly::new(spec.v0.iter().map(|c| Complex64::new(*c, 0.0)).collect())),
        (1, d1),
        (2, d2),
    ] {
        let ratios: Vec<f64> = (0..n)
            .map(|i| {
                let x = 10f64.powf(6.0 * i as f64 / (n - 1) as f64);
                poly.eval(Complex64::new(x, 0.0)).norm() / (1.0 + x).powi(m0 - order)
            })
            .collect();
        let grows = ratios[n - 1] > 1.5 * ratios[n / 2] + 1e-300;
        worst = worst.max(ratios.iter().cloned().fold(0.0, f64::max));
        growth_ok &= !grows;
    }
    checks.push(HypothesisCheck {
        name: "growth_bound",
        passed: growth_ok,
        advisory: false,
        detail: format!("m0 = {}, max sampled ratio {worst:.3e}", spec.m0),
    });

    let (dv, dw) = (spec.v0_degree(), spec.w_degree());
    checks.push(HypothesisCheck {
        name: "perturbation_degree",
        passed: dw <= dv,
        advisory: true,
        detail: format!("deg W = {dw}, deg V0 = {dv}"),
    });

    HypothesisReport { checks }
}

//! WKB phase and transport coefficients outside the well.
//!
//! On the right of the well the eiconal equation `(phi')^2 + V_eps - E = 0`
//! is solved by `phi(x) = i ∫_beta^x (V_eps - E)^{1/2}`, with the root that
//! is positive far out on the real axis. The amplitude is
//! `a = sum_k a_k h^k`, `a_0 = (phi')^{-1/2}`, `a_k = f_k a_0`, where
//!
//! ```text
//! f_k' = i / (2 phi') (f_{k-1}'' + 2 (a_0'/a_0) f_{k-1}' + (a_0''/a_0) f_{k-1})
//! ```
//!
//! is integrated inward from `f_k(x_max) = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::potential::PotentialSpec;
use crate::quadrature::{continue_sqrt, legendre, Rule};
use crate::turning::TurningPair;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const PANEL_NODES: usize = 16;
const MAX_PANELS: usize = 1 << 10;
const PHASE_TOL: f64 = 1e-13;
const NEAR_OTHER: f64 = 1e-4;
const GRID_TOL: f64 = 1e-6;
const TAIL_TARGET: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// `phi(z) = i * branch_sign * ∫_base^z (V_eps - E)^{1/2} dw`, where the root
/// is the one that is positive on the far real axis of `side`.
#[derive(Debug, Clone)]
pub struct PhaseFunction<'a> {
    spec: &'a PotentialSpec,
    pub base_point: Complex64,
    pub other_point: Complex64,
    pub branch_sign: f64,
    pub side: Side,
    pub energy: Complex64,
    pub eps: Complex64,
    deflated: Poly,
}

impl<'a> PhaseFunction<'a> {
    pub fn new(spec: &'a PotentialSpec, tp: &TurningPair, side: Side) -> Self {
        let (base_point, other_point) = match side {
            Side::Right => (tp.beta, tp.alpha),
            Side::Left => (tp.alpha, tp.beta),
        };
        let deflated = spec.shifted_poly(tp.energy, tp.eps).deflate(base_point);
        PhaseFunction {
            spec,
            base_point,
            other_point,
            branch_sign: side.sign(),
            side,
            energy: tp.energy,
            eps: tp.eps,
            deflated,
        }
    }

    fn shifted(&self, z: Complex64) -> Complex64 {
        self.spec.eval(z, self.eps) - self.energy
    }

    /// `(V_eps - E)^{1/2}` at `z`, continued along a straight path from a
    /// far point on the real axis where it is positive.
    pub fn root_at(&self, z: Complex64) -> Result<Complex64> {
        let w = self.spec.window();
        let reach = w.re[0].abs().max(w.re[1].abs()).max(z.re.abs()).max(self.base_point.norm());
        let far = Complex64::new(self.side.sign() * (reach + 1.0), 0.0);
        let mut root = self.shifted(far).sqrt();
        let length = (z - far).norm();
        let steps = ((64.0 * (1.0 + length)).ceil() as usize).max(16);
        for j in 1..=steps {
            let p = far + (z - far) * (j as f64 / steps as f64);
            root = continue_sqrt(root, self.shifted(p)).ok_or(Error::BranchJump { at: p })?;
        }
        Ok(root)
    }

    /// `phi'(z) = i * branch_sign * (V_eps - E)^{1/2}`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(I * self.branch_sign * self.root_at(z)?)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let b = self.base_point;
        let d = z - b;
        if d.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let distance = segment_distance(self.other_point, b, z);
        if distance < NEAR_OTHER {
            return Err(Error::PathThroughTurningPoint { at: self.other_point, distance });
        }
        // w = b + d s^2 removes the square-root zero at the base point:
        // (V - E)^{1/2}(w) = d^{1/2} s G(w)^{1/2} with G = (V - E) / (w - b).
        let sqrt_d = d.sqrt();
        let end_g = self.root_at(z)? / sqrt_d;
        let rule = legendre(PANEL_NODES);
        let mut panels = 1;
        let mut previous = self.integrate_panels(d, end_g, panels, &rule)?;
        loop {
            panels *= 2;
            let current = self.integrate_panels(d, end_g, panels, &rule)?;
            if (current - previous).norm() <= PHASE_TOL * (1.0 + current.norm()) {
                return Ok(I * self.branch_sign * 2.0 * d * sqrt_d * current);
            }
            if panels >= MAX_PANELS {
                return Err(Error::NotConverged {
                    nodes: panels * PANEL_NODES,
                    est_error: (current - previous).norm(),
                });
            }
            previous = current;
        }
    }

    /// `∫_0^1 s^2 G(b + d s^2)^{1/2} ds` on `panels` equal panels, with the
    /// root continued downward from its value `end_g` at `s = 1`.
    fn integrate_panels(&self, d: Complex64, end_g: Complex64, panels: usize, rule: &Rule) -> Result<Complex64> {
        let width = 1.0 / panels as f64;
        let mut root = end_g;
        let mut sum = Complex64::new(0.0, 0.0);
        for p in (0..panels).rev() {
            let lo = p as f64 * width;
            for (t, wt) in rule.nodes.iter().zip(&rule.weights).rev() {
                let s = lo + 0.5 * width * (t + 1.0);
                let w = self.base_point + d * s * s;
                root = continue_sqrt(root, self.deflated.eval(w)).ok_or(Error::BranchJump { at: w })?;
                sum += 0.5 * width * wt * s * s * root;
            }
        }
        Ok(sum)
    }
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len2;
    (p - (a + ab * t.clamp(0.0, 1.0))).norm()
}

/// `phi(z)` on `side`, anchored at the turning point of that side.
pub fn phase_at(spec: &PotentialSpec, tp: &TurningPair, z: Complex64, side: Side) -> Result<Complex64> {
    PhaseFunction::new(spec, tp, side).eval(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    /// `x_j = start (end / start)^{j / (n - 1)}`.
    Geometric,
}

/// Grid of `n` real points from `start` (near the well) to `end` (the
/// anchor `x_max`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WkbGrid {
    pub start: f64,
    pub end: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl WkbGrid {
    pub fn uniform(start: f64, end: f64, n: usize) -> Self {
        WkbGrid { start, end, n, spacing: Spacing::Uniform }
    }

    pub fn geometric(start: f64, end: f64, n: usize) -> Self {
        WkbGrid { start, end, n, spacing: Spacing::Geometric }
    }

    /// Right-side default: from `beta_0 + delta_0` with
    /// `delta_0 = (beta_0 - alpha_0) / 4` out to the point where the
    /// `f_1` tail drops below `1e-8`.
    pub fn default_for(spec: &PotentialSpec) -> Result<Self> {
        let (a, b) = spec.well_interval()?;
        let start = b + 0.25 * (b - a);
        let rate = 1.0 + 0.5 * spec.v0_degree() as f64;
        let end = b.max(1.0) * TAIL_TARGET.powf(-1.0 / rate);
        let decades = (end / start).ln();
        let n = 2 * ((200.0 * decades).ceil() as usize).max(200) + 1;
        Ok(WkbGrid::geometric(start, end, n))
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j as f64)).collect()
    }

    fn x(&self, j: f64) -> f64 {
        let s = j / (self.n - 1) as f64;
        match self.spacing {
            Spacing::Uniform => self.start + (self.end - self.start) * s,
            Spacing::Geometric => self.start * (self.end / self.start).powf(s),
        }
    }

    /// `dx/dj` and `d^2x/dj^2` at index `j`.
    fn jacobian(&self, j: usize) -> (f64, f64) {
        let m = (self.n - 1) as f64;
        match self.spacing {
            Spacing::Uniform => ((self.end - self.start) / m, 0.0),
            Spacing::Geometric => {
                let l = (self.end / self.start).ln() / m;
                let x = self.x(j as f64);
                (x * l, x * l * l)
            }
        }
    }

    fn coarsened(&self) -> Option<Self> {
        ((self.n - 1) % 2 == 0 && self.n >= 11).then(|| WkbGrid { n: (self.n - 1) / 2 + 1, ..*self })
    }

    fn validate(&self) -> Result<()> {
        if self.n < 6 {
            return Err(Error::InvalidArgument("WKB grid needs at least 6 points".into()));
        }
        if !(self.start.is_finite() && self.end.is_finite()) || self.start == self.end {
            return Err(Error::InvalidArgument("WKB grid endpoints must differ".into()));
        }
        if self.spacing == Spacing::Geometric && self.start * self.end <= 0.0 {
            return Err(Error::InvalidArgument("geometric WKB grid cannot cross zero".into()));
        }
        Ok(())
    }
}

/// Tabulated WKB amplitude coefficients and phase.
#[derive(Debug, Clone, Serialize)]
pub struct WkbExpansion {
    pub energy: Complex64,
    pub eps: Complex64,
    pub side: Side,
    pub grid: WkbGrid,
    pub points: Vec<f64>,
    pub h_order: usize,
    /// `phi` at the grid points.
    pub phase: Vec<Complex64>,
    /// `phi'` and `phi''` at the grid points.
    pub dphase: Vec<Complex64>,
    pub d2phase: Vec<Complex64>,
    /// `f_k`, `k = 0..=N`.
    pub f: Vec<Vec<Complex64>>,
    /// `a_k = f_k a_0`, `k = 0..=N`.
    pub a: Vec<Vec<Complex64>>,
    /// Size of the neglected `∫_{x_max}^∞ f_1'` estimated from the local decay.
    pub tail_estimate: f64,
}

/// Fourth-order derivative with respect to the index.
fn diff_index(g: &[Complex64]) -> Vec<Complex64> {
    let n = g.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 2..n - 2 {
        out[j] = (g[j - 2] - 8.0 * g[j - 1] + 8.0 * g[j + 1] - g[j + 2]) / 12.0;
    }
    let fwd0 = |k: usize, s: f64| {
        let v = |i: usize| g[if s > 0.0 { k + i } else { k - i }];
        s * (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4)) / 12.0
    };
    let fwd1 = |k: usize, s: f64| {
        let v = |i: isize| g[(k as isize + if s > 0.0 { i } else { -i }) as usize];
        s * (-3.0 * v(-1) - 10.0 * v(0) + 18.0 * v(1) - 6.0 * v(2) + v(3)) / 12.0
    };
    out[0] = fwd0(0, 1.0);
    out[1] = fwd1(1, 1.0);
    out[n - 1] = fwd0(n - 1, -1.0);
    out[n - 2] = fwd1(n - 2, -1.0);
    out
}

/// `F_j = -∫_{x_j}^{x_end} g dx` from integrand samples `g` (already
/// multiplied by `dx/dj`), fourth order.
fn integrate_from_end(g: &[Complex64]) -> Vec<Complex64> {
    let n = g.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in (0..n - 1).rev() {
        let piece = if j == 0 {
            (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]) / 24.0
        } else if j == n - 2 {
            (9.0 * g[n - 1] + 19.0 * g[n - 2] - 5.0 * g[n - 3] + g[n - 4]) / 24.0
        } else {
            (-g[j - 1] + 13.0 * g[j] + 13.0 * g[j + 1] - g[j + 2]) / 24.0
        };
        out[j] = out[j + 1] - piece;
    }
    out
}

/// Builds `a_0..a_N` and `phi` on `grid` for the right side of the well.
pub fn transport_coeffs(
    spec: &PotentialSpec,
    tp: &TurningPair,
    order: usize,
    grid: WkbGrid,
) -> Result<WkbExpansion> {
    grid.validate()?;
    let (_, beta0) = spec.well_interval()?;
    if grid.start.min(grid.end) <= beta0 {
        return Err(Error::InvalidArgument(format!("WKB grid must lie right of the well edge {beta0}")));
    }
    let fine = transport_on(spec, tp, order, grid)?;
    if order >= 1 {
        if let Some(coarse_grid) = grid.coarsened() {
            let coarse = transport_on(spec, tp, order, coarse_grid)?;
            for k in 1..=order {
                let scale = fine.f[k].iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                let difference = coarse.f[k]
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (v - fine.f[k][2 * j]).norm())
                    .fold(0.0, f64::max)
                    / scale;
                if difference > GRID_TOL {
                    return Err(Error::GridTooCoarse { difference, tolerance: GRID_TOL });
                }
            }
        }
    }
    Ok(fine)
}

fn transport_on(spec: &PotentialSpec, tp: &TurningPair, order: usize, grid: WkbGrid) -> Result<WkbExpansion> {
    let phase_fn = PhaseFunction::new(spec, tp, Side::Right);
    let points = grid.points();
    let n = points.len();
    let (energy, eps) = (tp.energy, tp.eps);

    // root of V - E continued inward from the far end, where it is principal
    let mut roots = vec![Complex64::new(0.0, 0.0); n];
    let mut inv_sqrt_p = vec![Complex64::new(0.0, 0.0); n];
    let mut root = phase_fn.root_at(Complex64::new(points[n - 1], 0.0))?;
    let mut amp = (I * root).inv().sqrt();
    for j in (0..n).rev() {
        let x = Complex64::new(points[j], 0.0);
        root = continue_sqrt(root, spec.eval(x, eps) - energy).ok_or(Error::BranchJump { at: x })?;
        roots[j] = root;
        amp = continue_sqrt(amp, (I * root).inv()).ok_or(Error::BranchJump { at: x })?;
        inv_sqrt_p[j] = amp;
    }

    let mut dphase = Vec::with_capacity(n);
    let mut d2phase = Vec::with_capacity(n);
    let mut da_ratio = Vec::with_capacity(n);
    let mut d2a_ratio = Vec::with_capacity(n);
    for j in 0..n {
        let x = Complex64::new(points[j], 0.0);
        let (_, v1, v2) = spec.eval_with_derivs(x, eps);
        let r = roots[j];
        let p = I * r;
        let p1 = I * v1 / (2.0 * r);
        let p2 = I * (v2 / (2.0 * r) - v1 * v1 / (4.0 * r * r * r));
        dphase.push(p);
        d2phase.push(p1);
        da_ratio.push(-p1 / (2.0 * p));
        d2a_ratio.push(0.75 * (p1 / p) * (p1 / p) - 0.5 * p2 / p);
    }

    // phi at the grid: the quadrature value at the first point, then
    // Gauss-Legendre pieces between neighbours
    let mut phase = vec![phase_fn.eval(Complex64::new(points[0], 0.0))?; n];
    let rule = legendre(8);
    for j in 1..n {
        let (x0, x1) = (points[j - 1], points[j]);
        let mut r = roots[j - 1];
        let mut piece = Complex64::new(0.0, 0.0);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = Complex64::new(0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t, 0.0);
            r = continue_sqrt(r, spec.eval(x, eps) - energy).ok_or(Error::BranchJump { at: x })?;
            piece += 0.5 * (x1 - x0) * w * r;
        }
        phase[j] = phase[j - 1] + I * piece;
    }

    let jac: Vec<f64> = (0..n).map(|j| grid.jacobian(j).0).collect();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut f = vec![vec![one; n]];
    let mut df_prev = vec![zero; n];
    for k in 1..=order {
        let f_prev = &f[k - 1];
        let d2f_prev: Vec<Complex64> = if k == 1 {
            vec![zero; n]
        } else {
            diff_index(&df_prev).iter().zip(&jac).map(|(d, j)| d / j).collect()
        };
        let df: Vec<Complex64> = (0..n)
            .map(|j| {
                I / (2.0 * dphase[j])
                    * (d2f_prev[j] + 2.0 * da_ratio[j] * df_prev[j] + d2a_ratio[j] * f_prev[j])
            })
            .collect();
        let integrand: Vec<Complex64> = df.iter().zip(&jac).map(|(d, j)| d * j).collect();
        f.push(integrate_from_end(&integrand));
        df_prev = df;
    }

    let a = f.iter().map(|fk| fk.iter().zip(&inv_sqrt_p).map(|(u, v)| u * v).collect()).collect();

    let tail_estimate = if order >= 1 {
        let x_end = points[n - 1];
        let rate = 1.0 + 0.5 * spec.v0_degree() as f64;
        let d1 = I / (2.0 * dphase[n - 1]) * d2a_ratio[n - 1];
        d1.norm() * x_end / rate
    } else {
        0.0
    };

    Ok(WkbExpansion {
        energy,
        eps,
        side: Side::Right,
        grid,
        points,
        h_order: order,
        phase,
        dphase,
        d2phase,
        f,
        a,
        tail_estimate,
    })
}

impl WkbExpansion {
    /// `sum_{k <= N} a_k h^k` at every grid point.
    pub fn amplitude(&self, h: f64) -> Vec<Complex64> {
        (0..self.points.len())
            .map(|j| {
                let mut total = Complex64::new(0.0, 0.0);
                let mut hk = 1.0;
                for ak in &self.a {
                    total += ak[j] * hk;
                    hk *= h;
                }
                total
            })
            .collect()
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        let tol = 1e-12 * (1.0 + x.abs());
        self.points.iter().position(|p| (p - x).abs() <= tol)
    }

    /// Least-squares slope of `log |a_k|` against `log x` over the grid
    /// points in `[lo, hi]`.
    pub fn decay_slope(&self, k: usize, lo: f64, hi: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .zip(&self.a[k])
            .filter(|(x, v)| **x >= lo && **x <= hi && v.norm() > 0.0)
            .map(|(x, v)| (x.ln(), v.norm().ln()))
            .collect();
        least_squares_slope(&pts)
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Value of the truncated WKB solution and `log |u|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WkbValue {
    pub value: Complex64,
    pub log_abs: f64,
}

/// `(sum_{k <= N} a_k(z) h^k) exp(i phi(z) / h)` at the grid point `z`.
pub fn wkb_eval(expansion: &WkbExpansion, z: f64, h: f64) -> Result<WkbValue> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("h must be positive".into()));
    }
    let j = expansion
        .index_of(z)
        .ok_or_else(|| Error::InvalidArgument(format!("{z} is not a grid point")))?;
    let mut amp = Complex64::new(0.0, 0.0);
    let mut hk = 1.0;
    for ak in &expansion.a {
        amp += ak[j] * hk;
        hk *= h;
    }
    let exponent = I * expansion.phase[j] / h;
    Ok(WkbValue { value: amp * exponent.exp(), log_abs: amp.norm().ln() + exponent.re })
}

/// Residual sizes and observed orders for successive `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualOrders {
    pub order: usize,
    pub h: Vec<f64>,
    /// `max |e^{-i phi/h} (-h^2 d^2 + V_eps - E) u_N|` over the grid.
    pub residuals: Vec<f64>,
    /// `log(r_i / r_{i+1}) / log(h_i / h_{i+1})`.
    pub orders: Vec<f64>,
    /// Set when the residual is at the rounding floor of its terms.
    pub floor_reached: Vec<bool>,
}

/// `max_j |R(x_j)|` with `R = -h^2 A'' - i h (2 phi' A' + phi'' A)`, the
/// operator applied to `A e^{i phi / h}` with the exponential divided out.
/// Returns the residual and the size of the largest term.
pub fn amplitude_residual(expansion: &WkbExpansion, h: f64, upto: f64) -> (f64, f64) {
    let amp = expansion.amplitude(h);
    let n = amp.len();
    let d1 = diff_index(&amp);
    let d2 = diff_index(&d1);
    let mut residual: f64 = 0.0;
    let mut terms: f64 = 0.0;
    for j in 2..n - 2 {
        if expansion.points[j] > upto {
            continue;
        }
        let (xj, xjj) = expansion.grid.jacobian(j);
        let a1 = d1[j] / xj;
        let a2 = (d2[j] - a1 * xjj) / (xj * xj);
        let t2 = -h * h * a2;
        let t1 = -I * h * (2.0 * expansion.dphase[j] * a1 + expansion.d2phase[j] * amp[j]);
        residual = residual.max((t2 + t1).norm());
        terms = terms.max(t2.norm()).max(t1.norm());
    }
    (residual, terms)
}

/// Observed exponents `p` in `residual ∝ h^p` for the `N`-term expansion,
/// measured between successive entries of `h_list`.
pub fn wkb_residual_order(
    spec: &PotentialSpec,
    tp: &TurningPair,
    order: usize,
    h_list: &[f64],
) -> Result<ResidualOrders> {
    if h_list.len() < 2 || h_list.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidArgument("need at least two positive h values".into()));
    }
    let (alpha0, beta0) = spec.well_interval()?;
    let start = beta0 + 0.25 * (beta0 - alpha0);
    let end = start + 8.0 * (beta0 - alpha0);
    let mut n = 4001;
    let expansion = loop {
        match transport_coeffs(spec, tp, order, WkbGrid::geometric(start, end, n)) {
            Err(Error::GridTooCoarse { .. }) if n < 64_001 => n = 2 * n - 1,
            other => break other?,
        }
    };
    // stay clear of the anchor, where f_k is pinned to zero
    let upto = start + 4.0 * (beta0 - alpha0);
    let mut residuals = Vec::new();
    let mut floor_reached = Vec::new();
    for &h in h_list {
        let (r, terms) = amplitude_residual(&expansion, h, upto);
        residuals.push(r);
        floor_reached.push(r < 1e-11 * terms);
    }
    let orders = residuals
        .windows(2)
        .zip(h_list.windows(2))
        .map(|(r, h)| (r[0] / r[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    Ok(ResidualOrders { order, h: h_list.to_vec(), residuals, orders, floor_reached })
}

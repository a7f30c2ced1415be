//! Independent eigenvalue oracle.
//!
//! The solution `u` decaying at `-inf` is integrated from the left edge of a
//! box `[-L, L]` to `x = 0` with classical fourth-order Runge–Kutta steps and
//! running renormalization. For real `eps` the PT reflection
//! `v(x) = conj(u(-conj x; conj E))` decays at `+inf`, so the Wronskian
//! `W = (h u') v - u (h v')` at the origin vanishes exactly on the spectrum.
//! On the real axis `W` is real; inside a rectangle its zeros are counted by
//! the argument principle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{PotentialSpec, Window};

const RENORM_HIGH: f64 = 1e2;
const RENORM_LOW: f64 = 1e-2;

/// Step and box controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Box half-width; `None` selects [`default_box_l`].
    pub box_l: Option<f64>,
    /// Base step is `h / steps_per_h`; must be at least 10.
    pub steps_per_h: f64,
    /// Local step bound `phase_step * h / sqrt(1 + |V_eps(x)|)`.
    pub phase_step: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { box_l: None, steps_per_h: 40.0, phase_step: 0.05 }
    }
}

impl ShootOptions {
    pub fn with_box_l(self, box_l: f64) -> Self {
        ShootOptions { box_l: Some(box_l), ..self }
    }

    /// Halves every step.
    pub fn refined(self) -> Self {
        ShootOptions { steps_per_h: 2.0 * self.steps_per_h, phase_step: 0.5 * self.phase_step, ..self }
    }
}

/// Renormalized solution data at `x`; the true solution is
/// `exp(log_scale) * (u, du)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotState {
    pub u: Complex64,
    pub du: Complex64,
    pub log_scale: f64,
    pub x: f64,
}

/// Wronskian at the origin, stored as `w * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WronskianSample {
    pub energy: Complex64,
    pub w: Complex64,
    pub log_scale: f64,
    /// `|(u, h u')| |(v, h v')|`, an upper bound for `|w|`.
    pub scale: f64,
}

impl WronskianSample {
    /// Scale-free Wronskian, `|relative| <= 1`.
    pub fn relative(&self) -> Complex64 {
        self.w / self.scale
    }
}

/// `beta00 + max(3, 4 sqrt(h)) * (beta00 - alpha00)`.
pub fn default_box_l(spec: &PotentialSpec, h: f64) -> Result<f64> {
    let (alpha, beta) = spec.well_interval()?;
    Ok(beta + (4.0 * h.sqrt()).max(3.0) * (beta - alpha))
}

/// Precomputed step grid on `[-L, 0]` with potential values at nodes and
/// midpoints. The grid does not depend on `E`, so the discrete solution is
/// analytic in `E` up to positive renormalization factors.
#[derive(Debug, Clone)]
pub struct Shooter {
    h: f64,
    eps: f64,
    box_l: f64,
    xs: Vec<f64>,
    // potential at the nodes and midpoints of the left sweep, and at their
    // mirror images for the right sweep
    v_node: Vec<Complex64>,
    v_mid: Vec<Complex64>,
    v_node_right: Vec<Complex64>,
    v_mid_right: Vec<Complex64>,
}

impl Shooter {
    pub fn new(spec: &PotentialSpec, eps: f64, h: f64, opts: ShootOptions) -> Result<Shooter> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
        }
        if !(opts.steps_per_h >= 10.0) || !(opts.phase_step > 0.0) {
            return Err(Error::InvalidArgument("step controls below h/10".into()));
        }
        let box_l = match opts.box_l {
            Some(l) => l,
            None => default_box_l(spec, h)?,
        };
        if !(box_l > 0.0) {
            return Err(Error::InvalidArgument(format!("box half-width must be positive, got {box_l}")));
        }
        let base = h / opts.steps_per_h;
        let mut xs = vec![-box_l];
        let mut x = -box_l;
        while x < 0.0 {
            let v = spec.eval(Complex64::new(x, 0.0), eps).norm();
            let dx = base.min(opts.phase_step * h / (1.0 + v).sqrt());
            x = if x + dx >= -0.25 * dx { 0.0 } else { x + dx };
            xs.push(x);
        }
        let at = |x: f64| spec.eval(Complex64::new(x, 0.0), eps);
        let mids: Vec<f64> = xs.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        Ok(Shooter {
            h,
            eps,
            box_l,
            v_node: xs.iter().map(|&x| at(x)).collect(),
            v_mid: mids.iter().map(|&x| at(x)).collect(),
            v_node_right: xs.iter().map(|&x| at(-x)).collect(),
            v_mid_right: mids.iter().map(|&x| at(-x)).collect(),
            xs,
        })
    }

    pub fn box_l(&self) -> f64 {
        self.box_l
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn steps(&self) -> usize {
        self.xs.len() - 1
    }

    fn sweep(&self, energy: Complex64, mirrored: bool) -> Result<ShotState> {
        let h2 = self.h * self.h;
        // the mirrored sweep runs from +L to 0 through the points -xs
        let (v_node, v_mid) = if mirrored {
            (&self.v_node_right, &self.v_mid_right)
        } else {
            (&self.v_node, &self.v_mid)
        };
        let sign = if mirrored { -1.0 } else { 1.0 };
        let edge = v_node[0] - energy;
        if edge.re < 0.0 {
            return Err(Error::BoxTooSmall { box_l: self.box_l });
        }
        let mut u = Complex64::new(1.0, 0.0);
        // decaying toward the box edge
        let mut du = sign * edge.sqrt() / self.h;
        let mut log_scale = 0.0;
        let m = u.norm().max(du.norm());
        u /= m;
        du /= m;
        log_scale += m.ln();
        for i in 0..self.xs.len() - 1 {
            let dx = sign * (self.xs[i + 1] - self.xs[i]);
            let q0 = (v_node[i] - energy) / h2;
            let qm = (v_mid[i] - energy) / h2;
            let q1 = (v_node[i + 1] - energy) / h2;
            let (k1u, k1d) = (du, q0 * u);
            let (k2u, k2d) = (du + 0.5 * dx * k1d, qm * (u + 0.5 * dx * k1u));
            let (k3u, k3d) = (du + 0.5 * dx * k2d, qm * (u + 0.5 * dx * k2u));
            let (k4u, k4d) = (du + dx * k3d, q1 * (u + dx * k3u));
            u += dx / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += dx / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            let m = u.norm().max(du.norm());
            if !m.is_finite() || m == 0.0 {
                return Err(Error::StepUnstable { x: sign * self.xs[i + 1] });
            }
            if !(RENORM_LOW..=RENORM_HIGH).contains(&m) {
                u /= m;
                du /= m;
                log_scale += m.ln();
            }
        }
        Ok(ShotState { u, du, log_scale, x: 0.0 })
    }

    /// Decaying-at-`-inf` solution carried to `x = 0`.
    pub fn integrate_left(&self, energy: Complex64) -> Result<ShotState> {
        self.sweep(energy, false)
    }

    /// Decaying-at-`+inf` solution carried from `+L` to `x = 0`, integrated
    /// directly (no PT reflection).
    pub fn integrate_right(&self, energy: Complex64) -> Result<ShotState> {
        self.sweep(energy, true)
    }

    /// PT-paired Wronskian at `energy`.
    pub fn wronskian(&self, energy: Complex64) -> Result<WronskianSample> {
        let left = self.integrate_left(energy)?;
        let partner_state = if energy.im == 0.0 { left } else { self.integrate_left(energy.conj())? };
        let (v, dv) = pt_partner(&partner_state);
        Ok(combine(energy, self.h, &left, v, dv, left.log_scale + partner_state.log_scale))
    }

    /// Wronskian of the left solution with the directly integrated right
    /// solution.
    pub fn wronskian_two_sided(&self, energy: Complex64) -> Result<WronskianSample> {
        let left = self.integrate_left(energy)?;
        let right = self.integrate_right(energy)?;
        Ok(combine(energy, self.h, &left, right.u, right.du, left.log_scale + right.log_scale))
    }
}

fn combine(
    energy: Complex64,
    h: f64,
    left: &ShotState,
    v: Complex64,
    dv: Complex64,
    log_scale: f64,
) -> WronskianSample {
    let w = h * left.du * v - left.u * h * dv;
    let scale = left.u.norm().hypot(h * left.du.norm()) * v.norm().hypot(h * dv.norm());
    WronskianSample { energy, w, log_scale, scale }
}

/// `v(0) = conj(u(0))`, `v'(0) = -conj(u'(0))` for a state computed at
/// `conj(E)`.
pub fn pt_partner(state: &ShotState) -> (Complex64, Complex64) {
    (state.u.conj(), -state.du.conj())
}

/// Decaying solution at the origin for a box of half-width `box_l`, with at
/// least `n_steps` steps.
pub fn integrate_decaying(
    spec: &PotentialSpec,
    energy: Complex64,
    eps: f64,
    h: f64,
    box_l: f64,
    n_steps: usize,
) -> Result<ShotState> {
    let mut opts = ShootOptions::default().with_box_l(box_l);
    let per_h = n_steps as f64 * h / box_l;
    if per_h > opts.steps_per_h {
        opts.steps_per_h = per_h;
    }
    Shooter::new(spec, eps, h, opts)?.integrate_left(energy)
}

pub fn wronskian(spec: &PotentialSpec, energy: Complex64, eps: f64, h: f64, box_l: f64) -> Result<WronskianSample> {
    Shooter::new(spec, eps, h, ShootOptions::default().with_box_l(box_l))?.wronskian(energy)
}

/// Real eigenvalues in `window` from sign changes of the real Wronskian on
/// `grid_n` samples, each refined to `|dE| < 1e-10`.
pub fn real_eigen_scan(
    spec: &PotentialSpec,
    eps: f64,
    h: f64,
    window: (f64, f64),
    grid_n: usize,
) -> Result<Vec<f64>> {
    let shooter = Shooter::new(spec, eps, h, ShootOptions::default())?;
    scan_with(&shooter, window, grid_n)
}

pub fn scan_with(shooter: &Shooter, window: (f64, f64), grid_n: usize) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(lo < hi) || grid_n < 2 {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let energies: Vec<f64> = (0..grid_n).map(|i| lo + (hi - lo) * i as f64 / (grid_n - 1) as f64).collect();
    let samples: Vec<f64> = energies
        .par_iter()
        .map(|&e| {
            let z = Complex64::new(e, 0.0);
            let pt = shooter.wronskian(z)?;
            let direct = shooter.wronskian_two_sided(z)?;
            let ratio = direct.w.im.abs() / direct.scale;
            if ratio > 1e-8 {
                return Err(Error::ImaginaryResidue { energy: e, ratio });
            }
            Ok(pt.relative().re)
        })
        .collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for i in 0..grid_n - 1 {
        let (f0, f1) = (samples[i], samples[i + 1]);
        if f0 == 0.0 {
            roots.push(energies[i]);
        } else if f0 * f1 < 0.0 {
            roots.push(refine_root(shooter, energies[i], f0, energies[i + 1], f1)?);
        }
    }
    if samples[grid_n - 1] == 0.0 {
        roots.push(energies[grid_n - 1]);
    }
    Ok(roots)
}

fn real_relative(shooter: &Shooter, e: f64) -> Result<f64> {
    Ok(shooter.wronskian(Complex64::new(e, 0.0))?.relative().re)
}

/// Illinois-modified regula falsi with bisection safeguard.
fn refine_root(shooter: &Shooter, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() < 1e-10 {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        let width = b - a;
        if !(c > a + 0.01 * width && c < b - 0.01 * width) {
            c = 0.5 * (a + b);
        }
        let fc = real_relative(shooter, c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fa * fc < 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Real eigenvalue nearest `guess` within `guess ± half_width`.
pub fn refine_eigenvalue(shooter: &Shooter, guess: f64, half_width: f64) -> Result<Option<f64>> {
    let roots = scan_with(shooter, (guess - half_width, guess + half_width), 17)?;
    Ok(roots
        .into_iter()
        .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs())))
}

/// Number of Wronskian zeros inside `rect`, by the winding of `W(E)` along
/// its counterclockwise boundary. `n_boundary` samples per side, with
/// bisection wherever an argument increment exceeds `pi/2`.
pub fn zero_count_winding(
    spec: &PotentialSpec,
    eps: f64,
    h: f64,
    rect: Window,
    n_boundary: usize,
) -> Result<i64> {
    let shooter = Shooter::new(spec, eps, h, ShootOptions::default())?;
    winding_with(&shooter, rect, n_boundary)
}

const BOUNDARY_FLOOR: f64 = 1e-8;
const MAX_DEPTH: u32 = 24;

pub fn winding_with(shooter: &Shooter, rect: Window, n_boundary: usize) -> Result<i64> {
    if rect.is_empty() || rect.im[0] >= rect.im[1] || n_boundary == 0 {
        return Err(Error::InvalidArgument(format!("degenerate rectangle {rect:?}")));
    }
    let corners = [
        Complex64::new(rect.re[0], rect.im[0]),
        Complex64::new(rect.re[1], rect.im[0]),
        Complex64::new(rect.re[1], rect.im[1]),
        Complex64::new(rect.re[0], rect.im[1]),
    ];
    let mut path = Vec::with_capacity(4 * n_boundary + 1);
    for side in 0..4 {
        let (a, b) = (corners[side], corners[(side + 1) % 4]);
        for j in 0..n_boundary {
            path.push(a + (b - a) * (j as f64 / n_boundary as f64));
        }
    }
    path.push(corners[0]);
    let values: Vec<Complex64> = path
        .par_iter()
        .map(|&e| sample_boundary(shooter, e))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for i in 0..path.len() - 1 {
        total += arg_increment(shooter, path[i], values[i], path[i + 1], values[i + 1], 0)?;
    }
    let turns = total / (2.0 * PI);
    let count = turns.round();
    if (turns - count).abs() > 0.25 {
        return Err(Error::InsufficientResolution { detail: format!("winding {turns:.4} is not near an integer") });
    }
    Ok(count as i64)
}

fn sample_boundary(shooter: &Shooter, e: Complex64) -> Result<Complex64> {
    let s = shooter.wronskian(e)?;
    if s.w.norm() < BOUNDARY_FLOOR * s.scale {
        return Err(Error::ZeroOnBoundary { energy: e });
    }
    Ok(s.w / s.w.norm())
}

fn arg_increment(
    shooter: &Shooter,
    e0: Complex64,
    w0: Complex64,
    e1: Complex64,
    w1: Complex64,
    depth: u32,
) -> Result<f64> {
    let delta = (w1 / w0).arg();
    if delta.abs() <= 0.5 * PI {
        return Ok(delta);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::InsufficientResolution {
            detail: format!("argument jump {delta:.3} between {e0} and {e1}"),
        });
    }
    let mid = 0.5 * (e0 + e1);
    let wm = sample_boundary(shooter, mid)?;
    Ok(arg_increment(shooter, e0, w0, mid, wm, depth + 1)? + arg_increment(shooter, mid, wm, e1, w1, depth + 1)?)
}

/// Reality certificate over a rectangle: winding count against the number
/// of real zeros found by scanning its real range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub rect: Window,
    pub zero_count: i64,
    pub real_zeros: Vec<f64>,
    #[serde(rename = "match")]
    pub matches: bool,
}

pub fn certify(
    spec: &PotentialSpec,
    eps: f64,
    h: f64,
    rect: Window,
    n_boundary: usize,
    grid_n: usize,
    opts: ShootOptions,
) -> Result<Certificate> {
    let shooter = Shooter::new(spec, eps, h, opts)?;
    let zero_count = winding_with(&shooter, rect, n_boundary)?;
    let real_zeros = if rect.im[0] < 0.0 && rect.im[1] > 0.0 {
        scan_with(&shooter, (rect.re[0], rect.re[1]), grid_n)?
    } else {
        Vec::new()
    };
    let matches = zero_count == real_zeros.len() as i64;
    Ok(Certificate { rect, zero_count, real_zeros, matches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_potential, Term};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn harmonic() -> PotentialSpec {
        make_potential(vec![Term::new(1.0, 2)], vec![Term::new(1.0, 1)], 1.0, Window::new([-8.0, 8.0], [-2.0, 2.0]))
            .unwrap()
    }

    #[test]
    fn default_box() {
        assert!((default_box_l(&harmonic(), 0.1).unwrap() - 7.0).abs() < 1e-10);
    }

    #[test]
    fn ground_state_is_even() {
        let s = integrate_decaying(&harmonic(), c(0.1, 0.0), 0.0, 0.1, 7.0, 1000).unwrap();
        assert!((s.du / s.u).norm() < 1e-3, "{:?}", s);
    }

    #[test]
    fn first_excited_state_is_odd() {
        let s = integrate_decaying(&harmonic(), c(0.3, 0.0), 0.0, 0.1, 7.0, 1000).unwrap();
        // |u(0)| against the slope scale h |u'(0)|
        assert!(s.u.norm() < 1e-6 * 0.1 * s.du.norm(), "{:?}", s);
    }

    #[test]
    fn renormalization_band() {
        let s = integrate_decaying(&harmonic(), c(0.2, 0.0), 0.0, 0.1, 6.0, 1000).unwrap();
        assert!(s.log_scale > 0.0);
        let m = s.u.norm().max(s.du.norm());
        assert!((RENORM_LOW..=RENORM_HIGH).contains(&m));
    }

    #[test]
    fn partner_formula() {
        let s = ShotState { u: c(1.0, 2.0), du: c(3.0, -1.0), log_scale: 0.0, x: 0.0 };
        assert_eq!(pt_partner(&s), (c(1.0, -2.0), c(-3.0, -1.0)));
        let real = ShotState { u: c(0.5, 0.0), du: c(-2.0, 0.0), log_scale: 0.0, x: 0.0 };
        assert_eq!(pt_partner(&real), (c(0.5, 0.0), c(2.0, 0.0)));
    }

    #[test]
    fn wronskian_vanishes_on_spectrum() {
        let s = harmonic();
        let on = wronskian(&s, c(0.1, 0.0), 0.0, 0.1, 7.0).unwrap();
        assert!(on.relative().norm() < 1e-6, "{}", on.relative());
        let off = wronskian(&s, c(0.2, 0.0), 0.0, 0.1, 7.0).unwrap();
        assert!(off.relative().norm() > 0.1);
        let shifted = wronskian(&s, c(0.11, 0.0), 0.2, 0.1, 7.0).unwrap();
        assert!(shifted.relative().norm() < 1e-5, "{}", shifted.relative());
        assert_eq!(shifted.w.im, 0.0);
    }

    #[test]
    fn box_too_small() {
        let err = wronskian(&harmonic(), c(1.0, 0.0), 0.0, 0.1, 0.5).unwrap_err();
        assert_eq!(err, Error::BoxTooSmall { box_l: 0.5 });
    }

    #[test]
    fn harmonic_scan() {
        let roots = real_eigen_scan(&harmonic(), 0.0, 0.1, (0.05, 0.65), 49).unwrap();
        assert_eq!(roots.len(), 3, "{roots:?}");
        for (r, e) in roots.iter().zip([0.1, 0.3, 0.5]) {
            assert!((r - e).abs() < 1e-6, "{r} vs {e}");
        }
    }

    #[test]
    fn midgap_rectangle_is_empty() {
        let n = zero_count_winding(&harmonic(), 0.0, 0.1, Window::new([0.15, 0.25], [-0.05, 0.05]), 16).unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn harmonic_rectangle_counts_three() {
        let n = zero_count_winding(&harmonic(), 0.0, 0.1, Window::new([0.05, 0.55], [-0.1, 0.1]), 32).unwrap();
        assert_eq!(n, 3);
    }
}

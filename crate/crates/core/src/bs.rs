//! Bohr–Sommerfeld eigenvalues `I(E_k, eps) = (k + 1/2) 2 pi h` and the
//! empirical `h^2` correction measured against the shooting oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::action::{action_integral, ActionValue, DEFAULT_NODES};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::shooting::{refine_eigenvalue, ShootOptions, Shooter};
use crate::turning::{find_turning_pair, TurningPair};

const SEED_GRID: usize = 17;
const RESIDUAL_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenvalueRecord {
    pub k: u32,
    pub e_bs: Complex64,
    pub e_shoot: Option<Complex64>,
    pub im_abs: f64,
    pub bs_residual: f64,
}

/// `(k + 1/2) 2 pi h`.
pub fn quantized_action(k: u32, h: f64) -> f64 {
    (k as f64 + 0.5) * 2.0 * PI * h
}

fn check_inputs(h: f64, window: (f64, f64)) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    if !(window.0 < window.1) {
        return Err(Error::EmptyWindow { lo: window.0, hi: window.1 });
    }
    Ok(())
}

/// Action sampled on a real energy grid, continuing the turning pair from
/// one point to the next.
fn action_grid(spec: &PotentialSpec, eps: f64, window: (f64, f64), n: usize) -> Result<Vec<(f64, ActionValue, TurningPair)>> {
    let mut out = Vec::with_capacity(n);
    let mut seed: Option<TurningPair> = None;
    for i in 0..n {
        let e = window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64;
        let tp = find_turning_pair(spec, Complex64::new(e, 0.0), eps, seed.as_ref())?;
        let value = action_integral(spec, &tp, DEFAULT_NODES)?;
        out.push((e, value, tp));
        seed = Some(tp);
    }
    Ok(out)
}

/// Quantization indices whose target action falls in
/// `[Re I(E_min), Re I(E_max)]`. An empty list is a valid answer.
pub fn bs_targets(spec: &PotentialSpec, eps: f64, h: f64, window: (f64, f64)) -> Result<Vec<(u32, f64)>> {
    check_inputs(h, window)?;
    let ends = action_grid(spec, eps, window, 2)?;
    let (lo, hi) = (ends[0].1.action.re, ends[1].1.action.re);
    let step = 2.0 * PI * h;
    let first = (lo / step - 0.5).ceil().max(0.0) as u32;
    let mut out = Vec::new();
    let mut k = first;
    while quantized_action(k, h) <= hi {
        if quantized_action(k, h) >= lo {
            out.push((k, quantized_action(k, h)));
        }
        k += 1;
    }
    Ok(out)
}

/// Newton on `I(E) - target` with `dI/dE = T`, starting from `seed` and
/// never stepping below `floor`.
fn newton_bs(
    spec: &PotentialSpec,
    eps: f64,
    target: f64,
    mut energy: Complex64,
    mut tp: TurningPair,
    floor: f64,
) -> Result<(Complex64, TurningPair, f64)> {
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_NEWTON {
        tp = find_turning_pair(spec, energy, eps, Some(&tp))?;
        let value = action_integral(spec, &tp, DEFAULT_NODES)?;
        let f = value.action - target;
        residual = f.norm();
        if residual < RESIDUAL_TOL {
            return Ok((energy, tp, residual));
        }
        let mut next = energy - f / value.period;
        if next.re <= floor {
            next = Complex64::new(0.5 * (energy.re + floor), next.im);
        }
        energy = next;
    }
    Err(Error::NewtonDivergence { iterations: MAX_NEWTON, residual })
}

/// Bohr–Sommerfeld eigenvalues for every target in the window.
pub fn solve_bs(spec: &PotentialSpec, eps: f64, h: f64, window: (f64, f64)) -> Result<Vec<EigenvalueRecord>> {
    check_inputs(h, window)?;
    let grid = action_grid(spec, eps, window, SEED_GRID)?;
    let targets = {
        let (lo, hi) = (grid[0].1.action.re, grid[SEED_GRID - 1].1.action.re);
        let step = 2.0 * PI * h;
        let first = (lo / step - 0.5).ceil().max(0.0) as u32;
        (first..).take_while(|&k| quantized_action(k, h) <= hi).filter(|&k| quantized_action(k, h) >= lo).collect::<Vec<_>>()
    };
    let floor = well_floor(spec)?;
    let mut records = Vec::with_capacity(targets.len());
    for k in targets {
        let target = quantized_action(k, h);
        // linear interpolation on the monotone coarse grid
        let j = grid
            .windows(2)
            .position(|w| w[0].1.action.re <= target && target <= w[1].1.action.re)
            .unwrap_or(0);
        let (e0, i0, tp0) = (grid[j].0, grid[j].1.action.re, grid[j].2);
        let (e1, i1) = (grid[j + 1].0, grid[j + 1].1.action.re);
        let seed = if i1 > i0 { e0 + (target - i0) * (e1 - e0) / (i1 - i0) } else { e0 };
        let (e_bs, _, bs_residual) = newton_bs(spec, eps, target, Complex64::new(seed, 0.0), tp0, floor)?;
        records.push(EigenvalueRecord { k, e_bs, e_shoot: None, im_abs: e_bs.im.abs(), bs_residual });
    }
    Ok(records)
}

/// Lowest real value of `V0` on the well interval, by sampling.
fn well_floor(spec: &PotentialSpec) -> Result<f64> {
    let (a, b) = spec.well_interval()?;
    Ok((0..=512)
        .map(|i| spec.v0_real(a + (b - a) * i as f64 / 512.0))
        .fold(f64::INFINITY, f64::min))
}

/// Bohr–Sommerfeld eigenvalue with index `k`, found from the reference
/// energy by safeguarded Newton.
pub fn solve_bs_index(spec: &PotentialSpec, eps: f64, h: f64, k: u32) -> Result<EigenvalueRecord> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    let target = quantized_action(k, h);
    let start = Complex64::new(spec.e0(), 0.0);
    let tp = find_turning_pair(spec, start, eps, None)?;
    let (e_bs, _, bs_residual) = newton_bs(spec, eps, target, start, tp, well_floor(spec)?)?;
    Ok(EigenvalueRecord { k, e_bs, e_shoot: None, im_abs: e_bs.im.abs(), bs_residual })
}

/// Fills `e_shoot` for each record from the real shooting scan around the
/// Bohr–Sommerfeld value, searching half a level spacing on each side.
pub fn attach_shooting(
    spec: &PotentialSpec,
    eps: f64,
    h: f64,
    records: &mut [EigenvalueRecord],
    opts: ShootOptions,
) -> Result<()> {
    let shooter = Shooter::new(spec, eps, h, opts)?;
    for rec in records.iter_mut() {
        let tp = find_turning_pair(spec, Complex64::new(rec.e_bs.re, 0.0), eps, None)?;
        let period = action_integral(spec, &tp, DEFAULT_NODES)?.period.re;
        let half = PI * h / period;
        rec.e_shoot = refine_eigenvalue(&shooter, rec.e_bs.re, half)?.map(|e| Complex64::new(e, 0.0));
    }
    Ok(())
}

/// Empirical correction `r = (I(E_shoot) - (k + 1/2) 2 pi h) / h^2` and the
/// relative change of `r` when `h` is halved at the same `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionEstimate {
    pub r_estimate: f64,
    pub r_half_h: f64,
    pub stability: f64,
}

fn correction_at(spec: &PotentialSpec, eps: f64, h: f64, k: u32) -> Result<f64> {
    let mut rec = [solve_bs_index(spec, eps, h, k)?];
    attach_shooting(spec, eps, h, &mut rec, ShootOptions::default())?;
    let e_shoot = rec[0].e_shoot.ok_or(Error::OracleMissing { k })?;
    let tp = find_turning_pair(spec, e_shoot, eps, None)?;
    let action = action_integral(spec, &tp, DEFAULT_NODES)?.action;
    Ok((action.re - quantized_action(k, h)) / (h * h))
}

pub fn estimate_correction(spec: &PotentialSpec, eps: f64, h: f64, k: u32) -> Result<CorrectionEstimate> {
    let r_estimate = correction_at(spec, eps, h, k)?;
    let r_half_h = correction_at(spec, eps, 0.5 * h, k)?;
    let stability = (r_half_h - r_estimate).abs() / r_estimate.abs();
    Ok(CorrectionEstimate { r_estimate, r_half_h, stability })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_potential, Term, Window};

    fn spec(v0: Vec<Term>) -> PotentialSpec {
        make_potential(v0, vec![Term::new(1.0, 1)], 1.0, Window::new([-8.0, 8.0], [-2.0, 2.0])).unwrap()
    }

    #[test]
    fn harmonic_targets() {
        let t = bs_targets(&spec(vec![Term::new(1.0, 2)]), 0.0, 0.1, (0.05, 0.65)).unwrap();
        let ks: Vec<u32> = t.iter().map(|p| p.0).collect();
        assert_eq!(ks, vec![0, 1, 2]);
        for ((_, target), expected) in t.iter().zip([0.1, 0.3, 0.5]) {
            assert!((target - expected * PI).abs() < 1e-14);
        }
    }

    #[test]
    fn midgap_window_has_no_targets() {
        let t = bs_targets(&spec(vec![Term::new(1.0, 2)]), 0.0, 0.1, (0.15, 0.25)).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn quartic_window_has_ground_state_only() {
        let t = bs_targets(&spec(vec![Term::new(1.0, 4)]), 0.0, 0.1, (0.02, 0.1)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].0, 0);
    }

    #[test]
    fn empty_window_is_rejected() {
        let err = bs_targets(&spec(vec![Term::new(1.0, 2)]), 0.0, 0.1, (0.3, 0.3)).unwrap_err();
        assert_eq!(err, Error::EmptyWindow { lo: 0.3, hi: 0.3 });
    }

    #[test]
    fn harmonic_and_shifted_eigenvalues() {
        for (eps, shift) in [(0.0, 0.0), (0.2, 0.01)] {
            let recs = solve_bs(&spec(vec![Term::new(1.0, 2)]), eps, 0.1, (0.05, 0.65)).unwrap();
            assert_eq!(recs.len(), 3);
            for (r, k) in recs.iter().zip(0..) {
                let exact = (2 * k + 1) as f64 * 0.1 + shift;
                assert!((r.e_bs.re - exact).abs() < 1e-9, "{r:?}");
                assert!(r.im_abs < 1e-8);
                assert!(r.bs_residual < 1e-10);
            }
        }
    }

    #[test]
    fn quartic_ground_state_by_scaling() {
        // I(E) = I(1) E^{3/4}
        let i1 = 3.496_076_739_056_159_7_f64;
        let expected = (0.1 * PI / i1).powf(4.0 / 3.0);
        let recs = solve_bs(&spec(vec![Term::new(1.0, 4)]), 0.0, 0.1, (0.02, 0.1)).unwrap();
        assert_eq!(recs.len(), 1);
        assert!((recs[0].e_bs.re - expected).abs() < 1e-10);
        assert!((recs[0].e_bs.re - 0.0403).abs() < 1e-4);
        let direct = solve_bs_index(&spec(vec![Term::new(1.0, 4)]), 0.0, 0.1, 0).unwrap();
        assert!((direct.e_bs - recs[0].e_bs).norm() < 1e-10);
    }

    #[test]
    fn harmonic_correction_vanishes() {
        for eps in [0.0, 0.2] {
            let r = correction_at(&spec(vec![Term::new(1.0, 2)]), eps, 0.1, 0).unwrap();
            assert!(r.abs() < 1e-4, "eps {eps}: r = {r}");
        }
    }
}

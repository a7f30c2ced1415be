//! The two simple complex turning points continuing the real well endpoints.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Turning points `alpha(E, eps)` and `beta(E, eps)` with certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurningPair {
    pub energy: Complex64,
    pub eps: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub residual_alpha: f64,
    pub residual_beta: f64,
    pub slope_alpha: Complex64,
    pub slope_beta: Complex64,
}

impl TurningPair {
    /// Half the oriented segment `beta - alpha`.
    pub fn half_width(&self) -> Complex64 {
        0.5 * (self.beta - self.alpha)
    }

    pub fn midpoint(&self) -> Complex64 {
        0.5 * (self.alpha + self.beta)
    }
}

/// Newton/continuation settings; the defaults are the documented ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    /// Largest straight-line step in `|dE| + |d eps|`.
    pub step: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions { step: 0.05, tolerance: 1e-12, max_iterations: 50 }
    }
}

const MIN_SLOPE: f64 = 1e-6;
const COLLISION: f64 = 1e-8;

/// Locates the turning pair at `(energy, eps)` with default options.
pub fn find_turning_pair(
    spec: &PotentialSpec,
    energy: Complex64,
    eps: impl Into<Complex64>,
    seed: Option<&TurningPair>,
) -> Result<TurningPair> {
    find_turning_pair_with(spec, energy, eps.into(), seed, ContinuationOptions::default())
}

pub fn find_turning_pair_with(
    spec: &PotentialSpec,
    energy: Complex64,
    eps: Complex64,
    seed: Option<&TurningPair>,
    opts: ContinuationOptions,
) -> Result<TurningPair> {
    let (mut e_cur, mut eps_cur, mut alpha, mut beta) = match seed {
        Some(tp) => (tp.energy, tp.eps, tp.alpha, tp.beta),
        None => {
            let (a, b) = spec.well_interval()?;
            (
                Complex64::new(spec.e0(), 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(a, 0.0),
                Complex64::new(b, 0.0),
            )
        }
    };
    let distance = (energy - e_cur).norm() + (eps - eps_cur).norm();
    let segments = ((distance / opts.step).ceil() as usize).max(1);
    let (e_start, eps_start) = (e_cur, eps_cur);
    for s in 1..=segments {
        let t = s as f64 / segments as f64;
        e_cur = e_start + (energy - e_start) * t;
        eps_cur = eps_start + (eps - eps_start) * t;
        alpha = newton(spec, e_cur, eps_cur, alpha, opts)?;
        beta = newton(spec, e_cur, eps_cur, beta, opts)?;
        if (alpha - beta).norm() < COLLISION {
            return Err(Error::RootCollision { at: alpha });
        }
    }
    let slope_alpha = spec.eval_d1(alpha, eps);
    let slope_beta = spec.eval_d1(beta, eps);
    for (at, slope) in [(alpha, slope_alpha), (beta, slope_beta)] {
        if slope.norm() < MIN_SLOPE {
            return Err(Error::NonSimpleTurningPoint { at, slope: slope.norm() });
        }
    }
    Ok(TurningPair {
        energy,
        eps,
        alpha,
        beta,
        residual_alpha: (spec.eval(alpha, eps) - energy).norm(),
        residual_beta: (spec.eval(beta, eps) - energy).norm(),
        slope_alpha,
        slope_beta,
    })
}

fn newton(
    spec: &PotentialSpec,
    energy: Complex64,
    eps: Complex64,
    mut z: Complex64,
    opts: ContinuationOptions,
) -> Result<Complex64> {
    let tol = opts.tolerance * (1.0 + energy.norm());
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let (v, dv, _) = spec.eval_with_derivs(z, eps);
        residual = (v - energy).norm();
        if dv.norm() < MIN_SLOPE {
            return Err(Error::NonSimpleTurningPoint { at: z, slope: dv.norm() });
        }
        let step = (v - energy) / dv;
        z -= step;
        if residual < tol {
            return Ok(z);
        }
        if !z.is_finite() {
            break;
        }
    }
    Err(Error::NewtonDivergence { iterations: opts.max_iterations, residual })
}

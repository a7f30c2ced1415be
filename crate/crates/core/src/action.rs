//! The well action `I(E, eps) = 2 ∫_alpha^beta (E - V_eps(z))^{1/2} dz` and
//! the period `T = dI/dE`.
//!
//! On the segment `z(t) = m + r t` the integrand factors as
//! `E - V_eps(z) = r^2 (1 - t^2) g(z)` with `g` analytic and nonvanishing
//! near the segment, so
//!
//! ```text
//! I = 2 r^2 ∫ (1 - t^2)^{1/2} g^{1/2} dt      (Chebyshev, second kind)
//! T =       ∫ (1 - t^2)^{-1/2} g^{-1/2} dt    (Chebyshev, first kind)
//! ```
//!
//! and the endpoint square-root zeros are carried by the weights. The branch
//! of `g^{1/2}` is principal at the midpoint and continued node by node.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::quadrature::{chebyshev_first, chebyshev_second, continue_sqrt, Rule};
use crate::turning::{find_turning_pair, TurningPair};

pub const DEFAULT_NODES: usize = 32;
pub const MAX_NODES: usize = 1 << 15;
const ENDPOINT_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionValue {
    pub action: Complex64,
    pub period: Complex64,
    pub nodes_used: usize,
    pub converged: bool,
    /// `|I_2n - I_n|`.
    pub est_error: f64,
}

/// `g(z(t))`, switching to the analytic endpoint limits within
/// `ENDPOINT_LIMIT` of `t = ±1`.
fn g_at(spec: &PotentialSpec, tp: &TurningPair, t: f64) -> Complex64 {
    let (alpha, beta, eps, energy) = (tp.alpha, tp.beta, tp.eps, tp.energy);
    if 1.0 + t < ENDPOINT_LIMIT {
        return -spec.eval_d1(alpha, eps) / (beta - alpha);
    }
    if 1.0 - t < ENDPOINT_LIMIT {
        return spec.eval_d1(beta, eps) / (beta - alpha);
    }
    let z = tp.midpoint() + tp.half_width() * t;
    (energy - spec.eval(z, eps)) / ((z - alpha) * (beta - z))
}

/// `g^{1/2}` at every node of `rule`, continued outward from the midpoint.
fn sqrt_g_on(spec: &PotentialSpec, tp: &TurningPair, rule: &Rule) -> Result<Vec<Complex64>> {
    let n = rule.nodes.len();
    let center = g_at(spec, tp, 0.0).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    // first node with t >= 0
    let split = rule.nodes.partition_point(|t| *t < 0.0);
    let mut prev = center;
    for i in split..n {
        let g = g_at(spec, tp, rule.nodes[i]);
        prev = continue_sqrt(prev, g).ok_or(Error::BranchJump {
            at: tp.midpoint() + tp.half_width() * rule.nodes[i],
        })?;
        out[i] = prev;
    }
    prev = center;
    for i in (0..split).rev() {
        let g = g_at(spec, tp, rule.nodes[i]);
        prev = continue_sqrt(prev, g).ok_or(Error::BranchJump {
            at: tp.midpoint() + tp.half_width() * rule.nodes[i],
        })?;
        out[i] = prev;
    }
    Ok(out)
}

/// Action and period with exactly `n` nodes (no convergence control).
pub fn action_fixed(spec: &PotentialSpec, tp: &TurningPair, n: usize) -> Result<(Complex64, Complex64)> {
    let second = chebyshev_second(n);
    let roots = sqrt_g_on(spec, tp, &second)?;
    let integral: Complex64 = second.weights.iter().zip(&roots).map(|(w, s)| s * *w).sum();
    let r = tp.half_width();
    let action = 2.0 * r * r * integral;

    let first = chebyshev_first(n);
    let roots = sqrt_g_on(spec, tp, &first)?;
    let period: Complex64 = first.weights.iter().zip(&roots).map(|(w, s)| *w / s).sum();
    Ok((action, period))
}

/// Action and period from `n` and `2n` nodes, reporting the difference.
pub fn action_with_nodes(spec: &PotentialSpec, tp: &TurningPair, n: usize) -> Result<ActionValue> {
    let (coarse, coarse_t) = action_fixed(spec, tp, n)?;
    let (fine, fine_t) = action_fixed(spec, tp, 2 * n)?;
    let est_error = (fine - coarse).norm();
    let period_error = (fine_t - coarse_t).norm();
    let converged = est_error < 1e-10 * (1.0 + fine.norm())
        && period_error < 1e-10 * (1.0 + fine_t.norm());
    Ok(ActionValue { action: fine, period: fine_t, nodes_used: 2 * n, converged, est_error })
}

/// `I(E, eps)` and `T(E, eps)` for the pair `tp`, doubling the node count
/// from `n_nodes` until two successive results agree to
/// `1e-10 (1 + |I|)`.
pub fn action_integral(spec: &PotentialSpec, tp: &TurningPair, n_nodes: usize) -> Result<ActionValue> {
    if n_nodes == 0 {
        return Err(Error::InvalidArgument("n_nodes must be positive".into()));
    }
    let mut n = n_nodes;
    loop {
        let value = action_with_nodes(spec, tp, n)?;
        if value.converged {
            return Ok(value);
        }
        n *= 2;
        if n > MAX_NODES {
            return Err(Error::NotConverged { nodes: value.nodes_used, est_error: value.est_error });
        }
    }
}

/// `T(E, eps) = ∫_alpha^beta (E - V_eps)^{-1/2} dz`.
pub fn period(spec: &PotentialSpec, tp: &TurningPair, n_nodes: usize) -> Result<Complex64> {
    action_integral(spec, tp, n_nodes).map(|v| v.period)
}

/// Centered difference `(I(E + delta) - I(E - delta)) / 2 delta`, an
/// independent route to the period.
pub fn period_by_difference(
    spec: &PotentialSpec,
    tp: &TurningPair,
    n_nodes: usize,
    delta: f64,
) -> Result<Complex64> {
    let d = Complex64::new(delta, 0.0);
    let up = find_turning_pair(spec, tp.energy + d, tp.eps, Some(tp))?;
    let down = find_turning_pair(spec, tp.energy - d, tp.eps, Some(tp))?;
    let i_up = action_integral(spec, &up, n_nodes)?.action;
    let i_down = action_integral(spec, &down, n_nodes)?.action;
    Ok((i_up - i_down) / (2.0 * delta))
}

/// Convenience: continue the turning pair from `seed` (or the well
/// endpoints) and evaluate the action there.
pub fn action_at(
    spec: &PotentialSpec,
    energy: Complex64,
    eps: impl Into<Complex64>,
    seed: Option<&TurningPair>,
) -> Result<(ActionValue, TurningPair)> {
    let tp = find_turning_pair(spec, energy, eps, seed)?;
    let value = action_integral(spec, &tp, DEFAULT_NODES)?;
    Ok((value, tp))
}

//! Stokes and anti-Stokes lines of `V_eps - E` from the turning points.
//!
//! With `q = (-(V_eps - E))^{1/2}`, a Stokes line is a curve on which
//! `q dz` is real (so `Im ∫ q dz` stays zero), and an anti-Stokes line is
//! one on which `q dz` is imaginary. Three of each leave a simple turning
//! point, alternating at angle `pi/3`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::potential::{PotentialSpec, Window};
use crate::quadrature::{continue_sqrt, legendre};
use crate::turning::{find_turning_pair, TurningPair};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const MIN_SLOPE: f64 = 1e-6;
const MIN_STEP: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum LineKind {
    Stokes,
    AntiStokes,
}

/// Which root of `V_eps - E` a line ran into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TurningLabel {
    Alpha,
    Beta,
    Other(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "camelCase")]
pub enum Termination {
    LeftWindow,
    MaxLength,
    NearTurningPoint { which: TurningLabel, at: Complex64 },
    BranchJump { at: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesPolyline {
    pub kind: LineKind,
    pub start: Complex64,
    #[serde(rename = "dir")]
    pub start_direction: Complex64,
    pub points: Vec<Complex64>,
    pub arclength: Vec<f64>,
    /// Running `Re ∫ q dz` (Stokes) or `Im ∫ q dz` (anti-Stokes) from the
    /// turning point.
    pub phase_along: Vec<f64>,
    /// Largest `|Im ∫ q dz|` (Stokes) or `|Re ∫ q dz|` (anti-Stokes) seen.
    pub max_defect: f64,
    pub termination: Termination,
}

impl StokesPolyline {
    pub fn length(&self) -> f64 {
        self.arclength.last().copied().unwrap_or(0.0)
    }

    /// Point at arclength `s`, by linear interpolation.
    pub fn point_at(&self, s: f64) -> Complex64 {
        let k = self.arclength.partition_point(|a| *a < s);
        if k == 0 {
            return self.points[0];
        }
        if k >= self.points.len() {
            return *self.points.last().unwrap();
        }
        let (s0, s1) = (self.arclength[k - 1], self.arclength[k]);
        let t = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
        self.points[k - 1] + (self.points[k] - self.points[k - 1]) * t
    }

    /// Smallest distance from the polyline to `p`.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        self.points
            .windows(2)
            .map(|w| segment_distance(p, w[0], w[1]))
            .fold((self.points[0] - p).norm(), f64::min)
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub max_step: f64,
    /// Distance from the turning point at which tracing starts.
    pub start_offset: f64,
    /// Radius of the disk around another turning point that ends a line.
    pub capture_radius: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { max_step: 1e-2, start_offset: 1e-3, capture_radius: 1e-3 }
    }
}

/// The three directions in which lines of `kind` leave the simple turning
/// point `tp_point`, ordered by argument in `(-pi, pi]`.
pub fn initial_directions(
    spec: &PotentialSpec,
    eps: impl Into<Complex64>,
    tp_point: Complex64,
    kind: LineKind,
) -> Result<[Complex64; 3]> {
    let c = spec.eval_d1(tp_point, eps);
    if c.norm() < MIN_SLOPE {
        return Err(Error::NonSimpleTurningPoint { at: tp_point, slope: c.norm() });
    }
    Ok(directions_for_slope(c, kind))
}

/// Directions for the local model `V - E = c (z - z_0)`:
/// `q dz ∝ (-c)^{1/2} w^{1/2} dw` is real on `arg w = (pi - arg c)/3 + 2 pi k/3`
/// and imaginary on `arg w = -arg c / 3 + 2 pi k / 3`.
pub fn directions_for_slope(c: Complex64, kind: LineKind) -> [Complex64; 3] {
    let base = match kind {
        LineKind::Stokes => (PI - c.arg()) / 3.0,
        LineKind::AntiStokes => -c.arg() / 3.0,
    };
    let mut args: Vec<f64> = (0..3)
        .map(|k| {
            let mut a = base + 2.0 * PI * k as f64 / 3.0;
            while a > PI {
                a -= 2.0 * PI;
            }
            while a <= -PI {
                a += 2.0 * PI;
            }
            a
        })
        .collect();
    args.sort_by(f64::total_cmp);
    [Complex64::from_polar(1.0, args[0]), Complex64::from_polar(1.0, args[1]), Complex64::from_polar(1.0, args[2])]
}

/// Shared context for tracing lines of one `(E, eps)`.
pub struct Tracer<'a> {
    spec: &'a PotentialSpec,
    energy: Complex64,
    eps: Complex64,
    roots: Vec<Complex64>,
    pair: Option<(Complex64, Complex64)>,
    window: Window,
    opts: TraceOptions,
}

impl<'a> Tracer<'a> {
    pub fn new(
        spec: &'a PotentialSpec,
        energy: Complex64,
        eps: impl Into<Complex64>,
        window: Window,
        opts: TraceOptions,
    ) -> Self {
        let eps = eps.into();
        let roots = spec.shifted_poly(energy, eps).roots();
        Tracer { spec, energy, eps, roots, pair: None, window, opts }
    }

    /// Labels roots close to `alpha` and `beta` accordingly.
    pub fn with_pair(mut self, tp: &TurningPair) -> Self {
        self.pair = Some((tp.alpha, tp.beta));
        self
    }

    fn minus_shifted(&self, z: Complex64) -> Complex64 {
        self.energy - self.spec.eval(z, self.eps)
    }

    fn label(&self, root: Complex64) -> TurningLabel {
        if let Some((a, b)) = self.pair {
            if (root - a).norm() < 1e-8 * (1.0 + a.norm()) {
                return TurningLabel::Alpha;
            }
            if (root - b).norm() < 1e-8 * (1.0 + b.norm()) {
                return TurningLabel::Beta;
            }
        }
        TurningLabel::Other(root)
    }

    /// `∫_{tp}^{z} q dw` on the straight segment, with `q` fixed to `q_end`
    /// at `z`.
    fn initial_phase(&self, tp: Complex64, z: Complex64, q_end: Complex64) -> Complex64 {
        // -(V - E)(w) = -(w - tp) G(w) with w = tp + d s^2, so
        // q = s (-d G)^{1/2} and dw = 2 d s ds
        let d = z - tp;
        let g = self.spec.shifted_poly(self.energy, self.eps).deflate(tp);
        let mut root = q_end;
        let rule = legendre(12);
        let mut sum = Complex64::new(0.0, 0.0);
        for (t, w) in rule.nodes.iter().zip(&rule.weights).rev() {
            let s = 0.5 * (t + 1.0);
            let value = -d * g.eval(tp + d * s * s);
            root = continue_sqrt(root, value).unwrap_or(root);
            sum += 0.5 * w * s * s * root;
        }
        2.0 * d * sum
    }

    fn velocity(&self, q: Complex64, sigma: f64, kind: LineKind) -> Complex64 {
        let dir = q.conj() / q.norm() * sigma;
        match kind {
            LineKind::Stokes => dir,
            LineKind::AntiStokes => I * dir,
        }
    }

    pub fn trace(&self, tp_point: Complex64, dir: Complex64, kind: LineKind, max_len: f64) -> Result<StokesPolyline> {
        let dir = dir / dir.norm();
        let start = tp_point + dir * self.opts.start_offset;
        let mut q = self.minus_shifted(start).sqrt();
        let v0 = self.velocity(q, 1.0, kind);
        let sigma = if (v0 * dir.conj()).re >= 0.0 { 1.0 } else { -1.0 };

        let mut z = start;
        let mut phase = self.initial_phase(tp_point, start, q);
        let monotone = |p: Complex64| match kind {
            LineKind::Stokes => p.re,
            LineKind::AntiStokes => p.im,
        };
        let defect_of = |p: Complex64| match kind {
            LineKind::Stokes => p.im.abs(),
            LineKind::AntiStokes => p.re.abs(),
        };
        let mut points = vec![z];
        let mut arclength = vec![0.0];
        let mut phase_along = vec![monotone(phase)];
        let mut max_defect = defect_of(phase);
        let mut s = 0.0;
        let rule = legendre(4);
        let max_iterations = (max_len / MIN_STEP.max(self.opts.max_step * 1e-6)) as usize + 1000;

        let termination = 'outer: loop {
            if points.len() > max_iterations {
                return Err(Error::StalledStep { at: z });
            }
            if !self.window.contains(z) {
                break Termination::LeftWindow;
            }
            if s >= max_len {
                break Termination::MaxLength;
            }
            let mut nearest = f64::INFINITY;
            for root in &self.roots {
                let d = (z - root).norm();
                let own = (root - tp_point).norm() < 1e-8 * (1.0 + tp_point.norm());
                if d < self.opts.capture_radius && !(own && s < 10.0 * self.opts.start_offset) {
                    break 'outer Termination::NearTurningPoint { which: self.label(*root), at: *root };
                }
                nearest = nearest.min(d);
            }
            let h = self.opts.max_step.min(nearest / 4.0).min(max_len - s + 1e-15);
            if h < MIN_STEP {
                return Err(Error::StalledStep { at: z });
            }

            // RK4 in arclength with the root tracked stage by stage
            let mut stage_q = q;
            let slope = |p: Complex64, prev: Complex64| -> Option<(Complex64, Complex64)> {
                let next = continue_sqrt(prev, self.minus_shifted(p))?;
                Some((self.velocity(next, sigma, kind), next))
            };
            let Some((k1, _)) = slope(z, stage_q) else { break Termination::BranchJump { at: z } };
            let p2 = z + k1 * (h / 2.0);
            let Some((k2, q2)) = slope(p2, stage_q) else { break Termination::BranchJump { at: p2 } };
            stage_q = q2;
            let p3 = z + k2 * (h / 2.0);
            let Some((k3, q3)) = slope(p3, stage_q) else { break Termination::BranchJump { at: p3 } };
            stage_q = q3;
            let p4 = z + k3 * h;
            let Some((k4, _)) = slope(p4, stage_q) else { break Termination::BranchJump { at: p4 } };
            let next = z + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);

            // ∫ q dz along the chord; q is analytic here so this equals the
            // integral along the traced curve
            let mut piece = Complex64::new(0.0, 0.0);
            let mut qc = q;
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let p = z + (next - z) * (0.5 * (t + 1.0));
                match continue_sqrt(qc, self.minus_shifted(p)) {
                    Some(v) => qc = v,
                    None => break 'outer Termination::BranchJump { at: p },
                }
                piece += 0.5 * w * qc;
            }
            let Some(q_next) = continue_sqrt(qc, self.minus_shifted(next)) else {
                break Termination::BranchJump { at: next };
            };
            phase += piece * (next - z);
            q = q_next;
            s += (next - z).norm();
            z = next;
            points.push(z);
            arclength.push(s);
            phase_along.push(monotone(phase));
            max_defect = max_defect.max(defect_of(phase));
        };

        Ok(StokesPolyline {
            kind,
            start: tp_point,
            start_direction: dir,
            points,
            arclength,
            phase_along,
            max_defect,
            termination,
        })
    }
}

/// Traces one line from `start` in direction `dir` with default options.
#[allow(clippy::too_many_arguments)]
pub fn trace_line(
    spec: &PotentialSpec,
    energy: Complex64,
    eps: impl Into<Complex64>,
    start: Complex64,
    dir: Complex64,
    kind: LineKind,
    max_len: f64,
    window: Window,
) -> Result<StokesPolyline> {
    Tracer::new(spec, energy, eps, window, TraceOptions::default()).trace(start, dir, kind, max_len)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Connection {
    pub from: TurningLabel,
    pub to: TurningLabel,
    /// Index into `StokesGraph::lines`.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesGraph {
    pub energy: Complex64,
    pub eps: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Three Stokes lines from `alpha`, then three from `beta`, then the
    /// anti-Stokes lines if requested.
    pub lines: Vec<StokesPolyline>,
    pub connections: Vec<Connection>,
    /// Number of distinct lines joining `alpha` and `beta`.
    pub connection_count: usize,
    /// Smallest distance from a Stokes line of one turning point to the
    /// other turning point.
    pub closest_approach: f64,
}

/// Stokes lines from both turning points and the connections between them.
pub fn stokes_graph(
    spec: &PotentialSpec,
    energy: Complex64,
    eps: impl Into<Complex64>,
    window: Window,
    max_len: f64,
) -> Result<StokesGraph> {
    stokes_graph_with(spec, energy, eps.into(), window, max_len, TraceOptions::default(), false)
}

pub fn stokes_graph_with(
    spec: &PotentialSpec,
    energy: Complex64,
    eps: Complex64,
    window: Window,
    max_len: f64,
    opts: TraceOptions,
    include_anti: bool,
) -> Result<StokesGraph> {
    let tp = find_turning_pair(spec, energy, eps, None)?;
    let tracer = Tracer::new(spec, energy, eps, window, opts).with_pair(&tp);
    let mut jobs = Vec::new();
    let kinds: &[LineKind] = if include_anti { &[LineKind::Stokes, LineKind::AntiStokes] } else { &[LineKind::Stokes] };
    for &kind in kinds {
        for point in [tp.alpha, tp.beta] {
            for dir in initial_directions(spec, eps, point, kind)? {
                jobs.push((point, dir, kind));
            }
        }
    }
    let lines = jobs
        .par_iter()
        .map(|(point, dir, kind)| tracer.trace(*point, *dir, *kind, max_len))
        .collect::<Result<Vec<_>>>()?;

    let mut connections = Vec::new();
    let mut closest_approach = f64::INFINITY;
    let (mut from_alpha, mut from_beta) = (0, 0);
    for (i, line) in lines.iter().enumerate() {
        if line.kind != LineKind::Stokes {
            continue;
        }
        let from_is_alpha = line.start == tp.alpha;
        let (from, other) = if from_is_alpha { (TurningLabel::Alpha, tp.beta) } else { (TurningLabel::Beta, tp.alpha) };
        closest_approach = closest_approach.min(line.distance_to(other));
        if let Termination::NearTurningPoint { which, .. } = line.termination {
            let reached_other = matches!(
                (from, which),
                (TurningLabel::Alpha, TurningLabel::Beta) | (TurningLabel::Beta, TurningLabel::Alpha)
            );
            if reached_other {
                if from_is_alpha {
                    from_alpha += 1;
                } else {
                    from_beta += 1;
                }
                connections.push(Connection { from, to: which, line: i });
            }
        }
    }

    Ok(StokesGraph {
        energy,
        eps,
        alpha: tp.alpha,
        beta: tp.beta,
        lines,
        connections,
        connection_count: from_alpha.max(from_beta),
        closest_approach,
    })
}

/// Roots of `V_eps - E`, the candidate turning points.
pub fn turning_points(spec: &PotentialSpec, energy: Complex64, eps: impl Into<Complex64>) -> Vec<Complex64> {
    let poly: Poly = spec.shifted_poly(energy, eps);
    poly.roots()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_potential, Term};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn harmonic() -> PotentialSpec {
        make_potential(vec![Term::new(1.0, 2)], vec![Term::new(1.0, 1)], 1.0, Window::new([-3.0, 3.0], [-2.0, 2.0]))
            .unwrap()
    }

    fn args(d: [Complex64; 3]) -> Vec<f64> {
        d.iter().map(|v| v.arg()).collect()
    }

    fn close_set(got: Vec<f64>, want: &[f64]) -> bool {
        want.iter().all(|w| {
            got.iter().any(|g| {
                let mut d = (g - w).rem_euclid(2.0 * PI);
                if d > PI {
                    d = 2.0 * PI - d;
                }
                d < 1e-12
            })
        })
    }

    #[test]
    fn local_model_directions() {
        let s = directions_for_slope(c(1.0, 0.0), LineKind::Stokes);
        assert!(close_set(args(s), &[PI / 3.0, PI, -PI / 3.0]));
        let spec = harmonic();
        let at_beta = initial_directions(&spec, 0.0, c(1.0, 0.0), LineKind::Stokes).unwrap();
        assert!(close_set(args(at_beta), &[PI / 3.0, PI, -PI / 3.0]));
        let at_alpha = initial_directions(&spec, 0.0, c(-1.0, 0.0), LineKind::Stokes).unwrap();
        assert!(close_set(args(at_alpha), &[0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0]));
        let anti = initial_directions(&spec, 0.0, c(1.0, 0.0), LineKind::AntiStokes).unwrap();
        assert!(close_set(args(anti), &[0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0]));
    }

    #[test]
    fn rotating_the_slope_rotates_directions_by_a_third() {
        let slope = c(0.7, -1.3);
        let psi = 0.4;
        let before = args(directions_for_slope(slope, LineKind::Stokes));
        let after = args(directions_for_slope(slope * Complex64::from_polar(1.0, psi), LineKind::Stokes));
        let shifted: Vec<f64> = before.iter().map(|a| a - psi / 3.0).collect();
        assert!(close_set(after, &shifted));
    }

    #[test]
    fn stokes_and_anti_stokes_alternate() {
        let slope = c(-0.3, 2.1);
        let mut all: Vec<f64> = args(directions_for_slope(slope, LineKind::Stokes))
            .into_iter()
            .chain(args(directions_for_slope(slope, LineKind::AntiStokes)))
            .map(|a| a.rem_euclid(2.0 * PI))
            .collect();
        all.sort_by(f64::total_cmp);
        for k in 0..6 {
            let gap = (all[(k + 1) % 6] - all[k]).rem_euclid(2.0 * PI);
            assert!((gap - PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn well_segment_connects_turning_points() {
        let spec = harmonic();
        let line = trace_line(&spec, c(1.0, 0.0), 0.0, c(1.0, 0.0), c(-1.0, 0.0), LineKind::Stokes, 10.0, spec.window())
            .unwrap();
        assert!(matches!(line.termination, Termination::NearTurningPoint { at, .. } if (at + 1.0).norm() < 1e-9));
        assert!(line.points.iter().all(|p| p.im.abs() < 1e-9));
        assert!(line.max_defect < 1e-6 * line.length().max(1e-3));
        assert!(line.points.windows(2).all(|w| (w[1] - w[0]).norm() <= 1e-2 + 1e-12));
    }

    #[test]
    fn anti_stokes_leaves_along_real_axis() {
        let spec = harmonic();
        let line =
            trace_line(&spec, c(1.0, 0.0), 0.0, c(1.0, 0.0), c(1.0, 0.0), LineKind::AntiStokes, 10.0, spec.window())
                .unwrap();
        assert_eq!(line.termination, Termination::LeftWindow);
        assert!(line.points.iter().all(|p| p.im.abs() < 1e-9));
        assert!(line.max_defect < 1e-9);
        assert!(line.phase_along.windows(2).all(|w| w[1] >= w[0]) || line.phase_along.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn shifted_segment_connects() {
        let spec = harmonic();
        let g = stokes_graph(&spec, c(1.0, 0.0), 0.2, spec.window(), 10.0).unwrap();
        assert_eq!(g.connection_count, 1);
        let line = &g.lines[g.connections[0].line];
        assert!(line.points.iter().all(|p| (p.im + 0.1).abs() < 1e-8), "{:?}", &line.points[..3]);
    }

    #[test]
    fn real_energy_has_one_connection_and_complex_energy_none() {
        let spec = harmonic();
        let g = stokes_graph(&spec, c(1.0, 0.0), 0.0, spec.window(), 10.0).unwrap();
        assert_eq!(g.connection_count, 1);
        assert_eq!(g.lines.len(), 6);
        for line in &g.lines {
            assert!(line.max_defect < 1e-6 * line.length().max(1e-3), "{}", line.max_defect);
        }
        let g = stokes_graph(&spec, c(1.0, 0.05), 0.0, spec.window(), 10.0).unwrap();
        assert_eq!(g.connection_count, 0);
        assert!(g.closest_approach > 1e-2, "{}", g.closest_approach);
    }

    #[test]
    fn halving_the_step_moves_lines_little() {
        let spec = harmonic();
        let e = c(1.0, 0.05);
        let coarse = Tracer::new(&spec, e, 0.1, spec.window(), TraceOptions::default());
        let fine = Tracer::new(&spec, e, 0.1, spec.window(), TraceOptions { max_step: 5e-3, ..Default::default() });
        let tp = find_turning_pair(&spec, e, 0.1, None).unwrap();
        for dir in initial_directions(&spec, 0.1, tp.beta, LineKind::Stokes).unwrap() {
            let a = coarse.trace(tp.beta, dir, LineKind::Stokes, 4.0).unwrap();
            let b = fine.trace(tp.beta, dir, LineKind::Stokes, 4.0).unwrap();
            let len = a.length().min(b.length());
            for i in 0..=50 {
                let s = len * i as f64 / 50.0;
                assert!((a.point_at(s) - b.point_at(s)).norm() < 1e-4);
            }
        }
    }
}

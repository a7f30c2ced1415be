//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 hypothesis violation,
//! 3 numerical failure. Failures print the error name on stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::action::{action_integral, ActionValue};
use crate::bs::{attach_shooting, solve_bs};
use crate::error::Error;
use crate::potential::{parse_spec, PotentialSpec, Window};
use crate::shooting::{certify, ShootOptions};
use crate::stokes::{stokes_graph_with, TraceOptions};
use crate::turning::find_turning_pair;
use crate::wkb::{transport_coeffs, wkb_residual_order, WkbGrid};

#[derive(Debug, Parser)]
#[command(name = "ptwell", version, about = "Semiclassical spectra of PT-symmetric single-well operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bohr–Sommerfeld eigenvalues in a real window, checked by shooting.
    Spectrum(SpectrumArgs),
    /// Action and period at one energy or along a real energy range.
    Action(ActionArgs),
    /// WKB amplitudes and phase right of the well, with residual orders.
    Wkb(WkbArgs),
    /// Stokes lines from both turning points.
    Stokes(StokesArgs),
    /// Winding count against real zeros in a rectangle.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Potential JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eps: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub h: f64,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub window: Vec<f64>,
    #[arg(long)]
    pub box_l: Option<f64>,
    /// Skip the shooting check.
    #[arg(long)]
    pub no_shoot: bool,
}

#[derive(Debug, Args)]
pub struct ActionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Single complex energy.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub energy: Option<Vec<f64>>,
    /// Real energy range, sampled at `--points` energies.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,
    #[arg(long, default_value_t = 11)]
    pub points: usize,
    #[arg(long, default_value_t = crate::action::DEFAULT_NODES)]
    pub nodes: usize,
}

#[derive(Debug, Args)]
pub struct WkbArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub energy: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Grid range `[start, x_max]`; defaults from the well.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,
    /// Grid size (odd).
    #[arg(long)]
    pub points: Option<usize>,
    /// Step sizes for the residual-order check.
    #[arg(long, num_args = 2.., default_values_t = [0.1, 0.05, 0.025])]
    pub h: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct StokesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub energy: Option<Vec<f64>>,
    /// Tracing window `re_lo re_hi im_lo im_hi`; the spec window by default.
    #[arg(long, num_args = 4, value_names = ["A", "B", "C", "D"], allow_negative_numbers = true)]
    pub rect: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20.0)]
    pub max_len: f64,
    /// Also trace anti-Stokes lines.
    #[arg(long)]
    pub anti: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub h: f64,
    #[arg(long, num_args = 4, value_names = ["A", "B", "C", "D"], allow_negative_numbers = true)]
    pub rect: Vec<f64>,
    #[arg(long)]
    pub box_l: Option<f64>,
    /// Boundary samples per side.
    #[arg(long, default_value_t = 16)]
    pub points: usize,
    /// Real scan samples.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Module(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Module(Error::InvalidArgument(_) | Error::SpecFormat(_)) => 1,
            CliError::Module(e) if e.is_hypothesis_violation() => 2,
            CliError::Module(_) => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Io { .. } => "Io",
            CliError::Module(e) => e.name(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    configure_threads();
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {}", e.name(), e);
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("PTWELL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    let (common, text) = match command {
        Command::Spectrum(a) => (&a.common, spectrum(a)?),
        Command::Action(a) => (&a.common, action(a)?),
        Command::Wkb(a) => (&a.common, wkb(a)?),
        Command::Stokes(a) => (&a.common, stokes(a)?),
        Command::Certify(a) => (&a.common, certify_cmd(a)?),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn load(common: &Common) -> CliResult<PotentialSpec> {
    let text = std::fs::read_to_string(&common.spec)
        .map_err(|source| CliError::Io { path: common.spec.display().to_string(), source })?;
    let spec = parse_spec(&text)?;
    // the single-well hypothesis is checked before any numerics run
    spec.well_interval()?;
    Ok(spec)
}

fn positive_h(h: f64) -> CliResult<f64> {
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(CliError::Usage(format!("--h must be positive, got {h}")))
    }
}

fn interval(v: &[f64], flag: &str) -> CliResult<(f64, f64)> {
    match v {
        [a, b] if a < b => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("{flag} needs A < B"))),
    }
}

fn rectangle(v: &[f64]) -> CliResult<Window> {
    match v {
        [a, b, c, d] if a < b && c < d => Ok(Window::new([*a, *b], [*c, *d])),
        _ => Err(CliError::Usage("--rect needs A < B and C < D".into())),
    }
}

fn energy_arg(v: &Option<Vec<f64>>, spec: &PotentialSpec) -> Complex64 {
    match v.as_deref() {
        Some([re, im]) => Complex64::new(*re, *im),
        _ => Complex64::new(spec.e0(), 0.0),
    }
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn shoot_options(box_l: Option<f64>) -> CliResult<ShootOptions> {
    match box_l {
        Some(l) if !(l > 0.0) => Err(CliError::Usage("--box-l must be positive".into())),
        Some(l) => Ok(ShootOptions::default().with_box_l(l)),
        None => Ok(ShootOptions::default()),
    }
}

fn spectrum(a: &SpectrumArgs) -> CliResult<String> {
    let spec = load(&a.common)?;
    let h = positive_h(a.h)?;
    let window = interval(&a.window, "--window")?;
    let mut records = solve_bs(&spec, a.common.eps, h, window)?;
    if !a.no_shoot {
        attach_shooting(&spec, a.common.eps, h, &mut records, shoot_options(a.box_l)?)?;
    }
    let mut out = String::from("k,e_bs_re,e_bs_im,e_shoot_re,e_shoot_im,im_abs,bs_residual\n");
    for r in &records {
        let (sr, si) = match r.e_shoot {
            Some(e) => (num(e.re), num(e.im)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            num(r.e_bs.re),
            num(r.e_bs.im),
            sr,
            si,
            num(r.im_abs),
            num(r.bs_residual)
        );
    }
    Ok(out)
}

fn action(a: &ActionArgs) -> CliResult<String> {
    let spec = load(&a.common)?;
    if a.nodes == 0 {
        return Err(CliError::Usage("--nodes must be positive".into()));
    }
    let energies: Vec<Complex64> = match (&a.energy, &a.window) {
        (Some(e), _) => vec![Complex64::new(e[0], e[1])],
        (None, Some(w)) => {
            let (lo, hi) = interval(w, "--window")?;
            if a.points < 2 {
                return Err(CliError::Usage("--points must be at least 2".into()));
            }
            (0..a.points).map(|i| Complex64::new(lo + (hi - lo) * i as f64 / (a.points - 1) as f64, 0.0)).collect()
        }
        (None, None) => vec![Complex64::new(spec.e0(), 0.0)],
    };
    let mut out = String::from("e_re,e_im,action_re,action_im,period_re,period_im,nodes,est_error\n");
    let mut seed = None;
    for e in energies {
        let tp = find_turning_pair(&spec, e, a.common.eps, seed.as_ref())?;
        let v: ActionValue = action_integral(&spec, &tp, a.nodes)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(e.re),
            num(e.im),
            num(v.action.re),
            num(v.action.im),
            num(v.period.re),
            num(v.period.im),
            v.nodes_used,
            num(v.est_error)
        );
        seed = Some(tp);
    }
    Ok(out)
}

fn wkb(a: &WkbArgs) -> CliResult<String> {
    let spec = load(&a.common)?;
    let energy = energy_arg(&a.energy, &spec);
    let tp = find_turning_pair(&spec, energy, a.common.eps, None)?;
    let mut grid = WkbGrid::default_for(&spec)?;
    if let Some(w) = &a.window {
        let (lo, hi) = interval(w, "--window")?;
        grid = WkbGrid::geometric(lo, hi, grid.n);
    }
    if let Some(n) = a.points {
        grid.n = n;
    }
    if a.h.iter().any(|h| !(*h > 0.0)) {
        return Err(CliError::Usage("--h values must be positive".into()));
    }
    let expansion = transport_coeffs(&spec, &tp, a.order, grid)?;
    let mut out = String::new();
    let _ = writeln!(out, "# tail_estimate {}", num(expansion.tail_estimate));
    for n in 0..=a.order {
        let r = wkb_residual_order(&spec, &tp, n, &a.h)?;
        let orders: Vec<String> = r.orders.iter().map(|p| num(*p)).collect();
        let floors: Vec<&str> = r.floor_reached.iter().map(|f| if *f { "floor" } else { "ok" }).collect();
        let _ = writeln!(out, "# residual_order N={} p={} status={}", n, orders.join(";"), floors.join(";"));
    }
    out.push('x');
    for k in 0..=a.order {
        let _ = write!(out, ",a{k}_re,a{k}_im");
    }
    out.push_str(",phi_re,phi_im\n");
    for (j, x) in expansion.points.iter().enumerate() {
        out.push_str(&num(*x));
        for ak in &expansion.a {
            let _ = write!(out, ",{},{}", num(ak[j].re), num(ak[j].im));
        }
        let _ = writeln!(out, ",{},{}", num(expansion.phase[j].re), num(expansion.phase[j].im));
    }
    Ok(out)
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string(value).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn stokes(a: &StokesArgs) -> CliResult<String> {
    let spec = load(&a.common)?;
    let energy = energy_arg(&a.energy, &spec);
    let window = match &a.rect {
        Some(r) => rectangle(r)?,
        None => spec.window(),
    };
    if !(a.max_len > 0.0) {
        return Err(CliError::Usage("--max-len must be positive".into()));
    }
    let graph = stokes_graph_with(
        &spec,
        energy,
        Complex64::new(a.common.eps, 0.0),
        window,
        a.max_len,
        TraceOptions::default(),
        a.anti,
    )?;
    to_json(&graph)
}

fn certify_cmd(a: &CertifyArgs) -> CliResult<String> {
    let spec = load(&a.common)?;
    let h = positive_h(a.h)?;
    if a.common.eps < 0.0 {
        return Err(CliError::Usage("certify needs a real eps >= 0".into()));
    }
    let rect = rectangle(&a.rect)?;
    let cert = certify(&spec, a.common.eps, h, rect, a.points, a.grid, shoot_options(a.box_l)?)?;
    to_json(&cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Module(Error::SingleWellViolation { crossings: 4 }).exit_code(), 2);
        assert_eq!(CliError::Module(Error::BranchJump { at: Complex64::new(0.0, 0.0) }).exit_code(), 3);
        assert_eq!(CliError::Module(Error::SpecFormat("bad".into())).exit_code(), 1);
    }

    #[test]
    fn parses_negative_rectangle() {
        let cli = Cli::try_parse_from([
            "ptwell", "certify", "--spec", "s.json", "--eps", "0.2", "--h", "0.1", "--rect", "0.05", "0.55", "-0.1", "0.1",
        ])
        .unwrap();
        match cli.command {
            Command::Certify(a) => assert_eq!(a.rect, vec![0.05, 0.55, -0.1, 0.1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_spec_is_usage_error() {
        assert_eq!(run(["ptwell", "spectrum", "--h", "0.1", "--window", "0", "1"]), 1);
    }
}

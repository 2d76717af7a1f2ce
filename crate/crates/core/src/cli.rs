//! Command-line front end. Every subcommand writes plot-ready data: a CSV
//! (header row, LF endings, 17 significant digits) plus a `.json` sidecar
//! next to it, or a single JSON document with `--format json`.
//!
//! Exit codes: 0 computed, 2 validation error, 3 numerical guard, 4 I/O.

use std::f64::consts::SQRT_2;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dynamics::{
    absdev_curve, classicality_check_with_tol, negativity_window, pi2_origin_analytic,
    pi2_origin_numeric, pi2_zero_crossing, AbsDevCurve, ClassicalityReport, EvolutionSpec,
};
use crate::error::Error;
use crate::homodyne::{run_experiment, RunRecord, WitnessConfig};
use crate::output::{self, fmt_f64};
use crate::phase_space::{rasterize, GridSidecar, GridSpec};
use crate::states::{CatStateParams, CoherentStateParams, Convention, State, StateDescriptor};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "wignerkin",
    version,
    about = "Free-particle Wigner dynamics, negative conditional kinetic energy and a homodyne negativity witness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rasterize the Wigner function of the chosen state on a grid.
    Wigner(WignerArgs),
    /// π₂(0; t) from the grid next to the closed form, over a time grid.
    Pi2(Pi2Args),
    /// Absolute deviation ⟨|x|⟩(t), its derivatives and the classical bound.
    Absdev(AbsdevArgs),
    /// Simulated homodyne curvature witness.
    Homodyne(HomodyneArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Cat,
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    AsPrinted,
    Paper,
    UnitNorm,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::AsPrinted => Convention::AsPrinted,
            ConventionArg::Paper => Convention::PaperScaled,
            ConventionArg::UnitNorm => Convention::UnitNorm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// State to build.
    #[arg(long, value_enum, default_value_t = StateKind::Cat)]
    pub state: StateKind,
    /// Position displacement x0.
    #[arg(long, default_value_t = SQRT_2, allow_hyphen_values = true)]
    pub x0: f64,
    /// Momentum displacement p0.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p0: f64,
    /// Particle mass.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mass: f64,
    /// Overall scale of the cat Wigner function.
    #[arg(long, value_enum, default_value_t = ConventionArg::Paper)]
    pub convention: ConventionArg,
    /// Nodes per axis (one is added when x = 0 must be a grid line).
    #[arg(long, default_value_t = 1024)]
    pub grid_n: usize,
    /// Half-width of the square phase-space window.
    #[arg(long, default_value_t = 12.0, allow_hyphen_values = true)]
    pub grid_window: f64,
    /// Override the lower x bound.
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    /// Override the upper x bound.
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Override the lower p bound.
    #[arg(long, allow_hyphen_values = true)]
    pub p_min: Option<f64>,
    /// Override the upper p bound.
    #[arg(long, allow_hyphen_values = true)]
    pub p_max: Option<f64>,
    /// Random seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output path; stdout when omitted (no sidecar then).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct WignerArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TimeGridArgs {
    /// First time.
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: Option<f64>,
    /// Last time.
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    /// Number of times (inclusive of both ends).
    #[arg(long)]
    pub t_points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct Pi2Args {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Time grid [default: 0 to 3, 61 points].
    #[command(flatten)]
    pub times: TimeGridArgs,
    /// Half-width of the window used for late times.
    #[arg(long, default_value_t = 16.0)]
    pub wide_window: f64,
    /// Times above this use the wide window.
    #[arg(long, default_value_t = 1.5)]
    pub wide_after: f64,
}

#[derive(Debug, Clone, Args)]
pub struct AbsdevArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Time grid [default: 0 to 1, 21 points].
    #[command(flatten)]
    pub times: TimeGridArgs,
    /// Rows with d2 below −tol_neg are flagged.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_neg: f64,
}

#[derive(Debug, Clone, Args)]
pub struct HomodyneArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// τ = tan θ values; must contain 0 and a pair ±h.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![-0.2, 0.0, 0.2])]
    pub taus: Vec<f64>,
    /// Quadrature samples per angle.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Confidence level of the bootstrap interval.
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 10_000)]
    pub bootstrap: usize,
    /// Also write raw outcomes as CSV `theta,sample`.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Lib(#[from] Error),
    #[error("invalid argument `--{flag}`: {reason}")]
    Usage { flag: &'static str, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => EXIT_VALIDATION,
            CliError::Lib(Error::Io { .. }) => EXIT_IO,
            CliError::Lib(e) if e.is_numerical_guard() => EXIT_NUMERICAL,
            CliError::Lib(Error::Serialize(_)) => EXIT_IO,
            CliError::Lib(_) => EXIT_VALIDATION,
        }
    }
}

fn usage(flag: &'static str, reason: impl Into<String>) -> CliError {
    CliError::Usage {
        flag,
        reason: reason.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Wigner(a) => cmd_wigner(&a),
        Command::Pi2(a) => cmd_pi2(&a),
        Command::Absdev(a) => cmd_absdev(&a),
        Command::Homodyne(a) => cmd_homodyne(&a),
    }
}

impl CommonArgs {
    pub fn state(&self) -> CliResult<State> {
        Ok(match self.state {
            StateKind::Cat => State::Cat(CatStateParams::new(
                self.x0,
                self.p0,
                self.convention.into(),
            )?),
            StateKind::Coherent => State::Coherent(CoherentStateParams::new(self.x0, self.p0)?),
        })
    }

    pub fn grid(&self) -> CliResult<GridSpec> {
        self.grid_with_window(self.grid_window)
    }

    fn grid_with_window(&self, half: f64) -> CliResult<GridSpec> {
        if !(half > 0.0 && half.is_finite()) {
            return Err(usage(
                "grid-window",
                format!("must be a positive number, got {half}"),
            ));
        }
        Ok(GridSpec::new(
            self.x_min.unwrap_or(-half),
            self.x_max.unwrap_or(half),
            self.p_min.unwrap_or(-half),
            self.p_max.unwrap_or(half),
            self.grid_n,
            self.grid_n,
        )?)
    }

    pub fn mass(&self) -> CliResult<f64> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(usage("mass", format!("must be > 0, got {}", self.mass)));
        }
        Ok(self.mass)
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

impl TimeGridArgs {
    fn times(&self, t_min: f64, t_max: f64, points: usize) -> CliResult<Vec<f64>> {
        let lo = self.t_min.unwrap_or(t_min);
        let hi = self.t_max.unwrap_or(t_max);
        let n = self.t_points.unwrap_or(points);
        if !lo.is_finite() || !hi.is_finite() {
            return Err(usage("t-min", "time bounds must be finite"));
        }
        if n == 0 {
            return Err(usage("t-points", "need at least one time"));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        if hi < lo {
            return Err(usage(
                "t-max",
                format!("t_max ({hi}) must be >= t_min ({lo})"),
            ));
        }
        Ok((0..n)
            .map(|k| crate::numeric::lerp_node(lo, hi, k, n))
            .collect())
    }
}

/// Primary output plus optional sidecar, written only after all
/// computation succeeded.
fn emit(out: Option<&Path>, body: &[u8], sidecar: Option<String>) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| Error::io(path, e))?;
            if let Some(json) = sidecar {
                let side = output::sidecar_path(path);
                std::fs::write(&side, json).map_err(|e| Error::io(side, e))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body)
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

fn check_out_path(out: Option<&Path>, format: Format, flag_hint: &'static str) -> CliResult<()> {
    if let (Some(path), Format::Csv) = (out, format) {
        if path.extension().is_some_and(|e| e == "json") {
            return Err(usage(
                flag_hint,
                format!(
                    "{} would collide with its JSON sidecar; use a .csv path",
                    path.display()
                ),
            ));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct GridDocument<'a> {
    #[serde(flatten)]
    sidecar: GridSidecar,
    state: StateDescriptor,
    values: &'a [f64],
}

#[derive(Serialize)]
struct GridSidecarDocument {
    #[serde(flatten)]
    sidecar: GridSidecar,
    state: StateDescriptor,
}

pub fn cmd_wigner(a: &WignerArgs) -> CliResult<()> {
    let c = &a.common;
    let state = c.state()?;
    let spec = c.grid()?;
    let format = c.format(Format::Csv);
    check_out_path(c.out.as_deref(), format, "out")?;

    let descriptor = state.descriptor();
    let g = rasterize(&state, spec, descriptor.convention_tag())?;
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            g.write_csv(&mut buf)?;
            let side = output::to_json_string(&GridSidecarDocument {
                sidecar: g.sidecar(),
                state: descriptor,
            })?;
            emit(c.out.as_deref(), &buf, Some(side))
        }
        Format::Json => {
            let doc = output::to_json_string(&GridDocument {
                sidecar: g.sidecar(),
                state: descriptor,
                values: g.values(),
            })?;
            emit(c.out.as_deref(), doc.as_bytes(), None)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Pi2Row {
    pub t: f64,
    pub pi2_numeric: f64,
    pub pi2_analytic: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Pi2Sidecar {
    pub state: StateDescriptor,
    pub convention: String,
    pub mass: f64,
    pub grid: GridSpec,
    pub wide_grid: GridSpec,
    pub wide_after: f64,
    /// Closed-form end of the negativity interval (x0 > 1 only).
    pub negativity_window: Option<f64>,
    /// Sign change of the measured π₂(0; t), refined by bisection.
    pub numeric_zero_crossing: Option<f64>,
}

pub fn cmd_pi2(a: &Pi2Args) -> CliResult<()> {
    let c = &a.common;
    let state = c.state()?;
    let mass = c.mass()?;
    let times = a.times.times(0.0, 3.0, 61)?;
    let grid = c.grid()?.with_origin_node()?;
    let wide = c.grid_with_window(a.wide_window)?.with_origin_node()?;
    let format = c.format(Format::Csv);
    check_out_path(c.out.as_deref(), format, "out")?;

    let descriptor = state.descriptor();
    // The closed form covers the cat with p0 = 0 and unit mass.
    let analytic_ok = matches!(state, State::Cat(_)) && c.p0 == 0.0;
    let spec_for = |t: f64| if t > a.wide_after { wide } else { grid };
    let rows: Vec<Pi2Row> = times
        .iter()
        .map(|&t| {
            let ev = EvolutionSpec::new(mass, t)?;
            let numeric = pi2_origin_numeric(&state, ev, spec_for(t), descriptor.convention_tag())?;
            Ok(Pi2Row {
                t,
                pi2_numeric: numeric,
                pi2_analytic: analytic_ok.then(|| pi2_origin_analytic(t / mass, c.x0)),
            })
        })
        .collect::<crate::Result<_>>()?;

    let mut crossing = None;
    for w in rows.windows(2) {
        if w[0].pi2_numeric < 0.0 && w[1].pi2_numeric >= 0.0 {
            let spec = if w[1].t > a.wide_after { wide } else { grid };
            crossing = pi2_zero_crossing(&state, mass, spec, w[0].t, w[1].t, 1e-7)?;
            break;
        }
    }
    let sidecar = Pi2Sidecar {
        state: descriptor,
        convention: descriptor.convention_tag().to_owned(),
        mass,
        grid,
        wide_grid: wide,
        wide_after: a.wide_after,
        negativity_window: if analytic_ok {
            negativity_window(c.x0).map(|t| t * mass)
        } else {
            None
        },
        numeric_zero_crossing: crossing,
    };

    match format {
        Format::Csv => {
            let mut w = output::csv_writer(Vec::new());
            if analytic_ok {
                w.write_record(["t", "pi2_numeric", "pi2_analytic"])
                    .map_err(Error::from)?;
            } else {
                w.write_record(["t", "pi2_numeric"]).map_err(Error::from)?;
            }
            for r in &rows {
                let mut rec = vec![fmt_f64(r.t), fmt_f64(r.pi2_numeric)];
                if let Some(v) = r.pi2_analytic {
                    rec.push(fmt_f64(v));
                }
                w.write_record(&rec).map_err(Error::from)?;
            }
            let buf = w
                .into_inner()
                .map_err(|e| Error::Serialize(e.to_string()))?;
            emit(
                c.out.as_deref(),
                &buf,
                Some(output::to_json_string(&sidecar)?),
            )
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                sidecar: &'a Pi2Sidecar,
                rows: &'a [Pi2Row],
            }
            let doc = output::to_json_string(&Doc {
                sidecar: &sidecar,
                rows: &rows,
            })?;
            emit(c.out.as_deref(), doc.as_bytes(), None)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AbsdevSidecar {
    pub state: StateDescriptor,
    pub mass: f64,
    pub grid: GridSpec,
    pub classicality: ClassicalityReport,
}

pub fn cmd_absdev(a: &AbsdevArgs) -> CliResult<()> {
    let c = &a.common;
    let state = c.state()?;
    let mass = c.mass()?;
    let times = a.times.times(0.0, 1.0, 21)?;
    let grid = c.grid()?.with_origin_node()?;
    if !(a.tol_neg >= 0.0) {
        return Err(usage("tol-neg", format!("must be >= 0, got {}", a.tol_neg)));
    }
    let format = c.format(Format::Csv);
    check_out_path(c.out.as_deref(), format, "out")?;

    let curve: AbsDevCurve = absdev_curve(&state, &times, mass, grid)?;
    let report = classicality_check_with_tol(&curve, a.tol_neg);
    let sidecar = AbsdevSidecar {
        state: state.descriptor(),
        mass,
        grid,
        classicality: report,
    };
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            curve.write_csv(&mut buf, a.tol_neg)?;
            emit(
                c.out.as_deref(),
                &buf,
                Some(output::to_json_string(&sidecar)?),
            )
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                sidecar: &'a AbsdevSidecar,
                curve: &'a AbsDevCurve,
            }
            let doc = output::to_json_string(&Doc {
                sidecar: &sidecar,
                curve: &curve,
            })?;
            emit(c.out.as_deref(), doc.as_bytes(), None)
        }
    }
}

pub fn cmd_homodyne(a: &HomodyneArgs) -> CliResult<()> {
    let c = &a.common;
    let state = c.state()?;
    let spec = c.grid()?;
    let cfg = WitnessConfig {
        tau_grid: a.taus.clone(),
        samples_per_angle: a.samples,
        seed: c.seed,
        confidence: a.confidence,
        bootstrap_resamples: a.bootstrap,
    };
    cfg.validate()?;
    let format = c.format(Format::Json);
    check_out_path(c.out.as_deref(), format, "out")?;

    let descriptor = state.descriptor();
    let g = rasterize(&state, spec, descriptor.convention_tag())?;
    let (record, run): (RunRecord, _) = run_experiment(descriptor, &g, &cfg)?;
    let json = record.to_json()?;

    if let Some(path) = &a.samples_out {
        let file = output::create_file(path)?;
        run.write_samples_csv(file)?;
    }
    match format {
        Format::Json => emit(c.out.as_deref(), json.as_bytes(), None),
        Format::Csv => {
            let mut buf = Vec::new();
            run.write_samples_csv(&mut buf)?;
            emit(c.out.as_deref(), &buf, Some(json))
        }
    }
}

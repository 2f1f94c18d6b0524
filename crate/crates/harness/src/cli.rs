//! `wpt-sim` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use wpt_core::coverage::{self, compute_coverage, log_space};
use wpt_core::node::{self, Schedule};
use wpt_core::propagation::SuperposedField;
use wpt_core::{NodeState, Scenario, SpacingScheme};

use crate::error::HarnessError;
use crate::regulatory::{validate_regulatory, RegulatoryProfile};
use crate::report::{self, Summary};
use crate::scenario_file::{GeometrySection, ScenarioFile, SchemeName, SweepSection};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default required-power sweep: -30 dBm to 10 dBm.
const DEFAULT_SWEEP: SweepSection = SweepSection { start_w: 1e-6, stop_w: 1e-2, points: 81 };

#[derive(Debug, Parser)]
#[command(name = "wpt-sim", version, about = "Multi-point wireless power coverage simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coverage fraction and summary; the per-position CSV goes to --out.
    Coverage(Common),
    /// Per-position average power CSV.
    Field(Common),
    /// Time-domain capacitor simulation at one position.
    NodeSim(NodeSimArgs),
    /// Minimum capacitance and maximum transmitter spacing.
    Design(Common),
    /// Coverage against required power.
    Sweep(SweepArgs),
    /// Regulatory compliance report.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Sp1,
    Sp2,
    Mp,
    Mpcsd,
}

impl From<SchemeArg> for SchemeName {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Sp1 => SchemeName::Sp1,
            SchemeArg::Sp2 => SchemeName::Sp2,
            SchemeArg::Mp => SchemeName::Mp,
            SchemeArg::Mpcsd => SchemeName::Mpcsd,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Scenario file; the reference deployment when omitted.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Sample interval, metres.
    #[arg(long, value_name = "M", allow_negative_numbers = true)]
    grid: Option<f64>,
    /// Guard band excluded at each end, metres.
    #[arg(long, value_name = "M", allow_negative_numbers = true)]
    guard: Option<f64>,
    /// Required RF power, watts.
    #[arg(long, value_name = "W", allow_negative_numbers = true)]
    preq: Option<f64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NodeSimArgs {
    #[command(flatten)]
    common: Common,
    /// Receiver position, metres; the line midpoint by default.
    #[arg(long, value_name = "M", allow_negative_numbers = true)]
    position: Option<f64>,
    /// Constant DC input, watts, instead of the rectified field.
    #[arg(long, value_name = "W", allow_negative_numbers = true)]
    input_w: Option<f64>,
    /// Start with the sensor initialisation still pending.
    #[arg(long)]
    cold: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// `start,stop,points` in watts, log-spaced.
    #[arg(long, value_name = "START,STOP,POINTS", value_parser = parse_sweep)]
    preq_sweep: Option<SweepSection>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Regulatory profile file; the Japanese 920 MHz profile by default.
    #[arg(long, value_name = "PATH")]
    profile: Option<PathBuf>,
}

fn parse_sweep(s: &str) -> Result<SweepSection, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [start, stop, points] = parts.as_slice() else {
        return Err("expected START,STOP,POINTS".into());
    };
    let sweep = SweepSection {
        start_w: start.parse().map_err(|e| format!("start: {e}"))?,
        stop_w: stop.parse().map_err(|e| format!("stop: {e}"))?,
        points: points.parse().map_err(|e| format!("points: {e}"))?,
    };
    sweep.validate()?;
    Ok(sweep)
}

/// Runs the CLI with `args` (program name first) and returns the exit code.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                HarnessError::Usage(_) => EXIT_USAGE,
                _ => EXIT_VALIDATION,
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, HarnessError> {
    match command {
        Command::Coverage(c) => coverage_cmd(&c, out),
        Command::Field(c) => field_cmd(&c, out),
        Command::NodeSim(a) => node_sim_cmd(&a, out),
        Command::Design(c) => design_cmd(&c, out),
        Command::Sweep(a) => sweep_cmd(&a, out),
        Command::Validate(a) => validate_cmd(&a, out),
    }
}

/// Loads the scenario file (or the reference defaults) and applies flags.
fn load(common: &Common) -> Result<(ScenarioFile, Scenario), HarnessError> {
    let mut file = match &common.scenario {
        Some(path) => ScenarioFile::read(path)?,
        None => ScenarioFile::reference_defaults(),
    };
    if let Some(s) = common.scheme {
        file.scheme = Some(s.into());
    }
    if common.grid.is_some() || common.guard.is_some() {
        let g = file.geometry.get_or_insert_with(GeometrySection::default);
        if let Some(grid) = common.grid {
            g.sample_interval_m = Some(grid);
        }
        if let Some(guard) = common.guard {
            g.guard_band_m = Some(guard);
        }
    }
    if let Some(p) = common.preq {
        file.required_power_w = Some(p);
    }
    let scenario = file.resolve()?;
    Ok((file, scenario))
}

fn io_err(e: std::io::Error) -> HarnessError {
    HarnessError::io("<stdout>", e)
}

/// `--out` first, then the scenario file's output section.
fn output_path(common: &Common, from_file: Option<&PathBuf>) -> Option<PathBuf> {
    common.out.clone().or_else(|| from_file.cloned())
}

fn coverage_cmd(common: &Common, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let (file, scenario) = load(common)?;
    let report = compute_coverage(&scenario)?;
    let csv = output_path(common, file.output.as_ref().and_then(|o| o.field_csv.as_ref()));
    if let Some(path) = &csv {
        report::emit_field_csv(&report, path)?;
    }
    let mut s = Summary::default();
    s.add("scheme", scenario.scheme.name())
        .add("samples", report.positions.len())
        .add("active", report.active_count())
        .add("coverage", format!("{:.3}", report.coverage))
        .add("coverage_finite_only", format!("{:.3}", report.coverage_finite_only))
        .float("required_power_w", report.required_power)
        .float("consumption_w", report.consumption)
        .add("coverage_is_lower_bound", report.lower_bound);
    if let Some(path) = &csv {
        s.add("field_csv", path.display());
    }
    s.write_to(out).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn field_cmd(common: &Common, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let (file, scenario) = load(common)?;
    let report = compute_coverage(&scenario)?;
    match output_path(common, file.output.as_ref().and_then(|o| o.field_csv.as_ref())) {
        Some(path) => {
            report::emit_field_csv(&report, &path)?;
            let mut s = Summary::default();
            s.add("rows", report.positions.len()).add("field_csv", path.display());
            s.write_to(out).map_err(io_err)?;
        }
        None => report::write_field_csv(&report, out).map_err(io_err)?,
    }
    Ok(EXIT_OK)
}

fn node_sim_cmd(args: &NodeSimArgs, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let (file, scenario) = load(&args.common)?;
    let cfg = &scenario.node;
    let position = args.position.unwrap_or(scenario.geometry.line_length / 2.0);
    let state = if args.cold { NodeState::cold(cfg) } else { NodeState::warm(cfg) };
    let schedule = Schedule::for_state(cfg, &state);
    let verdict = match args.input_w {
        Some(p) => {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(HarnessError::Usage(format!("--input-w must be a nonnegative number, got {p}")));
            }
            node::simulate(cfg, &state, |_| p, &schedule)?
        }
        None => {
            let field = SuperposedField::new(scenario.active_transmitters(), position, &scenario.budget)?;
            let rectifier = &scenario.rectifier;
            let input = |t: f64| rectifier.dc_output_or_zero(field.power_at(t)).unwrap_or(0.0);
            node::simulate(cfg, &state, input, &schedule)?
        }
    };
    let csv = output_path(&args.common, file.output.as_ref().and_then(|o| o.trajectory_csv.as_ref()));
    if let Some(path) = &csv {
        report::to_file(path, |w| report::write_trajectory_csv(&verdict, w))?;
    }
    let mut s = Summary::default();
    s.add("scheme", scenario.scheme.name());
    match args.input_w {
        Some(p) => s.float("dc_input_w", p),
        None => s.float("position_m", position),
    };
    s.add("start", if args.cold { "cold" } else { "warm" })
        .add("active", verdict.active)
        .float("delta_v_v", verdict.delta_v)
        .float("window_start_s", verdict.window_start)
        .float("window_end_s", verdict.window_end)
        .float("min_voltage_v", verdict.min_voltage)
        .add("browned_out", verdict.browned_out)
        .float("final_voltage_v", verdict.final_state.capacitor_voltage);
    if let Some(path) = &csv {
        s.add("trajectory_csv", path.display());
    }
    s.write_to(out).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn design_cmd(common: &Common, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let (_, scenario) = load(common)?;
    let p_req = scenario.required_power()?;
    let gamma = scenario.rectifier.efficiency(p_req)?;
    let c_min = node::min_capacitance(&scenario.node, p_req, gamma)?;
    let sp = coverage::max_spacing(SpacingScheme::SinglePoint, &scenario.budget, p_req)?;
    let csd = coverage::max_spacing(SpacingScheme::CarrierShift, &scenario.budget, p_req)?;
    let mut s = Summary::default();
    s.float("average_consumption_w", node::average_consumed_power(&scenario.node))
        .float("required_power_w", p_req)
        .float("efficiency_at_required", gamma)
        .float("c_min_f", c_min)
        .float("l_max_sp_m", sp)
        .float("l_max_mpcsd_m", csd)
        .float("l_max_ratio", csd / sp);
    s.write_to(out).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn sweep_cmd(args: &SweepArgs, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let (file, scenario) = load(&args.common)?;
    let sweep = args.preq_sweep.or(file.sweep).unwrap_or(DEFAULT_SWEEP);
    let grid = log_space(sweep.start_w, sweep.stop_w, sweep.points);
    let curve = coverage::coverage_curve(&scenario, &grid)?;
    match output_path(&args.common, file.output.as_ref().and_then(|o| o.sweep_csv.as_ref())) {
        Some(path) => {
            report::to_file(&path, |w| report::write_sweep_csv(&curve, w))?;
            let mut s = Summary::default();
            s.add("scheme", scenario.scheme.name()).add("rows", curve.len()).add("sweep_csv", path.display());
            s.write_to(out).map_err(io_err)?;
        }
        None => report::write_sweep_csv(&curve, out).map_err(io_err)?,
    }
    Ok(EXIT_OK)
}

fn validate_cmd(args: &ValidateArgs, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let (_, scenario) = load(&args.common)?;
    let profile = match &args.profile {
        Some(path) => RegulatoryProfile::load(Path::new(path))?,
        None => RegulatoryProfile::japan_920mhz(),
    };
    let violations = validate_regulatory(&scenario, &profile);
    let mut s = Summary::default();
    s.add("profile", &profile.name)
        .add("transmitters_checked", scenario.active_transmitters().len())
        .add("violations", violations.len());
    for v in &violations {
        s.add("violation", v);
    }
    s.add("compliant", violations.is_empty());
    s.write_to(out).map_err(io_err)?;
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_VALIDATION })
}

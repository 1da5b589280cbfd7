use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gridformer_cli::*;
use gridformer_converter::{ArchKind, Architecture, OMEGA0};
use gridformer_device::DEFAULT_BAND_HZ;
use gridformer_lti::FrequencyGrid;
use gridformer_network::DEFAULT_RISE_TIME;
use gridformer_strength::Thresholds;

#[derive(Parser)]
#[command(name = "gridformer", version, about = "Grid-forming strength analysis of converter-based power systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forming index of one converter behind a line
    Fi(FiArgs),
    /// System, grid and bus strength of a case
    Strength(StrengthArgs),
    /// Step current injection at one device bus
    Step(StepArgs),
    /// Grid-forming placement under a capacity budget
    Place(PlaceArgs),
    /// Critical SCR of one converter
    Cscr(CscrArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct DeviceArgs {
    /// Architecture: pll-pq, pll-pv, vsg, droop, voc, pll-gfm, ideal, none
    #[arg(long, value_parser = parse_kind)]
    arch: Option<ArchKind>,
    /// JSON object overriding architecture parameters
    #[arg(long)]
    params: Option<String>,
    /// Active power setpoint, pu
    #[arg(long, default_value_t = 0.5)]
    p0: f64,
    /// Reactive power (or voltage for pll-pv) setpoint, pu
    #[arg(long)]
    q0: Option<f64>,
    /// Line X/R-style ratio tau
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
}

#[derive(Args)]
struct FiArgs {
    #[command(flatten)]
    device: DeviceArgs,
    /// Case file (path or builtin:<name>) to take the device from
    #[arg(long, requires = "device_id")]
    case: Option<String>,
    /// Case bus id of the device
    #[arg(long = "device")]
    device_id: Option<u32>,
    /// Grid inductance, pu (1/SCR)
    #[arg(long, default_value_t = 0.3)]
    lg: f64,
    #[arg(long, default_value_t = 0.05)]
    f_min: f64,
    #[arg(long, default_value_t = 2000.0)]
    f_max: f64,
    #[arg(long, default_value_t = 500)]
    points: usize,
    /// Classification band lo:hi in Hz
    #[arg(long)]
    band: Option<String>,
    /// Parameter sweep, e.g. lg=0.1:0.5:5
    #[arg(long)]
    sweep_param: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct StrengthArgs {
    #[arg(long)]
    case: String,
    #[arg(long, default_value_t = 0.5)]
    very_weak: f64,
    #[arg(long, default_value_t = 1.0)]
    weak: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct StepArgs {
    #[arg(long)]
    case: String,
    /// Case bus id of the injection
    #[arg(long)]
    bus: u32,
    /// d-axis current step, pu
    #[arg(long, default_value_t = 0.1)]
    amp: f64,
    #[arg(long, default_value_t = 0.5)]
    t_end: f64,
    /// Time step, s (default 0.05/|fastest pole|)
    #[arg(long)]
    dt: Option<f64>,
    /// Rise time of the injection filter, s
    #[arg(long, default_value_t = DEFAULT_RISE_TIME)]
    rise: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exhaustive,
    Greedy,
}

#[derive(Args)]
struct PlaceArgs {
    #[arg(long)]
    case: String,
    /// Comma-separated interior bus ids (default: all interior buses)
    #[arg(long, value_delimiter = ',')]
    candidates: Vec<u32>,
    /// Total capacity budget, pu
    #[arg(long)]
    budget: f64,
    /// Comma-separated capacity levels, pu
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    sizes: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
    method: Method,
    /// Architecture of the placed units
    #[arg(long, value_parser = parse_kind, default_value = "vsg")]
    template: ArchKind,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CscrArgs {
    #[command(flatten)]
    device: DeviceArgs,
    /// Case file supplying gSCR for the stability margin
    #[arg(long)]
    case: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn parse_kind(s: &str) -> Result<ArchKind, String> {
    ArchKind::parse(s).ok_or_else(|| format!("unknown architecture '{s}'"))
}

fn parse_band(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Parse(format!("expected lo:hi, got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

fn device_arch(d: &DeviceArgs) -> Result<Architecture, CliError> {
    let kind = d.arch.ok_or_else(|| CliError::Parse("--arch is required".into()))?;
    let params = d
        .params
        .as_deref()
        .map(serde_json::from_str::<serde_json::Value>)
        .transpose()
        .map_err(|e| CliError::Parse(format!("--params: {e}")))?;
    resolve_arch(kind, params.as_ref())
}

fn default_q(arch: &Architecture, q0: Option<f64>) -> f64 {
    q0.unwrap_or(match arch.kind() {
        ArchKind::PllPv => 1.0,
        _ => 0.0,
    })
}

fn run_fi(a: FiArgs) -> Result<(), CliError> {
    let dev = match (&a.case, a.device_id) {
        (Some(c), Some(id)) => inline_from_case(&load_case(c)?, id)?,
        _ => {
            let arch = device_arch(&a.device)?;
            InlineDevice { arch, lg: a.lg, tau: a.device.tau, p0: a.device.p0, q_or_v: default_q(&arch, a.device.q0), omega0: OMEGA0 }
        }
    };
    let grid = FrequencyGrid::log_hz(a.f_min, a.f_max, a.points).map_err(|e| CliError::Parse(e.to_string()))?;
    let band = a.band.as_deref().map(parse_band).transpose()?.unwrap_or(DEFAULT_BAND_HZ);
    let sweep = a.sweep_param.as_deref().map(parse_sweep_param).transpose()?;
    let mut out = OutputDir::create(&a.common.out)?;
    let curves = gridformer_cli::fi_sweep(&dev, sweep.as_ref(), &grid, band)?;
    out.write("fi.csv", &fi_csv(&curves))?;
    out.write_json("fi.json", &curves)?;
    for c in &curves {
        let hinf = c.hinf.map_or("unstable".to_string(), |h| format!("{h:.4} at {:.2} Hz", c.hinf_peak_hz.unwrap_or(0.0)));
        println!(
            "{:<14} verdict {:?}  max FI in [{}, {}] Hz = {:.4}  ||S_v||inf = {hinf}",
            c.label, c.verdict.class, band.0, band.1, c.verdict.max_fi
        );
    }
    let config = json!({ "device": dev, "band_hz": band, "sweep": sweep, "f_min": a.f_min, "f_max": a.f_max, "points": a.points });
    out.finish("fi", a.case.as_deref(), &config)?;
    Ok(())
}

fn run_strength(a: StrengthArgs) -> Result<(), CliError> {
    let case = load_case(&a.case)?;
    let thresholds = Thresholds { very_weak: a.very_weak, weak: a.weak };
    let mut out = OutputDir::create(&a.common.out)?;
    let s = strength(&case, thresholds)?;
    out.write_json("report.json", &s)?;
    out.write("curves.csv", &s.csv)?;
    let r = &s.report;
    println!("min kappa {:.4} at {:.2} Hz: {:?}", r.worst_kappa, r.worst_omega / (2.0 * std::f64::consts::PI), r.classification);
    println!("gSCR {:.4}  weakest bus first: {:?}", r.gscr, s.ranking_bus_ids);
    if let Some(c) = &r.homogeneous {
        println!("homogeneous closed form: max |error| {:.2e} over {} points", c.max_abs_error, c.points);
    }
    out.finish("strength", Some(&a.case), &json!({ "thresholds": thresholds }))?;
    Ok(())
}

fn run_step(a: StepArgs) -> Result<(), CliError> {
    let case = load_case(&a.case)?;
    let opts = StepOptions { bus: a.bus, amp: a.amp, t_end: a.t_end, dt: a.dt, rise: a.rise };
    let mut out = OutputDir::create(&a.common.out)?;
    let s = step(&case, &opts)?;
    out.write("step.csv", &s.csv)?;
    out.write_json("step.json", &s)?;
    println!("{} samples at dt = {:.3e} s, peak |dU| = {:.5}", s.samples, s.dt, s.peak_norm);
    out.finish("step", Some(&a.case), &json!(opts))?;
    Ok(())
}

fn run_place(a: PlaceArgs) -> Result<(), CliError> {
    let case = load_case(&a.case)?;
    let method = match a.method {
        Method::Exhaustive => PlaceMethod::Exhaustive,
        Method::Greedy => PlaceMethod::Greedy,
    };
    let template = Architecture::default_for(a.template);
    let mut out = OutputDir::create(&a.common.out)?;
    let p = place(&case, &a.candidates, template, a.sizes.clone(), a.budget, method)?;
    out.write_json("placement.json", &p)?;
    print!("{}", p.table);
    let config = json!({ "candidates": a.candidates, "budget": a.budget, "sizes": a.sizes, "method": method, "template": a.template });
    out.finish("place", Some(&a.case), &config)?;
    Ok(())
}

fn run_cscr(a: CscrArgs) -> Result<(), CliError> {
    let arch = device_arch(&a.device)?;
    let case = a.case.as_deref().map(load_case).transpose()?;
    let q = default_q(&arch, a.device.q0);
    let mut out = OutputDir::create(&a.common.out)?;
    let c = cscr(&arch, a.device.p0, q, a.device.tau, case.as_ref())?;
    out.write_json("cscr.json", &c)?;
    println!("CSCR {:.4} ({} bisection steps)", c.cscr.scr, c.cscr.iterations);
    if let (Some(g), Some(m)) = (c.gscr, c.margin) {
        println!("gSCR {g:.4}, margin (gSCR - CSCR)/CSCR = {m:.4}");
    }
    let config = json!({ "arch": arch, "p0": a.device.p0, "q0_or_v0": q, "tau": a.device.tau });
    out.finish("cscr", a.case.as_deref(), &config)?;
    Ok(())
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GRIDFORMER_THREADS") else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| CliError::Parse(format!("GRIDFORMER_THREADS='{v}' is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Parse(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match cli.command {
        Command::Fi(a) => run_fi(a),
        Command::Strength(a) => run_strength(a),
        Command::Step(a) => run_step(a),
        Command::Place(a) => run_place(a),
        Command::Cscr(a) => run_cscr(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

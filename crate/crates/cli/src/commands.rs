use std::collections::BTreeMap;
use std::fmt::Write;

use nalgebra::DVector;
use serde::Serialize;

use crate::{Case, CliError};
use gridformer_converter::{build_admittance, solve_operating_point, Architecture, LineParams, OMEGA0};
use gridformer_device::{classify_gfm, forming_index, robust_margin, sensitivity, GfmVerdict, StrengthCurve};
use gridformer_lti::{step_response, FrequencyGrid};
use gridformer_network::assemble_closed_loop_ss;
use gridformer_placement::{place_exhaustive, place_greedy, PlacementProblem, PlacementResult};
use gridformer_strength::{compute_cscr, escr, gscr, strength_report_in_band, Cscr, StrengthReport, Thresholds};

/// One converter behind a Thevenin line `L_g`, `τ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InlineDevice {
    pub arch: Architecture,
    pub lg: f64,
    pub tau: f64,
    pub p0: f64,
    pub q_or_v: f64,
    pub omega0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Lg,
    Tau,
    P0,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::Lg => "lg",
            SweepParam::Tau => "tau",
            SweepParam::P0 => "p0",
        }
    }

    fn apply(self, dev: &InlineDevice, v: f64) -> InlineDevice {
        let mut d = dev.clone();
        match self {
            SweepParam::Lg => d.lg = v,
            SweepParam::Tau => d.tau = v,
            SweepParam::P0 => d.p0 = v,
        }
        d
    }
}

/// `a:b:n`, `n ≥ 2` evenly spaced values including both ends.
pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Parse(format!("expected a:b:n, got '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n < 2 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// Shortest decimal that survives 12 significant digits (0.30000000000000004 → 0.3).
fn short(v: f64) -> String {
    let r: f64 = format!("{v:.12e}").parse().unwrap_or(v);
    format!("{r}")
}

/// `lg=0.1:0.5:5` style sweep specification.
pub fn parse_sweep_param(s: &str) -> Result<(SweepParam, Vec<f64>), CliError> {
    let (key, range) = s.split_once('=').ok_or_else(|| CliError::Parse(format!("expected name=a:b:n, got '{s}'")))?;
    let p = match key.trim() {
        "lg" => SweepParam::Lg,
        "tau" => SweepParam::Tau,
        "p0" => SweepParam::P0,
        k => return Err(CliError::Parse(format!("cannot sweep '{k}' (use lg, tau or p0)"))),
    };
    Ok((p, parse_range(range)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct FiCurve {
    pub label: String,
    pub device: InlineDevice,
    pub verdict: GfmVerdict,
    /// `‖S_v‖∞` and its frequency; absent when the loop is unstable.
    pub hinf: Option<f64>,
    pub hinf_peak_hz: Option<f64>,
    pub stable: bool,
    #[serde(skip)]
    pub curve: StrengthCurve,
}

pub fn fi_curve(dev: &InlineDevice, label: String, grid: &FrequencyGrid, band_hz: (f64, f64)) -> Result<FiCurve, CliError> {
    let line = LineParams::with_omega0(dev.lg, dev.tau, dev.omega0)?;
    let op = solve_operating_point(dev.p0, dev.arch.setpoint(dev.q_or_v), &line, 1.0)?;
    let y = build_admittance(&dev.arch, &op, dev.omega0)?;
    let s_v = sensitivity(&y, &line)?;
    let curve = forming_index(&s_v, grid)?;
    let verdict = classify_gfm(&curve, band_hz)?;
    let stable = s_v.is_stable();
    let (hinf, hinf_peak_hz) = if stable {
        let h = robust_margin(&s_v, grid)?;
        (Some(h.value), Some(h.peak_omega / (2.0 * std::f64::consts::PI)))
    } else {
        (None, None)
    };
    Ok(FiCurve { label, device: dev.clone(), verdict, hinf, hinf_peak_hz, stable, curve })
}

/// FI curves of `dev`, one per value of the optional sweep.
pub fn fi_sweep(dev: &InlineDevice, sweep: Option<&(SweepParam, Vec<f64>)>, grid: &FrequencyGrid, band_hz: (f64, f64)) -> Result<Vec<FiCurve>, CliError> {
    match sweep {
        None => Ok(vec![fi_curve(dev, "fi".into(), grid, band_hz)?]),
        Some((p, values)) => values
            .iter()
            .map(|&v| fi_curve(&p.apply(dev, v), format!("fi_{}={}", p.name(), short(v)), grid, band_hz))
            .collect(),
    }
}

/// Wide CSV: `omega_rad_s,f_hz,<label>...`.
pub fn fi_csv(curves: &[FiCurve]) -> String {
    let mut out = String::from("omega_rad_s,f_hz");
    for c in curves {
        let _ = write!(out, ",{}", c.label);
    }
    out.push('\n');
    let Some(first) = curves.first() else { return out };
    for (k, w) in first.curve.omegas().iter().enumerate() {
        let _ = write!(out, "{w},{}", w / (2.0 * std::f64::consts::PI));
        for c in curves {
            let _ = write!(out, ",{}", c.curve.values()[k]);
        }
        out.push('\n');
    }
    out
}

/// The device at case bus `id` behind its Thevenin equivalent
/// `L_g = 1/ESCR_i` with the case's default τ.
pub fn inline_from_case(case: &Case, id: u32) -> Result<InlineDevice, CliError> {
    let k = case.device_index(id)?;
    let e = escr(&case.net)?[k];
    let sp = case.setpoints[k];
    let q_or_v = match sp.second {
        gridformer_converter::Setpoint::Q(q) => q,
        gridformer_converter::Setpoint::V(v) => v,
    };
    Ok(InlineDevice {
        arch: case.archs[k],
        lg: 1.0 / e,
        tau: case.file.system.tau_default,
        p0: sp.p,
        q_or_v,
        omega0: case.net.omega0(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StrengthOutput {
    /// Case bus id of every device bus, in report order.
    pub device_bus_ids: Vec<u32>,
    /// Case bus ids from weakest to strongest.
    pub ranking_bus_ids: Vec<u32>,
    pub report: StrengthReport,
    #[serde(skip)]
    pub csv: String,
}

pub fn strength(case: &Case, thresholds: Thresholds) -> Result<StrengthOutput, CliError> {
    let sys = case.system()?;
    let report = strength_report_in_band(&sys, &case.grid, case.band_hz, thresholds)?;
    let ids = &case.bus_ids[..case.net.n()];
    let mut csv = String::from("omega_rad_s,f_hz,kappa,alpha,passivity");
    for id in ids {
        let _ = write!(csv, ",kappa_bus_{id}");
    }
    csv.push('\n');
    for (k, w) in case.grid.points().iter().enumerate() {
        let _ = write!(
            csv,
            "{w},{},{},{},{}",
            w / (2.0 * std::f64::consts::PI),
            report.kappa.values()[k],
            report.alpha.values()[k],
            report.passivity.values()[k]
        );
        for b in &report.bus {
            let _ = write!(csv, ",{}", b.values()[k]);
        }
        csv.push('\n');
    }
    Ok(StrengthOutput {
        device_bus_ids: ids.to_vec(),
        ranking_bus_ids: report.ranking.iter().map(|&k| ids[k]).collect(),
        report,
        csv,
    })
}

/// Frequency (rad/s) standing in for DC when a device model has a pole at 0.
const DC_PROBE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepOptions {
    pub bus: u32,
    /// d-axis current step, system pu.
    pub amp: f64,
    pub t_end: f64,
    /// Defaults to `0.05/|λ_max|`.
    pub dt: Option<f64>,
    pub rise: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepOutput {
    pub dt: f64,
    pub samples: usize,
    /// Largest `‖ΔU_i‖` over time and buses.
    pub peak_norm: f64,
    /// Last sample of every output channel.
    pub final_value: Vec<f64>,
    /// `Z_Cl(0)·ΔI` from the frequency-domain operator.
    pub dc_value: Vec<f64>,
    #[serde(skip)]
    pub csv: String,
}

/// Step current injection at one device bus; per-bus `‖ΔU‖` trajectories.
pub fn step(case: &Case, opts: &StepOptions) -> Result<StepOutput, CliError> {
    let k = case.device_index(opts.bus)?;
    let sys = case.system()?;
    let n = case.net.n();
    let cl = assemble_closed_loop_ss(sys.devices(), &case.net, opts.rise)?;
    if !cl.model.is_stable() {
        let max_re = cl.model.poles().iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
        return Err(CliError::Unstable(format!("max Re pole = {max_re:.3e}")));
    }
    let lambda = cl.model.poles().iter().map(|p| p.norm()).fold(0.0, f64::max);
    let dt = opts.dt.unwrap_or(if lambda > 0.0 { 0.05 / lambda } else { 1e-3 });
    let mut u = DVector::zeros(2 * n);
    u[2 * k] = opts.amp;
    let r = step_response(&cl.model, &u, opts.t_end, dt)?;

    // PLL-PV admittances carry a pole at s = 0 that the closed loop moves;
    // approach DC from just above it in that case.
    let z0 = sys.z_cl(0.0).or_else(|_| sys.z_cl(DC_PROBE))?;
    let dc_value: Vec<f64> = (0..2 * n).map(|i| z0[(i, 2 * k)].re * opts.amp).collect();

    let ids = &case.bus_ids[..n];
    let mut csv = String::from("t_s");
    for id in ids {
        let _ = write!(csv, ",du_norm_bus_{id}");
    }
    csv.push('\n');
    let stride = r.t.len().div_ceil(20_000).max(1);
    let mut peak_norm = 0.0f64;
    for (j, (t, y)) in r.t.iter().zip(&r.y).enumerate() {
        let norms: Vec<f64> = (0..n).map(|b| y[2 * b].hypot(y[2 * b + 1])).collect();
        peak_norm = norms.iter().fold(peak_norm, |a, v| a.max(*v));
        if j % stride == 0 || j + 1 == r.t.len() {
            let _ = write!(csv, "{t}");
            for v in &norms {
                let _ = write!(csv, ",{v}");
            }
            csv.push('\n');
        }
    }
    let final_value = r.y.last().map(|y| y.iter().copied().collect()).unwrap_or_default();
    Ok(StepOutput { dt, samples: r.t.len(), peak_norm, final_value, dc_value, csv })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceMethod {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaceOutput {
    pub method: PlaceMethod,
    /// Case bus id → placed capacity.
    pub assignment: BTreeMap<u32, f64>,
    pub achieved: f64,
    pub baseline: f64,
    pub evaluations: usize,
    /// Candidates by ascending bus strength `min_ω κ_i`.
    pub candidate_strength: Vec<(u32, f64)>,
    #[serde(skip)]
    pub result: PlacementResult,
    #[serde(skip)]
    pub table: String,
}

/// `candidates` are case bus ids of interior buses; empty means all of them.
pub fn place(case: &Case, candidates: &[u32], template: Architecture, sizes: Vec<f64>, budget: f64, method: PlaceMethod) -> Result<PlaceOutput, CliError> {
    let n = case.net.n();
    let cand: Vec<usize> = if candidates.is_empty() {
        (n..case.net.n_buses()).collect()
    } else {
        candidates
            .iter()
            .map(|&id| {
                case.index_of(id)
                    .filter(|&k| k >= n)
                    .ok_or_else(|| CliError::Parse(format!("bus {id} is not an interior bus")))
            })
            .collect::<Result<_, _>>()?
    };
    let problem = PlacementProblem {
        net: case.net.clone(),
        archs: case.archs.clone(),
        setpoints: case.setpoints.clone(),
        candidates: cand,
        device: template,
        sizes,
        budget,
        u_grid: 1.0,
    };
    let grid = case.band_grid()?;
    let result = match method {
        PlaceMethod::Exhaustive => place_exhaustive(&problem, &grid)?,
        PlaceMethod::Greedy => place_greedy(&problem, &grid)?,
    };
    let mut strengths = problem.candidate_bus_strength(&grid)?;
    strengths.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let id = |k: usize| case.bus_ids[k];
    let assignment: BTreeMap<u32, f64> = result.assignment.iter().map(|(&k, &c)| (id(k), c)).collect();

    let mut table = format!("{:>6}  {:>10}  {:>10}\n", "bus", "kappa_i", "placed_pu");
    for &(k, s) in &strengths {
        let placed = result.assignment.get(&k).copied().unwrap_or(0.0);
        let _ = writeln!(table, "{:>6}  {:>10.5}  {:>10.3}", id(k), s, placed);
    }
    let _ = writeln!(table, "min kappa: baseline {:.5}, achieved {:.5} ({} evaluations)", result.baseline, result.achieved, result.evaluations);

    Ok(PlaceOutput {
        method,
        assignment,
        achieved: result.achieved,
        baseline: result.baseline,
        evaluations: result.evaluations,
        candidate_strength: strengths.iter().map(|&(k, s)| (id(k), s)).collect(),
        result,
        table,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CscrOutput {
    pub cscr: Cscr,
    pub gscr: Option<f64>,
    /// `(gSCR − CSCR)/CSCR` when a case supplies gSCR.
    pub margin: Option<f64>,
}

pub fn cscr(arch: &Architecture, p0: f64, q_or_v: f64, tau: f64, case: Option<&Case>) -> Result<CscrOutput, CliError> {
    let omega0 = case.map_or(OMEGA0, |c| c.net.omega0());
    let c = compute_cscr(arch, p0, q_or_v, tau, omega0)?;
    let g = case.map(|c| gscr(&c.net)).transpose()?;
    Ok(CscrOutput { cscr: c, gscr: g, margin: g.map(|g| c.margin(g)) })
}

use rayon::prelude::*;
use serde::Serialize;

use crate::{
    bus_strength, escr, gamma, grid_strength, gscr, passivity_margin, system_strength, PowerSystem,
    StrengthError,
};
use gridformer_device::StrengthCurve;
use gridformer_lti::{golden_max, sigma_min, CMatrix, FrequencyGrid, LtiError, StateSpace};
use gridformer_network::ScaledGridOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    VeryWeak,
    Weak,
    Strong,
}

/// κ thresholds: very weak below `very_weak`, weak below `weak`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub very_weak: f64,
    pub weak: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { very_weak: 0.5, weak: 1.0 }
    }
}

impl Thresholds {
    pub fn classify(&self, kappa_min: f64) -> Classification {
        if kappa_min < self.very_weak {
            Classification::VeryWeak
        } else if kappa_min < self.weak {
            Classification::Weak
        } else {
            Classification::Strong
        }
    }
}

/// Comparison of κ with the homogeneous-device closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneousCheck {
    pub max_abs_error: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrengthReport {
    pub kappa: StrengthCurve,
    pub alpha: StrengthCurve,
    pub bus: Vec<StrengthCurve>,
    /// Frequency of the smallest κ, refined between grid points.
    pub worst_omega: f64,
    pub worst_kappa: f64,
    /// `κ_i` evaluated exactly at `worst_omega`.
    pub bus_at_worst: Vec<f64>,
    pub classification: Classification,
    pub thresholds: Thresholds,
    pub escr: Vec<f64>,
    pub gscr: f64,
    pub passivity: StrengthCurve,
    /// Device buses from weakest to strongest at `worst_omega`.
    pub ranking: Vec<usize>,
    /// Present when every device shares one model and τ is uniform.
    pub homogeneous: Option<HomogeneousCheck>,
}

fn bus_values(z: &CMatrix) -> Vec<f64> {
    let grid = FrequencyGrid::new(vec![1.0]).expect("single point grid");
    bus_strength(std::slice::from_ref(z), &grid)
        .expect("one sample for one point")
        .iter()
        .map(|c| c.values()[0])
        .collect()
}

/// `min_i σ̲[Y_de(jω) + λ_i γ(jω)]` over the eigenvalues `λ_i` of the
/// symmetric scaled grid matrix: the closed form of κ for identical devices
/// on a uniform-τ network.
pub fn homogeneous_kappa(device: &StateSpace, netop: &ScaledGridOperator, omega: f64) -> Result<Option<f64>, StrengthError> {
    let Some(b) = netop.b_grid() else { return Ok(None) };
    let y = device.eval_jw(omega)?;
    let g = gamma(netop.tau0(), omega, netop.omega0());
    let eig = b.clone().symmetric_eigenvalues();
    Ok(Some(
        eig.iter()
            .map(|l| sigma_min(&(&y + &g * num_complex::Complex64::new(*l, 0.0))))
            .fold(f64::INFINITY, f64::min),
    ))
}

/// Relative gap below which two device models count as the same model;
/// load-flow round-off leaves identical devices a few ulps apart.
const SAME_MODEL_TOL: f64 = 1e-9;

fn same_model(a: &StateSpace, b: &StateSpace) -> bool {
    let close = |x: &nalgebra::DMatrix<f64>, y: &nalgebra::DMatrix<f64>| {
        x.shape() == y.shape() && (x - y).amax() <= SAME_MODEL_TOL * x.amax().max(1.0)
    };
    close(a.a(), b.a()) && close(a.b(), b.b()) && close(a.c(), b.c()) && close(a.d(), b.d())
}

fn all_same_model(devices: &[StateSpace]) -> bool {
    devices.windows(2).all(|w| same_model(&w[0], &w[1]))
}

/// Full strength analysis of a linearised system on `grid`, with the worst
/// case taken over the whole grid.
pub fn strength_report(sys: &PowerSystem, grid: &FrequencyGrid, thresholds: Thresholds) -> Result<StrengthReport, StrengthError> {
    let hz = |w: f64| w / (2.0 * std::f64::consts::PI);
    strength_report_in_band(sys, grid, (hz(grid.first()), hz(grid.last())), thresholds)
}

/// As [`strength_report`], but the worst-case κ (and with it the
/// classification and ranking) is searched only inside `band_hz`.
///
/// Inductive line and device admittances vanish as ω grows, so κ → 0 at the
/// top of any sweep; the band keeps the worst case physically meaningful.
pub fn strength_report_in_band(
    sys: &PowerSystem,
    grid: &FrequencyGrid,
    band_hz: (f64, f64),
    thresholds: Thresholds,
) -> Result<StrengthReport, StrengthError> {
    let kappa = system_strength(|w| sys.y_cl(w), grid)?;
    let alpha = grid_strength(sys.grid_operator(), grid)?;
    let z: Vec<CMatrix> = grid.points().par_iter().map(|&w| sys.z_cl(w)).collect::<Result<_, _>>()?;
    let bus = bus_strength(&z, grid)?;
    let passivity = passivity_margin(|w| sys.y_cl(w), grid)?;

    let pts = grid.points();
    let (lo, hi) = (2.0 * std::f64::consts::PI * band_hz.0, 2.0 * std::f64::consts::PI * band_hz.1);
    let slack = 1e-9;
    let in_band: Vec<usize> = (0..pts.len()).filter(|&k| pts[k] >= lo * (1.0 - slack) && pts[k] <= hi * (1.0 + slack)).collect();
    if in_band.is_empty() {
        return Err(StrengthError::Invalid(format!("no grid point inside the band {band_hz:?} Hz")));
    }
    let k = in_band.iter().copied().fold(in_band[0], |b, k| if kappa.values()[k] < kappa.values()[b] { k } else { b });
    let grid_min = (pts[k], kappa.values()[k]);
    let a = pts[k.saturating_sub(1).max(in_band[0])];
    let b = pts[(k + 1).min(*in_band.last().unwrap())];
    let neg_kappa = |w: f64| -> Result<f64, LtiError> { Ok(-sys.y_cl(w).map_or(0.0, |y| sigma_min(&y))) };
    let (worst_omega, worst_kappa) = if a < b {
        let (w_ref, v_ref) = golden_max(&neg_kappa, a.ln(), b.ln())?;
        if -v_ref < grid_min.1 { (w_ref, -v_ref) } else { grid_min }
    } else {
        grid_min
    };
    let bus_at_worst = bus_values(&sys.z_cl(worst_omega)?);

    let homogeneous = if all_same_model(sys.devices()) && sys.grid_operator().b_grid().is_some() {
        let mut max_abs_error = 0.0f64;
        for (&w, &kv) in pts.iter().zip(kappa.values()) {
            let r = homogeneous_kappa(&sys.devices()[0], sys.grid_operator(), w)?.expect("uniform path");
            max_abs_error = max_abs_error.max((r - kv).abs());
        }
        Some(HomogeneousCheck { max_abs_error, points: pts.len() })
    } else {
        None
    };

    let mut report = StrengthReport {
        kappa,
        alpha,
        bus,
        worst_omega,
        worst_kappa,
        bus_at_worst,
        classification: thresholds.classify(worst_kappa),
        thresholds,
        escr: escr(sys.net())?,
        gscr: gscr(sys.net())?,
        passivity,
        ranking: Vec::new(),
        homogeneous,
    };
    report.ranking = weak_bus_ranking(&report, None);
    Ok(report)
}

/// Relative gap below which two `κ_i` count as tied.
const TIE_TOL: f64 = 1e-9;

/// Device buses sorted by ascending `κ_i` at `omega` (default: the worst
/// frequency); ties keep index order.
pub fn weak_bus_ranking(report: &StrengthReport, omega: Option<f64>) -> Vec<usize> {
    let values: Vec<f64> = match omega {
        Some(w) => report.bus.iter().map(|c| c.value_at(w)).collect(),
        None => report.bus_at_worst.clone(),
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut start = 0;
    while start < order.len() {
        let base = values[order[start]];
        let mut end = start + 1;
        while end < order.len() && values[order[end]] - base <= TIE_TOL * base.abs().max(1.0) {
            end += 1;
        }
        order[start..end].sort_unstable();
        start = end;
    }
    order
}

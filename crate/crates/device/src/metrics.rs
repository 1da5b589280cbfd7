use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::{CurveKind, DeviceError, StrengthCurve};
use gridformer_converter::{rot, OperatingPoint};
use gridformer_lti::{
    golden_max, hinf_norm, inverse_with_cond, sigma_max, to_complex, FrequencyGrid, HinfNorm,
    LtiError, StateSpace, COND_LIMIT,
};

/// Band in Hz over which GFM capability is judged by default.
pub const DEFAULT_BAND_HZ: (f64, f64) = (5.0, 200.0);

fn sample<F>(grid: &FrequencyGrid, f: F) -> Result<Vec<f64>, DeviceError>
where
    F: Fn(f64) -> Result<f64, DeviceError> + Sync,
{
    grid.points().par_iter().map(|&w| f(w)).collect()
}

/// `FI(jω) = σ̄[S_v(jω)]` on `grid`, with the peak refined by golden-section
/// search between the neighbours of the largest sample.
pub fn forming_index(s_v: &StateSpace, grid: &FrequencyGrid) -> Result<StrengthCurve, DeviceError> {
    let values = sample(grid, |w| Ok(sigma_max(&s_v.eval_jw(w)?)))?;
    let curve = StrengthCurve::new(CurveKind::Fi, grid.clone(), values);
    let pts = grid.points();
    let k = pts.iter().position(|w| *w == curve.peak().0).unwrap_or(0);
    let lo = pts[k.saturating_sub(1)];
    let hi = pts[(k + 1).min(pts.len() - 1)];
    let f = |w: f64| -> Result<f64, LtiError> { Ok(sigma_max(&s_v.eval_jw(w)?)) };
    let (w, v) = golden_max(&f, lo.ln(), hi.ln())?;
    Ok(curve.with_refined_peak(w, v))
}

/// Lemma-style robust margin: `‖S_v‖∞` over the grid, refined at the peak.
/// A smaller value is a larger margin.
pub fn robust_margin(s_v: &StateSpace, grid: &FrequencyGrid) -> Result<HinfNorm, DeviceError> {
    Ok(hinf_norm(s_v, grid)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GfmClass {
    Gfm,
    Gfl,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GfmVerdict {
    pub class: GfmClass,
    pub band_hz: (f64, f64),
    /// Frequencies (Hz) in the band with FI ≥ 1.
    pub violations_hz: Vec<f64>,
    /// Largest FI inside the band.
    pub max_fi: f64,
    /// `min |1 − FI|` over the band; small values mean a marginal verdict.
    pub margin: f64,
}

/// GFM iff FI < 1 at every grid point inside `band_hz`. FI = 1 exactly
/// counts as GFL.
pub fn classify_gfm(curve: &StrengthCurve, band_hz: (f64, f64)) -> Result<GfmVerdict, DeviceError> {
    if curve.kind != CurveKind::Fi {
        return Err(DeviceError::WrongCurveKind(curve.kind, CurveKind::Fi));
    }
    let (lo_hz, hi_hz) = band_hz;
    let (lo, hi) = (2.0 * PI * lo_hz, 2.0 * PI * hi_hz);
    let grid = curve.grid();
    let slack = 1e-9;
    let inside = lo_hz < hi_hz && lo >= grid.first() * (1.0 - slack) && hi <= grid.last() * (1.0 + slack);
    let in_band: Vec<(f64, f64)> = curve
        .omegas()
        .iter()
        .zip(curve.values())
        .filter(|(w, _)| **w >= lo * (1.0 - slack) && **w <= hi * (1.0 + slack))
        .map(|(w, v)| (*w, *v))
        .collect();
    if !inside || in_band.is_empty() {
        return Err(DeviceError::BandOutsideGrid { lo_hz, hi_hz });
    }
    let violations_hz: Vec<f64> =
        in_band.iter().filter(|(_, v)| *v >= 1.0).map(|(w, _)| w / (2.0 * PI)).collect();
    let max_fi = in_band.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    let margin = in_band.iter().map(|(_, v)| (1.0 - v).abs()).fold(f64::INFINITY, f64::min);
    let class = if violations_hz.is_empty() { GfmClass::Gfm } else { GfmClass::Gfl };
    Ok(GfmVerdict { class, band_hz, violations_hz, max_fi, margin })
}

/// `IN(jω) = σ̄[Y_de(jω)⁻¹]`.
pub fn impedance_norm(y_de: &StateSpace, grid: &FrequencyGrid) -> Result<StrengthCurve, DeviceError> {
    let values = sample(grid, |w| {
        let y = y_de.eval_jw(w)?;
        match inverse_with_cond(&y) {
            Some((z, cond)) if cond <= COND_LIMIT => Ok(sigma_max(&z)),
            _ => Err(DeviceError::SingularAdmittance { omega: w }),
        }
    })?;
    Ok(StrengthCurve::new(CurveKind::In, grid.clone(), values))
}

/// `FS(jω) = |[U⁻¹ R(θ_u − θ_g) S_v(jω)]₂₂|` with `U = |U_dq0|`, `θ_u` the
/// terminal angle and the grid angle as reference (θ_g = 0).
pub fn frequency_smoothing(
    s_v: &StateSpace,
    op: &OperatingPoint,
    grid: &FrequencyGrid,
) -> Result<StrengthCurve, DeviceError> {
    let u = op.u_mag();
    let r = rot(op.theta0);
    let r = to_complex(&DMatrix::from_row_slice(2, 2, &[r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)]]));
    let values = sample(grid, |w| {
        let m = &r * s_v.eval_jw(w)?;
        let z: Complex64 = m[(1, 1)];
        Ok(z.norm() / u)
    })?;
    Ok(StrengthCurve::new(CurveKind::Fs, grid.clone(), values))
}

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{ConverterError, OMEGA0};
use gridformer_lti::StateSpace;

/// Series RL line seen from a converter terminal: inductance `l_g`,
/// resistance `tau·l_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineParams {
    pub l_g: f64,
    pub tau: f64,
    pub omega0: f64,
}

impl LineParams {
    /// `tau = 0` is accepted here because a lossless line is fine for the
    /// static operating point; dynamic use goes through [`line_gamma`],
    /// which rejects it.
    pub fn new(l_g: f64, tau: f64) -> Result<Self, ConverterError> {
        Self::with_omega0(l_g, tau, OMEGA0)
    }

    pub fn with_omega0(l_g: f64, tau: f64, omega0: f64) -> Result<Self, ConverterError> {
        if !(l_g > 0.0 && l_g.is_finite()) {
            return Err(ConverterError::InvalidParameter(format!("L_g must be > 0, got {l_g}")));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(ConverterError::InvalidParameter(format!("tau must be >= 0, got {tau}")));
        }
        if !(omega0 > 0.0) {
            return Err(ConverterError::InvalidParameter(format!("omega0 must be > 0, got {omega0}")));
        }
        Ok(Self { l_g, tau, omega0 })
    }

    pub fn scr(&self) -> f64 {
        1.0 / self.l_g
    }
}

/// γ(s) = [(s/ω₀ + τ)I + J]⁻¹ realised with two states.
pub fn line_gamma(tau: f64, omega0: f64) -> Result<StateSpace, ConverterError> {
    if !(tau > 0.0) {
        return Err(ConverterError::NonpositiveTau(tau));
    }
    let a = DMatrix::from_row_slice(2, 2, &[-omega0 * tau, omega0, -omega0, -omega0 * tau]);
    let b = DMatrix::identity(2, 2) * omega0;
    Ok(StateSpace::new(a, b, DMatrix::identity(2, 2), DMatrix::zeros(2, 2))?)
}

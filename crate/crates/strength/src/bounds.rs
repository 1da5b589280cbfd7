use serde::Serialize;

use crate::{gamma, StrengthError};
use gridformer_device::StrengthCurve;
use gridformer_lti::{sigma_max, sigma_min, StateSpace};
use gridformer_network::ScaledGridOperator;

/// Absolute slack allowed before a bound counts as violated.
pub const BOUND_TOL: f64 = 1e-10;

/// One instance of an inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub omega: f64,
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
}

impl BoundCheck {
    pub fn new(omega: f64, relation: &'static str, lhs: f64, rhs: f64) -> Self {
        Self { omega, relation, lhs, rhs, holds: lhs >= rhs - BOUND_TOL, slack: lhs - rhs }
    }
}

/// `κ(jω) ≥ σ̲[γ₀(jω)]·α(jω) − σ̄[Y_de^N(jω)]` at every grid point.
pub fn check_prop1(
    kappa: &StrengthCurve,
    alpha: &StrengthCurve,
    devices: &[StateSpace],
    netop: &ScaledGridOperator,
) -> Result<Vec<BoundCheck>, StrengthError> {
    if kappa.omegas() != alpha.omegas() {
        return Err(StrengthError::Invalid("kappa and alpha are sampled on different grids".into()));
    }
    kappa
        .omegas()
        .iter()
        .zip(kappa.values().iter().zip(alpha.values()))
        .map(|(&w, (&k, &a))| {
            let g = sigma_min(&gamma(netop.tau0(), w, netop.omega0()));
            let mut y_max = 0.0f64;
            for d in devices {
                y_max = y_max.max(sigma_max(&d.eval_jw(w)?));
            }
            Ok(BoundCheck::new(w, "kappa >= sigma_min(gamma)*alpha - sigma_max(Y_de)", k, g * a - y_max))
        })
        .collect()
}

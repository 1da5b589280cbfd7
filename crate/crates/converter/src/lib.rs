//! Converter admittance models in the rotating dq frame.
//!
//! Each control architecture is linearised about a steady operating point
//! and returned as a 2-input/2-output [`StateSpace`] mapping the terminal
//! voltage deviation ΔU (global frame) to the current deviation ΔI flowing
//! *into* the converter. Controllers act on output power, so the builders
//! negate the current at the port.

mod admittance;
mod line;
mod op;
mod params;
mod pll;

pub use admittance::build_admittance;
pub use line::{line_gamma, LineParams};
pub use op::{solve_operating_point, OperatingPoint, Setpoint};
pub use params::{
    ArchKind, Architecture, DeviceSpec, DroopParams, GflParams, PllGfmParams, VocParams,
    VsgParams,
};
pub use pll::{pll_block, pll_natural_frequency};

pub use gridformer_lti::StateSpace;

use nalgebra::Matrix2;

/// Nominal angular frequency, 2π·50 rad/s.
pub const OMEGA0: f64 = 2.0 * std::f64::consts::PI * 50.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConverterError {
    #[error("line ratio tau must be > 0 for a dynamic line model (got {0})")]
    NonpositiveTau(f64),
    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("architecture {0:?} is not supported here")]
    UnsupportedArchitecture(ArchKind),
    #[error(transparent)]
    Lti(#[from] gridformer_lti::LtiError),
}

/// The 90° rotation J = [[0, −1], [1, 0]].
pub fn j2() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// Rotation by `theta`.
pub fn rot(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

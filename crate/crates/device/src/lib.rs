//! Device-level metrics built on a converter admittance `Y_de(s)`.
//!
//! The central object is the voltage sensitivity `S_v(s)` of a converter
//! behind an RL line; its largest singular value over frequency is the
//! Forming Index. A device is grid-forming on a band when FI < 1 there.

mod curve;
mod metrics;
mod sensitivity;

pub use curve::{CurveKind, StrengthCurve};
pub use metrics::{
    classify_gfm, forming_index, frequency_smoothing, impedance_norm, robust_margin, GfmClass,
    GfmVerdict, DEFAULT_BAND_HZ,
};
pub use sensitivity::{output_sensitivity, sensitivity};

use gridformer_converter::ConverterError;
use gridformer_lti::LtiError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeviceError {
    #[error("ill-posed sensitivity loop: {0}")]
    IllPosedLoop(String),
    #[error("band [{lo_hz}, {hi_hz}] Hz is not covered by the frequency grid")]
    BandOutsideGrid { lo_hz: f64, hi_hz: f64 },
    #[error("device admittance is singular at omega = {omega} rad/s")]
    SingularAdmittance { omega: f64 },
    #[error("curve of kind {0:?} where {1:?} was expected")]
    WrongCurveKind(CurveKind, CurveKind),
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Converter(#[from] ConverterError),
}

//! Strength of a multi-converter power system.
//!
//! System strength κ is the smallest gain from bus voltage to injected
//! current, grid strength α the same for the network alone with the line
//! dynamics divided out, and bus strength κ_i a per-bus lower bound on κ.
//! The added-device formulas express all three for one extra converter
//! through its single-device sensitivity, which is what links the device
//! Forming Index to system strength.

mod added;
mod bounds;
mod cscr;
mod report;
mod scr;
mod system;

pub use added::{added_device_direct, added_device_strength, check_prop2, AddedStrength, Prop2Point, Prop2Report};
pub use bounds::{check_prop1, BoundCheck, BOUND_TOL};
pub use cscr::{compute_cscr, stable_at_scr, Cscr, CSCR_BRACKET, CSCR_TOL};
pub use report::{
    homogeneous_kappa, strength_report, strength_report_in_band, weak_bus_ranking, Classification, HomogeneousCheck, StrengthReport,
    Thresholds,
};
pub use scr::{escr, gscr};
pub use system::{
    bus_strength, grid_strength, passivity_margin, system_strength, PowerSystem, CROSS_CHECK_TOL,
};

use gridformer_converter::ConverterError;
use gridformer_device::DeviceError;
use gridformer_lti::LtiError;
use gridformer_network::NetworkError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrengthError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("kappa routes disagree at omega = {omega}: sigma_min(Y) = {from_y}, 1/sigma_max(Z) = {from_z}")]
    CrossCheck { omega: f64, from_y: f64, from_z: f64 },
    #[error("static susceptance matrix is singular")]
    SingularBMatrix,
    #[error("block {what} is singular at omega = {omega}")]
    SingularBlock { what: &'static str, omega: f64 },
    #[error("added-device formulas need uniform tau (found {min} to {max})")]
    NonUniformTau { min: f64, max: f64 },
    #[error("no stability boundary in the SCR bracket (stable everywhere: {stable_everywhere})")]
    NoBracket { stable_everywhere: bool },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Converter(#[from] ConverterError),
}

use gridformer_lti::CMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// `B ⊗ G` for a real matrix and a complex 2×2 block.
pub(crate) fn kron2(b: &DMatrix<f64>, g: &CMatrix) -> CMatrix {
    CMatrix::from_fn(2 * b.nrows(), 2 * b.ncols(), |r, c| g[(r % 2, c % 2)] * b[(r / 2, c / 2)])
}

pub(crate) fn gamma(tau: f64, omega: f64, omega0: f64) -> CMatrix {
    let g = gridformer_network::gamma_at(tau, omega, omega0);
    CMatrix::from_fn(2, 2, |r, c| g[r][c])
}

/// `γ⁻¹(jω) = (τ + jω/ω0)I + J`.
pub(crate) fn gamma_inv(tau: f64, omega: f64, omega0: f64) -> CMatrix {
    let a = Complex64::new(tau, omega / omega0);
    CMatrix::from_row_slice(2, 2, &[a, Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), a])
}

/// `blockdiag(m, …, m)` with `n` copies of a 2×2 block.
pub(crate) fn block_repeat(m: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        out.view_mut((2 * i, 2 * i), (2, 2)).copy_from(m);
    }
    out
}

//! Multi-bus network side of the small-signal model.
//!
//! Buses are numbered `0..n` for device buses, `n..n+m` for interior buses,
//! and `n+m` is the common grounded bus. Every branch is an RL line
//! `B_ij·γ_ij(s)`. Device admittances are per unit of their own rating, so
//! the reduced network is congruence-scaled by `S_B^{-1/2}` before devices
//! are attached.

mod closed_loop;
pub mod fixtures;
mod kron;
mod model;
mod operator;
mod powerflow;

pub use closed_loop::{assemble_closed_loop_ss, ClosedLoopSs, DEFAULT_RISE_TIME};
pub use kron::{kron_reduce, kron_reduce_static};
pub use model::{assemble_dynamic_y, gamma_at, static_b_matrix, Branch, NetworkModel};
pub use operator::{
    closed_loop_admittance, closed_loop_impedance, device_block, power_coordinate_sensitivity,
    scaled_grid_operator, ScaledGridOperator,
};
pub use powerflow::{solve_power_flow, BusSetpoint, PowerFlow};

use gridformer_converter::ConverterError;
use gridformer_lti::LtiError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("interior block is singular or ill-conditioned (condition {cond:.3e})")]
    SingularInteriorBlock { cond: f64 },
    #[error("closed loop is singular at omega = {omega} rad/s")]
    SingularClosedLoop { omega: f64 },
    #[error("branch ratios are not uniform (tau from {min} to {max})")]
    NonUniformTau { min: f64, max: f64 },
    #[error("ill-posed closed-loop interconnection: {0}")]
    IllPosedLoop(String),
    #[error("power flow failed: {0}")]
    PowerFlow(String),
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Converter(#[from] ConverterError),
}

/// Row-major CSV of a complex matrix, each entry written as `re,im`.
pub fn matrix_csv(m: &gridformer_lti::CMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e},{:e}", m[(r, c)].re, m[(r, c)].im)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

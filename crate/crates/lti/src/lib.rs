//! Linear time-invariant kernel.
//!
//! Every transfer matrix in the toolkit is a [`StateSpace`] with real
//! coefficients. Models are evaluated pointwise on the imaginary axis,
//! combined with [`interconnect`] or the convenience combinators, and
//! measured with the complex SVD in [`svd`].

mod connect;
mod grid;
mod model;
mod norm;
mod sim;
pub mod svd;

pub use connect::{interconnect, Wiring};
pub use grid::FrequencyGrid;
pub use model::{FreqResponseSample, StateSpace};
pub use norm::{golden_max, hinf_norm, HinfNorm};
pub use sim::{step_response, StepResponse};
pub use svd::{sigma_max, sigma_min, singular_values, svd, Svd};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Complex dense matrix used for frequency-response values.
pub type CMatrix = DMatrix<Complex64>;

/// Default stability margin: poles must satisfy `Re λ < -STAB_EPS`.
pub const STAB_EPS: f64 = 1e-9;

/// Condition-number ceiling for every inversion in the toolkit.
pub const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LtiError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("resolvent (sI - A) is near singular at s = {s} (condition estimate {cond:.3e})")]
    NearSingularResolvent { s: Complex64, cond: f64 },
    #[error("ill-posed interconnection: algebraic loop matrix is singular")]
    IllPosedLoop,
    #[error("model is not asymptotically stable (max Re pole = {max_re:.3e})")]
    UnstableModel { max_re: f64 },
    #[error("feedthrough matrix is not invertible")]
    SingularFeedthrough,
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("time step {dt} too large for fastest pole |λ| = {lambda:.3e}")]
    StepTooLarge { dt: f64, lambda: f64 },
}

/// Lift a real matrix to the complex field.
pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// One-norm condition estimate `‖M‖₁‖M⁻¹‖₁` paired with the inverse.
///
/// Returns `None` when LU factorisation breaks down outright.
pub fn inverse_with_cond(m: &CMatrix) -> Option<(CMatrix, f64)> {
    let inv = m.clone().lu().try_inverse()?;
    let cond = norm1(m) * norm1(&inv);
    if cond.is_finite() {
        Some((inv, cond))
    } else {
        None
    }
}

/// Inverse that refuses matrices with condition estimate above [`COND_LIMIT`].
pub fn checked_inverse(m: &CMatrix) -> Option<CMatrix> {
    match inverse_with_cond(m) {
        Some((inv, cond)) if cond <= COND_LIMIT => Some(inv),
        _ => None,
    }
}

fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

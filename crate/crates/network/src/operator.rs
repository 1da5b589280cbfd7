use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{assemble_dynamic_y, gamma_at, kron_reduce, kron_reduce_static, static_b_matrix, NetworkError, NetworkModel};
use gridformer_converter::OperatingPoint;
use gridformer_lti::{inverse_with_cond, CMatrix, StateSpace, COND_LIMIT};

/// Capacity-scaled, Kron-reduced network `Y_Grid^N(jω)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaledGridOperator {
    /// All branches share τ: `Y_Grid^N(s) = B_Grid^N ⊗ γ(s)`.
    Uniform { b_grid: DMatrix<f64>, tau: f64, omega0: f64 },
    /// Frequency-wise assembly and reduction.
    General { net: NetworkModel, inv_sqrt_s: Vec<f64> },
}

fn inv_sqrt(net: &NetworkModel) -> Vec<f64> {
    net.capacities().iter().map(|s| 1.0 / s.sqrt()).collect()
}

/// Build the operator, taking the static fast path when τ is uniform.
pub fn scaled_grid_operator(net: &NetworkModel) -> Result<ScaledGridOperator, NetworkError> {
    match net.uniform_tau() {
        Some(tau) => {
            let red = kron_reduce_static(&static_b_matrix(net), &net.interior())?;
            let k = inv_sqrt(net);
            let n = net.n();
            let b = DMatrix::from_fn(n, n, |i, j| 0.5 * (red[(i, j)] + red[(j, i)]) * k[i] * k[j]);
            Ok(ScaledGridOperator::Uniform { b_grid: b, tau, omega0: net.omega0() })
        }
        None => Ok(ScaledGridOperator::general(net)),
    }
}

impl ScaledGridOperator {
    /// Frequency-wise operator regardless of τ.
    pub fn general(net: &NetworkModel) -> Self {
        ScaledGridOperator::General { net: net.clone(), inv_sqrt_s: inv_sqrt(net) }
    }

    /// Device-bus count.
    pub fn n(&self) -> usize {
        match self {
            ScaledGridOperator::Uniform { b_grid, .. } => b_grid.nrows(),
            ScaledGridOperator::General { net, .. } => net.n(),
        }
    }

    pub fn omega0(&self) -> f64 {
        match self {
            ScaledGridOperator::Uniform { omega0, .. } => *omega0,
            ScaledGridOperator::General { net, .. } => net.omega0(),
        }
    }

    /// τ of γ₀: the common ratio, or the branch mean on the general path.
    pub fn tau0(&self) -> f64 {
        match self {
            ScaledGridOperator::Uniform { tau, .. } => *tau,
            ScaledGridOperator::General { net, .. } => net.mean_tau(),
        }
    }

    /// `B_Grid^N` on the uniform path.
    pub fn b_grid(&self) -> Option<&DMatrix<f64>> {
        match self {
            ScaledGridOperator::Uniform { b_grid, .. } => Some(b_grid),
            ScaledGridOperator::General { .. } => None,
        }
    }

    /// `Y_Grid^N(jω)`, `2n` square.
    pub fn at(&self, omega: f64) -> Result<CMatrix, NetworkError> {
        match self {
            ScaledGridOperator::Uniform { b_grid, tau, omega0 } => {
                Ok(kron_with_gamma(b_grid, gamma_at(*tau, omega, *omega0)))
            }
            ScaledGridOperator::General { net, inv_sqrt_s } => {
                let y = kron_reduce(&assemble_dynamic_y(net, omega), &net.interior(), 2)?;
                Ok(CMatrix::from_fn(y.nrows(), y.ncols(), |r, c| {
                    y[(r, c)] * inv_sqrt_s[r / 2] * inv_sqrt_s[c / 2]
                }))
            }
        }
    }
}

/// `B ⊗ G` for a real matrix and a 2×2 complex block.
pub(crate) fn kron_with_gamma(b: &DMatrix<f64>, g: [[Complex64; 2]; 2]) -> CMatrix {
    CMatrix::from_fn(2 * b.nrows(), 2 * b.ncols(), |r, c| g[r % 2][c % 2] * b[(r / 2, c / 2)])
}

/// `blockdiag(Y_de,i(jω))`.
pub fn device_block(devices: &[StateSpace], omega: f64) -> Result<CMatrix, NetworkError> {
    let n = devices.len();
    let mut y = CMatrix::zeros(2 * n, 2 * n);
    for (i, d) in devices.iter().enumerate() {
        if d.nu() != 2 || d.ny() != 2 {
            return Err(NetworkError::Invalid(format!("device {i} is not a 2x2 admittance")));
        }
        y.view_mut((2 * i, 2 * i), (2, 2)).copy_from(&d.eval_jw(omega)?);
    }
    Ok(y)
}

/// `Y_Cl(jω) = Y_Grid^N(jω) + blockdiag(Y_de,i(jω))`.
pub fn closed_loop_admittance(
    devices: &[StateSpace],
    netop: &ScaledGridOperator,
    omega: f64,
) -> Result<CMatrix, NetworkError> {
    if devices.len() != netop.n() {
        return Err(NetworkError::Invalid(format!(
            "{} device models for {} device buses",
            devices.len(),
            netop.n()
        )));
    }
    Ok(netop.at(omega)? + device_block(devices, omega)?)
}

/// `Z_Cl(jω) = Y_Cl(jω)⁻¹`; a near-singular `Y_Cl` is a resonance on the
/// grid point and is reported, never pseudo-inverted.
pub fn closed_loop_impedance(
    devices: &[StateSpace],
    netop: &ScaledGridOperator,
    omega: f64,
) -> Result<CMatrix, NetworkError> {
    let y = closed_loop_admittance(devices, netop, omega)?;
    match inverse_with_cond(&y) {
        Some((z, cond)) if cond <= COND_LIMIT => Ok(z),
        _ => Err(NetworkError::SingularClosedLoop { omega }),
    }
}

/// `U₀ᴺ·Z_Cl` with `U₀ᴺ = blockdiag([[U_d, U_q], [U_q, −U_d]])`.
pub fn power_coordinate_sensitivity(z_cl: &CMatrix, ops: &[OperatingPoint]) -> Result<CMatrix, NetworkError> {
    if z_cl.nrows() != 2 * ops.len() {
        return Err(NetworkError::Invalid(format!(
            "{} operating points for a {}-row impedance",
            ops.len(),
            z_cl.nrows()
        )));
    }
    let mut u = CMatrix::zeros(z_cl.nrows(), z_cl.nrows());
    for (i, op) in ops.iter().enumerate() {
        let [ud, uq] = op.u_dq0;
        u[(2 * i, 2 * i)] = ud.into();
        u[(2 * i, 2 * i + 1)] = uq.into();
        u[(2 * i + 1, 2 * i)] = uq.into();
        u[(2 * i + 1, 2 * i + 1)] = (-ud).into();
    }
    Ok(u * z_cl)
}

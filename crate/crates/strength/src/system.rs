use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::{gamma_inv, block_repeat, StrengthError};
use gridformer_converter::{build_admittance, Architecture, OperatingPoint};
use gridformer_device::{CurveKind, StrengthCurve};
use gridformer_lti::{inverse_with_cond, sigma_max, sigma_min, CMatrix, FrequencyGrid, StateSpace, COND_LIMIT};
use gridformer_network::{
    closed_loop_admittance, closed_loop_impedance, scaled_grid_operator, solve_power_flow,
    BusSetpoint, NetworkModel, ScaledGridOperator,
};

/// Agreement required between `σ̲(Y_Cl)` and `1/σ̄(Z_Cl)`, relative to
/// `max(1, κ)`.
pub const CROSS_CHECK_TOL: f64 = 1e-9;

/// Network plus linearised devices, ready for frequency sweeps.
#[derive(Debug, Clone)]
pub struct PowerSystem {
    net: NetworkModel,
    devices: Vec<StateSpace>,
    ops: Vec<OperatingPoint>,
    netop: ScaledGridOperator,
}

impl PowerSystem {
    pub fn new(net: NetworkModel, devices: Vec<StateSpace>, ops: Vec<OperatingPoint>) -> Result<Self, StrengthError> {
        if devices.len() != net.n() || ops.len() != net.n() {
            return Err(StrengthError::Invalid(format!(
                "{} devices and {} operating points for {} device buses",
                devices.len(),
                ops.len(),
                net.n()
            )));
        }
        let netop = scaled_grid_operator(&net)?;
        Ok(Self { net, devices, ops, netop })
    }

    /// Solve the load flow and linearise every device at its bus.
    pub fn linearize(
        net: NetworkModel,
        archs: &[Architecture],
        setpoints: &[BusSetpoint],
        u_grid: f64,
    ) -> Result<Self, StrengthError> {
        if archs.len() != net.n() {
            return Err(StrengthError::Invalid(format!("{} devices for {} device buses", archs.len(), net.n())));
        }
        let ops = solve_power_flow(&net, setpoints, u_grid)?.operating_points();
        let devices = archs
            .iter()
            .zip(&ops)
            .map(|(a, op)| build_admittance(a, op, net.omega0()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(net, devices, ops)
    }

    pub fn net(&self) -> &NetworkModel {
        &self.net
    }

    pub fn devices(&self) -> &[StateSpace] {
        &self.devices
    }

    pub fn operating_points(&self) -> &[OperatingPoint] {
        &self.ops
    }

    pub fn grid_operator(&self) -> &ScaledGridOperator {
        &self.netop
    }

    pub fn y_cl(&self, omega: f64) -> Result<CMatrix, StrengthError> {
        Ok(closed_loop_admittance(&self.devices, &self.netop, omega)?)
    }

    pub fn z_cl(&self, omega: f64) -> Result<CMatrix, StrengthError> {
        Ok(closed_loop_impedance(&self.devices, &self.netop, omega)?)
    }
}

fn sample<F>(grid: &FrequencyGrid, f: F) -> Result<Vec<f64>, StrengthError>
where
    F: Fn(f64) -> Result<f64, StrengthError> + Sync,
{
    grid.points().par_iter().map(|&w| f(w)).collect()
}

/// `κ(jω) = σ̲[Y_Cl(jω)]`, checked against `1/σ̄[Z_Cl(jω)]` at every point.
pub fn system_strength<F>(y_cl: F, grid: &FrequencyGrid) -> Result<StrengthCurve, StrengthError>
where
    F: Fn(f64) -> Result<CMatrix, StrengthError> + Sync,
{
    let values = sample(grid, |w| {
        let y = y_cl(w)?;
        let from_y = sigma_min(&y);
        let z = match inverse_with_cond(&y) {
            Some((z, cond)) if cond <= COND_LIMIT => z,
            _ => return Err(gridformer_network::NetworkError::SingularClosedLoop { omega: w }.into()),
        };
        let from_z = 1.0 / sigma_max(&z);
        if (from_y - from_z).abs() > CROSS_CHECK_TOL * from_y.max(1.0) {
            return Err(StrengthError::CrossCheck { omega: w, from_y, from_z });
        }
        Ok(from_y)
    })?;
    Ok(StrengthCurve::new(CurveKind::Kappa, grid.clone(), values))
}

/// `α(jω) = σ̲[Y_Grid^N(jω)(I_n ⊗ γ₀⁻¹(jω))]`, γ₀ built from the mean
/// branch τ.
pub fn grid_strength(netop: &ScaledGridOperator, grid: &FrequencyGrid) -> Result<StrengthCurve, StrengthError> {
    let (tau0, w0, n) = (netop.tau0(), netop.omega0(), netop.n());
    let values = sample(grid, |w| {
        let y = netop.at(w)?;
        Ok(sigma_min(&(y * block_repeat(&gamma_inv(tau0, w, w0), n))))
    })?;
    Ok(StrengthCurve::new(CurveKind::Alpha, grid.clone(), values))
}

/// Bus strengths from `Z_Cl` sampled on `grid`:
/// `κ_i = 1 / max(Σ_j σ̄(Z_ij), Σ_j σ̄(Z_ji))` over 2×2 blocks.
pub fn bus_strength(z_cl: &[CMatrix], grid: &FrequencyGrid) -> Result<Vec<StrengthCurve>, StrengthError> {
    if z_cl.len() != grid.len() {
        return Err(StrengthError::Invalid(format!("{} impedance samples for {} grid points", z_cl.len(), grid.len())));
    }
    let n = z_cl.first().map_or(0, |z| z.nrows() / 2);
    let per_point: Vec<Vec<f64>> = z_cl
        .par_iter()
        .map(|z| {
            let norms = DMatrix::from_fn(n, n, |i, j| sigma_max(&z.view((2 * i, 2 * j), (2, 2)).into_owned()));
            (0..n)
                .map(|i| {
                    let row: f64 = norms.row(i).sum();
                    let col: f64 = norms.column(i).sum();
                    1.0 / row.max(col)
                })
                .collect()
        })
        .collect();
    Ok((0..n)
        .map(|i| StrengthCurve::new(CurveKind::Bus, grid.clone(), per_point.iter().map(|v| v[i]).collect()))
        .collect())
}

/// `p(jω) = λ̲[(Y_Cl + Y_Clᴴ)/2]`.
pub fn passivity_margin<F>(y_cl: F, grid: &FrequencyGrid) -> Result<StrengthCurve, StrengthError>
where
    F: Fn(f64) -> Result<CMatrix, StrengthError> + Sync,
{
    let values = sample(grid, |w| {
        let y = y_cl(w)?;
        let h = (&y + y.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
        Ok(h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
    })?;
    Ok(StrengthCurve::new(CurveKind::Passivity, grid.clone(), values))
}

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{NetworkError, NetworkModel};
use gridformer_converter::{OperatingPoint, Setpoint};

const MAX_ITER: usize = 50;
const TOL: f64 = 1e-10;

/// Device-bus specification, per unit of the device rating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusSetpoint {
    pub p: f64,
    pub second: Setpoint,
}

/// Converged load flow.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlow {
    /// Voltage of every non-ground bus.
    pub voltages: Vec<Complex64>,
    /// Current each device bus injects into the network, system per unit.
    pub injections: Vec<Complex64>,
    capacities: Vec<f64>,
    pub iterations: usize,
}

impl PowerFlow {
    /// Device operating points in their own per unit.
    pub fn operating_points(&self) -> Vec<OperatingPoint> {
        self.injections
            .iter()
            .zip(&self.capacities)
            .enumerate()
            .map(|(k, (i, s))| OperatingPoint::from_terminal(self.voltages[k], i / s))
            .collect()
    }
}

fn line_admittance(b: f64, tau: f64) -> Complex64 {
    // γ(0) = (τ + j)⁻¹ in complex form
    b / Complex64::new(tau, 1.0)
}

/// Newton–Raphson load flow in rectangular coordinates.
///
/// The grounded bus is the slack at `u_grid∠0`; device buses are PQ or PV
/// according to their setpoints, interior buses carry no injection.
pub fn solve_power_flow(
    net: &NetworkModel,
    setpoints: &[BusSetpoint],
    u_grid: f64,
) -> Result<PowerFlow, NetworkError> {
    let n = net.n();
    let nb = net.n_buses();
    let g = net.ground();
    if setpoints.len() != n {
        return Err(NetworkError::Invalid(format!("{} setpoints for {n} device buses", setpoints.len())));
    }
    let mut y = DMatrix::<Complex64>::zeros(nb, nb);
    let mut src = DVector::<Complex64>::zeros(nb);
    for br in net.branches() {
        let yb = line_admittance(br.b, br.tau);
        for (i, j) in [(br.from, br.to), (br.to, br.from)] {
            if i == g {
                continue;
            }
            y[(i, i)] += yb;
            if j == g {
                src[i] += yb * u_grid;
            } else {
                y[(i, j)] -= yb;
            }
        }
    }
    let caps = net.capacities();
    let mut v = DVector::from_element(nb, Complex64::new(u_grid, 0.0));
    let j = Complex64::i();
    for it in 0..MAX_ITER {
        let cur = &y * &v - &src;
        let mut f = DVector::zeros(2 * nb);
        let mut jac = DMatrix::zeros(2 * nb, 2 * nb);
        for k in 0..nb {
            let s = v[k] * cur[k].conj();
            let (p_set, second) = if k < n {
                (setpoints[k].p * caps[k], Some(setpoints[k].second))
            } else {
                (0.0, None)
            };
            f[2 * k] = s.re - p_set;
            for col in 0..nb {
                let mut d_e = v[k] * y[(k, col)].conj();
                let mut d_f = -j * v[k] * y[(k, col)].conj();
                if col == k {
                    d_e += cur[k].conj();
                    d_f += j * cur[k].conj();
                }
                jac[(2 * k, 2 * col)] = d_e.re;
                jac[(2 * k, 2 * col + 1)] = d_f.re;
                if !matches!(second, Some(Setpoint::V(_))) {
                    jac[(2 * k + 1, 2 * col)] = d_e.im;
                    jac[(2 * k + 1, 2 * col + 1)] = d_f.im;
                }
            }
            match second {
                Some(Setpoint::V(vm)) => {
                    f[2 * k + 1] = v[k].norm_sqr() - vm * vm;
                    jac[(2 * k + 1, 2 * k)] = 2.0 * v[k].re;
                    jac[(2 * k + 1, 2 * k + 1)] = 2.0 * v[k].im;
                }
                Some(Setpoint::Q(q)) => f[2 * k + 1] = s.im - q * caps[k],
                None => f[2 * k + 1] = s.im,
            }
        }
        if f.amax() < TOL {
            let injections = (0..n).map(|k| cur[k]).collect();
            let voltages: Vec<Complex64> = v.iter().copied().collect();
            if let Some(k) = (0..n).find(|&k| !(voltages[k].norm() > 0.5 && voltages[k].norm() < 1.5)) {
                return Err(NetworkError::PowerFlow(format!(
                    "bus {k} settles at |U| = {:.4}, outside (0.5, 1.5)",
                    voltages[k].norm()
                )));
            }
            return Ok(PowerFlow { voltages, injections, capacities: caps.to_vec(), iterations: it });
        }
        let step = jac
            .lu()
            .solve(&(-f))
            .ok_or_else(|| NetworkError::PowerFlow("singular Jacobian".into()))?;
        for k in 0..nb {
            v[k] += Complex64::new(step[2 * k], step[2 * k + 1]);
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            break;
        }
    }
    Err(NetworkError::PowerFlow("Newton iteration did not converge".into()))
}

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{ConverterError, LineParams};

const MAX_ITER: usize = 50;
const TOL: f64 = 1e-10;

/// Second power-flow constraint next to active power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Setpoint {
    /// Reactive output power (pu).
    Q(f64),
    /// Terminal voltage magnitude (pu).
    V(f64),
}

/// Steady state about which a device is linearised.
///
/// `i_dq0` is the current flowing into the converter; `p0`, `q0` are the
/// converter's output powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub u_dq0: [f64; 2],
    pub i_dq0: [f64; 2],
    pub theta0: f64,
    pub p0: f64,
    pub q0: f64,
}

impl OperatingPoint {
    /// Build from terminal voltage and output current phasors.
    pub fn from_terminal(u: Complex64, i_out: Complex64) -> Self {
        let s = u * i_out.conj();
        Self {
            u_dq0: [u.re, u.im],
            i_dq0: [-i_out.re, -i_out.im],
            theta0: u.im.atan2(u.re),
            p0: s.re,
            q0: s.im,
        }
    }

    /// Unloaded terminal at `u_grid∠0`.
    pub fn no_load(u_grid: f64) -> Self {
        Self::from_terminal(Complex64::new(u_grid, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn u0(&self) -> Vector2<f64> {
        Vector2::new(self.u_dq0[0], self.u_dq0[1])
    }

    /// Output current (negated port current).
    pub fn io0(&self) -> Vector2<f64> {
        Vector2::new(-self.i_dq0[0], -self.i_dq0[1])
    }

    pub fn u_mag(&self) -> f64 {
        self.u0().norm()
    }

    /// Residual of the declared power convention: `S = U·conj(I_out)`.
    pub fn power_residual(&self) -> f64 {
        let u = Complex64::new(self.u_dq0[0], self.u_dq0[1]);
        let io = Complex64::new(-self.i_dq0[0], -self.i_dq0[1]);
        let s = u * io.conj();
        (s.re - self.p0).abs().max((s.im - self.q0).abs())
    }

    pub fn is_admissible(&self) -> bool {
        let m = self.u_mag();
        m > 0.5 && m < 1.5 && self.power_residual() <= 1e-9
    }
}

/// Newton solve of a converter behind the line `(l_g, τ·l_g)` from an
/// ideal source `u_grid∠0`.
pub fn solve_operating_point(
    p_ref: f64,
    setpoint: Setpoint,
    line: &LineParams,
    u_grid: f64,
) -> Result<OperatingPoint, ConverterError> {
    let z = Complex64::new(line.tau, 1.0) * line.l_g;
    // S = (|U|² − U·Ug)·w with w = 1/conj(Z), Ug real
    let w = 1.0 / z.conj();
    let (a, b) = (w.re, w.im);
    let residual = |x: f64, y: f64| -> (Vector2<f64>, Matrix2<f64>) {
        let r2 = x * x + y * y;
        let p = a * (r2 - u_grid * x) + b * u_grid * y;
        let q = b * (r2 - u_grid * x) - a * u_grid * y;
        let dp = [a * (2.0 * x - u_grid), 2.0 * a * y + b * u_grid];
        match setpoint {
            Setpoint::Q(q_ref) => (
                Vector2::new(p - p_ref, q - q_ref),
                Matrix2::new(dp[0], dp[1], b * (2.0 * x - u_grid), 2.0 * b * y - a * u_grid),
            ),
            Setpoint::V(v_ref) => {
                let r = r2.sqrt();
                (Vector2::new(p - p_ref, r - v_ref), Matrix2::new(dp[0], dp[1], x / r, y / r))
            }
        }
    };
    let (mut x, mut y) = (u_grid, 0.0);
    for _ in 0..MAX_ITER {
        let (f, jac) = residual(x, y);
        if f.amax() < TOL {
            let u = Complex64::new(x, y);
            let op = OperatingPoint::from_terminal(u, (u - u_grid) / z);
            if !op.is_admissible() {
                return Err(ConverterError::NoEquilibrium(format!(
                    "|U| = {:.4} outside (0.5, 1.5)",
                    op.u_mag()
                )));
            }
            return Ok(op);
        }
        let step = jac.lu().solve(&(-f)).ok_or_else(|| {
            ConverterError::NoEquilibrium("singular power-flow Jacobian".into())
        })?;
        x += step[0];
        y += step[1];
        if !(x.is_finite() && y.is_finite()) {
            break;
        }
    }
    Err(ConverterError::NoEquilibrium(format!(
        "Newton did not converge for P = {p_ref}, L_g = {}",
        line.l_g
    )))
}

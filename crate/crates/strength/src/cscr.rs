use serde::Serialize;

use crate::StrengthError;
use gridformer_converter::{build_admittance, solve_operating_point, Architecture, LineParams};
use gridformer_device::sensitivity;

/// SCR bracket `(unstable end, stable end)` searched by [`compute_cscr`].
pub const CSCR_BRACKET: (f64, f64) = (0.1, 10.0);
/// Bisection stops once the bracket is narrower than this, in SCR units.
pub const CSCR_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cscr {
    /// Smallest SCR found stable (upper end of the final bracket).
    pub scr: f64,
    /// Largest SCR found unstable.
    pub unstable_scr: f64,
    pub iterations: usize,
}

impl Cscr {
    /// Stability margin `(gSCR − CSCR)/CSCR`.
    pub fn margin(&self, gscr: f64) -> f64 {
        (gscr - self.scr) / self.scr
    }
}

/// Whether a single device behind `L_g = 1/scr` is small-signal stable.
/// A setpoint with no equilibrium counts as unstable.
pub fn stable_at_scr(arch: &Architecture, p0: f64, q_or_v: f64, tau: f64, omega0: f64, scr: f64) -> Result<bool, StrengthError> {
    let line = LineParams::with_omega0(1.0 / scr, tau, omega0)?;
    let Ok(op) = solve_operating_point(p0, arch.setpoint(q_or_v), &line, 1.0) else {
        return Ok(false);
    };
    let y = build_admittance(arch, &op, omega0)?;
    Ok(sensitivity(&y, &line)?.is_stable())
}

/// Critical SCR of one converter by bisection on `SCR = 1/L_g`.
pub fn compute_cscr(arch: &Architecture, p0: f64, q_or_v: f64, tau: f64, omega0: f64) -> Result<Cscr, StrengthError> {
    let stable = |scr| stable_at_scr(arch, p0, q_or_v, tau, omega0, scr);
    let (mut lo, mut hi) = CSCR_BRACKET;
    let lo_stable = stable(lo)?;
    let hi_stable = stable(hi)?;
    if lo_stable || !hi_stable {
        return Err(StrengthError::NoBracket { stable_everywhere: lo_stable && hi_stable });
    }
    let mut iterations = 0;
    while hi - lo > CSCR_TOL {
        let mid = 0.5 * (lo + hi);
        if stable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Cscr { scr: hi, unstable_scr: lo, iterations })
}

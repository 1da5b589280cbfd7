use std::f64::consts::PI;

use crate::ConverterError;
use gridformer_lti::StateSpace;

/// Natural frequency ω̂ (rad/s) of a PI-type SRF-PLL whose open loop
/// `(k_p s + k_i)/s²` crosses unity gain at `f_pll` Hz.
///
/// With `k_p = 2ζω̂` and `k_i = ω̂²` the crossover sits at
/// `ω̂·√(2ζ² + √(4ζ⁴ + 1))`, so `f_pll` is the loop bandwidth for any ζ.
pub fn pll_natural_frequency(f_pll: f64, zeta: f64) -> f64 {
    let z2 = zeta * zeta;
    let ratio = (2.0 * z2 + (4.0 * z2 * z2 + 1.0).sqrt()).sqrt();
    2.0 * PI * f_pll / ratio
}

/// Closed tracking loop of the PLL: input is the q-axis voltage deviation
/// measured in the steady-state frame, output is Δθ.
///
/// Transfer `(k_p s + k_i)/(s² + k_p s + k_i) / U0`; the 1/U0 factor turns
/// the q-axis voltage into a phase error so the DC gain from grid angle to
/// PLL angle is exactly one.
pub fn pll_block(f_pll: f64, zeta: f64, u0: f64) -> Result<StateSpace, ConverterError> {
    if !(f_pll > 0.0 && zeta > 0.0 && u0 > 0.0) {
        return Err(ConverterError::InvalidParameter(format!(
            "PLL needs f_pll, zeta, U0 > 0 (got {f_pll}, {zeta}, {u0})"
        )));
    }
    let w = pll_natural_frequency(f_pll, zeta);
    let (kp, ki) = (2.0 * zeta * w, w * w);
    Ok(StateSpace::from_tf(&[kp / u0, ki / u0], &[1.0, kp, ki])?)
}

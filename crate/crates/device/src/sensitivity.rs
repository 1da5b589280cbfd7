use nalgebra::DMatrix;

use crate::DeviceError;
use gridformer_converter::{line_gamma, LineParams};
use gridformer_lti::StateSpace;

fn tau_plus_j(tau: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[tau, -1.0, 1.0, tau])
}

fn check_port(y: &StateSpace) -> Result<(), DeviceError> {
    if y.nu() != 2 || y.ny() != 2 {
        return Err(DeviceError::IllPosedLoop(format!(
            "device admittance must be 2x2, got {}x{}",
            y.ny(),
            y.nu()
        )));
    }
    Ok(())
}

/// `S_v(s) = [I + L_g γ⁻¹(s) Y_de(s)]⁻¹`, the map from grid voltage to
/// terminal voltage.
///
/// Realised as the unity feedback loop around `G = L_g γ⁻¹ Y_de`. With a
/// strictly proper `Y_de` the product is proper and its realisation uses
/// `s·C(sI−A)⁻¹B = CA(sI−A)⁻¹B + CB`. A static or otherwise biproper
/// device (invertible `D`) is closed through the line instead:
/// `S_v = (Y_de + γ/L_g)⁻¹ γ/L_g`.
pub fn sensitivity(y_de: &StateSpace, line: &LineParams) -> Result<StateSpace, DeviceError> {
    check_port(y_de)?;
    let eye = StateSpace::identity(2);
    if y_de.d().iter().all(|x| *x == 0.0) {
        let (a, b, c) = (y_de.a(), y_de.b(), y_de.c());
        let w0 = line.omega0;
        let cl = (tau_plus_j(line.tau) * c + c * a / w0) * line.l_g;
        let dl = c * b * (line.l_g / w0);
        let g = StateSpace::new(a.clone(), b.clone(), cl, dl)?;
        return Ok(eye.feedback(&g)?);
    }
    let through_line = line_gamma(line.tau, line.omega0)?.scale(1.0 / line.l_g);
    let total = y_de.parallel(&through_line)?;
    let inv = total.inverse().map_err(|_| {
        DeviceError::IllPosedLoop("device feedthrough is neither zero nor invertible".into())
    })?;
    Ok(through_line.series(&inv)?)
}

/// `S̃_v(s) = [I + L_g Y_de(s) γ⁻¹(s)]⁻¹`, the loop broken at the device
/// output. It satisfies `γ S_v = S̃_v γ` and is what a Kron reduction of
/// the device bus actually produces.
pub fn output_sensitivity(y_de: &StateSpace, line: &LineParams) -> Result<StateSpace, DeviceError> {
    check_port(y_de)?;
    let eye = StateSpace::identity(2);
    if y_de.d().iter().all(|x| *x == 0.0) {
        let (a, b, c) = (y_de.a(), y_de.b(), y_de.c());
        let w0 = line.omega0;
        let bl = (a * b / w0 + b * tau_plus_j(line.tau)) * line.l_g;
        let dl = c * b * (line.l_g / w0);
        let g = StateSpace::new(a.clone(), bl, c.clone(), dl)?;
        return Ok(eye.feedback(&g)?);
    }
    let through_line = line_gamma(line.tau, line.omega0)?.scale(1.0 / line.l_g);
    let total = y_de.parallel(&through_line)?;
    let inv = total.inverse().map_err(|_| {
        DeviceError::IllPosedLoop("device feedthrough is neither zero nor invertible".into())
    })?;
    Ok(inv.series(&through_line)?)
}

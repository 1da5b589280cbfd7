use nalgebra::{DMatrix, DVector};

use crate::{LtiError, StateSpace};

/// Sampled step response: `y[k]` is the output at `t[k]`.
#[derive(Debug, Clone)]
pub struct StepResponse {
    pub t: Vec<f64>,
    pub y: Vec<DVector<f64>>,
}

/// Response to `u(t) = u0·1(t ≥ 0)` from rest, by exact zero-order-hold
/// discretisation (matrix exponential of the input-augmented system).
pub fn step_response(
    model: &StateSpace,
    u0: &DVector<f64>,
    t_end: f64,
    dt: f64,
) -> Result<StepResponse, LtiError> {
    if u0.len() != model.nu() {
        return Err(LtiError::Dimension(format!(
            "step input has {} entries, model has {} inputs",
            u0.len(),
            model.nu()
        )));
    }
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(LtiError::Dimension("need dt > 0 and t_end >= 0".into()));
    }
    model.require_stable()?;
    let lambda = model.poles().iter().map(|p| p.norm()).fold(0.0, f64::max);
    if lambda > 0.0 && dt >= 0.1 / lambda {
        return Err(LtiError::StepTooLarge { dt, lambda });
    }
    let nx = model.nx();
    let mut aug = DMatrix::zeros(nx + 1, nx + 1);
    aug.view_mut((0, 0), (nx, nx)).copy_from(&(model.a() * dt));
    aug.view_mut((0, nx), (nx, 1)).copy_from(&(model.b() * u0 * dt));
    let e = aug.exp();
    let phi = e.view((0, 0), (nx, nx)).into_owned();
    let gam = e.view((0, nx), (nx, 1)).column(0).into_owned();
    let du = model.d() * u0;
    let steps = (t_end / dt).ceil() as usize;
    let mut x = DVector::zeros(nx);
    let mut t = Vec::with_capacity(steps + 1);
    let mut y = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        t.push(k as f64 * dt);
        y.push(model.c() * &x + &du);
        x = &phi * &x + &gam;
    }
    Ok(StepResponse { t, y })
}

use nalgebra::DMatrix;

use crate::{NetworkError, NetworkModel};
use gridformer_lti::{inverse_with_cond, to_complex, StateSpace, COND_LIMIT};

/// Default rise time of the injection filter, s.
pub const DEFAULT_RISE_TIME: f64 = 5e-3;

/// Closed-loop state-space model from scaled current injection to scaled
/// device-bus voltages.
///
/// Inductive lines make `Z_Cl(s)` improper (voltage ∝ di/dt), so the
/// injection passes through `1/(rise·s + 1)` on every channel and the
/// realised transfer is `Z_Cl(s)/(rise·s + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopSs {
    pub model: StateSpace,
    pub rise: f64,
}

impl ClosedLoopSs {
    /// Scalar injection filter at `jω`.
    pub fn filter_at(&self, omega: f64) -> num_complex::Complex64 {
        1.0 / num_complex::Complex64::new(1.0, self.rise * omega)
    }
}

fn eye2() -> DMatrix<f64> {
    DMatrix::identity(2, 2)
}

/// Assemble branches, devices and injection filter into one model.
///
/// Every branch keeps its own two γ states, so non-uniform τ is handled
/// too. Bus voltages are algebraic: a bus whose device has an invertible
/// feedthrough solves its KCL row for its voltage directly; the remaining
/// buses (strictly proper devices and interior buses) use the
/// differentiated KCL, stabilised as `ṙ + r/rise = 0` so the constraint
/// residual decays instead of drifting. From a consistent (zero) initial
/// state the residual stays zero and the transfer is exact.
pub fn assemble_closed_loop_ss(
    devices: &[StateSpace],
    net: &NetworkModel,
    rise: f64,
) -> Result<ClosedLoopSs, NetworkError> {
    let n = net.n();
    let nb = net.n_buses();
    let g = net.ground();
    let w0 = net.omega0();
    if devices.len() != n {
        return Err(NetworkError::Invalid(format!("{} device models for {n} device buses", devices.len())));
    }
    if !(rise > 0.0 && rise.is_finite()) {
        return Err(NetworkError::Invalid(format!("rise time must be > 0, got {rise}")));
    }
    for (k, d) in devices.iter().enumerate() {
        if d.nu() != 2 || d.ny() != 2 {
            return Err(NetworkError::Invalid(format!("device {k} is not a 2x2 admittance")));
        }
    }
    let branches = net.branches();
    let caps = net.capacities();
    let nbr = branches.len();

    // state layout: branch currents, device states, injection filter
    let off_d: Vec<usize> = devices
        .iter()
        .scan(2 * nbr, |acc, d| {
            let o = *acc;
            *acc += d.nx();
            Some(o)
        })
        .collect();
    let off_f = 2 * nbr + devices.iter().map(|d| d.nx()).sum::<usize>();
    let nx = off_f + 2 * n;
    let nu = 2 * nb;

    // ẋ = F x + E U + W w
    let mut f = DMatrix::zeros(nx, nx);
    let mut e = DMatrix::zeros(nx, nu);
    let mut wm = DMatrix::zeros(nx, 2 * n);
    for (k, br) in branches.iter().enumerate() {
        let a = DMatrix::from_row_slice(2, 2, &[-w0 * br.tau, w0, -w0, -w0 * br.tau]);
        f.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&a);
        e.view_mut((2 * k, 2 * br.from), (2, 2)).copy_from(&(eye2() * w0));
        if br.to != g {
            e.view_mut((2 * k, 2 * br.to), (2, 2)).copy_from(&(eye2() * -w0));
        }
    }
    for (k, d) in devices.iter().enumerate() {
        let o = off_d[k];
        f.view_mut((o, o), (d.nx(), d.nx())).copy_from(d.a());
        e.view_mut((o, 2 * k), (d.nx(), 2)).copy_from(d.b());
    }
    for r in 0..2 * n {
        f[(off_f + r, off_f + r)] = -1.0 / rise;
        wm[(off_f + r, r)] = 1.0 / rise;
    }

    // KCL row of bus k as (x-coefficients, U-coefficients of its own voltage):
    // injection − outgoing branch current − device current = 0
    let kcl = |k: usize| -> (DMatrix<f64>, DMatrix<f64>) {
        let mut hx = DMatrix::zeros(2, nx);
        for (b, br) in branches.iter().enumerate() {
            let sign = if br.from == k {
                -1.0
            } else if br.to == k {
                1.0
            } else {
                continue;
            };
            hx.view_mut((0, 2 * b), (2, 2)).copy_from(&(eye2() * (sign * br.b)));
        }
        let mut hu = DMatrix::zeros(2, 2);
        if k < n {
            let d = &devices[k];
            let s = caps[k];
            hx.view_mut((0, off_f + 2 * k), (2, 2)).copy_from(&(eye2() * s.sqrt()));
            hx.view_mut((0, off_d[k]), (2, d.nx())).copy_from(&(d.c() * -s));
            hu = d.d() * -s;
        }
        (hx, hu)
    };

    let mut algebraic = Vec::new(); // buses solved from their own KCL row
    let mut differential = Vec::new(); // buses solved from the differentiated row
    for k in 0..nb {
        if k < n && devices[k].d().iter().any(|x| *x != 0.0) {
            let d = to_complex(devices[k].d());
            match inverse_with_cond(&d) {
                Some((_, cond)) if cond <= COND_LIMIT => algebraic.push(k),
                _ => {
                    return Err(NetworkError::IllPosedLoop(format!(
                        "device {k} has a singular nonzero feedthrough"
                    )))
                }
            }
        } else {
            differential.push(k);
        }
    }

    // U_S = Us·x
    let mut ux = DMatrix::zeros(nu, nx);
    for &k in &algebraic {
        let (hx, hu) = kcl(k);
        let inv = hu.try_inverse().ok_or_else(|| NetworkError::IllPosedLoop(format!("bus {k}")))?;
        ux.view_mut((2 * k, 0), (2, nx)).copy_from(&(-inv * hx));
    }

    let mut uw = DMatrix::zeros(nu, 2 * n);
    if !differential.is_empty() {
        let nr = 2 * differential.len();
        let mut hr = DMatrix::zeros(nr, nx);
        for (i, &k) in differential.iter().enumerate() {
            hr.view_mut((2 * i, 0), (2, nx)).copy_from(&kcl(k).0);
        }
        let mut pr = DMatrix::zeros(nu, nr);
        for (i, &k) in differential.iter().enumerate() {
            pr.view_mut((2 * k, 2 * i), (2, 2)).copy_from(&eye2());
        }
        // Hr(F x + E(ux x + Pr U_R) + W w) + Hr x / rise = 0
        let mr = &hr * &e * &pr;
        let (mr_inv, cond) = inverse_with_cond(&to_complex(&mr))
            .ok_or_else(|| NetworkError::IllPosedLoop("voltage constraint matrix is singular".into()))?;
        if cond > COND_LIMIT {
            return Err(NetworkError::IllPosedLoop(format!("voltage constraint condition {cond:.3e}")));
        }
        let mr_inv = mr_inv.map(|z| z.re);
        let drift = &f + &e * &ux + DMatrix::identity(nx, nx) / rise;
        let ur_x = -(&mr_inv * &hr * drift);
        let ur_w = -(&mr_inv * &hr * &wm);
        ux += &pr * ur_x;
        uw += &pr * ur_w;
    }

    let a = &f + &e * &ux;
    let b = &wm + &e * &uw;
    let mut py = DMatrix::zeros(2 * n, nu);
    for k in 0..n {
        py.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&(eye2() * caps[k].sqrt()));
    }
    let model = StateSpace::new(a, b, &py * ux, &py * uw)?;
    Ok(ClosedLoopSs { model, rise })
}

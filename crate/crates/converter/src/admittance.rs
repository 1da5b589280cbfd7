use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::{
    j2, line_gamma, pll_block, rot, Architecture, ConverterError, DroopParams, GflParams,
    OperatingPoint, PllGfmParams, VocParams, VsgParams,
};
use gridformer_lti::{interconnect, StateSpace, Wiring};

/// Small-signal admittance `ΔI = Y_de(s)·ΔU` of a device, current positive
/// into the converter, both signals in the global dq frame.
pub fn build_admittance(
    arch: &Architecture,
    op: &OperatingPoint,
    omega0: f64,
) -> Result<StateSpace, ConverterError> {
    arch.validate()?;
    if !matches!(arch, Architecture::None | Architecture::Ideal { .. }) && op.u_mag() <= 0.0 {
        return Err(ConverterError::InvalidParameter("terminal voltage is zero".into()));
    }
    let lin = Linearisation::new(op);
    match *arch {
        Architecture::PllPq(p) => gfl(&p, &lin, false),
        Architecture::PllPv(p) => gfl(&p, &lin, true),
        Architecture::Vsg(p) => swing(&p, &lin, omega0),
        Architecture::Droop(p) => droop(&p, &lin, omega0),
        Architecture::Voc(p) => voc(&p, &lin, omega0),
        Architecture::PllGfm(p) => pll_gfm(&p, &lin, omega0),
        Architecture::Ideal { g } => Ok(StateSpace::gain(DMatrix::identity(2, 2) * g)),
        Architecture::None => Ok(StateSpace::zero(2, 2)),
    }
}

/// Row vectors of the linearised measurement maps.
///
/// `ΔP = p_i·ΔI_o + p_u·ΔU`, `ΔQ = q_i·ΔI_o + q_u·ΔU`, with `ΔI_o` the
/// output-current deviation.
struct Linearisation {
    u0: Vector2<f64>,
    io0: Vector2<f64>,
    u_mag: f64,
    theta0: f64,
    p_i: DMatrix<f64>,
    p_u: DMatrix<f64>,
    q_i: DMatrix<f64>,
    q_u: DMatrix<f64>,
    /// Δ|U| = mag_u·ΔU
    mag_u: DMatrix<f64>,
    /// q-axis voltage in the steady-state frame: (J U0)ᵀΔU / |U0|
    uq_u: DMatrix<f64>,
}

impl Linearisation {
    fn new(op: &OperatingPoint) -> Self {
        let u0 = op.u0();
        let io0 = op.io0();
        let j = j2();
        let u_mag = u0.norm().max(f64::MIN_POSITIVE);
        Self {
            u0,
            io0,
            u_mag,
            theta0: op.theta0,
            p_i: row(&u0),
            p_u: row(&io0),
            q_i: row(&(j.transpose() * u0)),
            q_u: row(&(-(j.transpose() * io0))),
            mag_u: row(&(u0 / u_mag)),
            uq_u: row(&(j * u0 / u_mag)),
        }
    }
}

fn row(v: &Vector2<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(1, 2, &[v[0], v[1]])
}

fn col(v: &Vector2<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(2, 1, &[v[0], v[1]])
}

fn dm(m: &Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
}

fn eye2() -> DMatrix<f64> {
    DMatrix::identity(2, 2)
}

fn pi(kp: f64, ki: f64) -> Result<StateSpace, ConverterError> {
    if ki == 0.0 {
        // no integrator state to leave floating
        return Ok(StateSpace::gain(DMatrix::from_element(1, 1, kp)));
    }
    Ok(StateSpace::from_tf(&[kp, ki], &[1.0, 0.0])?)
}

/// Identical first-order lags on both axes.
fn lag2(tau: f64) -> Result<StateSpace, ConverterError> {
    Ok(StateSpace::new(eye2() * (-1.0 / tau), eye2() * (1.0 / tau), eye2(), DMatrix::zeros(2, 2))?)
}

/// PLL-PQ / PLL-PV: PI outer loops set local-frame current references
/// tracked through a first-order lag; the PLL rotates the frame.
fn gfl(p: &GflParams, lin: &Linearisation, voltage: bool) -> Result<StateSpace, ConverterError> {
    let parts = [
        pll_block(p.f_pll, p.zeta, lin.u_mag)?,
        pi(p.kp_p, p.ki_p)?,
        pi(p.kp_q, p.ki_q)?,
        lag2(p.tau_i)?,
    ];
    let (pll, pi_p, pi_q, lag) = (0, 1, 2, 3);
    let r = dm(&rot(lin.theta0));
    let jio = col(&(j2() * lin.io0));
    let mut w = Wiring::new(&parts, 2, 2);
    w.input(pll, &lin.uq_u);
    // ΔI_o = R(θ0)·y_lag + J·I_o0·Δθ
    w.link(pi_p, lag, &(&lin.p_i * &r)).link(pi_p, pll, &(&lin.p_i * &jio)).input(pi_p, &lin.p_u);
    if voltage {
        w.input(pi_q, &lin.mag_u);
    } else {
        w.link(pi_q, lag, &(&lin.q_i * &r))
            .link(pi_q, pll, &(&lin.q_i * &jio))
            .input(pi_q, &lin.q_u);
    }
    w.link(lag, pi_p, &DMatrix::from_column_slice(2, 1, &[-1.0, 0.0]));
    w.link(lag, pi_q, &DMatrix::from_column_slice(2, 1, &[0.0, 1.0]));
    w.output(lag, &(-r)).output(pll, &(-jio));
    Ok(interconnect(&parts, &w)?)
}

/// Internal EMF behind `Z_v = L_v·γ_v⁻¹` in steady state.
fn emf_behind_impedance(lin: &Linearisation, l_v: f64, tau_v: f64) -> Vector2<f64> {
    let zv = (Matrix2::identity() * tau_v + j2()) * l_v;
    lin.u0 + zv * lin.io0
}

/// `γ_v(s)/L_v`: current through the virtual impedance per volt across it.
fn virtual_impedance(l_v: f64, tau_v: f64, omega0: f64) -> Result<StateSpace, ConverterError> {
    Ok(line_gamma(tau_v, omega0)?.scale(1.0 / l_v))
}

/// Swing-equation synchronisation: `Δθ = ω₀/(s(Js + D))·(−ΔP)`.
fn swing(p: &VsgParams, lin: &Linearisation, omega0: f64) -> Result<StateSpace, ConverterError> {
    let den: &[f64] = if p.j > 0.0 { &[p.j, p.d, 0.0] } else { &[p.d, 0.0] };
    let sync = StateSpace::from_tf(&[omega0], den)?;
    emf_source(sync, lin, p.l_v, p.tau_v, omega0)
}

/// Droop is the inertia-free swing law with `D = 1/K_P`.
fn droop(p: &DroopParams, lin: &Linearisation, omega0: f64) -> Result<StateSpace, ConverterError> {
    let vsg = VsgParams { j: 0.0, d: 1.0 / p.k_p, l_v: p.l_v, tau_v: p.tau_v };
    swing(&vsg, lin, omega0)
}

/// Constant-magnitude EMF rotated by `sync(−ΔP)` behind the virtual
/// impedance.
fn emf_source(
    sync: StateSpace,
    lin: &Linearisation,
    l_v: f64,
    tau_v: f64,
    omega0: f64,
) -> Result<StateSpace, ConverterError> {
    let e0 = emf_behind_impedance(lin, l_v, tau_v);
    let parts = [sync, virtual_impedance(l_v, tau_v, omega0)?];
    let (sync, zv) = (0, 1);
    let mut w = Wiring::new(&parts, 2, 2);
    w.link(sync, zv, &(-&lin.p_i)).input(sync, &(-&lin.p_u));
    w.link(zv, sync, &col(&(j2() * e0))).input(zv, &(-eye2()));
    w.output(zv, &(-eye2()));
    Ok(interconnect(&parts, &w)?)
}

/// Averaged VOC: phase integrates `−η·ΔP/U0²`, amplitude follows a
/// first-order reactive droop, both acting on an EMF behind `Z_v`.
fn voc(p: &VocParams, lin: &Linearisation, omega0: f64) -> Result<StateSpace, ConverterError> {
    let e0 = emf_behind_impedance(lin, p.l_v, p.tau_v);
    let parts = [
        StateSpace::from_tf(&[omega0 * p.eta / (lin.u_mag * lin.u_mag)], &[1.0, 0.0])?,
        StateSpace::from_tf(&[p.lambda_a * p.k_q], &[1.0, p.lambda_a])?,
        virtual_impedance(p.l_v, p.tau_v, omega0)?,
    ];
    let (phase, amp, zv) = (0, 1, 2);
    let mut w = Wiring::new(&parts, 2, 2);
    w.link(phase, zv, &(-&lin.p_i)).input(phase, &(-&lin.p_u));
    w.link(amp, zv, &(-&lin.q_i)).input(amp, &(-&lin.q_u));
    w.link(zv, phase, &col(&(j2() * e0)))
        .link(zv, amp, &col(&(e0 / e0.norm())))
        .input(zv, &(-eye2()));
    w.output(zv, &(-eye2()));
    Ok(interconnect(&parts, &w)?)
}

/// PLL-GFM: the PLL sets the frame, a power PI shifts the EMF phase and a
/// virtual admittance `Y_v·γ_v` produces the current reference.
fn pll_gfm(p: &PllGfmParams, lin: &Linearisation, omega0: f64) -> Result<StateSpace, ConverterError> {
    let gv0 = (Matrix2::identity() * p.tau_v + j2()) / p.y_v;
    let e0 = lin.u0 + gv0 * lin.io0;
    let parts = [
        pll_block(p.f_pll, p.zeta, lin.u_mag)?,
        pi(p.kp_phi, p.ki_phi)?,
        line_gamma(p.tau_v, omega0)?.scale(p.y_v),
        lag2(p.tau_i)?,
    ];
    let (pll, pi_phi, yv, lag) = (0, 1, 2, 3);
    let jio = col(&(j2() * lin.io0));
    let mut w = Wiring::new(&parts, 2, 2);
    w.input(pll, &lin.uq_u);
    // ΔI_o = y_lag + J·I_o0·Δθ
    w.link(pi_phi, lag, &(-&lin.p_i))
        .link(pi_phi, pll, &(-(&lin.p_i * &jio)))
        .input(pi_phi, &(-&lin.p_u));
    w.link(yv, pi_phi, &col(&(j2() * e0)))
        .link(yv, pll, &col(&(j2() * lin.u0)))
        .input(yv, &(-eye2()));
    w.link(lag, yv, &eye2());
    w.output(lag, &(-eye2())).output(pll, &(-jio));
    Ok(interconnect(&parts, &w)?)
}

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::{block_repeat, gamma, gamma_inv, kron2, BoundCheck, StrengthError};
use gridformer_converter::LineParams;
use gridformer_device::{output_sensitivity, sensitivity, CurveKind, StrengthCurve};
use gridformer_lti::{
    inverse_with_cond, sigma_max, sigma_min, CMatrix, FrequencyGrid, StateSpace, COND_LIMIT,
};
use gridformer_network::{
    closed_loop_admittance, kron_reduce, kron_reduce_static, scaled_grid_operator, static_b_matrix,
    NetworkModel, ScaledGridOperator,
};

/// Strength curves of a system with one extra converter at a former
/// interior bus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AddedStrength {
    /// `σ̲` of the closed loop seen from the original device buses, with the
    /// extra bus eliminated.
    pub kappa: StrengthCurve,
    /// Grid strength of the reduced network that absorbed the extra device.
    pub alpha: StrengthCurve,
    /// Strength of the extra bus from its impedance column.
    pub kappa_extra: StrengthCurve,
    /// Forming Index of the extra device against its own Thevenin line.
    pub fi: StrengthCurve,
}

/// Static partition of the scaled `(n+1)`-bus grid matrix.
struct Partition {
    bn: DMatrix<f64>,
    bcol: DMatrix<f64>,
    b: f64,
    tau: f64,
    omega0: f64,
}

impl Partition {
    fn new(promoted: &NetworkModel) -> Result<Self, StrengthError> {
        let op = scaled_grid_operator(promoted)?;
        let ScaledGridOperator::Uniform { b_grid, tau, omega0 } = op else {
            let (min, max) = promoted.tau_range();
            return Err(StrengthError::NonUniformTau { min, max });
        };
        let n = b_grid.nrows() - 1;
        Ok(Self {
            bn: b_grid.view((0, 0), (n, n)).into_owned(),
            bcol: b_grid.view((0, n), (n, 1)).into_owned(),
            b: b_grid[(n, n)],
            tau,
            omega0,
        })
    }

    /// `B^{N,1}B^{1,N}/B^{N+1}`.
    fn coupling(&self) -> DMatrix<f64> {
        &self.bcol * self.bcol.transpose() / self.b
    }

    /// Pre-connection reduced grid `B̃ = B^N − B^{N,1}B^{1,N}/B^{N+1}`.
    fn reduced(&self) -> DMatrix<f64> {
        &self.bn - self.coupling()
    }

    fn line(&self) -> Result<LineParams, StrengthError> {
        Ok(LineParams::with_omega0(1.0 / self.b, self.tau, self.omega0)?)
    }
}

fn inv(m: &CMatrix, what: &'static str, omega: f64) -> Result<CMatrix, StrengthError> {
    match inverse_with_cond(m) {
        Some((x, cond)) if cond <= COND_LIMIT => Ok(x),
        _ => Err(StrengthError::SingularBlock { what, omega }),
    }
}

fn device_block(devices: &[StateSpace], omega: f64) -> Result<CMatrix, StrengthError> {
    Ok(gridformer_network::device_block(devices, omega)?)
}

/// Everything the block formulas produce at one frequency.
struct BlockEval {
    fi: f64,
    fi_output: f64,
    kappa: f64,
    alpha: f64,
    kappa_extra: f64,
    /// `σ̲(Y^{N+1}_Cl)` of the 2×2 Schur complement at the extra bus.
    sigma_extra: f64,
    /// `σ̲(B^{N+1}γ)/σ̄(S_v) − σ̄(T₂)`.
    sigma_extra_bound: f64,
    /// `Σ_j σ̄_j(A₁⁻¹A₂)`.
    coupling_sum: f64,
    /// `λ̲[B̃⊗I + P⊗(I − S̃_{v,H})]`.
    alpha_hermitian: f64,
}

struct Blocks<'a> {
    part: Partition,
    devices: &'a [StateSpace],
    s_v: StateSpace,
    s_v_out: StateSpace,
}

impl Blocks<'_> {
    fn at(&self, w: f64) -> Result<BlockEval, StrengthError> {
        let p = &self.part;
        let n = p.bn.nrows();
        let g = gamma(p.tau, w, p.omega0);
        let sv = self.s_v.eval_jw(w)?;
        // γS_v = S̃_vγ; the α form needs the output-side sensitivity.
        let svt = self.s_v_out.eval_jw(w)?;
        let coupling = p.coupling();
        let a1 = kron2(&p.bn, &g) + device_block(self.devices, w)?;
        let t1 = kron2(&coupling, &(&g * &sv));
        let kappa = sigma_min(&(&a1 - &t1));

        let alpha_m = kron2(&p.bn, &CMatrix::identity(2, 2)) - kron2(&coupling, &svt);
        let alpha = sigma_min(&alpha_m);
        let herm = (&svt + svt.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
        let alpha_h = kron2(&p.reduced(), &CMatrix::identity(2, 2))
            + kron2(&coupling, &(CMatrix::identity(2, 2) - herm));
        let alpha_hermitian = alpha_h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);

        let a2 = kron2(&p.bcol, &g);
        let a3 = kron2(&p.bcol.transpose(), &g);
        let a1_inv = inv(&a1, "A1", w)?;
        let a1_inv_a2 = &a1_inv * &a2;
        let t2 = &a3 * &a1_inv_a2;
        let bg = &g * num_complex::Complex64::new(p.b, 0.0);
        let y_extra = &bg * inv(&sv, "S_v", w)? - &t2;
        let z11 = inv(&y_extra, "Y_Cl^{N+1}", w)?;
        let zn1 = -(&a1_inv_a2 * &z11);
        let col_sum: f64 = (0..n).map(|j| sigma_max(&zn1.view((2 * j, 0), (2, 2)).into_owned())).sum();
        let kappa_extra = 1.0 / (col_sum + sigma_max(&z11));
        let coupling_sum = (0..n).map(|j| sigma_max(&a1_inv_a2.view((2 * j, 0), (2, 2)).into_owned())).sum();
        let fi = sigma_max(&sv);
        Ok(BlockEval {
            fi,
            fi_output: sigma_max(&svt),
            kappa,
            alpha,
            kappa_extra,
            sigma_extra: sigma_min(&y_extra),
            sigma_extra_bound: sigma_min(&bg) / fi - sigma_max(&t2),
            coupling_sum,
            alpha_hermitian,
        })
    }
}

fn blocks<'a>(
    base: &NetworkModel,
    devices: &'a [StateSpace],
    hub: usize,
    extra: &StateSpace,
    capacity: f64,
) -> Result<Blocks<'a>, StrengthError> {
    if devices.len() != base.n() {
        return Err(StrengthError::Invalid(format!("{} devices for {} device buses", devices.len(), base.n())));
    }
    let part = Partition::new(&base.promote_interior(hub, capacity)?)?;
    let line = part.line()?;
    Ok(Blocks { s_v: sensitivity(extra, &line)?, s_v_out: output_sensitivity(extra, &line)?, part, devices })
}

fn sweep(b: &Blocks<'_>, grid: &FrequencyGrid) -> Result<Vec<BlockEval>, StrengthError> {
    grid.points().par_iter().map(|&w| b.at(w)).collect()
}

fn curves(evals: &[BlockEval], grid: &FrequencyGrid) -> AddedStrength {
    let pick = |kind, f: fn(&BlockEval) -> f64| StrengthCurve::new(kind, grid.clone(), evals.iter().map(f).collect());
    AddedStrength {
        kappa: pick(CurveKind::Kappa, |e| e.kappa),
        alpha: pick(CurveKind::Alpha, |e| e.alpha),
        kappa_extra: pick(CurveKind::Bus, |e| e.kappa_extra),
        fi: pick(CurveKind::Fi, |e| e.fi),
    }
}

/// Strength with an extra converter (device per unit, rating `capacity`)
/// at interior bus `hub`, from the block-inverse formulas: the extra bus is
/// eliminated through the device's single-bus sensitivity against
/// `L_g = 1/B^{N+1}_Grid`. Needs uniform τ.
///
/// `devices` are the models of the original device buses, linearised at
/// the operating point that includes the extra converter.
pub fn added_device_strength(
    base: &NetworkModel,
    devices: &[StateSpace],
    hub: usize,
    extra: &StateSpace,
    capacity: f64,
    grid: &FrequencyGrid,
) -> Result<AddedStrength, StrengthError> {
    let b = blocks(base, devices, hub, extra, capacity)?;
    Ok(curves(&sweep(&b, grid)?, grid))
}

/// The same curves by assembling and inverting the full `(n+1)`-bus closed
/// loop frequency by frequency.
pub fn added_device_direct(
    base: &NetworkModel,
    devices: &[StateSpace],
    hub: usize,
    extra: &StateSpace,
    capacity: f64,
    grid: &FrequencyGrid,
) -> Result<AddedStrength, StrengthError> {
    let promoted = base.promote_interior(hub, capacity)?;
    let netop = ScaledGridOperator::general(&promoted);
    let n = base.n();
    let mut all = devices.to_vec();
    all.push(extra.clone());
    let tau0 = promoted.mean_tau();
    let w0 = promoted.omega0();
    let red = kron_reduce_static(&static_b_matrix(&promoted), &promoted.interior())?;
    let l_g = capacity / red[(n, n)];
    let evals: Vec<[f64; 4]> = grid
        .points()
        .par_iter()
        .map(|&w| -> Result<[f64; 4], StrengthError> {
            let y = closed_loop_admittance(&all, &netop, w)?;
            let z = inv(&y, "Y_Cl^{N+1}", w)?;
            let kappa = 1.0 / sigma_max(&z.view((0, 0), (2 * n, 2 * n)).into_owned());
            let col: f64 = (0..=n).map(|j| sigma_max(&z.view((2 * j, 2 * n), (2, 2)).into_owned())).sum();
            let mut yg = netop.at(w)?;
            let ye = extra.eval_jw(w)?;
            let mut corner = yg.view_mut((2 * n, 2 * n), (2, 2));
            corner += &ye;
            let reduced = kron_reduce(&yg, &[n], 2)?;
            let alpha = sigma_min(&(reduced * block_repeat(&gamma_inv(tau0, w, w0), n)));
            // S_v = [I + L_g γ⁻¹ Y]⁻¹ pointwise
            let s = CMatrix::identity(2, 2) + gamma_inv(tau0, w, w0) * &ye * num_complex::Complex64::new(l_g, 0.0);
            let fi = sigma_max(&inv(&s, "I + L_g γ⁻¹Y", w)?);
            Ok([kappa, alpha, 1.0 / col, fi])
        })
        .collect::<Result<_, _>>()?;
    let pick = |kind, i: usize| StrengthCurve::new(kind, grid.clone(), evals.iter().map(|e| e[i]).collect());
    Ok(AddedStrength {
        kappa: pick(CurveKind::Kappa, 0),
        alpha: pick(CurveKind::Alpha, 1),
        kappa_extra: pick(CurveKind::Bus, 2),
        fi: pick(CurveKind::Fi, 3),
    })
}

/// Per-frequency outcome of the added-device enhancement test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop2Point {
    pub omega: f64,
    /// `σ̄(S_v)` of the extra device.
    pub fi: f64,
    /// `σ̄(S̃_v)`, the factor that actually enters α.
    pub fi_output: f64,
    pub alpha: f64,
    /// `α(jω) > σ̲(B̃_Grid^N)`.
    pub enhanced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop2Report {
    /// Grid strength before the extra converter is connected.
    pub alpha_pre: f64,
    pub points: Vec<Prop2Point>,
    /// Bound-chain instances; each is an inequality that must hold.
    pub checks: Vec<BoundCheck>,
}

impl Prop2Report {
    /// Whether α exceeds the pre-connection value wherever `FI < 1`.
    pub fn enhances_where_forming(&self) -> bool {
        self.points.iter().filter(|p| p.fi < 1.0).all(|p| p.enhanced)
    }

    pub fn all_bounds_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Evaluate the grid-strength and extra-bus-strength bound chains for an
/// added converter at every grid point.
///
/// The last step of the α chain, `λ̲[…] ≥ σ̲(B̃) + σ̲(P)(1 − σ̄)`, only holds
/// when the output sensitivity is contractive, so it is reported only there.
pub fn check_prop2(
    base: &NetworkModel,
    devices: &[StateSpace],
    hub: usize,
    extra: &StateSpace,
    capacity: f64,
    grid: &FrequencyGrid,
) -> Result<Prop2Report, StrengthError> {
    let b = blocks(base, devices, hub, extra, capacity)?;
    let reduced = b.part.reduced();
    let alpha_pre = reduced.symmetric_eigenvalues().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let coupling_min = b.part.coupling().symmetric_eigenvalues().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let evals = sweep(&b, grid)?;
    let mut points = Vec::with_capacity(evals.len());
    let mut checks = Vec::new();
    for (&w, e) in grid.points().iter().zip(&evals) {
        points.push(Prop2Point { omega: w, fi: e.fi, fi_output: e.fi_output, alpha: e.alpha, enhanced: e.alpha > alpha_pre });
        checks.push(BoundCheck::new(w, "alpha >= lambda_min(hermitian form)", e.alpha, e.alpha_hermitian));
        if e.fi_output <= 1.0 {
            let rhs = alpha_pre + coupling_min * (1.0 - e.fi_output);
            checks.push(BoundCheck::new(w, "lambda_min(hermitian form) >= alpha_pre + sigma_min(P)(1 - fi)", e.alpha_hermitian, rhs));
        }
        checks.push(BoundCheck::new(w, "sigma_min(Y_extra) >= sigma_min(B gamma)/fi - sigma_max(T2)", e.sigma_extra, e.sigma_extra_bound));
        let ratio = e.sigma_extra / (e.coupling_sum + 1.0);
        checks.push(BoundCheck::new(w, "kappa_extra >= sigma_min(Y_extra)/(coupling + 1)", e.kappa_extra, ratio));
        checks.push(BoundCheck::new(w, "kappa_extra >= bound chain", e.kappa_extra, e.sigma_extra_bound / (e.coupling_sum + 1.0)));
    }
    Ok(Prop2Report { alpha_pre, points, checks })
}

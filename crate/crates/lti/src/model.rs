use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{inverse_with_cond, to_complex, CMatrix, FrequencyGrid, LtiError, COND_LIMIT, STAB_EPS};

/// Real state-space model `ẋ = Ax + Bu`, `y = Cx + Du`.
///
/// `nx = 0` is a static gain and is handled everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

/// One point of a frequency response.
#[derive(Debug, Clone)]
pub struct FreqResponseSample {
    pub omega: f64,
    pub value: CMatrix,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Result<Self, LtiError> {
        let nx = a.nrows();
        if a.ncols() != nx {
            return Err(LtiError::Dimension(format!("A is {}x{}", nx, a.ncols())));
        }
        if b.nrows() != nx || c.ncols() != nx {
            return Err(LtiError::Dimension(format!(
                "B is {}x{}, C is {}x{} for nx = {nx}",
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(LtiError::Dimension(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Static gain `y = D u`.
    pub fn gain(d: DMatrix<f64>) -> Self {
        let (ny, nu) = d.shape();
        Self {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, nu),
            c: DMatrix::zeros(ny, 0),
            d,
        }
    }

    pub fn zero(ny: usize, nu: usize) -> Self {
        Self::gain(DMatrix::zeros(ny, nu))
    }

    pub fn identity(n: usize) -> Self {
        Self::gain(DMatrix::identity(n, n))
    }

    /// SISO model from polynomial coefficients, highest power first.
    ///
    /// Realised in controllable canonical form. The transfer must be proper.
    pub fn from_tf(num: &[f64], den: &[f64]) -> Result<Self, LtiError> {
        let den: Vec<f64> = den.iter().copied().skip_while(|x| *x == 0.0).collect();
        if den.is_empty() {
            return Err(LtiError::Dimension("zero denominator".into()));
        }
        let n = den.len() - 1;
        if num.len() > den.len() {
            return Err(LtiError::Dimension("improper transfer function".into()));
        }
        let lead = den[0];
        let a_coef: Vec<f64> = den.iter().map(|x| x / lead).collect();
        let mut b_coef = vec![0.0; n + 1];
        let off = n + 1 - num.len();
        for (k, x) in num.iter().enumerate() {
            b_coef[off + k] = x / lead;
        }
        let b0 = b_coef[0];
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        for i in 0..n {
            a[(n - 1, i)] = -a_coef[n - i];
        }
        let mut b = DMatrix::zeros(n, 1);
        if n > 0 {
            b[(n - 1, 0)] = 1.0;
        }
        let mut c = DMatrix::zeros(1, n);
        for i in 0..n {
            c[(0, i)] = b_coef[n - i] - a_coef[n - i] * b0;
        }
        let d = DMatrix::from_element(1, 1, b0);
        Self::new(a, b, c, d)
    }

    pub fn nx(&self) -> usize {
        self.a.nrows()
    }
    pub fn nu(&self) -> usize {
        self.b.ncols()
    }
    pub fn ny(&self) -> usize {
        self.c.nrows()
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// `C(sI − A)⁻¹B + D`.
    pub fn eval(&self, s: Complex64) -> Result<CMatrix, LtiError> {
        let d = to_complex(&self.d);
        let nx = self.nx();
        if nx == 0 {
            return Ok(d);
        }
        let mut m = to_complex(&self.a).map(|z| -z);
        for i in 0..nx {
            m[(i, i)] += s;
        }
        let (inv, cond) = inverse_with_cond(&m).ok_or(LtiError::NearSingularResolvent {
            s,
            cond: f64::INFINITY,
        })?;
        if cond > COND_LIMIT {
            return Err(LtiError::NearSingularResolvent { s, cond });
        }
        Ok(to_complex(&self.c) * inv * to_complex(&self.b) + d)
    }

    /// Evaluate at `s = jω`.
    pub fn eval_jw(&self, omega: f64) -> Result<CMatrix, LtiError> {
        self.eval(Complex64::new(0.0, omega))
    }

    pub fn freq_response(&self, grid: &FrequencyGrid) -> Result<Vec<FreqResponseSample>, LtiError> {
        grid.points()
            .iter()
            .map(|&omega| Ok(FreqResponseSample { omega, value: self.eval_jw(omega)? }))
            .collect()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        if self.nx() == 0 {
            return Vec::new();
        }
        let m = balance(&self.a);
        // Deflation at exactly one ulp can stall on rounding noise; relax it
        // step by step, strictest first.
        for eps in [f64::EPSILON, 1e-15, 1e-14, 1e-13, 1e-12] {
            if let Some(schur) = nalgebra::linalg::Schur::try_new(m.clone(), eps, 100 * m.nrows().max(10)) {
                return schur.complex_eigenvalues().iter().copied().collect();
            }
        }
        panic!("QR iteration failed to converge")
    }

    /// Largest real part over the poles; `-∞` for a static gain.
    pub fn spectral_abscissa(&self) -> f64 {
        self.poles().iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.is_stable_with(STAB_EPS)
    }

    pub fn is_stable_with(&self, eps: f64) -> bool {
        self.spectral_abscissa() < -eps
    }

    pub(crate) fn require_stable(&self) -> Result<(), LtiError> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(LtiError::UnstableModel { max_re: self.spectral_abscissa() })
        }
    }

    /// Cascade: `self` feeds `next`, transfer `next · self`.
    pub fn series(&self, next: &StateSpace) -> Result<StateSpace, LtiError> {
        if next.nu() != self.ny() {
            return Err(LtiError::Dimension(format!(
                "series: {} outputs into {} inputs",
                self.ny(),
                next.nu()
            )));
        }
        let (n1, n2) = (self.nx(), next.nx());
        let mut a = DMatrix::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&next.a);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&next.b * &self.c));
        let mut b = DMatrix::zeros(n1 + n2, self.nu());
        b.view_mut((0, 0), (n1, self.nu())).copy_from(&self.b);
        b.view_mut((n1, 0), (n2, self.nu())).copy_from(&(&next.b * &self.d));
        let mut c = DMatrix::zeros(next.ny(), n1 + n2);
        c.view_mut((0, 0), (next.ny(), n1)).copy_from(&(&next.d * &self.c));
        c.view_mut((0, n1), (next.ny(), n2)).copy_from(&next.c);
        let d = &next.d * &self.d;
        StateSpace::new(a, b, c, d)
    }

    /// Sum of two models with equal shapes.
    pub fn parallel(&self, other: &StateSpace) -> Result<StateSpace, LtiError> {
        if self.nu() != other.nu() || self.ny() != other.ny() {
            return Err(LtiError::Dimension("parallel: shapes differ".into()));
        }
        let (n1, n2) = (self.nx(), other.nx());
        let mut a = DMatrix::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);
        let mut b = DMatrix::zeros(n1 + n2, self.nu());
        b.view_mut((0, 0), (n1, self.nu())).copy_from(&self.b);
        b.view_mut((n1, 0), (n2, self.nu())).copy_from(&other.b);
        let mut c = DMatrix::zeros(self.ny(), n1 + n2);
        c.view_mut((0, 0), (self.ny(), n1)).copy_from(&self.c);
        c.view_mut((0, n1), (self.ny(), n2)).copy_from(&other.c);
        StateSpace::new(a, b, c, &self.d + &other.d)
    }

    /// Block-diagonal stacking of inputs, outputs and states.
    pub fn append(&self, other: &StateSpace) -> StateSpace {
        let (n1, n2) = (self.nx(), other.nx());
        let (u1, u2) = (self.nu(), other.nu());
        let (y1, y2) = (self.ny(), other.ny());
        StateSpace {
            a: block_diag(&self.a, &other.a),
            b: block_diag_rect(&self.b, &other.b, n1, u1, n2, u2),
            c: block_diag_rect(&self.c, &other.c, y1, n1, y2, n2),
            d: block_diag_rect(&self.d, &other.d, y1, u1, y2, u2),
        }
    }

    /// Negative feedback `u = r − K y` around `self`.
    pub fn feedback(&self, k: &StateSpace) -> Result<StateSpace, LtiError> {
        if k.nu() != self.ny() || k.ny() != self.nu() {
            return Err(LtiError::Dimension("feedback: loop shapes differ".into()));
        }
        let parts = [self.clone(), k.clone()];
        let mut w = Wiring::new(&parts, self.nu(), self.ny());
        w.input(0, &DMatrix::identity(self.nu(), self.nu()));
        w.link(0, 1, &(-DMatrix::identity(self.nu(), self.nu())));
        w.link(1, 0, &DMatrix::identity(self.ny(), self.ny()));
        w.output(0, &DMatrix::identity(self.ny(), self.ny()));
        crate::interconnect(&parts, &w)
    }

    /// Inverse system; requires square invertible `D`.
    pub fn inverse(&self) -> Result<StateSpace, LtiError> {
        if self.nu() != self.ny() {
            return Err(LtiError::Dimension("inverse of non-square system".into()));
        }
        let dinv = crate::checked_inverse(&to_complex(&self.d))
            .ok_or(LtiError::SingularFeedthrough)?
            .map(|z| z.re);
        let a = &self.a - &self.b * &dinv * &self.c;
        let b = &self.b * &dinv;
        let c = -(&dinv * &self.c);
        StateSpace::new(a, b, c, dinv)
    }

    /// Output map `y ↦ K y`.
    pub fn premul(&self, k: &DMatrix<f64>) -> Result<StateSpace, LtiError> {
        StateSpace::new(self.a.clone(), self.b.clone(), k * &self.c, k * &self.d)
    }

    /// Input map `u ↦ K u`.
    pub fn postmul(&self, k: &DMatrix<f64>) -> Result<StateSpace, LtiError> {
        StateSpace::new(self.a.clone(), &self.b * k, self.c.clone(), &self.d * k)
    }

    pub fn scale(&self, g: f64) -> StateSpace {
        StateSpace {
            a: self.a.clone(),
            b: self.b.clone(),
            c: &self.c * g,
            d: &self.d * g,
        }
    }
}

use crate::Wiring;

fn block_diag(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    block_diag_rect(x, y, x.nrows(), x.ncols(), y.nrows(), y.ncols())
}

fn block_diag_rect(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    r1: usize,
    c1: usize,
    r2: usize,
    c2: usize,
) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(x);
    m.view_mut((r1, c1), (r2, c2)).copy_from(y);
    m
}

/// Parlett–Reinsch diagonal balancing by powers of two, which leaves the
/// spectrum unchanged and keeps the QR iteration well conditioned.
fn balance(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let c: f64 = (0..n).filter(|&j| j != i).map(|j| m[(j, i)].abs()).sum();
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let (mut cc, s) = (c, c + r);
            let mut rr = r;
            while cc < rr / 2.0 {
                cc *= 2.0;
                rr /= 2.0;
                f *= 2.0;
            }
            while cc >= rr * 2.0 {
                cc /= 2.0;
                rr *= 2.0;
                f /= 2.0;
            }
            if (cc + rr) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
    m
}

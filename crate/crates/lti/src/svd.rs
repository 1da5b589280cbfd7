//! Complex singular value decomposition by one-sided (Hestenes) Jacobi
//! rotations.
//!
//! Columns of the working matrix are orthogonalised pairwise until every
//! pair is numerically orthogonal; the column norms are then the singular
//! values. Accurate for the small dense matrices met here (≤ a few dozen).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::CMatrix;

const TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U diag(s) Vᴴ`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(m: &CMatrix) -> Svd {
    if m.nrows() < m.ncols() {
        let t = jacobi(&m.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    jacobi(m)
}

fn jacobi(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut v: CMatrix = DMatrix::identity(cols, cols);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut g = Complex64::new(0.0, 0.0);
                for i in 0..rows {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    g += x.conj() * y;
                }
                let gn = g.norm();
                if gn == 0.0 || gn <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (g / gn).conj();
                let zeta = (beta - alpha) / (2.0 * gn);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, phase, c, s);
                rotate(&mut v, p, q, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, f64)> = (0..cols).map(|j| (j, a.column(j).norm())).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));
    let mut u = CMatrix::zeros(rows, cols);
    let mut vs = CMatrix::zeros(cols, cols);
    let mut s = Vec::with_capacity(cols);
    for (k, &(j, sigma)) in order.iter().enumerate() {
        s.push(sigma);
        if sigma > 0.0 {
            u.set_column(k, &(a.column(j) / Complex64::new(sigma, 0.0)));
        }
        vs.set_column(k, &v.column(j));
    }
    Svd { u, s, v: vs }
}

fn rotate(m: &mut CMatrix, p: usize, q: usize, phase: Complex64, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let x = m[(i, p)];
        let y = m[(i, q)] * phase;
        m[(i, p)] = x * c - y * s;
        m[(i, q)] = x * s + y * c;
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    svd(m).s
}

/// Largest singular value σ̄; zero for an empty matrix.
pub fn sigma_max(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value σ̲ over `min(rows, cols)` values; zero for an
/// empty matrix.
pub fn sigma_min(m: &CMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

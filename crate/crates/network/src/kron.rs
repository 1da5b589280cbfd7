use nalgebra::DMatrix;

use crate::NetworkError;
use gridformer_lti::{inverse_with_cond, to_complex, CMatrix, COND_LIMIT};

fn rows(buses: &[usize], block: usize) -> Vec<usize> {
    buses.iter().flat_map(|b| (0..block).map(move |r| b * block + r)).collect()
}

fn pick(m: &CMatrix, r: &[usize], c: &[usize]) -> CMatrix {
    CMatrix::from_fn(r.len(), c.len(), |i, j| m[(r[i], c[j])])
}

/// Schur complement `Y₁ − Y₂Y₄⁻¹Y₃` eliminating the buses in `interior`.
///
/// `block` is the number of rows per bus (2 for dq matrices, 1 for static
/// ones). Kept buses stay in ascending order.
pub fn kron_reduce(y: &CMatrix, interior: &[usize], block: usize) -> Result<CMatrix, NetworkError> {
    if y.nrows() != y.ncols() || y.nrows() % block != 0 {
        return Err(NetworkError::Invalid(format!("kron_reduce: {}x{} matrix", y.nrows(), y.ncols())));
    }
    if interior.is_empty() {
        return Ok(y.clone());
    }
    let nbus = y.nrows() / block;
    if interior.iter().any(|b| *b >= nbus) {
        return Err(NetworkError::Invalid("interior bus out of range".into()));
    }
    let keep: Vec<usize> = (0..nbus).filter(|b| !interior.contains(b)).collect();
    let (k, e) = (rows(&keep, block), rows(interior, block));
    let (inv, cond) = inverse_with_cond(&pick(y, &e, &e))
        .ok_or(NetworkError::SingularInteriorBlock { cond: f64::INFINITY })?;
    if cond > COND_LIMIT {
        return Err(NetworkError::SingularInteriorBlock { cond });
    }
    Ok(pick(y, &k, &k) - pick(y, &k, &e) * inv * pick(y, &e, &k))
}

/// Real-valued [`kron_reduce`] with one row per bus.
pub fn kron_reduce_static(b: &DMatrix<f64>, interior: &[usize]) -> Result<DMatrix<f64>, NetworkError> {
    Ok(kron_reduce(&to_complex(b), interior, 1)?.map(|z| z.re))
}

use crate::StrengthError;
use gridformer_lti::{inverse_with_cond, to_complex, COND_LIMIT};
use gridformer_network::{kron_reduce_static, static_b_matrix, NetworkModel};
use nalgebra::DMatrix;

fn reduced_b(net: &NetworkModel) -> Result<DMatrix<f64>, StrengthError> {
    let b = kron_reduce_static(&static_b_matrix(net), &net.interior()).map_err(|_| StrengthError::SingularBMatrix)?;
    Ok((&b + b.transpose()) * 0.5)
}

/// Equivalent short-circuit ratio per device bus,
/// `ESCR_i = 1 / Σ_j S_j |Z_ij|` with `Z = B_N⁻¹`.
pub fn escr(net: &NetworkModel) -> Result<Vec<f64>, StrengthError> {
    let b = reduced_b(net)?;
    let z = match inverse_with_cond(&to_complex(&b)) {
        Some((z, cond)) if cond <= COND_LIMIT => z.map(|c| c.re),
        _ => return Err(StrengthError::SingularBMatrix),
    };
    let s = net.capacities();
    Ok((0..net.n())
        .map(|i| 1.0 / (0..net.n()).map(|j| s[j] * z[(i, j)].abs()).sum::<f64>())
        .collect())
}

/// Generalised short-circuit ratio `λ̲(S⁻¹B_N)`, computed from the
/// congruent symmetric form `S^{-1/2} B_N S^{-1/2}`.
pub fn gscr(net: &NetworkModel) -> Result<f64, StrengthError> {
    let b = reduced_b(net)?;
    let k: Vec<f64> = net.capacities().iter().map(|s| 1.0 / s.sqrt()).collect();
    let m = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * k[i] * k[j]);
    Ok(m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
}

//! Singular values checked against an independent Hermitian eigen-solver
//! applied to MᴴM.

use gridformer_lti::{svd, CMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cyclic complex Jacobi eigenvalues of a Hermitian matrix.
fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let mut h = h.clone();
    let n = h.nrows();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm_sqr())
            .sum();
        let diag: f64 = (0..n).map(|i| h[(i, i)].norm_sqr()).sum();
        if off <= 1e-32 * diag {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let hpq = h[(p, q)];
                let g = hpq.norm();
                if g == 0.0 {
                    continue;
                }
                let e = hpq / g;
                let zeta = (h[(q, q)].re - h[(p, p)].re) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let (a, b) = (h[(i, p)], h[(i, q)]);
                    h[(i, p)] = a * c - b * e.conj() * s;
                    h[(i, q)] = a * s + b * e.conj() * c;
                }
                for j in 0..n {
                    let (a, b) = (h[(p, j)], h[(q, j)]);
                    h[(p, j)] = a * c - b * e * s;
                    h[(q, j)] = a * s + b * e * c;
                }
            }
        }
    }
    (0..n).map(|i| h[(i, i)].re).collect()
}

fn oracle_singular_values(m: &CMatrix) -> Vec<f64> {
    let h = if m.nrows() >= m.ncols() { m.adjoint() * m } else { m * m.adjoint() };
    let mut s: Vec<f64> = hermitian_eigenvalues(&h).into_iter().map(|l| l.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    DMatrix::from_fn(r, c, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

#[test]
fn six_by_six_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m = random_matrix(&mut rng, 6, 6);
    let got = svd(&m).s;
    let want = oracle_singular_values(&m);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn hundred_random_matrices_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let r = rng.random_range(1..=24);
        let c = rng.random_range(1..=24);
        let m = random_matrix(&mut rng, r, c);
        let got = svd(&m).s;
        let want = oracle_singular_values(&m);
        assert_eq!(got.len(), r.min(c));
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{r}x{c}: {a} vs {b}");
        }
    }
}

#[test]
fn factors_reconstruct_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(r, c) in &[(5, 3), (3, 5), (8, 8)] {
        let m = random_matrix(&mut rng, r, c);
        let d = svd(&m);
        let sig = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d.s.len(),
            d.s.iter().map(|x| Complex64::new(*x, 0.0)),
        ));
        let back = &d.u * sig * d.v.adjoint();
        assert!((back - &m).norm() < 1e-12);
        let k = d.s.len();
        assert!((d.u.adjoint() * &d.u - DMatrix::identity(k, k)).norm() < 1e-12);
        assert!((d.v.adjoint() * &d.v - DMatrix::identity(k, k)).norm() < 1e-12);
    }
}

use nalgebra::DMatrix;

use crate::{checked_inverse, to_complex, LtiError, StateSpace};

/// Signal map for [`interconnect`].
///
/// With `y` the stacked part outputs, `u` the stacked part inputs, `r` the
/// external inputs and `z` the external outputs:
/// `u = Q y + E r`, `z = F y + H r`.
#[derive(Debug, Clone)]
pub struct Wiring {
    in_off: Vec<usize>,
    out_off: Vec<usize>,
    nu: Vec<usize>,
    ny: Vec<usize>,
    q: DMatrix<f64>,
    e: DMatrix<f64>,
    f: DMatrix<f64>,
    h: DMatrix<f64>,
}

impl Wiring {
    pub fn new(parts: &[StateSpace], n_in: usize, n_out: usize) -> Self {
        let nu: Vec<usize> = parts.iter().map(StateSpace::nu).collect();
        let ny: Vec<usize> = parts.iter().map(StateSpace::ny).collect();
        let in_off = offsets(&nu);
        let out_off = offsets(&ny);
        let (tu, ty) = (nu.iter().sum(), ny.iter().sum());
        Self {
            in_off,
            out_off,
            nu,
            ny,
            q: DMatrix::zeros(tu, ty),
            e: DMatrix::zeros(tu, n_in),
            f: DMatrix::zeros(n_out, ty),
            h: DMatrix::zeros(n_out, n_in),
        }
    }

    /// Add `gain · y_from` to the input of part `to`.
    pub fn link(&mut self, to: usize, from: usize, gain: &DMatrix<f64>) -> &mut Self {
        assert_eq!(gain.shape(), (self.nu[to], self.ny[from]), "link gain shape");
        let mut v = self.q.view_mut((self.in_off[to], self.out_off[from]), gain.shape());
        v += gain;
        self
    }

    /// Add `gain · r` to the input of part `to`.
    pub fn input(&mut self, to: usize, gain: &DMatrix<f64>) -> &mut Self {
        assert_eq!(gain.shape(), (self.nu[to], self.e.ncols()), "input gain shape");
        let mut v = self.e.view_mut((self.in_off[to], 0), gain.shape());
        v += gain;
        self
    }

    /// Add `gain · y_from` to the external output.
    pub fn output(&mut self, from: usize, gain: &DMatrix<f64>) -> &mut Self {
        assert_eq!(gain.shape(), (self.f.nrows(), self.ny[from]), "output gain shape");
        let mut v = self.f.view_mut((0, self.out_off[from]), gain.shape());
        v += gain;
        self
    }

    /// Add a direct path `gain · r` to the external output.
    pub fn direct(&mut self, gain: &DMatrix<f64>) -> &mut Self {
        assert_eq!(gain.shape(), self.h.shape(), "direct gain shape");
        self.h += gain;
        self
    }
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    sizes
        .iter()
        .map(|s| {
            let o = acc;
            acc += s;
            o
        })
        .collect()
}

/// Close the loops described by `wiring` around the block-diagonal stack
/// of `parts`.
///
/// Fails with [`LtiError::IllPosedLoop`] when `I − D Q` is singular.
pub fn interconnect(parts: &[StateSpace], wiring: &Wiring) -> Result<StateSpace, LtiError> {
    if parts.len() != wiring.nu.len() {
        return Err(LtiError::Dimension("wiring built for a different part list".into()));
    }
    let g = parts
        .iter()
        .skip(1)
        .fold(parts.first().cloned().unwrap_or_else(|| StateSpace::zero(0, 0)), |acc, p| {
            acc.append(p)
        });
    let (a, b, c, d) = (g.a(), g.b(), g.c(), g.d());
    let ty = d.nrows();
    let loop_m = DMatrix::identity(ty, ty) - d * &wiring.q;
    let m = if ty == 0 {
        DMatrix::zeros(0, 0)
    } else {
        checked_inverse(&to_complex(&loop_m))
            .ok_or(LtiError::IllPosedLoop)?
            .map(|z| z.re)
    };
    let mc = &m * c;
    let mde = &m * d * &wiring.e;
    let a_cl = a + b * &wiring.q * &mc;
    let b_cl = b * &wiring.q * &mde + b * &wiring.e;
    let c_cl = &wiring.f * &mc;
    let d_cl = &wiring.f * &mde + &wiring.h;
    StateSpace::new(a_cl, b_cl, c_cl, d_cl)
}

use std::f64::consts::PI;

use gridformer_lti::{
    hinf_norm, interconnect, sigma_max, singular_values, step_response, FrequencyGrid,
    LtiError, StateSpace, Wiring,
};
use nalgebra::{dmatrix, DMatrix, DVector};
use num_complex::Complex64;

const W0: f64 = 2.0 * PI * 50.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn first_order() -> StateSpace {
    StateSpace::new(dmatrix![-1.0], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]).unwrap()
}

fn gamma_model(tau: f64) -> StateSpace {
    StateSpace::new(
        dmatrix![-W0 * tau, W0; -W0, -W0 * tau],
        DMatrix::identity(2, 2) * W0,
        DMatrix::identity(2, 2),
        DMatrix::zeros(2, 2),
    )
    .unwrap()
}

#[test]
fn static_identity_passes_through() {
    let g = StateSpace::identity(2);
    let v = g.eval(c(0.0, 123.4)).unwrap();
    assert_eq!(v, DMatrix::identity(2, 2).map(|x: f64| c(x, 0.0)));
}

#[test]
fn first_order_dc_gain_is_one() {
    let v = first_order().eval(c(0.0, 0.0)).unwrap();
    assert!((v[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn gamma_at_dc_matches_hand_inversion() {
    let v = gamma_model(0.1).eval(c(0.0, 0.0)).unwrap();
    let want = dmatrix![0.1, 1.0; -1.0, 0.1] / 1.01;
    for i in 0..2 {
        for j in 0..2 {
            assert!((v[(i, j)] - c(want[(i, j)], 0.0)).norm() < 1e-14);
        }
    }
}

#[test]
fn resolvent_at_pole_is_rejected() {
    let g = StateSpace::new(dmatrix![0.0], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]).unwrap();
    assert!(matches!(g.eval(c(0.0, 0.0)), Err(LtiError::NearSingularResolvent { .. })));
}

#[test]
fn series_of_gains_multiplies() {
    let s = StateSpace::gain(dmatrix![2.0]).series(&StateSpace::gain(dmatrix![3.0])).unwrap();
    assert_eq!(s.d()[(0, 0)], 6.0);
}

#[test]
fn unity_feedback_around_integrator() {
    let integ = StateSpace::new(dmatrix![0.0], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]).unwrap();
    let cl = integ.feedback(&StateSpace::identity(1)).unwrap();
    assert!((cl.eval(c(0.0, 0.0)).unwrap()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    let s = c(0.3, 2.0);
    let want = 1.0 / (s + 1.0);
    assert!((cl.eval(s).unwrap()[(0, 0)] - want).norm() < 1e-14);
}

#[test]
fn algebraic_loop_with_unit_gain_is_ill_posed() {
    let g = StateSpace::identity(1);
    assert_eq!(g.feedback(&StateSpace::gain(dmatrix![-1.0])), Err(LtiError::IllPosedLoop));
}

#[test]
fn general_wiring_reproduces_feedback() {
    // u1 = r - y2, u2 = y1, out = y1 with both parts 1/(s+1)
    let parts = [first_order(), first_order()];
    let mut w = Wiring::new(&parts, 1, 1);
    w.input(0, &dmatrix![1.0]);
    w.link(0, 1, &dmatrix![-1.0]);
    w.link(1, 0, &dmatrix![1.0]);
    w.output(0, &dmatrix![1.0]);
    let cl = interconnect(&parts, &w).unwrap();
    let s = c(0.0, 1.7);
    let g = 1.0 / (s + 1.0);
    let want = g / (1.0 + g * g);
    assert!((cl.eval(s).unwrap()[(0, 0)] - want).norm() < 1e-14);
}

#[test]
fn inverse_undoes_model() {
    let g = StateSpace::from_tf(&[2.0, 3.0], &[1.0, 4.0]).unwrap();
    let gi = g.inverse().unwrap();
    let s = c(0.1, 5.0);
    let prod = g.eval(s).unwrap()[(0, 0)] * gi.eval(s).unwrap()[(0, 0)];
    assert!((prod - c(1.0, 0.0)).norm() < 1e-13);
}

#[test]
fn from_tf_matches_polynomial_ratio() {
    let g = StateSpace::from_tf(&[1.0, 2.0, 5.0], &[1.0, 3.0, 7.0, 11.0]).unwrap();
    let s = c(-0.2, 1.3);
    let want = (s * s + 2.0 * s + 5.0) / (s * s * s + 3.0 * s * s + 7.0 * s + 11.0);
    assert!((g.eval(s).unwrap()[(0, 0)] - want).norm() < 1e-13);
}

#[test]
fn diagonal_singular_values_are_sorted() {
    let m = dmatrix![c(3.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(4.0, 0.0)];
    let s = singular_values(&m);
    assert!((s[0] - 4.0).abs() < 1e-15 && (s[1] - 3.0).abs() < 1e-15);
}

#[test]
fn normal_gamma_inverse_has_eigen_moduli() {
    let tau = 0.1;
    for &w in &[0.0, 10.0, W0, 3000.0] {
        let z = c(tau, w / W0);
        let m = dmatrix![z, c(-1.0, 0.0); c(1.0, 0.0), z];
        let s = singular_values(&m);
        let a = (z + c(0.0, 1.0)).norm();
        let b = (z - c(0.0, 1.0)).norm();
        let (hi, lo) = (a.max(b), a.min(b));
        assert!((s[0] - hi).abs() < 1e-13 && (s[1] - lo).abs() < 1e-13);
    }
}

#[test]
fn hinf_of_low_pass_sits_at_grid_minimum() {
    let grid = FrequencyGrid::default_sweep();
    let h = hinf_norm(&first_order(), &grid).unwrap();
    let w = grid.first();
    assert!((h.value - 1.0 / (1.0 + w * w).sqrt()).abs() < 1e-12);
    assert_eq!(h.peak_omega, w);
    let low = FrequencyGrid::log_hz(1e-6, 10.0, 200).unwrap();
    let h = hinf_norm(&first_order(), &low).unwrap();
    assert!((h.value - 1.0).abs() < 1e-9);
}

#[test]
fn hinf_of_gamma_matches_dense_sweep() {
    let g = gamma_model(0.1);
    let h = hinf_norm(&g, &FrequencyGrid::default_sweep()).unwrap();
    let dense = FrequencyGrid::log_hz(0.05, 2000.0, 100_000).unwrap();
    let brute = dense
        .points()
        .iter()
        .map(|&w| sigma_max(&g.eval_jw(w).unwrap()))
        .fold(0.0, f64::max);
    assert!((h.value - brute).abs() / brute < 1e-3);
    assert!((h.peak_omega / W0 - 1.0).abs() < 0.01);
    // closed form: 1/|τ| at s = jω₀
    assert!((h.value - 10.0).abs() < 1e-6);
}

#[test]
fn hinf_rejects_unstable_model() {
    let g = StateSpace::new(dmatrix![0.5], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]).unwrap();
    assert!(matches!(
        hinf_norm(&g, &FrequencyGrid::default_sweep()),
        Err(LtiError::UnstableModel { .. })
    ));
}

#[test]
fn stability_examples() {
    assert!(first_order().is_stable());
    let osc = StateSpace::new(
        dmatrix![0.0, -W0; W0, 0.0],
        DMatrix::zeros(2, 1),
        DMatrix::zeros(1, 2),
        DMatrix::zeros(1, 1),
    )
    .unwrap();
    assert!(!osc.is_stable());
}

#[test]
fn first_order_step_settles_at_one() {
    let r = step_response(&first_order(), &DVector::from_element(1, 1.0), 20.0, 0.01).unwrap();
    let last = r.y.last().unwrap()[0];
    assert!((last - 1.0).abs() < 1e-6);
    // exact discretisation: y(t) = 1 - e^{-t}
    let k = 100;
    assert!((r.y[k][0] - (1.0 - (-r.t[k]).exp())).abs() < 1e-12);
}

#[test]
fn pure_gain_steps_instantly() {
    let g = StateSpace::gain(dmatrix![2.0, 0.0; 0.0, -1.0]);
    let r = step_response(&g, &DVector::from_vec(vec![1.0, 3.0]), 1.0, 0.1).unwrap();
    assert_eq!(r.y[0], DVector::from_vec(vec![2.0, -3.0]));
    assert_eq!(r.y.len(), 11);
}

#[test]
fn coarse_step_is_rejected() {
    let r = step_response(&gamma_model(0.1), &DVector::from_element(2, 1.0), 1.0, 1e-3);
    assert!(matches!(r, Err(LtiError::StepTooLarge { .. })));
}

#[test]
fn grid_validation() {
    assert!(FrequencyGrid::new(vec![]).is_err());
    assert!(FrequencyGrid::new(vec![1.0, 1.0]).is_err());
    assert!(FrequencyGrid::new(vec![-1.0, 1.0]).is_err());
    let g = FrequencyGrid::log_hz(1.0, 100.0, 3).unwrap();
    assert!((g.hz()[1] - 10.0).abs() < 1e-12);
    assert_eq!(g.refined(4).len(), 9);
}

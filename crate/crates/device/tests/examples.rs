use std::f64::consts::PI;

use gridformer_converter::{
    build_admittance, line_gamma, solve_operating_point, ArchKind, Architecture, GflParams,
    LineParams, OperatingPoint, OMEGA0,
};
use gridformer_device::{
    classify_gfm, forming_index, frequency_smoothing, impedance_norm, output_sensitivity,
    robust_margin, sensitivity, CurveKind, DeviceError, GfmClass, DEFAULT_BAND_HZ,
};
use gridformer_lti::{sigma_max, sigma_min, singular_values, CMatrix, FrequencyGrid, StateSpace};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;

fn hz(f: f64) -> f64 {
    2.0 * PI * f
}

/// Device at `P = 0.5` behind `line`, PLL-PV holding 1 pu, others Q = 0.
fn device(arch: Architecture, line: &LineParams) -> (StateSpace, OperatingPoint) {
    let v = if arch.kind() == ArchKind::PllPv { 1.0 } else { 0.0 };
    let op = solve_operating_point(0.5, arch.setpoint(v), line, 1.0).unwrap();
    (build_admittance(&arch, &op, OMEGA0).unwrap(), op)
}

fn sv_of(arch: Architecture, l_g: f64) -> StateSpace {
    let line = LineParams::new(l_g, 0.1).unwrap();
    sensitivity(&device(arch, &line).0, &line).unwrap()
}

/// Pointwise `[I + L_g γ⁻¹ Y]⁻¹` with γ⁻¹ written out.
fn sv_direct(y: &CMatrix, line: &LineParams, w: f64) -> CMatrix {
    let a = C::new(line.tau, w / line.omega0);
    let ginv = CMatrix::from_row_slice(2, 2, &[a, C::new(-1.0, 0.0), C::new(1.0, 0.0), a]);
    let m = CMatrix::identity(2, 2) + ginv * y * C::new(line.l_g, 0.0);
    m.try_inverse().unwrap()
}

#[test]
fn no_device_gives_identity_sensitivity() {
    let line = LineParams::new(0.3, 0.1).unwrap();
    let s = sensitivity(&StateSpace::zero(2, 2), &line).unwrap();
    for w in [0.1, 10.0, OMEGA0, 1e4] {
        let d = s.eval_jw(w).unwrap() - CMatrix::identity(2, 2);
        assert!(d.iter().all(|z| z.norm() < 1e-14));
    }
}

#[test]
fn static_device_on_lossless_line_at_dc() {
    // S_v(0) = (I + 2J)⁻¹, eigenvalues 1 ± 2i, so σ̄ = 1/√5
    let line = LineParams::new(0.2, 1e-12).unwrap();
    let y = StateSpace::gain(DMatrix::identity(2, 2) * 10.0);
    let s = sensitivity(&y, &line).unwrap().eval(C::new(0.0, 0.0)).unwrap();
    assert!((sigma_max(&s) - 1.0 / 5f64.sqrt()).abs() < 1e-9);
}

#[test]
fn sensitivity_matches_pointwise_formula_for_every_architecture() {
    let line = LineParams::new(0.3, 0.1).unwrap();
    for kind in ArchKind::ALL {
        let (y, _) = device(Architecture::default_for(kind), &line);
        let s = sensitivity(&y, &line).unwrap();
        let so = output_sensitivity(&y, &line).unwrap();
        let gamma = line_gamma(line.tau, line.omega0).unwrap();
        for w in [0.4, 7.0, 60.0, OMEGA0, 900.0, 2e4] {
            let yw = y.eval_jw(w).unwrap();
            let sw = s.eval_jw(w).unwrap();
            let reference = sv_direct(&yw, &line, w);
            let err = (&sw - &reference).norm() / reference.norm();
            assert!(err < 1e-9, "{}: S_v off by {err:e} at {w}", kind.name());
            // γ S_v = S̃_v γ
            let g = gamma.eval_jw(w).unwrap();
            let lhs = &g * &sw;
            let rhs = so.eval_jw(w).unwrap() * &g;
            assert!((&lhs - &rhs).norm() <= 1e-9 * lhs.norm().max(1e-12), "{}", kind.name());
        }
    }
}

#[test]
fn singular_nonzero_feedthrough_is_rejected() {
    let line = LineParams::new(0.3, 0.1).unwrap();
    let y = StateSpace::gain(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    assert!(matches!(sensitivity(&y, &line), Err(DeviceError::IllPosedLoop(_))));
}

#[test]
fn robust_margin_matches_dense_forming_index_peak() {
    let grid = FrequencyGrid::default_sweep();
    let dense = grid.refined(10);
    for kind in [ArchKind::Vsg, ArchKind::PllPq, ArchKind::PllGfm] {
        let s = sv_of(Architecture::default_for(kind), 0.3);
        let h = robust_margin(&s, &grid).unwrap();
        let fi = forming_index(&s, &dense).unwrap();
        let max = fi.values().iter().copied().fold(0.0, f64::max);
        assert!((h.value - max).abs() / h.value <= 0.01, "{}: {} vs {max}", kind.name(), h.value);
    }
}

#[test]
fn forming_index_without_device_is_one() {
    let line = LineParams::new(0.3, 0.1).unwrap();
    let s = sensitivity(&StateSpace::zero(2, 2), &line).unwrap();
    let fi = forming_index(&s, &FrequencyGrid::default_sweep()).unwrap();
    assert_eq!(fi.kind, CurveKind::Fi);
    assert!(fi.values().iter().all(|v| (v - 1.0).abs() <= 1e-12));
    let v = classify_gfm(&fi, DEFAULT_BAND_HZ).unwrap();
    assert_eq!(v.class, GfmClass::Gfl);
}

#[test]
fn pll_pq_peak_grows_with_line_inductance() {
    let grid = FrequencyGrid::default_sweep();
    let peaks: Vec<f64> = [0.1, 0.2, 0.3, 0.4, 0.5]
        .iter()
        .map(|&lg| forming_index(&sv_of(Architecture::default_for(ArchKind::PllPq), lg), &grid).unwrap().peak().1)
        .collect();
    assert!(peaks.windows(2).all(|p| p[1] > p[0]), "{peaks:?}");
}

#[test]
fn vsg_defaults_stay_below_one_from_a_few_hz() {
    let grid = FrequencyGrid::log_hz(5.0, 100.0, 200).unwrap();
    let fi = forming_index(&sv_of(Architecture::default_for(ArchKind::Vsg), 0.3), &grid).unwrap();
    assert!(fi.values().iter().all(|v| *v < 1.0));
    let fi = forming_index(&sv_of(Architecture::default_for(ArchKind::Vsg), 0.3), &FrequencyGrid::default_sweep())
        .unwrap();
    let v = classify_gfm(&fi, DEFAULT_BAND_HZ).unwrap();
    assert_eq!(v.class, GfmClass::Gfm);
    assert!(v.violations_hz.is_empty() && v.max_fi < 1.0);
}

#[test]
fn pll_pq_is_gfl_over_caption_parameters() {
    let grid = FrequencyGrid::default_sweep();
    for f_pll in [10.0, 30.0, 50.0] {
        for lg in [0.1, 0.3, 0.5] {
            let arch = Architecture::PllPq(GflParams { f_pll, ..Default::default() });
            let fi = forming_index(&sv_of(arch, lg), &grid).unwrap();
            let v = classify_gfm(&fi, DEFAULT_BAND_HZ).unwrap();
            assert_eq!(v.class, GfmClass::Gfl, "f_pll {f_pll}, L_g {lg}");
            assert!(!v.violations_hz.is_empty());
        }
    }
}

#[test]
fn band_must_lie_on_the_grid() {
    let grid = FrequencyGrid::log_hz(1.0, 100.0, 100).unwrap();
    let fi = forming_index(&sv_of(Architecture::default_for(ArchKind::Vsg), 0.3), &grid).unwrap();
    assert!(matches!(classify_gfm(&fi, (5.0, 200.0)), Err(DeviceError::BandOutsideGrid { .. })));
    assert!(matches!(classify_gfm(&fi, (0.1, 50.0)), Err(DeviceError::BandOutsideGrid { .. })));
    assert!(classify_gfm(&fi, (1.0, 100.0)).is_ok());
    let inn = impedance_norm(&StateSpace::gain(DMatrix::identity(2, 2)), &grid).unwrap();
    assert!(matches!(classify_gfm(&inn, (1.0, 100.0)), Err(DeviceError::WrongCurveKind(..))));
}

#[test]
fn impedance_norm_of_static_admittance() {
    let grid = FrequencyGrid::default_sweep();
    let g = 4.0;
    let inn = impedance_norm(&StateSpace::gain(DMatrix::identity(2, 2) * g), &grid).unwrap();
    assert!(inn.values().iter().all(|v| (v - 1.0 / g).abs() < 1e-15));
    let stiff = impedance_norm(&StateSpace::gain(DMatrix::identity(2, 2) * 1e9), &grid).unwrap();
    assert!(stiff.values().iter().all(|v| *v <= 1.0000001e-9));
}

#[test]
fn impedance_norm_is_reciprocal_of_smallest_admittance_gain() {
    let line = LineParams::new(0.3, 0.1).unwrap();
    let (y, _) = device(Architecture::default_for(ArchKind::Vsg), &line);
    let grid = FrequencyGrid::log_hz(0.1, 1000.0, 10).unwrap();
    let inn = impedance_norm(&y, &grid).unwrap();
    for (w, z) in grid.points().iter().zip(inn.values()) {
        let ymin = sigma_min(&y.eval_jw(*w).unwrap());
        assert!((z * ymin - 1.0).abs() < 1e-10);
    }
}

#[test]
fn impedance_norm_rejects_a_singular_admittance() {
    let grid = FrequencyGrid::log_hz(1.0, 10.0, 5).unwrap();
    let r = impedance_norm(&StateSpace::zero(2, 2), &grid);
    assert!(matches!(r, Err(DeviceError::SingularAdmittance { .. })));
}

#[test]
fn frequency_smoothing_without_device_is_one() {
    let line = LineParams::new(0.3, 0.1).unwrap();
    let s = sensitivity(&StateSpace::zero(2, 2), &line).unwrap();
    let fs = frequency_smoothing(&s, &OperatingPoint::no_load(1.0), &FrequencyGrid::default_sweep()).unwrap();
    assert!(fs.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn frequency_smoothing_is_bounded_by_forming_index() {
    let line = LineParams::new(0.3, 0.1).unwrap();
    let grid = FrequencyGrid::default_sweep();
    for kind in ArchKind::ALL {
        let (y, op) = device(Architecture::default_for(kind), &line);
        let s = sensitivity(&y, &line).unwrap();
        let fs = frequency_smoothing(&s, &op, &grid).unwrap();
        let fi = forming_index(&s, &grid).unwrap();
        for (a, b) in fs.values().iter().zip(fi.values()) {
            assert!(*a <= b / op.u_mag() + 1e-12, "{}", kind.name());
        }
    }
}

#[test]
fn frequency_smoothing_of_stiff_source_vanishes() {
    let line = LineParams::new(0.3, 0.1).unwrap();
    let y = StateSpace::gain(DMatrix::identity(2, 2) * 1e8);
    let s = sensitivity(&y, &line).unwrap();
    let fs = frequency_smoothing(&s, &OperatingPoint::no_load(1.0), &FrequencyGrid::default_sweep()).unwrap();
    assert!(fs.values().iter().all(|v| *v < 1e-6));
}

#[test]
fn forming_index_peak_is_refined_between_samples() {
    let grid = FrequencyGrid::log_hz(1.0, 200.0, 40).unwrap();
    let s = sv_of(Architecture::default_for(ArchKind::PllPq), 0.3);
    let fi = forming_index(&s, &grid).unwrap();
    let sampled = fi.values().iter().copied().fold(0.0, f64::max);
    assert!(fi.peak().1 >= sampled);
    let at_peak = singular_values(&s.eval_jw(fi.peak().0).unwrap())[0];
    assert!((at_peak - fi.peak().1).abs() < 1e-12);
    assert!(fi.peak().0 >= hz(1.0) && fi.peak().0 <= hz(200.0));
}

#[test]
fn curve_csv_has_stable_header() {
    let grid = FrequencyGrid::new(vec![hz(1.0), hz(2.0)]).unwrap();
    let inn = impedance_norm(&StateSpace::gain(DMatrix::identity(2, 2) * 2.0), &grid).unwrap();
    let csv = inn.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("omega_rad_s,f_hz,value"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[0] - hz(1.0)).abs() < 1e-12 && (row[1] - 1.0).abs() < 1e-12 && row[2] == 0.5);
    assert_eq!(csv.lines().count(), 3);
}

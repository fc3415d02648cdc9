use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use risphase_core::array::{
    array_response_in, array_response_out, reflect, ColumnProfile, RisGeometry,
};
use risphase_core::circuit::{
    interpolate_params, AngleMode, CalibrationTable, CircuitParams, UnitCellModel, VaractorModel,
};
use risphase_core::io::fmt_num;
use risphase_core::pattern::far_field_power;
use risphase_core::reciprocity::{first_order_reverse_angle, reverse_angle};
use risphase_core::steering::{design_deflection, phase_to_capacitance, tunable_phase_range};
use risphase_core::wrap_phase;

fn params() -> impl Strategy<Value = CircuitParams> {
    (1.0..100.0f64, 1.0..100.0f64, 0.0..10.0f64, 0.1..500.0f64)
        .prop_map(|(lb, lt, r, ct)| CircuitParams::from_table_units(lb, lt, r, ct).unwrap())
}

fn reference_geom(n: usize) -> RisGeometry {
    RisGeometry::new(n, n, 8e-3, 5.195e9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn passive_cells_never_amplify(
        p in params(),
        angle in -1.5..1.5f64,
        f_ghz in 0.5..10.0f64,
        c_pf in 0.1..10.0f64,
    ) {
        let m = UnitCellModel::new(CalibrationTable::angle_independent(p), VaractorModel::default());
        let g = m.gamma(angle, f_ghz * 1e9, c_pf * 1e-12).unwrap();
        prop_assert!(g.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn lossless_cells_reflect_fully(
        p in params(),
        f_ghz in 0.5..10.0f64,
        c_pf in 0.1..10.0f64,
    ) {
        let p = CircuitParams { r_top: 0.0, ..p };
        let m = UnitCellModel::new(CalibrationTable::angle_independent(p), VaractorModel::default());
        let g = m.gamma(0.0, f_ghz * 1e9, c_pf * 1e-12).unwrap();
        prop_assert!((g.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn interpolation_stays_between_neighbouring_knots(deg in -89.0..89.0f64) {
        let t = CalibrationTable::table_i();
        let p = interpolate_params(&t, deg.to_radians(), AngleMode::Clamp).unwrap();
        let a = deg.abs().min(40.0);
        let (lo, hi) = if a <= 30.0 { (0, 1) } else { (1, 2) };
        let (pl, ph) = (t.entries()[lo].1, t.entries()[hi].1);
        for (v, x, y) in [
            (p.l_bottom, pl.l_bottom, ph.l_bottom),
            (p.l_top, pl.l_top, ph.l_top),
            (p.r_top, pl.r_top, ph.r_top),
            (p.c_top, pl.c_top, ph.c_top),
        ] {
            prop_assert!(v >= x.min(y) * (1.0 - 1e-12) && v <= x.max(y) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn reflection_never_gains_energy(
        phases in prop::collection::vec(-4.0..4.0f64, 8),
        amps in prop::collection::vec(0.0..=1.0f64, 8),
        angle in -1.4..1.4f64,
    ) {
        let g = reference_geom(8);
        let a = array_response_in(&g, angle).unwrap();
        let p = ColumnProfile { amplitudes: amps.clone(), ..ColumnProfile::from_phases(phases.clone()) };
        let y = reflect(&p, &a).unwrap();
        let ey: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!(ey <= 8.0 + 1e-12);

        let unit = ColumnProfile::from_phases(phases);
        let y1 = reflect(&unit, &a).unwrap();
        let e1: f64 = y1.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((e1 - 8.0).abs() < 1e-12);
        if amps.iter().any(|a| *a < 1.0 - 1e-9) {
            prop_assert!(ey < 8.0);
        }
    }

    #[test]
    fn response_conjugation_symmetry(angle in -1.5..1.5f64) {
        let g = reference_geom(16);
        let plus = array_response_in(&g, angle).unwrap();
        let minus = array_response_in(&g, -angle).unwrap();
        for (p, m) in plus.iter().zip(&minus) {
            prop_assert!((p.conj() - m).norm() < 1e-12);
        }
    }

    #[test]
    fn gradient_profile_maps_onto_reflected_wave(t1 in -1.3..1.3f64, t2 in -1.3..1.3f64) {
        let g = reference_geom(32);
        let d = design_deflection(&g, t1, t2).unwrap();
        let y = reflect(&d.profile, &array_response_in(&g, t1).unwrap()).unwrap();
        let out = array_response_out(&g, t2).unwrap();
        let ratios: Vec<Complex64> = y.iter().zip(&out).map(|(a, b)| a / b).collect();
        for r in &ratios {
            prop_assert!((r.norm() - 1.0).abs() < 1e-12);
            prop_assert!(wrap_phase(r.arg() - ratios[0].arg()).abs() < 1e-9);
        }
    }

    #[test]
    fn far_field_bounded_by_amplitude_sum(
        phases in prop::collection::vec(-4.0..4.0f64, 12),
        amps in prop::collection::vec(0.0..=1.0f64, 12),
        t_in in -1.4..1.4f64,
        t_obs in -1.4..1.4f64,
    ) {
        let g = reference_geom(12);
        let p = ColumnProfile { amplitudes: amps.clone(), ..ColumnProfile::from_phases(phases) };
        let bound: f64 = amps.iter().sum::<f64>().powi(2);
        let pw = far_field_power(&p, &g, t_in, t_obs).unwrap();
        prop_assert!(pw >= 0.0);
        prop_assert!(pw <= bound * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn inversion_is_two_pi_invariant(frac in 0.01..0.99f64, k in -3i32..3) {
        let m = UnitCellModel::table_i();
        let f = 5.195e9;
        let r = tunable_phase_range(&m, 0.0, f).unwrap();
        let target = r.phase_lo + frac * r.width;
        let c0 = phase_to_capacitance(&m, 0.0, f, target).unwrap();
        let ck = phase_to_capacitance(&m, 0.0, f, target + k as f64 * TAU).unwrap();
        prop_assert_eq!(c0, ck);
        prop_assert!(wrap_phase(m.phase(0.0, f, c0).unwrap() - target).abs() <= 1e-6);
    }

    #[test]
    fn fmt_num_keeps_nine_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = fmt_num(x).parse().unwrap();
        prop_assert!(((back - x) / x).abs() <= 5e-9);
    }
}

/// Lagrange remainder of the first-order arcsin expansion:
/// `|arcsin(x+δ) − arcsin x − δ/√(1−x²)| ≤ ½·max|arcsin''|·δ²` on the
/// interval swept by `x + tδ`.
#[test]
fn first_order_error_within_lagrange_bound() {
    let g = reference_geom(16);
    let k = g.wavenumber_period();
    let x_max = 60f64.to_radians().sin() + 0.1;
    let second_derivative = |x: f64| x / (1.0 - x * x).powf(1.5);
    let bound_k = 0.5 * second_derivative(x_max);
    for i in -600..=600 {
        let theta1 = (i as f64 * 0.1).to_radians();
        for j in -100..=100 {
            let delta = j as f64 * 0.001;
            let exact = reverse_angle(theta1, delta * k, 0.0, &g)
                .unwrap()
                .angle()
                .unwrap();
            let approx = first_order_reverse_angle(theta1, delta).unwrap();
            assert!(
                (exact - approx).abs() <= bound_k * delta * delta + 1e-12,
                "θ1={}°, δ={delta}",
                theta1.to_degrees()
            );
        }
    }
}

#[test]
fn amplification_grows_with_incidence_when_signs_agree() {
    let g = reference_geom(16);
    let k = g.wavenumber_period();
    for &delta in &[-0.1, -0.03, 0.001, 0.05, 0.1] {
        let mut prev = 0.0;
        for i in 0..=600 {
            let theta1 = f64::copysign((i as f64 * 0.1).to_radians(), delta);
            let t3 = reverse_angle(theta1, delta * k, 0.0, &g)
                .unwrap()
                .angle()
                .unwrap();
            let dev = (t3 - theta1).abs();
            assert!(
                dev >= prev - 1e-15,
                "δ={delta}, θ1={}°",
                theta1.to_degrees()
            );
            prev = dev;
        }
    }
}

#[test]
fn swapping_measured_steps_negates_delta() {
    let g = reference_geom(16);
    let k = g.wavenumber_period();
    for (a, b) in [(0.3, -0.1), (3.0, -3.0), (-2.9, 2.9), (0.0, 1.0)] {
        let d12 = wrap_phase(a - b) / k;
        let d21 = wrap_phase(b - a) / k;
        if wrap_phase(a - b) != std::f64::consts::PI {
            assert!((d12 + d21).abs() < 1e-12);
        }
    }
    // reverse_angle carries the sign through
    let t = reverse_angle(0.0, 0.05, 0.0, &g).unwrap().angle().unwrap();
    let s = reverse_angle(0.0, 0.0, 0.05, &g).unwrap().angle().unwrap();
    assert!((t + s).abs() < 1e-12);
}

//! Cross-checks between independent computations of the same quantity.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risphase_core::array::{ColumnProfile, RisGeometry};
use risphase_core::circuit::{resonance_frequency, UnitCellModel};
use risphase_core::pattern::{far_field_cut, peak_angle};
use risphase_core::reciprocity::{reciprocity_scan, reverse_angle};
use risphase_core::steering::{
    design_deflection, phase_to_capacitance, realized_profile, tunable_phase_range,
};
use risphase_core::wrap_phase;

const FC: f64 = 5.195e9;
const STEP: f64 = 0.1 * PI / 180.0;

fn geom(n: usize) -> RisGeometry {
    RisGeometry::new(n, n, 8e-3, FC).unwrap()
}

fn deg(x: f64) -> f64 {
    x.to_radians()
}

/// Zero crossing of the reflection phase, skipping the ±π wrap at the
/// series resonance.
fn phase_zero_crossing(model: &UnitCellModel, angle: f64, cap: f64, freqs: &[f64]) -> Option<f64> {
    let phases: Vec<f64> = freqs
        .iter()
        .map(|&f| model.phase(angle, f, cap).unwrap())
        .collect();
    (1..freqs.len()).find_map(|i| {
        let (a, b) = (phases[i - 1], phases[i]);
        let near_zero = a.abs() < PI / 2.0 && b.abs() < PI / 2.0;
        (near_zero && a.signum() != b.signum() || b == 0.0)
            .then(|| freqs[i - 1] + (freqs[i] - freqs[i - 1]) * a / (a - b))
    })
}

#[test]
fn sweep_locates_resonance() {
    let model = UnitCellModel::table_i();
    let freqs: Vec<f64> = (0..=3000).map(|i| 4e9 + i as f64 * 1e6).collect();
    let c = 0.63e-12;
    for &(angle, _) in model.table.entries() {
        let params = model.params_at(angle).unwrap();
        let fr = resonance_frequency(&params, c).unwrap();
        let zero = phase_zero_crossing(&model, angle, c, &freqs).unwrap();
        assert!(
            (zero - fr).abs() / fr < 0.01,
            "zero crossing {zero} vs {fr}"
        );
        // at the crossing itself the match is far tighter than the grid
        assert!((zero - fr).abs() < 1e6, "{zero} vs {fr}");

        let amp_min = freqs
            .iter()
            .map(|&f| (f, model.gamma(angle, f, c).unwrap().norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        assert!(
            (amp_min - fr).abs() / fr < 0.02,
            "|Γ| min {amp_min} vs {fr}"
        );
    }
}

#[test]
fn design_profile_peaks_at_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [32, 64, 100] {
        let g = geom(n);
        for _ in 0..20 {
            let t_in = deg(rng.gen_range(-60.0..60.0));
            let t_out = deg(rng.gen_range(-60.0..60.0));
            let d = design_deflection(&g, t_in, t_out).unwrap();
            let cut = far_field_cut(&d.profile, &g, t_in, STEP).unwrap();
            assert!(!cut.ambiguous);
            assert!(
                (cut.peak_angle - t_out).abs().to_degrees() < 0.1,
                "N={n}: {}° → {}°, peak {}°",
                t_in.to_degrees(),
                t_out.to_degrees(),
                cut.peak_angle.to_degrees()
            );
        }
    }
}

#[test]
fn halving_grid_step_moves_peak_little() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let g = geom(64);
    for _ in 0..30 {
        let t_in = deg(rng.gen_range(-50.0..50.0));
        let t_out = deg(rng.gen_range(-50.0..50.0));
        let d = design_deflection(&g, t_in, t_out).unwrap();
        let coarse = peak_angle(&d.profile, &g, t_in, STEP).unwrap();
        let fine = peak_angle(&d.profile, &g, t_in, STEP / 2.0).unwrap();
        assert!((coarse - fine).abs().to_degrees() < 0.1);
    }
}

#[test]
fn reverse_peak_follows_closed_form_with_injected_mismatch() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = geom(64);
    let k = g.wavenumber_period();
    for _ in 0..50 {
        let t1 = deg(rng.gen_range(-45.0..45.0));
        let t2 = deg(rng.gen_range(-45.0..45.0));
        let delta: f64 = rng.gen_range(-0.1..0.1);
        let dphi1 = design_deflection(&g, t1, t2).unwrap().delta_phi;
        let dphi2 = wrap_phase(dphi1 - k * delta);
        let reverse = ColumnProfile::from_phases((0..64).map(|n| n as f64 * dphi2));
        let expected = reverse_angle(t1, dphi1, dphi2, &g).unwrap();
        let cut = far_field_cut(&reverse, &g, t2, STEP).unwrap();
        match expected.angle() {
            Some(t3) => assert!((cut.peak_angle - t3).abs().to_degrees() < 0.2),
            None => assert!(cut.peak_at_edge),
        }
    }
}

/// Scan cells realized through the circuit model, reverse-illuminated with
/// their actual per-column reflection coefficients.
#[test]
fn scan_cells_agree_with_far_field() {
    let model = UnitCellModel::table_i();
    let g = geom(64);
    let grid: Vec<f64> = (-4..=4).map(|i| deg(i as f64 * 10.0)).collect();
    let scan = reciprocity_scan(&model, &g, &grid, &grid).unwrap();
    let mut checked = 0;
    for cell in scan.iter() {
        let Some(t3) = cell.report.theta3_exact.angle() else {
            continue;
        };
        if cell.dispersion() > 0.01 {
            continue;
        }
        let caps = cell.design.profile.capacitances.as_ref().unwrap();
        let reverse = realized_profile(&model, caps, cell.report.theta2, g.freq).unwrap();
        let peak = peak_angle(&reverse, &g, cell.report.theta2, STEP).unwrap();
        assert!(
            (peak - t3).abs().to_degrees() < 0.2,
            "({}°, {}°): peak {}° vs θ3 {}°",
            cell.report.theta1.to_degrees(),
            cell.report.theta2.to_degrees(),
            peak.to_degrees(),
            t3.to_degrees()
        );
        checked += 1;
    }
    assert!(checked >= 9, "only {checked} cells checked");
}

#[test]
fn inversion_round_trip_on_random_targets() {
    let model = UnitCellModel::table_i();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let angle = deg(rng.gen_range(-40.0..40.0));
        let freq = rng.gen_range(4.5e9..6.5e9);
        let r = tunable_phase_range(&model, angle, freq).unwrap();
        let target = wrap_phase(r.phase_lo + rng.gen_range(0.0..=1.0) * r.width);
        let c = phase_to_capacitance(&model, angle, freq, target).unwrap();
        assert!((model.varactor.c_min..=model.varactor.c_max).contains(&c));
        let err = wrap_phase(model.phase(angle, freq, c).unwrap() - target).abs();
        assert!(err <= 1e-6, "θ={angle}, f={freq}: error {err}");
    }
}

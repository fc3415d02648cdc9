//! Array-factor far-field oracle.
//!
//! Uses nothing but the array response vectors and per-column reflection
//! coefficients, so agreement with the closed-form reverse angle in
//! [`crate::reciprocity`] is an independent check.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::array::{array_response_in, array_response_out, reflect, ColumnProfile, RisGeometry};
use crate::{Error, Result};

/// Floor applied before converting power to dB.
const POWER_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldCut {
    pub angles: Vec<f64>,
    /// `|AF|²`, not normalised.
    pub power: Vec<f64>,
    /// Refined peak direction, radians.
    pub peak_angle: f64,
    /// Another lobe within 1 dB of the peak lies outside the main lobe.
    pub ambiguous: bool,
    /// The grid maximum sits on the first or last sample (no interior peak,
    /// e.g. when the reflected beam is evanescent).
    pub peak_at_edge: bool,
}

impl FarFieldCut {
    pub fn power_db(&self) -> impl Iterator<Item = f64> + '_ {
        self.power.iter().map(|p| to_db(*p))
    }
}

pub fn to_db(power: f64) -> f64 {
    10.0 * power.max(POWER_FLOOR).log10()
}

/// `|a_out(θ_obs)^H · Γ·a_in(θ_in)|²`.
pub fn far_field_power(
    profile: &ColumnProfile,
    geom: &RisGeometry,
    theta_in: f64,
    theta_obs: f64,
) -> Result<f64> {
    profile.validate(geom)?;
    let a_in = array_response_in(geom, theta_in)?;
    let y = reflect(profile, &a_in)?;
    let a_out = array_response_out(geom, theta_obs)?;
    let af: Complex64 = a_out.iter().zip(&y).map(|(o, v)| o.conj() * v).sum();
    Ok(af.norm_sqr())
}

/// Observation grid `-90° + k·step` strictly inside `(-90°, 90°)`.
pub fn observation_grid(grid_step: f64) -> Result<Vec<f64>> {
    if !(grid_step > 0.0 && grid_step < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "grid step must be in (0, 90°), got {grid_step}"
        )));
    }
    let count = ((2.0 * FRAC_PI_2) / grid_step).ceil() as usize;
    Ok((1..count)
        .map(|k| -FRAC_PI_2 + k as f64 * grid_step)
        .filter(|a| a.abs() < FRAC_PI_2)
        .collect())
}

/// Samples the reflected power over `(-90°, 90°)` and locates the peak by
/// a three-point parabola through the log-power around the grid maximum.
pub fn far_field_cut(
    profile: &ColumnProfile,
    geom: &RisGeometry,
    theta_in: f64,
    grid_step: f64,
) -> Result<FarFieldCut> {
    profile.validate(geom)?;
    let angles = observation_grid(grid_step)?;
    let a_in = array_response_in(geom, theta_in)?;
    let y = reflect(profile, &a_in)?;
    let k = geom.wavenumber_period();
    let power: Vec<f64> = angles
        .iter()
        .map(|&obs| {
            let u = k * obs.sin();
            y.iter()
                .enumerate()
                .map(|(n, v)| v * Complex64::from_polar(1.0, n as f64 * u))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect();

    let imax = power
        .iter()
        .enumerate()
        .fold(0, |best, (i, p)| if *p > power[best] { i } else { best });
    let last = power.len() - 1;
    let peak_at_edge = imax == 0 || imax == last;
    let peak_angle = if peak_at_edge {
        angles[imax]
    } else {
        let (y0, y1, y2) = (
            to_db(power[imax - 1]),
            to_db(power[imax]),
            to_db(power[imax + 1]),
        );
        let curvature = y0 - 2.0 * y1 + y2;
        let offset = if curvature < 0.0 {
            (0.5 * (y0 - y2) / curvature).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        angles[imax] + offset * grid_step
    };

    // null-to-null main-lobe width in sin θ
    let lobe = 2.0 / (geom.n_columns as f64 * geom.period_over_wavelength());
    let peak_db = to_db(power[imax]);
    let ambiguous = (1..last).any(|i| {
        i != imax
            && power[i] >= power[i - 1]
            && power[i] >= power[i + 1]
            && to_db(power[i]) >= peak_db - 1.0
            && (angles[i].sin() - angles[imax].sin()).abs() > lobe
    });
    if ambiguous {
        log::warn!(
            "ambiguous far-field peak near {:.3}°",
            peak_angle.to_degrees()
        );
    }

    Ok(FarFieldCut {
        angles,
        power,
        peak_angle,
        ambiguous,
        peak_at_edge,
    })
}

/// Refined direction of maximum reflected power.
pub fn peak_angle(
    profile: &ColumnProfile,
    geom: &RisGeometry,
    theta_in: f64,
    grid_step: f64,
) -> Result<f64> {
    Ok(far_field_cut(profile, geom, theta_in, grid_step)?.peak_angle)
}

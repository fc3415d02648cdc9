//! RIS geometry, array response vectors and the diagonal reflection model.
//!
//! Only the N independently biased columns are modelled; all cells in a
//! column share one reflection coefficient. Incident and reflected waves are
//! plane waves in the plane normal to the columns.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::{wrap_phase, Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisGeometry {
    pub n_columns: usize,
    /// Rows per column. Metadata only.
    pub m_rows: usize,
    /// Unit-cell period, meters.
    pub period_d: f64,
    /// Carrier frequency, hertz.
    pub freq: f64,
}

impl RisGeometry {
    pub fn new(n_columns: usize, m_rows: usize, period_d: f64, freq: f64) -> Result<Self> {
        let g = Self {
            n_columns,
            m_rows,
            period_d,
            freq,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_columns < 2 {
            return Err(Error::Domain(format!(
                "need at least two columns, got {}",
                self.n_columns
            )));
        }
        if !(self.period_d > 0.0 && self.period_d.is_finite()) {
            return Err(Error::Domain(format!(
                "period must be positive, got {}",
                self.period_d
            )));
        }
        if !(self.freq > 0.0 && self.freq.is_finite()) {
            return Err(Error::Domain(format!(
                "frequency must be positive, got {}",
                self.freq
            )));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.freq
    }

    /// `D/λ`.
    pub fn period_over_wavelength(&self) -> f64 {
        self.period_d / self.wavelength()
    }

    /// Free-space phase advance between adjacent columns per unit `sin θ`,
    /// `2πD/λ`.
    pub fn wavenumber_period(&self) -> f64 {
        TAU * self.period_over_wavelength()
    }

    /// No grating lobes for any steering angle when `D/λ < 0.5`.
    pub fn is_grating_lobe_free(&self) -> bool {
        self.period_over_wavelength() < 0.5
    }

    pub fn with_columns(mut self, n: usize) -> Result<Self> {
        self.n_columns = n;
        self.validate()?;
        Ok(self)
    }

    pub fn with_freq(mut self, freq: f64) -> Result<Self> {
        self.freq = freq;
        self.validate()?;
        Ok(self)
    }
}

/// Per-column reflection state.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnProfile {
    /// Radians in `(-π, π]`.
    pub phases: Vec<f64>,
    /// Reflection amplitudes in `[0, 1]`.
    pub amplitudes: Vec<f64>,
    /// Varactor capacitance per column, farad.
    pub capacitances: Option<Vec<f64>>,
}

impl ColumnProfile {
    /// Unit-amplitude profile; phases are wrapped.
    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        let phases: Vec<f64> = phases.into_iter().map(wrap_phase).collect();
        let amplitudes = vec![1.0; phases.len()];
        Self {
            phases,
            amplitudes,
            capacitances: None,
        }
    }

    /// Profile from complex per-column reflection coefficients.
    pub fn from_response(gammas: &[Complex64]) -> Self {
        Self {
            phases: gammas.iter().map(|g| g.arg()).collect(),
            amplitudes: gammas.iter().map(|g| g.norm()).collect(),
            capacitances: None,
        }
    }

    pub fn with_capacitances(mut self, caps: Vec<f64>) -> Result<Self> {
        if caps.len() != self.phases.len() {
            return Err(Error::LengthMismatch {
                expected: self.phases.len(),
                got: caps.len(),
            });
        }
        self.capacitances = Some(caps);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn validate(&self, geom: &RisGeometry) -> Result<()> {
        let n = geom.n_columns;
        for got in [self.phases.len(), self.amplitudes.len()] {
            if got != n {
                return Err(Error::LengthMismatch { expected: n, got });
            }
        }
        if let Some(c) = &self.capacitances {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: c.len(),
                });
            }
        }
        if self.amplitudes.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Domain("amplitudes must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// `A_n·e^{jΦ_n}` for each column.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .zip(&self.amplitudes)
            .map(|(&p, &a)| Complex64::from_polar(a, p))
            .collect()
    }
}

fn steering_vector(geom: &RisGeometry, angle: f64, sign: f64) -> Result<Vec<Complex64>> {
    geom.validate()?;
    if !(angle.abs() < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "angle must satisfy |θ| < 90°, got {}°",
            angle.to_degrees()
        )));
    }
    let step = sign * geom.wavenumber_period() * angle.sin();
    Ok((0..geom.n_columns)
        .map(|n| Complex64::from_polar(1.0, n as f64 * step))
        .collect())
}

/// Incident array response, element `n` (0-based) `e^{j·n·(2πD/λ)·sin θ}`.
pub fn array_response_in(geom: &RisGeometry, angle: f64) -> Result<Vec<Complex64>> {
    steering_vector(geom, angle, 1.0)
}

/// Reflected array response toward `angle`, `e^{-j·n·(2πD/λ)·sin θ}`.
pub fn array_response_out(geom: &RisGeometry, angle: f64) -> Result<Vec<Complex64>> {
    steering_vector(geom, angle, -1.0)
}

/// `y = Γ·a_in` with `Γ = diag(A_n·e^{jΦ_n})`.
pub fn reflect(profile: &ColumnProfile, a_in: &[Complex64]) -> Result<Vec<Complex64>> {
    if profile.phases.len() != a_in.len() {
        return Err(Error::LengthMismatch {
            expected: profile.phases.len(),
            got: a_in.len(),
        });
    }
    if profile.amplitudes.len() != a_in.len() {
        return Err(Error::LengthMismatch {
            expected: a_in.len(),
            got: profile.amplitudes.len(),
        });
    }
    Ok(profile
        .coefficients()
        .into_iter()
        .zip(a_in)
        .map(|(g, a)| g * a)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    /// Geometry with D/λ exactly 0.25.
    fn quarter_wave(n: usize) -> RisGeometry {
        let freq = 1e9;
        let lambda = SPEED_OF_LIGHT / freq;
        RisGeometry::new(n, 1, 0.25 * lambda, freq).unwrap()
    }

    #[test]
    fn broadside_response_is_all_ones() {
        let g = quarter_wave(8);
        for v in [
            array_response_in(&g, 0.0).unwrap(),
            array_response_out(&g, 0.0).unwrap(),
        ] {
            assert!(v.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn quarter_wave_thirty_degrees() {
        let g = quarter_wave(2);
        let a = 30f64.to_radians();
        let vin = array_response_in(&g, a).unwrap();
        let vout = array_response_out(&g, a).unwrap();
        assert!((vin[1] - Complex64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-12);
        assert!((vout[1] - Complex64::from_polar(1.0, -FRAC_PI_4)).norm() < 1e-12);
    }

    #[test]
    fn out_is_conjugate_of_in() {
        let g = quarter_wave(16);
        for deg in [-60.0, -12.5, 7.0, 45.0, 89.0] {
            let a = f64::to_radians(deg);
            let vin = array_response_in(&g, a).unwrap();
            let vout = array_response_out(&g, a).unwrap();
            let mirrored = array_response_in(&g, -a).unwrap();
            for ((i, o), m) in vin.iter().zip(&vout).zip(&mirrored) {
                assert!((i.conj() - o).norm() < 1e-12);
                assert!((i.conj() - m).norm() < 1e-12);
                assert!((i.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grazing_angle_rejected() {
        let g = quarter_wave(4);
        assert!(array_response_in(&g, FRAC_PI_2).is_err());
        assert!(RisGeometry::new(1, 1, 8e-3, 5e9).is_err());
        assert!(RisGeometry::new(4, 1, 0.0, 5e9).is_err());
    }

    #[test]
    fn identity_reflection() {
        let g = quarter_wave(6);
        let a = array_response_in(&g, 0.4).unwrap();
        let p = ColumnProfile::from_phases(vec![0.0; 6]);
        assert_eq!(reflect(&p, &a).unwrap(), a);
    }

    #[test]
    fn phase_cancellation_collimates_to_broadside() {
        let g = quarter_wave(6);
        let a = array_response_in(&g, 0.4).unwrap();
        let p = ColumnProfile::from_phases(a.iter().map(|z| -z.arg()));
        let y = reflect(&p, &a).unwrap();
        for z in y {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn reflect_length_mismatch() {
        let p = ColumnProfile::from_phases(vec![0.0; 3]);
        assert!(matches!(
            reflect(&p, &[Complex64::new(1.0, 0.0); 4]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn geometry_flags() {
        let g = RisGeometry::new(64, 64, 8e-3, 5.195e9).unwrap();
        assert!((g.period_over_wavelength() - 0.13864).abs() < 2e-5);
        assert!(g.is_grating_lobe_free());
    }
}

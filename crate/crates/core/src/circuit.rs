//! Unit-cell equivalent circuit.
//!
//! The cell is a bottom-layer inductance `L_B` in parallel with a top-layer
//! series branch `R_T + jf·L_T + 1/(jf·C_T) + 1/(jf·C)`, where `C` is the
//! varactor capacitance. The four circuit values depend on the incidence
//! angle and are read from a [`CalibrationTable`].
//!
//! All reactances use `f` directly (no `2π`), see the crate docs.

use num_complex::Complex64;

use crate::{Error, Result};

/// Free-space wave impedance used when none is given, ohm.
pub const Z_FREE_SPACE: f64 = 376.73;

/// Equivalent-circuit values for a single incidence angle, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    pub l_bottom: f64,
    pub l_top: f64,
    pub r_top: f64,
    pub c_top: f64,
}

impl CircuitParams {
    pub fn new(l_bottom: f64, l_top: f64, r_top: f64, c_top: f64) -> Result<Self> {
        let p = Self {
            l_bottom,
            l_top,
            r_top,
            c_top,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the table units (nH, nH, Ω, pF).
    pub fn from_table_units(l_b_nh: f64, l_t_nh: f64, r_t_ohm: f64, c_t_pf: f64) -> Result<Self> {
        Self::new(l_b_nh / 1e9, l_t_nh / 1e9, r_t_ohm, c_t_pf / 1e12)
    }

    /// Inductances and `c_top` must be finite and strictly positive.
    /// `r_top` may be zero (lossless cell) but not negative.
    pub fn validate(&self) -> Result<()> {
        let all = [self.l_bottom, self.l_top, self.r_top, self.c_top];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite value in {self:?}"
            )));
        }
        if self.l_bottom <= 0.0 || self.l_top <= 0.0 || self.c_top <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "inductances and C_T must be positive: {self:?}"
            )));
        }
        if self.r_top < 0.0 {
            return Err(Error::InvalidParams(format!(
                "R_T must be non-negative: {self:?}"
            )));
        }
        Ok(())
    }

    fn lerp(&self, other: &Self, t: f64) -> Self {
        let mix = |a: f64, b: f64| a + t * (b - a);
        Self {
            l_bottom: mix(self.l_bottom, other.l_bottom),
            l_top: mix(self.l_top, other.l_top),
            r_top: mix(self.r_top, other.r_top),
            c_top: mix(self.c_top, other.c_top),
        }
    }
}

/// How [`interpolate_params`] treats angles outside the calibrated span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleMode {
    Strict,
    #[default]
    Clamp,
}

/// Calibration knots `(angle [rad], params)` with strictly increasing angles.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    entries: Vec<(f64, CircuitParams)>,
    pub provenance: String,
}

impl CalibrationTable {
    pub fn new(entries: Vec<(f64, CircuitParams)>, provenance: impl Into<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyTable);
        }
        for (angle, params) in &entries {
            if !angle.is_finite() || *angle < 0.0 || *angle >= std::f64::consts::FRAC_PI_2 {
                return Err(Error::Domain(format!(
                    "calibration angle {}° outside [0°, 90°)",
                    angle.to_degrees()
                )));
            }
            params.validate()?;
        }
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain(
                "calibration angles must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            entries,
            provenance: provenance.into(),
        })
    }

    /// The bundled three-knot calibration (0°, 30°, 40°).
    pub fn table_i() -> Self {
        crate::io::read_calibration(crate::io::TABLE_I_CSV.as_bytes(), "bundled")
            .expect("bundled calibration parses")
    }

    /// A single-knot table: the cell response no longer depends on angle.
    pub fn angle_independent(params: CircuitParams) -> Self {
        Self {
            entries: vec![(0.0, params)],
            provenance: "angle-independent".into(),
        }
    }

    pub fn entries(&self) -> &[(f64, CircuitParams)] {
        &self.entries
    }

    pub fn min_angle(&self) -> f64 {
        self.entries[0].0
    }

    pub fn max_angle(&self) -> f64 {
        self.entries[self.entries.len() - 1].0
    }
}

/// Varactor capacitance range and optional measured C–V curve.
#[derive(Debug, Clone, PartialEq)]
pub struct VaractorModel {
    pub c_min: f64,
    pub c_max: f64,
    pub v_at_cmin: f64,
    pub v_at_cmax: f64,
    /// `(voltage [V], capacitance [F])`, voltage ascending.
    pub cv_table: Option<Vec<(f64, f64)>>,
}

/// Built-in junction potential of the two-point C–V law, volts.
pub const JUNCTION_POTENTIAL: f64 = 0.7;

impl Default for VaractorModel {
    /// 2.67 pF at 0 V down to 0.63 pF at 30 V reverse bias.
    fn default() -> Self {
        Self {
            c_min: 0.63e-12,
            c_max: 2.67e-12,
            v_at_cmin: 30.0,
            v_at_cmax: 0.0,
            cv_table: None,
        }
    }
}

impl VaractorModel {
    pub fn new(c_min: f64, c_max: f64, v_at_cmin: f64, v_at_cmax: f64) -> Result<Self> {
        let m = Self {
            c_min,
            c_max,
            v_at_cmin,
            v_at_cmax,
            cv_table: None,
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds a model whose endpoints come from a measured C–V table.
    pub fn from_cv_table(table: Vec<(f64, f64)>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::Domain("C–V table needs at least two rows".into()));
        }
        let (v_lo, c_hi) = table[0];
        let (v_hi, c_lo) = table[table.len() - 1];
        let m = Self {
            c_min: c_lo,
            c_max: c_hi,
            v_at_cmin: v_hi,
            v_at_cmax: v_lo,
            cv_table: Some(table),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_min > 0.0 && self.c_min < self.c_max && self.c_max.is_finite()) {
            return Err(Error::Domain(format!(
                "varactor needs 0 < c_min < c_max, got {} / {}",
                self.c_min, self.c_max
            )));
        }
        if self.v_at_cmin == self.v_at_cmax || self.v_at_cmax < 0.0 || self.v_at_cmin < 0.0 {
            return Err(Error::Domain("varactor voltage endpoints invalid".into()));
        }
        if let Some(t) = &self.cv_table {
            for w in t.windows(2) {
                if w[1].0 <= w[0].0 || w[1].1 >= w[0].1 {
                    return Err(Error::Domain(
                        "C–V table must have ascending voltage and strictly decreasing capacitance"
                            .into(),
                    ));
                }
            }
            let first = t[0];
            let last = t[t.len() - 1];
            if first != (self.v_at_cmax, self.c_max) || last != (self.v_at_cmin, self.c_min) {
                return Err(Error::Domain(
                    "C–V table endpoints disagree with (v_at_cmax, c_max) / (v_at_cmin, c_min)"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Grading exponent `m` of `C(V) = c_max·((1 + V0/Vj)/(1 + V/Vj))^m`
    /// so that the law passes through both endpoints.
    pub fn junction_exponent(&self) -> f64 {
        let vj = JUNCTION_POTENTIAL;
        (self.c_max / self.c_min).ln()
            / ((1.0 + self.v_at_cmin / vj) / (1.0 + self.v_at_cmax / vj)).ln()
    }

    pub fn voltage_range(&self) -> (f64, f64) {
        (
            self.v_at_cmin.min(self.v_at_cmax),
            self.v_at_cmin.max(self.v_at_cmax),
        )
    }
}

/// Unit-cell geometry. Informational only; it does not enter the model.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCellGeometry {
    pub period_d: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub substrate_h: f64,
    pub substrate: String,
}

impl Default for UnitCellGeometry {
    fn default() -> Self {
        Self {
            period_d: 8e-3,
            a1: 5.5e-3,
            a2: 2.9e-3,
            a3: 1.5e-3,
            a4: 0.4e-3,
            substrate_h: 2e-3,
            substrate: "F4B".into(),
        }
    }
}

/// Everything needed to evaluate Γ(θ, f, C) for one cell design.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCellModel {
    pub table: CalibrationTable,
    pub varactor: VaractorModel,
    pub z_free_space: f64,
    pub angle_mode: AngleMode,
    pub metadata: UnitCellGeometry,
}

impl UnitCellModel {
    pub fn new(table: CalibrationTable, varactor: VaractorModel) -> Self {
        Self {
            table,
            varactor,
            z_free_space: Z_FREE_SPACE,
            angle_mode: AngleMode::Clamp,
            metadata: UnitCellGeometry::default(),
        }
    }

    /// Bundled calibration with the default varactor, clamp mode.
    pub fn table_i() -> Self {
        Self::new(CalibrationTable::table_i(), VaractorModel::default())
    }

    pub fn with_angle_mode(mut self, mode: AngleMode) -> Self {
        self.angle_mode = mode;
        self
    }

    pub fn with_z_free_space(mut self, z0: f64) -> Result<Self> {
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(Error::Domain(format!("Z_0 must be positive, got {z0}")));
        }
        self.z_free_space = z0;
        Ok(self)
    }

    pub fn params_at(&self, angle: f64) -> Result<CircuitParams> {
        interpolate_params(&self.table, angle, self.angle_mode)
    }

    /// Γ at the given angle, frequency and capacitance.
    pub fn gamma(&self, angle: f64, freq: f64, cap: f64) -> Result<Complex64> {
        reflection_coefficient(angle, freq, cap, self)
    }

    /// Reflection phase `arg Γ` in `(-π, π]`.
    pub fn phase(&self, angle: f64, freq: f64, cap: f64) -> Result<f64> {
        Ok(self.gamma(angle, freq, cap)?.arg())
    }
}

fn check_freq_cap(freq: f64, cap: f64) -> Result<()> {
    if !(freq > 0.0 && freq.is_finite()) {
        return Err(Error::Domain(format!(
            "frequency must be positive, got {freq}"
        )));
    }
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(Error::Domain(format!(
            "capacitance must be positive, got {cap}"
        )));
    }
    Ok(())
}

/// Cell impedance `Z(θ, f, C)` of the parallel resonant circuit.
///
/// `_angle` is carried for symmetry with the calibrated API; the angle
/// dependence lives entirely in `params`.
pub fn impedance(_angle: f64, freq: f64, cap: f64, params: &CircuitParams) -> Result<Complex64> {
    check_freq_cap(freq, cap)?;
    params.validate()?;
    let x_bottom = freq * params.l_bottom;
    let x_series = freq * params.l_top - 1.0 / (freq * params.c_top) - 1.0 / (freq * cap);
    let branch = Complex64::new(params.r_top, x_series);
    let shunt = Complex64::new(0.0, x_bottom);
    let denom = shunt + branch;
    let scale = x_bottom.abs() + branch.norm();
    if denom.norm() <= f64::EPSILON * scale {
        return Err(Error::ResonanceSingularity { freq });
    }
    let z = shunt * branch / denom;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::ResonanceSingularity { freq });
    }
    Ok(z)
}

/// Reflection coefficient `Γ = (Z − Z_0)/(Z + Z_0)`.
pub fn reflection_coefficient(
    angle: f64,
    freq: f64,
    cap: f64,
    model: &UnitCellModel,
) -> Result<Complex64> {
    let params = model.params_at(angle)?;
    let z = impedance(angle, freq, cap, &params)?;
    let z0 = model.z_free_space;
    Ok((z - z0) / (z + z0))
}

/// `f_r = 1/√((L_B + L_T)·C_T·C/(C_T + C))`.
pub fn resonance_frequency(params: &CircuitParams, cap: f64) -> Result<f64> {
    params.validate()?;
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(Error::Domain(format!(
            "capacitance must be positive, got {cap}"
        )));
    }
    let c_series = params.c_top * cap / (params.c_top + cap);
    Ok(1.0 / ((params.l_bottom + params.l_top) * c_series).sqrt())
}

/// Circuit values at `angle`, piecewise-linear between calibration knots.
///
/// Negative angles are mirrored onto positive ones. At a knot the stored
/// values are returned unchanged.
///
/// Note: the bundled `C_T` jumps from 8.9 pF at 30° to 200 pF at 40°, so values
/// interpolated inside that span carry no physical weight beyond continuity.
pub fn interpolate_params(
    table: &CalibrationTable,
    angle: f64,
    mode: AngleMode,
) -> Result<CircuitParams> {
    if table.entries.is_empty() {
        return Err(Error::EmptyTable);
    }
    if !angle.is_finite() {
        return Err(Error::Domain(format!("angle must be finite, got {angle}")));
    }
    let a = angle.abs();
    let entries = &table.entries;
    let (first_angle, first) = entries[0];
    let (last_angle, last) = entries[entries.len() - 1];
    let out_of_range = || Error::OutOfCalibrationRange {
        angle_deg: angle.to_degrees(),
        min_deg: first_angle.to_degrees(),
        max_deg: last_angle.to_degrees(),
    };
    if a < first_angle {
        return match mode {
            AngleMode::Clamp => Ok(first),
            AngleMode::Strict => Err(out_of_range()),
        };
    }
    if a > last_angle {
        return match mode {
            AngleMode::Clamp => Ok(last),
            AngleMode::Strict => Err(out_of_range()),
        };
    }
    // first knot with angle >= a
    let idx = entries.partition_point(|(k, _)| *k < a);
    let (hi_angle, hi) = entries[idx];
    if hi_angle == a {
        return Ok(hi);
    }
    let (lo_angle, lo) = entries[idx - 1];
    let t = (a - lo_angle) / (hi_angle - lo_angle);
    Ok(lo.lerp(&hi, t))
}

/// Varactor capacitance at reverse bias `v`.
pub fn capacitance_from_voltage(varactor: &VaractorModel, v: f64) -> Result<f64> {
    let (v_lo, v_hi) = varactor.voltage_range();
    if !(v >= v_lo && v <= v_hi) {
        return Err(Error::VoltageOutOfRange {
            voltage: v,
            min: v_lo,
            max: v_hi,
        });
    }
    if let Some(table) = &varactor.cv_table {
        let idx = table.partition_point(|(tv, _)| *tv < v);
        if idx == 0 {
            return Ok(table[0].1);
        }
        let (v1, c1) = table[idx];
        if v1 == v {
            return Ok(c1);
        }
        let (v0, c0) = table[idx - 1];
        return Ok(c0 + (v - v0) / (v1 - v0) * (c1 - c0));
    }
    if v == varactor.v_at_cmax {
        return Ok(varactor.c_max);
    }
    if v == varactor.v_at_cmin {
        return Ok(varactor.c_min);
    }
    let vj = JUNCTION_POTENTIAL;
    let m = varactor.junction_exponent();
    Ok(varactor.c_max * ((1.0 + varactor.v_at_cmax / vj) / (1.0 + v / vj)).powf(m))
}

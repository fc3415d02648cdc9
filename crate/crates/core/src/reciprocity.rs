//! Angle reciprocity of a configured surface.
//!
//! A surface set up to reflect a wave from `θ1` toward `θ2` sends the
//! reverse wave (arriving from `θ2`) toward
//!
//! ```text
//! θ3 = arcsin( sin θ1 + (λ/2πD)·(ΔΦ(θ1) − ΔΦ(θ2)) )
//! ```
//!
//! where `ΔΦ(θ)` is the adjacent-column phase step seen by a wave incident
//! from `θ`. Reciprocity (`θ3 = θ1`) holds exactly when the two steps agree.
//! With the angle-dependent cell model they generally do not, and the scan
//! in this module measures by how much.

use std::f64::consts::FRAC_PI_2;

use crate::array::{ColumnProfile, RisGeometry};
use crate::circuit::UnitCellModel;
use crate::steering::{design_deflection, realize_profile, DeflectionDesign};
use crate::{wrap_phase, Error, Result};

/// Largest |θ1| for which the first-order expansion is evaluated.
pub const MAX_EXPANSION_ANGLE_DEG: f64 = 89.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReverseAngle {
    Propagating(f64),
    /// The arcsin argument left `[-1, 1]`; no reflected plane wave exists.
    Evanescent {
        sin_argument: f64,
    },
}

impl ReverseAngle {
    pub fn angle(&self) -> Option<f64> {
        match self {
            Self::Propagating(a) => Some(*a),
            Self::Evanescent { .. } => None,
        }
    }

    pub fn is_evanescent(&self) -> bool {
        matches!(self, Self::Evanescent { .. })
    }
}

/// Normalised step mismatch `δ = (λ/2πD)·wrap(ΔΦ1 − ΔΦ2)`.
pub fn normalized_mismatch(delta_phi_1: f64, delta_phi_2: f64, geom: &RisGeometry) -> f64 {
    wrap_phase(delta_phi_1 - delta_phi_2) / geom.wavenumber_period()
}

/// Direction of the reverse-incidence reflection.
pub fn reverse_angle(
    theta1: f64,
    delta_phi_1: f64,
    delta_phi_2: f64,
    geom: &RisGeometry,
) -> Result<ReverseAngle> {
    geom.validate()?;
    if !(theta1.abs() < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "θ1 must satisfy |θ1| < 90°, got {}°",
            theta1.to_degrees()
        )));
    }
    let diff = wrap_phase(delta_phi_1 - delta_phi_2);
    if diff == 0.0 {
        return Ok(ReverseAngle::Propagating(theta1));
    }
    let arg = theta1.sin() + diff / geom.wavenumber_period();
    if arg.abs() > 1.0 {
        Ok(ReverseAngle::Evanescent { sin_argument: arg })
    } else {
        Ok(ReverseAngle::Propagating(arg.asin()))
    }
}

/// First-order approximation `θ3 ≈ θ1 + δ/cos θ1`.
pub fn first_order_reverse_angle(theta1: f64, delta: f64) -> Result<f64> {
    if !(theta1.abs().to_degrees() <= MAX_EXPANSION_ANGLE_DEG) {
        return Err(Error::UnstableExpansion {
            angle_deg: theta1.to_degrees(),
        });
    }
    Ok(theta1 + delta / theta1.cos())
}

/// Adjacent-column phase step actually produced by a capacitance profile for
/// a wave from `angle`: circular mean and circular standard deviation of the
/// wrapped neighbour differences of `arg Γ(angle, f, C_n)`.
pub fn profile_phase_difference(
    model: &UnitCellModel,
    profile: &ColumnProfile,
    angle: f64,
    freq: f64,
) -> Result<(f64, f64)> {
    let caps = profile
        .capacitances
        .as_ref()
        .ok_or(Error::MissingCapacitances)?;
    if caps.len() < 2 {
        return Err(Error::Domain("need at least two columns".into()));
    }
    let phases = caps
        .iter()
        .map(|&c| model.phase(angle, freq, c))
        .collect::<Result<Vec<_>>>()?;
    let (mut s, mut c) = (0.0, 0.0);
    for w in phases.windows(2) {
        let d = wrap_phase(w[1] - w[0]);
        s += d.sin();
        c += d.cos();
    }
    let n = (phases.len() - 1) as f64;
    let mean = s.atan2(c);
    let resultant = ((s / n).hypot(c / n)).min(1.0);
    let dispersion = (-2.0 * resultant.ln()).max(0.0).sqrt();
    Ok((mean, dispersion))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocityReport {
    pub theta1: f64,
    pub theta2: f64,
    pub delta_phi_1: f64,
    pub delta_phi_2: f64,
    /// `(λ/2πD)·wrap(ΔΦ1 − ΔΦ2)`.
    pub delta: f64,
    pub theta3_exact: ReverseAngle,
    /// `None` beyond the expansion's stable range.
    pub theta3_first_order: Option<f64>,
    /// `|θ3 − θ1|`, `None` when evanescent.
    pub deviation: Option<f64>,
}

impl ReciprocityReport {
    /// Assembles a report from measured phase steps.
    pub fn from_steps(
        theta1: f64,
        theta2: f64,
        delta_phi_1: f64,
        delta_phi_2: f64,
        geom: &RisGeometry,
    ) -> Result<Self> {
        let delta = normalized_mismatch(delta_phi_1, delta_phi_2, geom);
        let theta3_exact = reverse_angle(theta1, delta_phi_1, delta_phi_2, geom)?;
        Ok(Self {
            theta1,
            theta2,
            delta_phi_1,
            delta_phi_2,
            delta,
            theta3_exact,
            theta3_first_order: first_order_reverse_angle(theta1, delta).ok(),
            deviation: theta3_exact.angle().map(|t3| (t3 - theta1).abs()),
        })
    }

    pub fn is_evanescent(&self) -> bool {
        self.theta3_exact.is_evanescent()
    }
}

/// One `(θ1, θ2)` cell of a reciprocity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanCell {
    pub report: ReciprocityReport,
    /// Columns whose forward target phase was out of reach.
    pub infeasible_columns: usize,
    /// Circular spread of the measured steps at `θ1`.
    pub dispersion_forward: f64,
    /// Circular spread of the measured steps at `θ2`.
    pub dispersion_reverse: f64,
    pub design: DeflectionDesign,
}

impl ScanCell {
    pub fn is_feasible(&self) -> bool {
        self.infeasible_columns == 0
    }

    /// Larger of the forward and reverse spreads.
    pub fn dispersion(&self) -> f64 {
        self.dispersion_forward.max(self.dispersion_reverse)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocityScan {
    pub theta1_grid: Vec<f64>,
    pub theta2_grid: Vec<f64>,
    /// Row-major: `cells[i][j]` is `(theta1_grid[i], theta2_grid[j])`.
    pub cells: Vec<Vec<ScanCell>>,
}

impl ReciprocityScan {
    pub fn iter(&self) -> impl Iterator<Item = &ScanCell> {
        self.cells.iter().flatten()
    }
}

/// Designs, realizes and measures every `(θ1, θ2)` pair.
///
/// Each cell designs the deflection at `θ1`, realizes capacitances there,
/// then measures the phase step produced at `θ1` and at `θ2`. Infeasible
/// columns never abort the scan; they are counted per cell.
pub fn reciprocity_scan(
    model: &UnitCellModel,
    geom: &RisGeometry,
    theta1_grid: &[f64],
    theta2_grid: &[f64],
) -> Result<ReciprocityScan> {
    if theta1_grid.is_empty() || theta2_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut cells = Vec::with_capacity(theta1_grid.len());
    for &theta1 in theta1_grid {
        let mut row = Vec::with_capacity(theta2_grid.len());
        for &theta2 in theta2_grid {
            row.push(scan_cell(model, geom, theta1, theta2)?);
        }
        cells.push(row);
    }
    Ok(ReciprocityScan {
        theta1_grid: theta1_grid.to_vec(),
        theta2_grid: theta2_grid.to_vec(),
        cells,
    })
}

fn scan_cell(
    model: &UnitCellModel,
    geom: &RisGeometry,
    theta1: f64,
    theta2: f64,
) -> Result<ScanCell> {
    let design = design_deflection(geom, theta1, theta2)?;
    let design = realize_profile(model, &design, geom, 1.0)?;
    let (dphi1, disp1) = profile_phase_difference(model, &design.profile, theta1, geom.freq)?;
    let (dphi2, disp2) = profile_phase_difference(model, &design.profile, theta2, geom.freq)?;
    let report = ReciprocityReport::from_steps(theta1, theta2, dphi1, dphi2, geom)?;
    Ok(ScanCell {
        report,
        infeasible_columns: design.infeasible_count(),
        dispersion_forward: disp1,
        dispersion_reverse: disp2,
        design,
    })
}

/// Region of a scan where the reverse wave returns within a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocityWindow {
    pub threshold: f64,
    /// Half-width `w` of the largest centred square `|θ1|, |θ2| ≤ w` whose
    /// cells all pass; `None` if even the smallest square fails.
    pub half_width: Option<f64>,
    pub passing_cells: usize,
    pub total_cells: usize,
    /// Every cell with `θ1 = θ2` passes.
    pub diagonal_passes: bool,
    /// Every passing cell has `θ1 = θ2`.
    pub passing_only_diagonal: bool,
}

/// A cell passes when its reverse wave propagates and `|θ3 − θ1| ≤ threshold`.
pub fn reciprocity_window(scan: &ReciprocityScan, threshold: f64) -> ReciprocityWindow {
    let passes = |c: &ScanCell| c.report.deviation.is_some_and(|d| d <= threshold);

    let mut radii: Vec<f64> = scan
        .theta1_grid
        .iter()
        .chain(&scan.theta2_grid)
        .map(|a| a.abs())
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let mut half_width = None;
    for &w in &radii {
        let mut any = false;
        let mut all = true;
        for c in scan.iter() {
            if c.report.theta1.abs() <= w && c.report.theta2.abs() <= w {
                any = true;
                all &= passes(c);
            }
        }
        if !any {
            continue;
        }
        if all {
            half_width = Some(w);
        } else {
            break;
        }
    }

    let mut passing = 0;
    let mut diagonal_passes = true;
    let mut passing_only_diagonal = true;
    for c in scan.iter() {
        let on_diag = c.report.theta1 == c.report.theta2;
        let ok = passes(c);
        passing += ok as usize;
        if on_diag && !ok {
            diagonal_passes = false;
        }
        if ok && !on_diag {
            passing_only_diagonal = false;
        }
    }
    ReciprocityWindow {
        threshold,
        half_width,
        passing_cells: passing,
        total_cells: scan.iter().count(),
        diagonal_passes,
        passing_only_diagonal,
    }
}

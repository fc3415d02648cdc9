//! Phase-gradient deflection design and its realization with varactor
//! capacitances.
//!
//! A deflection from `θ_in` to `θ_out` needs the column phases to form an
//! arithmetic progression `Φ_n = n·ΔΦ` with
//! `ΔΦ = −(2πD/λ)(sin θ_in + sin θ_out)` (mod 2π). Each phase target is then
//! inverted through the circuit model at the design incidence angle.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::array::{ColumnProfile, RisGeometry};
use crate::circuit::UnitCellModel;
use crate::{wrap_phase, Error, Result};

/// Capacitance grid size used to bound the achievable phase set.
pub const DEFAULT_GRID_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct DeflectionDesign {
    pub theta_in: f64,
    pub theta_out: f64,
    /// Adjacent-column phase step, `(-π, π]`.
    pub delta_phi: f64,
    pub profile: ColumnProfile,
    pub feasible_per_column: Vec<bool>,
}

impl DeflectionDesign {
    pub fn infeasible_count(&self) -> usize {
        self.feasible_per_column.iter().filter(|f| !**f).count()
    }

    pub fn is_fully_feasible(&self) -> bool {
        self.feasible_per_column.iter().all(|f| *f)
    }
}

/// Tuning knobs for inverting phase to capacitance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSolver {
    /// Allowed wrapped phase error, rad.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Log-spaced capacitance samples used to bracket the root.
    pub grid_points: usize,
}

impl Default for PhaseSolver {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 200,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

/// Achievable reflection phase at one `(θ, f)`.
///
/// The arc runs from `phase_lo` to `phase_hi = phase_lo + width`, so
/// `phase_hi` may exceed π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunableRange {
    pub phase_lo: f64,
    pub phase_hi: f64,
    pub width: f64,
}

fn check_angle(angle: f64) -> Result<()> {
    if !(angle.abs() < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "angle must satisfy |θ| < 90°, got {}°",
            angle.to_degrees()
        )));
    }
    Ok(())
}

/// Builds the arithmetic-progression profile steering `theta_in` to
/// `theta_out`. Column 0 has phase 0; capacitances are left unset.
pub fn design_deflection(
    geom: &RisGeometry,
    theta_in: f64,
    theta_out: f64,
) -> Result<DeflectionDesign> {
    geom.validate()?;
    check_angle(theta_in)?;
    check_angle(theta_out)?;
    let delta_phi = wrap_phase(-geom.wavenumber_period() * (theta_in.sin() + theta_out.sin()));
    let profile = ColumnProfile::from_phases((0..geom.n_columns).map(|n| n as f64 * delta_phi));
    Ok(DeflectionDesign {
        theta_in,
        theta_out,
        delta_phi,
        profile,
        feasible_per_column: vec![true; geom.n_columns],
    })
}

/// Log-spaced capacitance grid from `c_min` to `c_max`, endpoints exact.
fn capacitance_grid(model: &UnitCellModel, points: usize) -> Vec<f64> {
    let (lo, hi) = (model.varactor.c_min, model.varactor.c_max);
    let points = points.max(2);
    let ratio = (hi / lo).ln();
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == points - 1 {
                hi
            } else {
                lo * (ratio * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Phase sampled over the capacitance grid and unwrapped along it.
struct PhaseSweep {
    caps: Vec<f64>,
    phases: Vec<f64>,
}

impl PhaseSweep {
    fn new(model: &UnitCellModel, angle: f64, freq: f64, points: usize) -> Result<Self> {
        let caps = capacitance_grid(model, points);
        let mut phases = Vec::with_capacity(caps.len());
        for &c in &caps {
            let p = model.phase(angle, freq, c)?;
            let unwrapped = match phases.last() {
                Some(&prev) => prev + wrap_phase(p - prev),
                None => p,
            };
            phases.push(unwrapped);
        }
        Ok(Self { caps, phases })
    }

    fn bounds(&self) -> (f64, f64) {
        let lo = self.phases.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self
            .phases
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn is_monotone(&self) -> bool {
        let eps = 1e-12;
        let up = self.phases.windows(2).all(|w| w[1] >= w[0] - eps);
        let down = self.phases.windows(2).all(|w| w[1] <= w[0] + eps);
        up || down
    }
}

/// Capacitance in `[c_min, c_max]` whose reflection phase matches
/// `target_phase` (mod 2π), using the default solver settings.
pub fn phase_to_capacitance(
    model: &UnitCellModel,
    angle: f64,
    freq: f64,
    target_phase: f64,
) -> Result<f64> {
    phase_to_capacitance_with(model, angle, freq, target_phase, &PhaseSolver::default())
}

/// As [`phase_to_capacitance`] with explicit solver settings.
///
/// The phase is sampled on a log-spaced grid and unwrapped; it must be
/// monotone in `C`. The first grid segment whose phase span contains a
/// `2π`-shift of the target brackets the root, which is then refined by
/// bisection. When several capacitances reach the target the smallest wins.
pub fn phase_to_capacitance_with(
    model: &UnitCellModel,
    angle: f64,
    freq: f64,
    target_phase: f64,
    solver: &PhaseSolver,
) -> Result<f64> {
    let sweep = PhaseSweep::new(model, angle, freq, solver.grid_points)?;
    solve_on_sweep(model, angle, freq, target_phase, solver, &sweep)
}

fn solve_on_sweep(
    model: &UnitCellModel,
    angle: f64,
    freq: f64,
    target_phase: f64,
    solver: &PhaseSolver,
    sweep: &PhaseSweep,
) -> Result<f64> {
    if !target_phase.is_finite() {
        return Err(Error::Domain(format!(
            "target phase must be finite, got {target_phase}"
        )));
    }
    let mismatch = |phase: f64| wrap_phase(phase - target_phase);
    let first = sweep.phases[0];
    if mismatch(first).abs() <= solver.tolerance {
        return Ok(sweep.caps[0]);
    }
    if !sweep.is_monotone() {
        return Err(Error::NonMonotone { angle, freq });
    }
    let (lo, hi) = sweep.bounds();
    let infeasible = || Error::InfeasiblePhase {
        target: target_phase,
        lo,
        hi,
    };
    // Segment whose unwrapped span contains target + 2πk.
    let mut bracket = None;
    for (i, w) in sweep.phases.windows(2).enumerate() {
        let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
        let k = ((a - target_phase) / TAU).ceil();
        let shifted = target_phase + k * TAU;
        if shifted <= b {
            bracket = Some((i, shifted));
            break;
        }
    }
    let Some((i, shifted)) = bracket else {
        // allow targets just outside the sampled span by the tolerance
        let last = *sweep.phases.last().unwrap();
        if mismatch(last).abs() <= solver.tolerance {
            return Ok(*sweep.caps.last().unwrap());
        }
        return Err(infeasible());
    };

    let (mut c_lo, mut c_hi) = (sweep.caps[i], sweep.caps[i + 1]);
    // signed distance to the shifted target, continuous inside the bracket
    let residual = |c: f64| -> Result<f64> {
        let p = model.phase(angle, freq, c)?;
        Ok(wrap_phase(p - shifted))
    };
    let mut r_lo = sweep.phases[i] - shifted;
    if r_lo.abs() <= solver.tolerance {
        return Ok(c_lo);
    }
    let r_hi = sweep.phases[i + 1] - shifted;
    if r_hi.abs() <= solver.tolerance {
        return Ok(c_hi);
    }
    let mut best = (f64::INFINITY, c_lo);
    for _ in 0..solver.max_iterations {
        let mid = 0.5 * (c_lo + c_hi);
        if mid <= c_lo || mid >= c_hi {
            break;
        }
        let r = residual(mid)?;
        if r.abs() < best.0 {
            best = (r.abs(), mid);
        }
        if r.abs() <= solver.tolerance {
            return Ok(mid);
        }
        if (r < 0.0) == (r_lo < 0.0) {
            c_lo = mid;
            r_lo = r;
        } else {
            c_hi = mid;
        }
    }
    if best.0 <= solver.tolerance {
        Ok(best.1)
    } else {
        Err(Error::NoConvergence { residual: best.0 })
    }
}

/// Fills in per-column capacitances for `design` at its incidence angle.
///
/// Columns whose target is outside the tunable window keep their target
/// phase, are flagged infeasible and get the endpoint capacitance whose
/// phase is circularly closest to the target. More than
/// `max_infeasible_fraction` infeasible columns is an error carrying the
/// partial design.
pub fn realize_profile(
    model: &UnitCellModel,
    design: &DeflectionDesign,
    geom: &RisGeometry,
    max_infeasible_fraction: f64,
) -> Result<DeflectionDesign> {
    realize_profile_with(
        model,
        design,
        geom,
        max_infeasible_fraction,
        &PhaseSolver::default(),
    )
}

pub fn realize_profile_with(
    model: &UnitCellModel,
    design: &DeflectionDesign,
    geom: &RisGeometry,
    max_infeasible_fraction: f64,
    solver: &PhaseSolver,
) -> Result<DeflectionDesign> {
    design.profile.validate(geom)?;
    let angle = design.theta_in;
    let freq = geom.freq;
    let sweep = PhaseSweep::new(model, angle, freq, solver.grid_points)?;
    let first = *sweep.phases.first().unwrap();
    let last = *sweep.phases.last().unwrap();

    let mut caps = Vec::with_capacity(geom.n_columns);
    let mut feasible = Vec::with_capacity(geom.n_columns);
    for &target in &design.profile.phases {
        match solve_on_sweep(model, angle, freq, target, solver, &sweep) {
            Ok(c) => {
                caps.push(c);
                feasible.push(true);
            }
            Err(Error::InfeasiblePhase { .. }) => {
                let to_first = wrap_phase(first - target).abs();
                let to_last = wrap_phase(last - target).abs();
                let c = if to_first <= to_last {
                    model.varactor.c_min
                } else {
                    model.varactor.c_max
                };
                caps.push(c);
                feasible.push(false);
            }
            Err(e) => return Err(e),
        }
    }
    let mut out = design.clone();
    out.profile = out.profile.with_capacitances(caps)?;
    out.feasible_per_column = feasible;
    let infeasible = out.infeasible_count();
    if infeasible as f64 > max_infeasible_fraction * geom.n_columns as f64 {
        return Err(Error::InfeasibleColumns {
            infeasible,
            total: geom.n_columns,
            design: Box::new(out),
        });
    }
    Ok(out)
}

/// Profile of the actual reflection coefficients `Γ(angle, f, C_n)` of a
/// capacitance assignment, as seen by a wave arriving from `angle`.
pub fn realized_profile(
    model: &UnitCellModel,
    capacitances: &[f64],
    angle: f64,
    freq: f64,
) -> Result<ColumnProfile> {
    let gammas = capacitances
        .iter()
        .map(|&c| model.gamma(angle, freq, c))
        .collect::<Result<Vec<_>>>()?;
    ColumnProfile::from_response(&gammas).with_capacitances(capacitances.to_vec())
}

/// Achievable phase arc over `[c_min, c_max]` at `(angle, freq)`.
pub fn tunable_phase_range(model: &UnitCellModel, angle: f64, freq: f64) -> Result<TunableRange> {
    tunable_phase_range_with(model, angle, freq, DEFAULT_GRID_POINTS)
}

pub fn tunable_phase_range_with(
    model: &UnitCellModel,
    angle: f64,
    freq: f64,
    grid_points: usize,
) -> Result<TunableRange> {
    let sweep = PhaseSweep::new(model, angle, freq, grid_points)?;
    let (lo, hi) = sweep.bounds();
    let width = (hi - lo).min(TAU);
    let phase_lo = if width >= TAU {
        -std::f64::consts::PI
    } else {
        wrap_phase(lo)
    };
    Ok(TunableRange {
        phase_lo,
        phase_hi: phase_lo + width,
        width,
    })
}

/// Grid frequency with the widest tunable phase range at `angle`; ties go
/// to the lowest frequency.
pub fn select_operating_frequency(
    model: &UnitCellModel,
    angle: f64,
    f_grid: &[f64],
) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &f in f_grid {
        let w = tunable_phase_range(model, angle, f)?.width;
        best = match best {
            None => Some((f, w)),
            Some((bf, bw)) if w > bw || (w == bw && f < bf) => Some((f, w)),
            keep => keep,
        };
    }
    best.map(|(f, _)| f).ok_or(Error::EmptyGrid)
}

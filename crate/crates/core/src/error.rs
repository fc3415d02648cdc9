use thiserror::Error;

use crate::steering::DeflectionDesign;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid circuit parameters: {0}")]
    InvalidParams(String),

    #[error("impedance denominator vanished (resonance singularity at f = {freq} Hz)")]
    ResonanceSingularity { freq: f64 },

    #[error("calibration table is empty")]
    EmptyTable,

    #[error("angle {angle_deg}° outside calibration range [{min_deg}°, {max_deg}°]")]
    OutOfCalibrationRange {
        angle_deg: f64,
        min_deg: f64,
        max_deg: f64,
    },

    #[error("voltage {voltage} V outside varactor range [{min} V, {max} V]")]
    VoltageOutOfRange { voltage: f64, min: f64, max: f64 },

    #[error("target phase {target} rad not achievable; tunable window is [{lo}, {hi}] rad")]
    InfeasiblePhase { target: f64, lo: f64, hi: f64 },

    #[error("reflection phase is not monotone in capacitance at θ = {angle} rad, f = {freq} Hz")]
    NonMonotone { angle: f64, freq: f64 },

    #[error("capacitance search did not converge (residual {residual} rad)")]
    NoConvergence { residual: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{infeasible} of {total} columns cannot realize their target phase")]
    InfeasibleColumns {
        infeasible: usize,
        total: usize,
        design: Box<DeflectionDesign>,
    },

    #[error("profile has no capacitances")]
    MissingCapacitances,

    #[error("empty grid")]
    EmptyGrid,

    #[error("first-order expansion unstable at θ1 = {angle_deg}° (|θ1| > 89°)")]
    UnstableExpansion { angle_deg: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

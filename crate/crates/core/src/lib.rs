//! Equivalent-circuit model of varactor-tuned reconfigurable intelligent
//! surface (RIS) unit cells whose reflection coefficient depends on the
//! incidence angle.
//!
//! The crate is organised bottom-up:
//!
//! - [`circuit`]: unit-cell impedance, reflection coefficient, calibration
//!   tables and the varactor C–V law.
//! - [`array`]: RIS geometry, array response vectors and the diagonal
//!   reflection `y = Γ a_in(θ)`.
//! - [`steering`]: phase-gradient deflection design and the inversion of a
//!   target phase to a varactor capacitance.
//! - [`reciprocity`]: reverse-incidence reflection angle, its first-order
//!   expansion and reciprocity scans over angle pairs.
//! - [`pattern`]: an array-factor far-field oracle used to cross-check the
//!   closed forms.
//! - [`io`]: CSV readers and writers for every file format the CLI emits.
//!
//! # Frequency convention
//!
//! Reactances are written `j·f·L` and `1/(j·f·C)` with `f` in hertz and *no*
//! `2π` factor, so the resonance of a cell is `f_r = 1/√(L·C)`. This is the
//! convention under which the bundled calibration reproduces its listed
//! resonance frequencies (5.53, 5.59 and 5.64 GHz). Every
//! frequency argument in this crate follows it.

// `!(x < bound)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod circuit;
pub mod error;
pub mod io;
pub mod pattern;
pub mod reciprocity;
pub mod steering;

pub use error::{Error, Result};

use std::f64::consts::{PI, TAU};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wraps a phase into `(-π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(0.0), 0.0);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_phase(-7.0) - (-7.0 + TAU)).abs() < 1e-15);
        for k in -5..=5 {
            let x = 0.3 + k as f64 * TAU;
            assert!((wrap_phase(x) - 0.3).abs() < 1e-12);
        }
    }
}

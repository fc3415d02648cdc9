//! CSV formats.
//!
//! Files use the table units (degrees, nH, pF, GHz); everything is converted
//! to SI on ingestion. Writers format floats with [`fmt_num`] (9 significant
//! digits) and terminate lines with `\n`, so output is byte-reproducible.

use std::io::{Read, Write};
use std::path::Path;

use crate::circuit::{CalibrationTable, CircuitParams, VaractorModel};
use crate::reciprocity::ReciprocityScan;
use crate::steering::DeflectionDesign;
use crate::{Error, Result};

/// The bundled three-angle calibration.
pub const TABLE_I_CSV: &str = include_str!("../data/table1_calibration.csv");

pub const CALIBRATION_HEADER: [&str; 5] = ["angle_deg", "L_B_nH", "L_T_nH", "R_T_ohm", "C_T_pF"];
pub const CV_HEADER: [&str; 2] = ["voltage_V", "capacitance_pF"];
pub const DESIGN_HEADER: [&str; 4] = ["column", "phase_rad", "capacitance_pF", "feasible"];
pub const SCAN_HEADER: [&str; 9] = [
    "theta1_deg",
    "theta2_deg",
    "delta_phi1_rad",
    "delta_phi2_rad",
    "delta_rad",
    "theta3_deg",
    "deviation_deg",
    "evanescent",
    "dispersion_rad",
];
pub const CUT_HEADER: [&str; 2] = ["theta_obs_deg", "power_db"];
pub const PHASE_VS_FREQ_HEADER: [&str; 3] = ["freq_GHz", "phase_deg", "amplitude"];
pub const PHASE_VS_ANGLE_HEADER: [&str; 3] = ["angle_deg", "phase_deg", "amplitude"];
pub const TUNABLE_HEADER: [&str; 4] = ["angle_deg", "phase_lo_deg", "phase_hi_deg", "width_deg"];

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros removed,
/// exponent form outside `[1e-4, 1e9)`. Negative zero prints as `0`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: cannot parse {field:?} as a number")))
}

fn parse_bool(field: &str) -> Result<bool> {
    match field.trim() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(Error::Parse(format!("expected boolean, got {other:?}"))),
    }
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::Parse(format!(
            "expected header {}, found {}",
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

fn records<R: Read>(reader: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    check_header(rdr.headers()?, header)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Parse(format!(
                "expected {} fields, got {}",
                header.len(),
                rec.len()
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wtr.write_record(header)?;
    Ok(wtr)
}

/// Reads `angle_deg,L_B_nH,L_T_nH,R_T_ohm,C_T_pF`.
pub fn read_calibration<R: Read>(reader: R, provenance: &str) -> Result<CalibrationTable> {
    let mut entries = Vec::new();
    for rec in records(reader, &CALIBRATION_HEADER)? {
        let v: Vec<f64> = rec
            .iter()
            .zip(CALIBRATION_HEADER)
            .map(|(f, name)| parse_f64(f, name))
            .collect::<Result<_>>()?;
        let params = CircuitParams::from_table_units(v[1], v[2], v[3], v[4])?;
        entries.push((v[0].to_radians(), params));
    }
    CalibrationTable::new(entries, provenance)
}

pub fn read_calibration_file(path: &Path) -> Result<CalibrationTable> {
    let f = std::fs::File::open(path)?;
    read_calibration(f, &path.display().to_string())
}

pub fn write_calibration<W: Write>(w: W, table: &CalibrationTable) -> Result<()> {
    let mut wtr = writer(w, &CALIBRATION_HEADER)?;
    for (angle, p) in table.entries() {
        wtr.write_record([
            fmt_num(angle.to_degrees()),
            fmt_num(p.l_bottom * 1e9),
            fmt_num(p.l_top * 1e9),
            fmt_num(p.r_top),
            fmt_num(p.c_top * 1e12),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `voltage_V,capacitance_pF` into a varactor model.
pub fn read_cv_table<R: Read>(reader: R) -> Result<VaractorModel> {
    let mut rows = Vec::new();
    for rec in records(reader, &CV_HEADER)? {
        let v = parse_f64(&rec[0], "voltage_V")?;
        let c = parse_f64(&rec[1], "capacitance_pF")?;
        rows.push((v, c / 1e12));
    }
    VaractorModel::from_cv_table(rows)
}

pub fn read_cv_table_file(path: &Path) -> Result<VaractorModel> {
    read_cv_table(std::fs::File::open(path)?)
}

/// One row of a design export.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRow {
    pub column: usize,
    pub phase_rad: f64,
    pub capacitance_pf: Option<f64>,
    pub feasible: bool,
}

pub fn write_design<W: Write>(w: W, design: &DeflectionDesign) -> Result<()> {
    let mut wtr = writer(w, &DESIGN_HEADER)?;
    let caps = design.profile.capacitances.as_deref();
    for (n, phase) in design.profile.phases.iter().enumerate() {
        let cap = caps.map(|c| fmt_num(c[n] * 1e12)).unwrap_or_default();
        wtr.write_record([
            n.to_string(),
            fmt_num(*phase),
            cap,
            design.feasible_per_column[n].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_design<R: Read>(reader: R) -> Result<Vec<DesignRow>> {
    records(reader, &DESIGN_HEADER)?
        .iter()
        .map(|rec| {
            Ok(DesignRow {
                column: rec[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad column index {:?}", &rec[0])))?,
                phase_rad: parse_f64(&rec[1], "phase_rad")?,
                capacitance_pf: if rec[2].is_empty() {
                    None
                } else {
                    Some(parse_f64(&rec[2], "capacitance_pF")?)
                },
                feasible: parse_bool(&rec[3])?,
            })
        })
        .collect()
}

/// One row of a reciprocity-scan export, in file units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    pub delta_phi1_rad: f64,
    pub delta_phi2_rad: f64,
    pub delta_rad: f64,
    /// NaN when evanescent.
    pub theta3_deg: f64,
    /// NaN when evanescent.
    pub deviation_deg: f64,
    pub evanescent: bool,
    pub dispersion_rad: f64,
}

pub fn write_scan<W: Write>(w: W, scan: &ReciprocityScan) -> Result<()> {
    let mut wtr = writer(w, &SCAN_HEADER)?;
    for cell in scan.iter() {
        let r = &cell.report;
        let theta3 = r.theta3_exact.angle().map_or(f64::NAN, f64::to_degrees);
        let dev = r.deviation.map_or(f64::NAN, f64::to_degrees);
        wtr.write_record([
            fmt_num(r.theta1.to_degrees()),
            fmt_num(r.theta2.to_degrees()),
            fmt_num(r.delta_phi_1),
            fmt_num(r.delta_phi_2),
            fmt_num(r.delta),
            fmt_num(theta3),
            fmt_num(dev),
            r.is_evanescent().to_string(),
            fmt_num(cell.dispersion()),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_scan<R: Read>(reader: R) -> Result<Vec<ScanRow>> {
    records(reader, &SCAN_HEADER)?
        .iter()
        .map(|rec| {
            let f = |i: usize| parse_f64(&rec[i], SCAN_HEADER[i]);
            Ok(ScanRow {
                theta1_deg: f(0)?,
                theta2_deg: f(1)?,
                delta_phi1_rad: f(2)?,
                delta_phi2_rad: f(3)?,
                delta_rad: f(4)?,
                theta3_deg: f(5)?,
                deviation_deg: f(6)?,
                evanescent: parse_bool(&rec[7])?,
                dispersion_rad: f(8)?,
            })
        })
        .collect()
}

/// Writes rows of floats under `header`.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut wtr = writer(w, header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::LengthMismatch {
                expected: header.len(),
                got: row.len(),
            });
        }
        wtr.write_record(row.iter().map(|v| fmt_num(*v)))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a float table written by [`write_table`].
pub fn read_table<R: Read>(reader: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    records(reader, header)?
        .iter()
        .map(|rec| {
            rec.iter()
                .zip(header)
                .map(|(f, name)| parse_f64(f, name))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_formatting() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (5.53, "5.53"),
            (0.1 + 0.2, "0.3"),
            (std::f64::consts::PI, "3.14159265"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-0.4355628, "-0.4355628"),
            (99999999.95, "100000000"),
            (9.999999999e8, "1e+09"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_num(x), want, "{x}");
        }
        assert_eq!(fmt_num(f64::NAN), "NaN");
        assert!(fmt_num(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn bundled_calibration_verbatim() {
        let t = read_calibration(TABLE_I_CSV.as_bytes(), "t").unwrap();
        assert_eq!(t.entries().len(), 3);
        let p40 = t.entries()[2].1;
        assert_eq!(p40.c_top, 200.0 / 1e12);
        assert_eq!(p40.l_bottom, 14.44 / 1e9);
        assert_eq!(t.entries()[1].0, 30f64.to_radians());
        let mut buf = Vec::new();
        write_calibration(&mut buf, &t).unwrap();
        assert_eq!(
            read_calibration(buf.as_slice(), "t").unwrap().entries(),
            t.entries()
        );
    }

    #[test]
    fn calibration_header_is_checked() {
        let bad = "angle,L_B_nH,L_T_nH,R_T_ohm,C_T_pF\n0,1,1,1,1\n";
        assert!(matches!(
            read_calibration(bad.as_bytes(), "x"),
            Err(Error::Parse(_))
        ));
        let descending = "angle_deg,L_B_nH,L_T_nH,R_T_ohm,C_T_pF\n30,1,1,1,1\n0,1,1,1,1\n";
        assert!(read_calibration(descending.as_bytes(), "x").is_err());
        let empty = "angle_deg,L_B_nH,L_T_nH,R_T_ohm,C_T_pF\n";
        assert!(matches!(
            read_calibration(empty.as_bytes(), "x"),
            Err(Error::EmptyTable)
        ));
    }

    #[test]
    fn cv_table_parses() {
        let s = "voltage_V,capacitance_pF\n0,2.67\n5,1.5\n30,0.63\n";
        let v = read_cv_table(s.as_bytes()).unwrap();
        assert_eq!(v.c_max, 2.67 / 1e12);
        assert_eq!(v.c_min, 0.63 / 1e12);
        assert_eq!(v.v_at_cmin, 30.0);
        let rising = "voltage_V,capacitance_pF\n0,0.63\n30,2.67\n";
        assert!(read_cv_table(rising.as_bytes()).is_err());
    }

    #[test]
    fn table_round_trip() {
        let rows = vec![vec![1.0, -2.25, 3e-7], vec![0.1, 0.2, 0.3]];
        let mut buf = Vec::new();
        write_table(&mut buf, &PHASE_VS_FREQ_HEADER, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "freq_GHz,phase_deg,amplitude\n1,-2.25,3e-07\n0.1,0.2,0.3\n"
        );
        assert_eq!(
            read_table(buf.as_slice(), &PHASE_VS_FREQ_HEADER).unwrap(),
            rows
        );
    }
}

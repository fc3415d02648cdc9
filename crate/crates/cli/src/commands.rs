use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use risphase_core::array::RisGeometry;
use risphase_core::circuit::{AngleMode, CalibrationTable, UnitCellModel, VaractorModel};
use risphase_core::io::{
    fmt_num, read_calibration_file, read_cv_table_file, read_design, write_design, write_scan,
    write_table, CUT_HEADER, PHASE_VS_ANGLE_HEADER, PHASE_VS_FREQ_HEADER, TUNABLE_HEADER,
};
use risphase_core::pattern::{far_field_cut, FarFieldCut};
use risphase_core::reciprocity::{reciprocity_scan, reciprocity_window};
use risphase_core::steering::{
    design_deflection, realize_profile, realized_profile, tunable_phase_range, DeflectionDesign,
};
use risphase_core::Error;

use crate::config::{ConfigError, Interpolation, RunConfig};

pub fn build_model(cfg: &RunConfig) -> Result<UnitCellModel> {
    let table = match &cfg.calibration {
        Some(p) => read_calibration_file(p)
            .with_context(|| format!("loading calibration {}", p.display()))?,
        None => CalibrationTable::table_i(),
    };
    let varactor = match &cfg.varactor {
        Some(p) => read_cv_table_file(p)
            .with_context(|| format!("loading varactor table {}", p.display()))?,
        None => VaractorModel::default(),
    };
    let mode = match cfg.interpolation {
        Interpolation::Clamp => AngleMode::Clamp,
        Interpolation::Strict => AngleMode::Strict,
    };
    Ok(UnitCellModel::new(table, varactor)
        .with_angle_mode(mode)
        .with_z_free_space(cfg.z0_ohm)?)
}

pub fn build_geometry(cfg: &RunConfig) -> Result<RisGeometry> {
    Ok(RisGeometry::new(
        cfg.n_columns,
        cfg.m_rows,
        cfg.period_mm / 1e3,
        cfg.freq_ghz * 1e9,
    )?)
}

fn create(out: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let path = out.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(f)))
}

fn emit_table(out: &Path, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
    let (path, w) = create(out, name)?;
    write_table(w, header, rows).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn emit_cut(out: &Path, name: &str, cut: &FarFieldCut) -> Result<PathBuf> {
    let rows: Vec<Vec<f64>> = cut
        .angles
        .iter()
        .zip(cut.power_db())
        .map(|(a, p)| vec![a.to_degrees(), p])
        .collect();
    emit_table(out, name, &CUT_HEADER, &rows)
}

fn require_angles(cfg: &RunConfig) -> Result<()> {
    if cfg.angles_deg.is_empty() {
        return Err(ConfigError("angles_deg must not be empty".into()).into());
    }
    Ok(())
}

pub fn sweep_frequency(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    require_angles(cfg)?;
    let model = build_model(cfg)?;
    let freqs = cfg.freq_range_ghz.values();
    let mut written = Vec::new();
    for &angle in &cfg.angles_deg {
        for &c in &cfg.capacitances_pf {
            let rows = freqs
                .iter()
                .map(|&f| {
                    let g = model.gamma(angle.to_radians(), f * 1e9, c / 1e12)?;
                    Ok(vec![f, g.arg().to_degrees(), g.norm()])
                })
                .collect::<Result<Vec<_>>>()?;
            let name = format!("phase_vs_freq_{}deg_{}pF.csv", fmt_num(angle), fmt_num(c));
            written.push(emit_table(out, &name, &PHASE_VS_FREQ_HEADER, &rows)?);
        }
    }
    Ok(written)
}

pub fn sweep_angle(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let model = build_model(cfg)?;
    let freq = cfg.freq_ghz * 1e9;
    let angles = cfg.angle_range_deg.values();
    let mut written = Vec::new();
    for &c in &cfg.capacitances_pf {
        let rows = angles
            .iter()
            .map(|&a| {
                let g = model.gamma(a.to_radians(), freq, c / 1e12)?;
                Ok(vec![a, g.arg().to_degrees(), g.norm()])
            })
            .collect::<Result<Vec<_>>>()?;
        let name = format!("phase_vs_angle_{}pF.csv", fmt_num(c));
        written.push(emit_table(out, &name, &PHASE_VS_ANGLE_HEADER, &rows)?);
    }
    let rows = angles
        .iter()
        .map(|&a| {
            let r = tunable_phase_range(&model, a.to_radians(), freq)?;
            Ok(vec![
                a,
                r.phase_lo.to_degrees(),
                r.phase_hi.to_degrees(),
                r.width.to_degrees(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    written.push(emit_table(
        out,
        "tunable_range_vs_angle.csv",
        &TUNABLE_HEADER,
        &rows,
    )?);
    Ok(written)
}

/// Designs and realizes `theta_in → theta_out`. An over-budget infeasible
/// count still yields the partial design alongside the error.
fn realize(
    model: &UnitCellModel,
    geom: &RisGeometry,
    theta_in: f64,
    theta_out: f64,
    max_fraction: f64,
) -> Result<(DeflectionDesign, Option<Error>)> {
    let design = design_deflection(geom, theta_in.to_radians(), theta_out.to_radians())?;
    match realize_profile(model, &design, geom, max_fraction) {
        Ok(d) => Ok((d, None)),
        Err(Error::InfeasibleColumns {
            infeasible,
            total,
            design,
        }) => {
            let err = Error::InfeasibleColumns {
                infeasible,
                total,
                design: design.clone(),
            };
            Ok((*design, Some(err)))
        }
        Err(e) => Err(e.into()),
    }
}

pub struct DesignOutcome {
    pub files: Vec<PathBuf>,
    pub peak_deg: f64,
    pub infeasible: usize,
    pub total: usize,
    /// Set when the infeasible budget was exceeded.
    pub error: Option<Error>,
}

pub fn design(cfg: &RunConfig, out: &Path, theta_in: f64, theta_out: f64) -> Result<DesignOutcome> {
    let model = build_model(cfg)?;
    let geom = build_geometry(cfg)?;
    let (d, error) = realize(
        &model,
        &geom,
        theta_in,
        theta_out,
        cfg.max_infeasible_fraction,
    )?;

    let (path, w) = create(out, "design_profile.csv")?;
    write_design(w, &d).with_context(|| format!("writing {}", path.display()))?;
    let mut files = vec![path];

    let caps = d.profile.capacitances.as_deref().unwrap_or_default();
    let actual = realized_profile(&model, caps, d.theta_in, geom.freq)?;
    let cut = far_field_cut(
        &actual,
        &geom,
        d.theta_in,
        cfg.pattern_step_deg.to_radians(),
    )?;
    files.push(emit_cut(out, "design_far_field.csv", &cut)?);

    Ok(DesignOutcome {
        files,
        peak_deg: cut.peak_angle.to_degrees(),
        infeasible: d.infeasible_count(),
        total: geom.n_columns,
        error,
    })
}

pub struct PatternOutcome {
    pub file: PathBuf,
    pub peak_deg: f64,
    pub ambiguous: bool,
}

/// Far-field cut of a realized profile lit from `illumination` degrees.
/// Capacitances come from `profile` (a design export) when given.
pub fn pattern(
    cfg: &RunConfig,
    out: &Path,
    theta_in: f64,
    theta_out: f64,
    illumination: f64,
    profile: Option<&Path>,
) -> Result<PatternOutcome> {
    let model = build_model(cfg)?;
    let geom = build_geometry(cfg)?;
    let caps: Vec<f64> = match profile {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let rows = read_design(f).with_context(|| format!("reading {}", p.display()))?;
            rows.iter()
                .map(|r| {
                    r.capacitance_pf.map(|c| c / 1e12).ok_or_else(|| {
                        ConfigError(format!(
                            "{}: column {} has no capacitance",
                            p.display(),
                            r.column
                        ))
                    })
                })
                .collect::<std::result::Result<_, _>>()?
        }
        None => {
            let (d, _) = realize(&model, &geom, theta_in, theta_out, 1.0)?;
            d.profile.capacitances.unwrap_or_default()
        }
    };
    let geom = geom.with_columns(caps.len())?;
    let actual = realized_profile(&model, &caps, illumination.to_radians(), geom.freq)?;
    let cut = far_field_cut(
        &actual,
        &geom,
        illumination.to_radians(),
        cfg.pattern_step_deg.to_radians(),
    )?;
    let name = format!("pattern_cut_{}deg.csv", fmt_num(illumination));
    Ok(PatternOutcome {
        file: emit_cut(out, &name, &cut)?,
        peak_deg: cut.peak_angle.to_degrees(),
        ambiguous: cut.ambiguous,
    })
}

pub struct ReciprocityOutcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn reciprocity(cfg: &RunConfig, out: &Path, threshold_deg: f64) -> Result<ReciprocityOutcome> {
    if threshold_deg < 0.0 {
        return Err(ConfigError("threshold must be non-negative".into()).into());
    }
    let model = build_model(cfg)?;
    let geom = build_geometry(cfg)?;
    let rad = |r: &crate::config::Range| {
        r.values()
            .into_iter()
            .map(f64::to_radians)
            .collect::<Vec<_>>()
    };
    let scan = reciprocity_scan(
        &model,
        &geom,
        &rad(&cfg.theta1_range_deg),
        &rad(&cfg.theta2_range_deg),
    )?;

    let (path, w) = create(out, "reciprocity_scan.csv")?;
    write_scan(w, &scan).with_context(|| format!("writing {}", path.display()))?;

    let win = reciprocity_window(&scan, threshold_deg.to_radians());
    let infeasible_cells = scan.iter().filter(|c| !c.is_feasible()).count();
    let evanescent_cells = scan.iter().filter(|c| c.report.is_evanescent()).count();
    let max_dev = scan
        .iter()
        .filter_map(|c| c.report.deviation)
        .fold(0.0, f64::max);
    let half_width = win
        .half_width
        .map_or_else(|| "none".to_string(), |w| fmt_num(w.to_degrees()));
    let summary = format!(
        "threshold_deg = {}\n\
         window_half_width_deg = {half_width}\n\
         passing_cells = {}\n\
         total_cells = {}\n\
         diagonal_passes = {}\n\
         passing_only_diagonal = {}\n\
         max_deviation_deg = {}\n\
         infeasible_cells = {infeasible_cells}\n\
         evanescent_cells = {evanescent_cells}\n",
        fmt_num(threshold_deg),
        win.passing_cells,
        win.total_cells,
        win.diagonal_passes,
        win.passing_only_diagonal,
        fmt_num(max_dev.to_degrees()),
    );
    let (spath, mut w) = create(out, "reciprocity_summary.txt")?;
    w.write_all(summary.as_bytes())
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", spath.display()))?;
    Ok(ReciprocityOutcome {
        files: vec![path, spath],
        summary,
    })
}

//! `risphase`: sweeps, deflection designs and reciprocity scans for the
//! angle-dependent varactor cell model.
//!
//! Exit status: 0 success, 2 configuration error, 3 infeasible design,
//! 4 I/O error, 1 anything else.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use risphase_core::Error;

use config::{ConfigError, Interpolation, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "risphase", version, about)]
struct Cli {
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Calibration CSV; overrides the config file.
    #[arg(long, global = true)]
    calibration: Option<PathBuf>,

    /// Reject angles outside the calibrated range instead of clamping.
    #[arg(long, global = true)]
    strict_angles: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Steer {
    /// Design incidence angle, degrees.
    #[arg(long, allow_hyphen_values = true)]
    theta_in: Option<f64>,
    /// Design reflection angle, degrees.
    #[arg(long, allow_hyphen_values = true)]
    theta_out: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Phase and amplitude against frequency per angle and capacitance.
    SweepFreq,
    /// Phase against incidence angle, plus the tunable range per angle.
    SweepAngle,
    /// Phase-gradient design, capacitance profile and far-field cut.
    Design(Steer),
    /// Reverse-angle deviation over a grid of angle pairs.
    Reciprocity {
        /// Window threshold, degrees.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Far-field cut of a realized profile under arbitrary illumination.
    Pattern {
        #[command(flatten)]
        steer: Steer,
        /// Illumination angle, degrees; defaults to the design incidence.
        #[arg(long, allow_hyphen_values = true)]
        illumination: Option<f64>,
        /// Design CSV to take capacitances from.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p).map_err(|e| {
            if e.downcast_ref::<std::io::Error>().is_some() {
                e
            } else {
                e.context(format!("in {}", p.display()))
            }
        })?,
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.calibration {
        cfg.calibration = Some(p.clone());
    }
    if cli.strict_angles {
        cfg.interpolation = Interpolation::Strict;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out: &Path = &cli.out;
    match &cli.command {
        Command::SweepFreq => print_files(&commands::sweep_frequency(&cfg, out)?),
        Command::SweepAngle => print_files(&commands::sweep_angle(&cfg, out)?),
        Command::Design(s) => {
            let t_in = s.theta_in.unwrap_or(cfg.theta_in_deg);
            let t_out = s.theta_out.unwrap_or(cfg.theta_out_deg);
            let o = commands::design(&cfg, out, t_in, t_out)?;
            print_files(&o.files);
            println!("peak_deg = {}", risphase_core::io::fmt_num(o.peak_deg));
            println!("infeasible_columns = {} / {}", o.infeasible, o.total);
            if let Some(e) = o.error {
                return Err(e.into());
            }
        }
        Command::Reciprocity { threshold } => {
            let t = threshold.unwrap_or(cfg.reciprocity_threshold_deg);
            let o = commands::reciprocity(&cfg, out, t)?;
            print_files(&o.files);
            print!("{}", o.summary);
        }
        Command::Pattern {
            steer,
            illumination,
            profile,
        } => {
            let t_in = steer.theta_in.unwrap_or(cfg.theta_in_deg);
            let t_out = steer.theta_out.unwrap_or(cfg.theta_out_deg);
            let illum = illumination.unwrap_or(t_in);
            let o = commands::pattern(&cfg, out, t_in, t_out, illum, profile.as_deref())?;
            print_files(&[o.file]);
            println!("peak_deg = {}", risphase_core::io::fmt_num(o.peak_deg));
            if o.ambiguous {
                println!("warning: ambiguous peak");
            }
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if cause.is::<std::io::Error>() {
            return 4;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InfeasibleColumns { .. } => 3,
                Error::Io(_) => 4,
                Error::Csv(c) if c.is_io_error() => 4,
                Error::ResonanceSingularity { .. }
                | Error::NonMonotone { .. }
                | Error::NoConvergence { .. } => 1,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

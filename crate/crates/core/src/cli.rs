//! `nmrsync` command-line front end.
//!
//! Exit codes: 0 success, 1 engine or verification failure, 2 invalid configuration or
//! physical invariant, 3 I/O (including a missing config file), 64 usage, 65 malformed
//! configuration file. The thread count can be pinned with `NMRSYNC_THREADS`.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::Error;
use crate::experiments::{
    analyze_tongue, calibrate_drive, default_calibration_times, is_unimodal, run_amplitude_sweep,
    run_arnold_tongue, run_drive_series, synthetic_nutation, Evolution, SweepAxis, AMPLITUDE_AXIS,
    DETUNING_AXIS,
};
use crate::imhd::{imhd_scan, ImhdVariant};
use crate::io::{
    density_matrix_json, parse_config, pretty, read_samples_csv, sweep_csv, write_grid, write_text,
    IoError, RunConfig,
};
use crate::liouville::{build_liouvillian, propagate, spectral_report, steady_state};
use crate::phase_space::{sync_measure_max, visibility, HusimiGrid};
use crate::system::{thermal_state, DensityMatrix};

pub const THREADS_ENV: &str = "NMRSYNC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nmrsync", version, about = "Phase synchronization of a driven two-spin NMR system")]
struct Cli {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `outputDir` from the configuration.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct DriveArgs {
    /// Drive amplitude in Hz.
    #[arg(long, allow_negative_numbers = true)]
    amplitude: Option<f64>,
    /// Drive detuning in Hz.
    #[arg(long, allow_negative_numbers = true)]
    detuning: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steady state of the driven system, written as a density matrix.
    Steady {
        #[command(flatten)]
        drive: DriveArgs,
    },
    /// Reduced Husimi grid after a drive of given duration (or at steady state).
    Husimi {
        #[command(flatten)]
        drive: DriveArgs,
        /// Drive duration in s, starting from thermal equilibrium.
        #[arg(long, conflicts_with = "steady")]
        duration: Option<f64>,
        #[arg(long)]
        steady: bool,
    },
    /// Husimi grids for a list of drive durations.
    Series {
        #[command(flatten)]
        drive: DriveArgs,
        /// Comma-separated durations in s.
        #[arg(long, value_delimiter = ',')]
        durations: Option<Vec<f64>>,
    },
    /// Steady-state visibility versus drive amplitude.
    AmpSweep {
        #[arg(long, default_value_t = 1e-3)]
        min_hz: f64,
        #[arg(long, default_value_t = 1e3)]
        max_hz: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
    },
    /// Synchronization measure over drive amplitude and detuning.
    Arnold {
        #[arg(long, default_value_t = 1e-2)]
        min_hz: f64,
        #[arg(long, default_value_t = 1.0)]
        max_hz: f64,
        #[arg(long, default_value_t = 21)]
        amplitude_points: usize,
        /// Detuning range is `[-max, max]`.
        #[arg(long, default_value_t = 3.0)]
        max_detuning_hz: f64,
        #[arg(long, default_value_t = 41)]
        detuning_points: usize,
        /// Use the steady state instead of a finite drive from equilibrium.
        #[arg(long)]
        steady: bool,
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Compares the interferometric Husimi readout with the direct computation.
    ImhdVerify {
        #[command(flatten)]
        drive: DriveArgs,
        /// `exact-populations` or `quarter-approximation`.
        #[arg(long)]
        variant: Option<String>,
    },
    /// Recovers a drive amplitude from nutation data (synthetic unless `--input`).
    Calibrate {
        /// CSV with `t,signal` columns.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Amplitude for synthetic data, Hz.
        #[arg(long)]
        amplitude: Option<f64>,
        /// Noise standard deviation as a fraction of the peak signal.
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Prints the resolved configuration (or writes it with `--output`).
    EmitConfig {
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("verification failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 64,
            Self::Io(IoError::Missing(_) | IoError::Io { .. }) => 3,
            Self::Io(IoError::Schema(_)) => 65,
            Self::Io(IoError::Invalid(e)) | Self::Engine(e) => match e {
                Error::InvalidConfig(_) | Error::InvalidSweep(_) | Error::InvariantViolated(_) => 2,
                _ => 1,
            },
            Self::Check(_) => 1,
        }
    }
}

/// Runs the CLI on the given arguments (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match dispatch(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // a second initialization in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn apply_drive(cfg: &mut RunConfig, d: &DriveArgs) -> Result<(), CliError> {
    if let Some(a) = d.amplitude {
        cfg.amplitude_hz = a;
    }
    if let Some(x) = d.detuning {
        cfg.detuning_hz = x;
    }
    cfg.validate()?;
    Ok(())
}

fn driven_state(cfg: &RunConfig, steady: bool) -> Result<DensityMatrix, CliError> {
    let l = build_liouvillian(&cfg.system(), &cfg.drive())?;
    Ok(if steady {
        steady_state(&l)?
    } else {
        propagate(&l, &thermal_state(&cfg.system())?, cfg.duration_s)?
    })
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    let mut cfg = load_config(&cli)?;
    let start = Instant::now();
    let elapsed = |start: Instant| format!("runtime={:.3}s", start.elapsed().as_secs_f64());
    let dir = cfg.output_dir.clone();
    match &cli.command {
        Command::EmitConfig { output } => {
            let text = format!("{}\n", cfg.to_json_pretty());
            match output {
                Some(p) => {
                    write_text(p, &text)?;
                    Ok(format!("emit-config: wrote {}", p.display()))
                }
                None => Ok(text.trim_end().to_string()),
            }
        }
        Command::Steady { drive } => {
            apply_drive(&mut cfg, drive)?;
            let ss = driven_state(&cfg, true)?;
            let l = build_liouvillian(&cfg.system(), &cfg.drive())?;
            let gap = spectral_report(&l)?.gap;
            let vis = visibility(&HusimiGrid::sample(&ss, cfg.theta_points, cfg.phi_points, true)?)?;
            let path = dir.join("steady_state.json");
            let extra = json!({
                "absRho42": ss.rho42().norm(),
                "maxSync": sync_measure_max(&ss),
                "visibility": vis,
                "spectralGap": gap,
            });
            write_text(&path, &pretty(&density_matrix_json(&ss, &cfg, extra)))?;
            Ok(format!(
                "steady: |rho42|={:.6e} visibility={vis:.6e} gap={gap:.6} rad/s -> {} {}",
                ss.rho42().norm(),
                path.display(),
                elapsed(start)
            ))
        }
        Command::Husimi { drive, duration, steady } => {
            if let Some(t) = duration {
                cfg.duration_s = *t;
            }
            apply_drive(&mut cfg, drive)?;
            let rho = driven_state(&cfg, *steady)?;
            let grid = HusimiGrid::sample(&rho, cfg.theta_points, cfg.phi_points, true)?;
            let vis = visibility(&grid)?;
            let grid_path = write_grid(&dir, "husimi", &grid, &cfg)?;
            let meta = density_matrix_json(
                &rho,
                &cfg,
                json!({
                    "evolution": if *steady { "steady-state" } else { "finite" },
                    "visibility": vis,
                    "maxSync": sync_measure_max(&rho),
                    "grid": grid_path,
                }),
            );
            write_text(&dir.join("husimi.json"), &pretty(&meta))?;
            Ok(format!("husimi: visibility={vis:.6e} -> {} {}", grid_path.display(), elapsed(start)))
        }
        Command::Series { drive, durations } => {
            if let Some(d) = durations {
                cfg.series_durations_s = d.clone();
            }
            apply_drive(&mut cfg, drive)?;
            let points = run_drive_series(&cfg.system(), &cfg.drive(), &cfg.series_durations_s, cfg.grid())?;
            let mut entries = Vec::new();
            for (k, p) in points.iter().enumerate() {
                let path = write_grid(&dir, &format!("series_{k:02}"), &p.grid, &cfg)?;
                entries.push(json!({
                    "durationS": p.duration,
                    "visibility": p.visibility,
                    "absRho42": p.abs_rho42,
                    "grid": path,
                }));
            }
            write_text(&dir.join("series.json"), &pretty(&json!({ "config": cfg, "series": entries })))?;
            let vis: Vec<String> = points.iter().map(|p| format!("{:.3e}", p.visibility)).collect();
            Ok(format!("series: visibility=[{}] {}", vis.join(", "), elapsed(start)))
        }
        Command::AmpSweep { min_hz, max_hz, points } => {
            let axis = SweepAxis::log(AMPLITUDE_AXIS, *min_hz, *max_hz, *points)?;
            let r = run_amplitude_sweep(&cfg.system(), &axis)?;
            let v = r.column();
            let (imax, _) = r.argmax();
            write_text(&dir.join("amp_sweep.csv"), &sweep_csv(&r, &cfg))?;
            let summary = json!({
                "config": cfg,
                "sweep": r,
                "argmaxHz": axis.values[imax],
                "peakVisibility": v[imax],
                "unimodal": is_unimodal(&v),
            });
            write_text(&dir.join("amp_sweep.json"), &pretty(&summary))?;
            Ok(format!(
                "amp-sweep: peak visibility={:.6e} at {:.4e} Hz {}",
                v[imax],
                axis.values[imax],
                elapsed(start)
            ))
        }
        Command::Arnold { min_hz, max_hz, amplitude_points, max_detuning_hz, detuning_points, steady, duration } => {
            if let Some(t) = duration {
                cfg.duration_s = *t;
            }
            cfg.validate()?;
            let a = SweepAxis::log(AMPLITUDE_AXIS, *min_hz, *max_hz, *amplitude_points)?;
            let d = SweepAxis::linear(DETUNING_AXIS, -max_detuning_hz, *max_detuning_hz, *detuning_points)?;
            let evolution = if *steady {
                Evolution::SteadyState
            } else {
                Evolution::Finite { duration: cfg.duration_s }
            };
            let r = run_arnold_tongue(&cfg.system(), &a, &d, evolution)?;
            let rows = analyze_tongue(&r)?;
            write_text(&dir.join("arnold.csv"), &sweep_csv(&r, &cfg))?;
            write_text(&dir.join("arnold.json"), &pretty(&json!({ "config": cfg, "sweep": r, "rows": rows })))?;
            let (i, j) = r.argmax();
            Ok(format!(
                "arnold: {}x{} grid, max S={:.6e} at ({:.4e} Hz, {:+.3} Hz) {}",
                a.values.len(),
                d.values.len(),
                r.values[i][j],
                a.values[i],
                d.values[j],
                elapsed(start)
            ))
        }
        Command::ImhdVerify { drive, variant } => {
            if let Some(v) = variant {
                cfg.imhd_variant = v.parse::<ImhdVariant>()?;
            }
            apply_drive(&mut cfg, drive)?;
            let ss = driven_state(&cfg, true)?;
            let direct = HusimiGrid::sample(&ss, cfg.theta_points, cfg.phi_points, true)?;
            let scan = imhd_scan(&ss, &direct.theta, &direct.phi, cfg.imhd_variant)?;
            let max_diff = scan
                .values
                .iter()
                .flatten()
                .zip(direct.values.iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let tol = match cfg.imhd_variant {
                ImhdVariant::ExactPopulations => 1e-9,
                ImhdVariant::QuarterApproximation => {
                    let m = ss.matrix();
                    crate::phase_space::husimi_prefactor()
                        * ((m[(3, 3)].re - 0.25).abs() + (m[(1, 1)].re - 0.25).abs())
                }
            };
            let path = write_grid(&dir, "imhd", &scan, &cfg)?;
            write_text(
                &dir.join("imhd.json"),
                &pretty(&json!({ "config": cfg, "maxAbsDiff": max_diff, "tolerance": tol, "grid": path })),
            )?;
            let line = format!(
                "imhd-verify: variant={} max|Q_IF - Q|={max_diff:.3e} tol={tol:.1e} {}",
                cfg.imhd_variant,
                elapsed(start)
            );
            if max_diff <= tol {
                Ok(line)
            } else {
                Err(CliError::Check(line))
            }
        }
        Command::Calibrate { input, amplitude, noise, seed } => {
            if let Some(a) = amplitude {
                cfg.amplitude_hz = *a;
            }
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            cfg.validate()?;
            let samples = match input {
                Some(p) => read_samples_csv(p)?,
                None => synthetic_nutation(cfg.amplitude_hz, &default_calibration_times(), *noise, cfg.seed)?,
            };
            let cal = calibrate_drive(&samples)?;
            write_text(
                &dir.join("calibration.json"),
                &pretty(&json!({ "config": cfg, "calibration": cal, "samples": samples })),
            )?;
            Ok(format!(
                "calibrate: omega={:.6e} Hz residual={:.3e} small_angle={} {}",
                cal.omega_hz,
                cal.residual,
                cal.small_angle,
                elapsed(start)
            ))
        }
    }
}

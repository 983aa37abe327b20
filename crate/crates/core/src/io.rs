//! Run configuration and file formats.
//!
//! Configuration is a flat JSON object with camelCase keys. Every key is optional, and
//! unknown keys are rejected. Output files embed the fully resolved configuration: CSV
//! files on a leading `# config: {...}` line, JSON files under a `config` key. CSV
//! numbers use 17 significant digits, which round-trips `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::experiments::{GridResolution, SweepResult, AMPLITUDE_AXIS, DEFAULT_SERIES_DURATIONS};
use crate::imhd::ImhdVariant;
use crate::phase_space::{HusimiGrid, DEFAULT_PHI_POINTS, DEFAULT_THETA_POINTS};
use crate::system::{
    default_purity_factors, BasisOrdering, DensityMatrix, DriveConfig, GyromagneticRatios, Operator,
    SpinSystemConfig, C64,
};

/// Failures while reading configuration or writing results.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("file not found: {0}")]
    Missing(PathBuf),
    #[error("I/O error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed configuration: {0}")]
    Schema(String),
    #[error(transparent)]
    Invalid(#[from] Error),
}

fn io_err(path: &Path, e: std::io::Error) -> IoError {
    if e.kind() == std::io::ErrorKind::NotFound {
        IoError::Missing(path.to_path_buf())
    } else {
        IoError::Io { path: path.to_path_buf(), message: e.to_string() }
    }
}

pub const MIN_GRID_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridFormat {
    Csv,
    Json,
}

/// Fully resolved settings for one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    pub j_coupling: f64,
    pub offset_p: f64,
    pub offset_f: f64,
    pub t1_p: f64,
    pub t1_f: f64,
    pub epsilon_p: f64,
    pub epsilon_f: f64,
    pub field_tesla: f64,
    pub temperature_kelvin: f64,
    pub gamma_p_hz_per_tesla: f64,
    pub gamma_f_hz_per_tesla: f64,
    pub amplitude_hz: f64,
    pub detuning_hz: f64,
    pub duration_s: f64,
    pub series_durations_s: Vec<f64>,
    pub theta_points: usize,
    pub phi_points: usize,
    pub imhd_variant: ImhdVariant,
    pub output_dir: PathBuf,
    pub grid_format: GridFormat,
    pub seed: u64,
}

/// On-disk form: every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawConfig {
    j_coupling: Option<f64>,
    offset_p: Option<f64>,
    offset_f: Option<f64>,
    t1_p: Option<f64>,
    t1_f: Option<f64>,
    epsilon_p: Option<f64>,
    epsilon_f: Option<f64>,
    field_tesla: Option<f64>,
    temperature_kelvin: Option<f64>,
    gamma_p_hz_per_tesla: Option<f64>,
    gamma_f_hz_per_tesla: Option<f64>,
    amplitude_hz: Option<f64>,
    detuning_hz: Option<f64>,
    duration_s: Option<f64>,
    series_durations_s: Option<Vec<f64>>,
    theta_points: Option<usize>,
    phi_points: Option<usize>,
    imhd_variant: Option<ImhdVariant>,
    output_dir: Option<PathBuf>,
    grid_format: Option<GridFormat>,
    seed: Option<u64>,
}

impl RawConfig {
    fn resolve(self) -> RunConfig {
        let j = self.j_coupling.unwrap_or(SpinSystemConfig::DEFAULT_J);
        let field = self.field_tesla.unwrap_or(SpinSystemConfig::DEFAULT_FIELD);
        let temp = self.temperature_kelvin.unwrap_or(SpinSystemConfig::DEFAULT_TEMPERATURE);
        let g = GyromagneticRatios::default();
        let ratios = GyromagneticRatios {
            p_hz_per_tesla: self.gamma_p_hz_per_tesla.unwrap_or(g.p_hz_per_tesla),
            f_hz_per_tesla: self.gamma_f_hz_per_tesla.unwrap_or(g.f_hz_per_tesla),
        };
        let (ep, ef) = default_purity_factors(field, temp, &ratios);
        let drive = DriveConfig::default();
        RunConfig {
            j_coupling: j,
            offset_p: self.offset_p.unwrap_or(-j / 2.0),
            offset_f: self.offset_f.unwrap_or(0.0),
            t1_p: self.t1_p.unwrap_or(SpinSystemConfig::DEFAULT_T1),
            t1_f: self.t1_f.unwrap_or(SpinSystemConfig::DEFAULT_T1),
            epsilon_p: self.epsilon_p.unwrap_or(ep),
            epsilon_f: self.epsilon_f.unwrap_or(ef),
            field_tesla: field,
            temperature_kelvin: temp,
            gamma_p_hz_per_tesla: ratios.p_hz_per_tesla,
            gamma_f_hz_per_tesla: ratios.f_hz_per_tesla,
            amplitude_hz: self.amplitude_hz.unwrap_or(drive.amplitude),
            detuning_hz: self.detuning_hz.unwrap_or(drive.detuning),
            duration_s: self.duration_s.unwrap_or(drive.duration),
            series_durations_s: self
                .series_durations_s
                .unwrap_or_else(|| DEFAULT_SERIES_DURATIONS.to_vec()),
            theta_points: self.theta_points.unwrap_or(DEFAULT_THETA_POINTS),
            phi_points: self.phi_points.unwrap_or(DEFAULT_PHI_POINTS),
            imhd_variant: self.imhd_variant.unwrap_or(ImhdVariant::ExactPopulations),
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            grid_format: self.grid_format.unwrap_or(GridFormat::Csv),
            seed: self.seed.unwrap_or(42),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RawConfig::default().resolve()
    }
}

impl RunConfig {
    pub fn system(&self) -> SpinSystemConfig {
        SpinSystemConfig {
            j_coupling: self.j_coupling,
            offset_p: self.offset_p,
            offset_f: self.offset_f,
            t1_p: self.t1_p,
            t1_f: self.t1_f,
            epsilon_p: self.epsilon_p,
            epsilon_f: self.epsilon_f,
        }
    }

    pub fn drive(&self) -> DriveConfig {
        DriveConfig::new(self.amplitude_hz, self.detuning_hz, self.duration_s)
    }

    pub fn grid(&self) -> GridResolution {
        GridResolution { theta_points: self.theta_points, phi_points: self.phi_points }
    }

    /// Physical and structural invariants.
    pub fn validate(&self) -> Result<(), Error> {
        self.system().validate()?;
        self.drive().validate()?;
        for (name, v) in [
            ("fieldTesla", self.field_tesla),
            ("temperatureKelvin", self.temperature_kelvin),
            ("gammaPHzPerTesla", self.gamma_p_hz_per_tesla),
            ("gammaFHzPerTesla", self.gamma_f_hz_per_tesla),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, n) in [("thetaPoints", self.theta_points), ("phiPoints", self.phi_points)] {
            if n < MIN_GRID_POINTS {
                return Err(Error::InvalidConfig(format!("{name} must be >= {MIN_GRID_POINTS}, got {n}")));
            }
        }
        let d = &self.series_durations_s;
        if d.is_empty() || d.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || d.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "seriesDurationsS must be non-empty, >= 0 and strictly ascending".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates configuration text, filling defaults.
pub fn parse_config_str(text: &str) -> Result<RunConfig, IoError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| IoError::Schema(e.to_string()))?;
    let cfg = raw.resolve();
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_config_str(&text)
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn config_header(cfg: &RunConfig) -> String {
    format!("# config: {}\n", cfg.to_json())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn grid_csv(grid: &HusimiGrid, cfg: &RunConfig) -> String {
    let mut s = config_header(cfg);
    s.push_str("theta,phi,Q\n");
    for (t, row) in grid.theta.iter().zip(&grid.values) {
        for (p, q) in grid.phi.iter().zip(row) {
            let _ = writeln!(s, "{},{},{}", fmt_num(*t), fmt_num(*p), fmt_num(*q));
        }
    }
    s
}

/// Writes a grid as `<stem>.csv` or `<stem>.grid.json` and returns the path written.
pub fn write_grid(dir: &Path, stem: &str, grid: &HusimiGrid, cfg: &RunConfig) -> Result<PathBuf, IoError> {
    match cfg.grid_format {
        GridFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            write_text(&path, &grid_csv(grid, cfg))?;
            Ok(path)
        }
        GridFormat::Json => {
            let path = dir.join(format!("{stem}.grid.json"));
            let v = json!({ "config": cfg, "grid": grid });
            write_text(&path, &pretty(&v))?;
            Ok(path)
        }
    }
}

/// Reads back a grid CSV written by [`grid_csv`].
pub fn read_grid_csv(text: &str) -> Result<HusimiGrid, IoError> {
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("theta")) {
        let f: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| IoError::Schema(format!("{line:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        if f.len() != 3 {
            return Err(IoError::Schema(format!("expected 3 columns in {line:?}")));
        }
        rows.push((f[0], f[1], f[2]));
    }
    let mut theta: Vec<f64> = rows.iter().map(|r| r.0).collect();
    theta.dedup();
    let nphi = rows.len() / theta.len().max(1);
    let phi = rows.iter().take(nphi).map(|r| r.1).collect();
    let values = rows.chunks(nphi.max(1)).map(|c| c.iter().map(|r| r.2).collect()).collect();
    Ok(HusimiGrid { theta, phi, values })
}

/// Sweep rows `omega_hz, detuning_hz, observable`. A swept-out parameter takes its
/// fixed value from the configuration.
pub fn sweep_csv(result: &SweepResult, cfg: &RunConfig) -> String {
    let mut s = config_header(cfg);
    s.push_str("omega_hz,detuning_hz,observable\n");
    let first = &result.axes[0];
    let second = result.axes.get(1);
    for (i, row) in result.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let mut omega = cfg.amplitude_hz;
            let mut detuning = cfg.detuning_hz;
            for (axis, k) in [(Some(first), i), (second, j)] {
                if let Some(a) = axis {
                    if a.name == AMPLITUDE_AXIS {
                        omega = a.values[k];
                    } else {
                        detuning = a.values[k];
                    }
                }
            }
            let _ = writeln!(s, "{},{},{}", fmt_num(omega), fmt_num(detuning), fmt_num(*v));
        }
    }
    s
}

fn matrix_parts(m: &Operator) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let part = |f: fn(&C64) -> f64| (0..4).map(|i| (0..4).map(|j| f(&m[(i, j)])).collect()).collect();
    (part(|z| z.re), part(|z| z.im))
}

/// `{"basis", "real", "imag", "config", ...extra}`.
pub fn density_matrix_json(rho: &DensityMatrix, cfg: &RunConfig, extra: Value) -> Value {
    let (re, im) = matrix_parts(rho.matrix());
    let mut v = json!({
        "basis": BasisOrdering::standard().describe(),
        "real": re,
        "imag": im,
        "config": cfg,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut v, extra) {
        map.extend(more);
    }
    v
}

pub fn read_density_matrix_json(text: &str) -> Result<DensityMatrix, IoError> {
    #[derive(Deserialize)]
    struct Parts {
        real: [[f64; 4]; 4],
        imag: [[f64; 4]; 4],
    }
    let p: Parts = serde_json::from_str(text).map_err(|e| IoError::Schema(e.to_string()))?;
    let m = Operator::from_fn(|i, j| C64::new(p.real[i][j], p.imag[i][j]));
    Ok(DensityMatrix::new(m)?)
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

/// Two-column `t,signal` samples; `#` comments and a non-numeric header are skipped.
pub fn read_samples_csv(path: &Path) -> Result<Vec<(f64, f64)>, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == 2 => out.push((v[0], v[1])),
            None if n == 0 || out.is_empty() => continue,
            _ => return Err(IoError::Schema(format!("line {}: expected `t,signal`", n + 1))),
        }
    }
    Ok(out)
}

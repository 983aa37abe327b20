//! Numerical experiments: limit cycle, drive series, amplitude sweep, Arnold tongue and
//! small-angle drive calibration.
//!
//! Sweeps evaluate grid cells in parallel and assemble them in axis order, so results are
//! bit-identical across runs and thread counts.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::{build_liouvillian, propagate, steady_state};
use crate::phase_space::{
    sync_measure_max, visibility, HusimiGrid, DEFAULT_PHI_POINTS, DEFAULT_THETA_POINTS,
};
use crate::system::{thermal_state, DensityMatrix, DriveConfig, SpinSystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Visibility,
    AbsRho42,
    MaxSync,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridResolution {
    pub theta_points: usize,
    pub phi_points: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        Self { theta_points: DEFAULT_THETA_POINTS, phi_points: DEFAULT_PHI_POINTS }
    }
}

impl Observable {
    pub fn evaluate(&self, rho: &DensityMatrix, grid: GridResolution) -> Result<f64> {
        match self {
            Self::Visibility => {
                visibility(&HusimiGrid::sample(rho, grid.theta_points, grid.phi_points, true)?)
            }
            Self::AbsRho42 => Ok(rho.rho42().norm()),
            Self::MaxSync => Ok(sync_measure_max(rho)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Values of one swept drive parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: String,
    pub spacing: Spacing,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn linear(name: &str, start: f64, end: f64, n: usize) -> Result<Self> {
        let values = match n {
            0 => vec![],
            1 => vec![start],
            _ => (0..n).map(|k| start + (end - start) * k as f64 / (n - 1) as f64).collect(),
        };
        let axis = Self { name: name.into(), spacing: Spacing::Linear, values };
        axis.validate()?;
        Ok(axis)
    }

    pub fn log(name: &str, start: f64, end: f64, n: usize) -> Result<Self> {
        if !(start > 0.0 && end > 0.0) {
            return Err(Error::InvalidSweep(format!("log axis {name} needs positive bounds")));
        }
        let (a, b) = (start.log10(), end.log10());
        let values = match n {
            0 => vec![],
            1 => vec![start],
            _ => (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect(),
        };
        let axis = Self { name: name.into(), spacing: Spacing::Log, values };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.values;
        if v.is_empty() {
            return Err(Error::InvalidSweep(format!("axis {} is empty", self.name)));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSweep(format!("axis {} has non-finite values", self.name)));
        }
        let up = v.windows(2).all(|w| w[1] > w[0]);
        let down = v.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::InvalidSweep(format!("axis {} is not strictly monotone", self.name)));
        }
        match self.spacing {
            Spacing::Log => {
                if v.iter().any(|x| *x <= 0.0) {
                    return Err(Error::InvalidSweep(format!("log axis {} has values <= 0", self.name)));
                }
                check_uniform(&v.iter().map(|x| x.ln()).collect::<Vec<_>>(), &self.name)
            }
            Spacing::Linear => check_uniform(v, &self.name),
        }
    }
}

fn check_uniform(v: &[f64], name: &str) -> Result<()> {
    if v.len() < 3 {
        return Ok(());
    }
    let step = v[1] - v[0];
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(step.abs());
    for w in v.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * scale {
            return Err(Error::InvalidSweep(format!("axis {name} spacing is not uniform")));
        }
    }
    Ok(())
}

/// How the state at each grid cell is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Evolution {
    SteadyState,
    /// `ρ(t) = e^{Lt} ρ^eq`.
    Finite { duration: f64 },
}

/// Axis names understood by [`run_sweep`].
pub const AMPLITUDE_AXIS: &str = "amplitude_hz";
pub const DETUNING_AXIS: &str = "detuning_hz";

/// A one- or two-parameter sweep over drive amplitude and/or detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axes: Vec<SweepAxis>,
    pub system: SpinSystemConfig,
    pub drive: DriveConfig,
    pub observable: Observable,
    pub evolution: Evolution,
    pub grid: GridResolution,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.drive.validate()?;
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidSweep(format!("expected 1 or 2 axes, got {}", self.axes.len())));
        }
        for a in &self.axes {
            a.validate()?;
            if a.name != AMPLITUDE_AXIS && a.name != DETUNING_AXIS {
                return Err(Error::InvalidSweep(format!("unknown sweep parameter {}", a.name)));
            }
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(Error::InvalidSweep("both axes sweep the same parameter".into()));
        }
        if let Evolution::Finite { duration } = self.evolution {
            if !(duration > 0.0 && duration.is_finite()) {
                return Err(Error::InvalidSweep(format!("duration must be > 0, got {duration}")));
            }
        }
        Ok(())
    }

    fn drive_at(&self, idx: &[usize]) -> DriveConfig {
        let mut d = self.drive;
        for (axis, &k) in self.axes.iter().zip(idx) {
            let v = axis.values[k];
            if axis.name == AMPLITUDE_AXIS {
                d.amplitude = v;
            } else {
                d.detuning = v;
            }
        }
        if let Evolution::Finite { duration } = self.evolution {
            d.duration = duration;
        }
        d
    }
}

/// Everything needed to reproduce a sweep, stored alongside its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub system: SpinSystemConfig,
    pub drive: DriveConfig,
    pub evolution: Evolution,
    pub grid: GridResolution,
    pub steady_state_degeneracy_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<SweepAxis>,
    pub observable: Observable,
    /// `values[i][j]` at `(axes[0][i], axes[1][j])`; one column for 1-D sweeps.
    pub values: Vec<Vec<f64>>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    /// Values of a 1-D sweep.
    pub fn column(&self) -> Vec<f64> {
        self.values.iter().map(|r| r[0]).collect()
    }

    /// `(row, column)` of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v > self.values[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }
}

fn state_for(system: &SpinSystemConfig, drive: &DriveConfig, evolution: Evolution) -> Result<DensityMatrix> {
    let l = build_liouvillian(system, drive)?;
    match evolution {
        Evolution::SteadyState => steady_state(&l),
        Evolution::Finite { duration } => propagate(&l, &thermal_state(system)?, duration),
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = spec.axes[0].values.len();
    let cols = spec.axes.get(1).map_or(1, |a| a.values.len());
    let cells: Vec<Result<f64>> = (0..rows * cols)
        .into_par_iter()
        .map(|k| {
            let idx = [k / cols, k % cols];
            let drive = spec.drive_at(&idx[..spec.axes.len()]);
            let rho = state_for(&spec.system, &drive, spec.evolution)?;
            let v = spec.observable.evaluate(&rho, spec.grid)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvariantViolated(format!("non-finite observable at cell {idx:?}")))
            }
        })
        .collect();
    let mut values = vec![Vec::with_capacity(cols); rows];
    for (k, c) in cells.into_iter().enumerate() {
        values[k / cols].push(c?);
    }
    Ok(SweepResult {
        axes: spec.axes.clone(),
        observable: spec.observable,
        values,
        metadata: SweepMetadata {
            system: spec.system,
            drive: spec.drive,
            evolution: spec.evolution,
            grid: spec.grid,
            steady_state_degeneracy_threshold: crate::liouville::DEGENERACY_THRESHOLD,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCycle {
    pub steady_state: DensityMatrix,
    pub grid: HusimiGrid,
    pub visibility: f64,
    pub max_sync: f64,
}

/// Visibility bound that an undriven steady state must satisfy.
pub const LIMIT_CYCLE_VISIBILITY: f64 = 1e-8;

/// Undriven steady state and its phase-uniform Husimi distribution.
pub fn run_limit_cycle(config: &SpinSystemConfig, grid: GridResolution) -> Result<LimitCycle> {
    let l = build_liouvillian(config, &DriveConfig::undriven())?;
    let ss = steady_state(&l)?;
    let husimi = HusimiGrid::sample(&ss, grid.theta_points, grid.phi_points, true)?;
    let vis = visibility(&husimi)?;
    if vis >= LIMIT_CYCLE_VISIBILITY {
        return Err(Error::InvariantViolated(format!(
            "undriven steady state is phase-localized (visibility {vis:e})"
        )));
    }
    Ok(LimitCycle { max_sync: sync_measure_max(&ss), steady_state: ss, grid: husimi, visibility: vis })
}

pub const DEFAULT_SERIES_DURATIONS: [f64; 5] = [0.05, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub duration: f64,
    pub state: DensityMatrix,
    pub grid: HusimiGrid,
    pub visibility: f64,
    pub abs_rho42: f64,
}

/// Husimi snapshots of `ρ(t) = e^{Lt} ρ^eq` for increasing drive durations.
/// `t = 0` is allowed and returns the thermal state.
pub fn run_drive_series(
    config: &SpinSystemConfig,
    drive: &DriveConfig,
    durations: &[f64],
    grid: GridResolution,
) -> Result<Vec<SeriesPoint>> {
    if durations.is_empty() {
        return Err(Error::InvalidSweep("no durations given".into()));
    }
    if durations.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidSweep("durations must be finite and >= 0".into()));
    }
    if durations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSweep("durations must be strictly ascending".into()));
    }
    let l = build_liouvillian(config, drive)?;
    let eq = thermal_state(config)?;
    durations
        .par_iter()
        .map(|&t| {
            let state = propagate(&l, &eq, t)?;
            let g = HusimiGrid::sample(&state, grid.theta_points, grid.phi_points, true)?;
            Ok(SeriesPoint {
                duration: t,
                visibility: visibility(&g)?,
                abs_rho42: state.rho42().norm(),
                state,
                grid: g,
            })
        })
        .collect()
}

pub fn default_amplitude_axis() -> SweepAxis {
    SweepAxis::log(AMPLITUDE_AXIS, 1e-3, 1e3, 61).expect("valid default axis")
}

pub fn default_arnold_axes() -> (SweepAxis, SweepAxis) {
    (
        SweepAxis::log(AMPLITUDE_AXIS, 1e-2, 1.0, 21).expect("valid default axis"),
        SweepAxis::linear(DETUNING_AXIS, -3.0, 3.0, 41).expect("valid default axis"),
    )
}

pub const DEFAULT_ARNOLD_DURATION: f64 = 100.0;

/// Steady-state visibility versus resonant drive amplitude.
pub fn run_amplitude_sweep(config: &SpinSystemConfig, amplitudes: &SweepAxis) -> Result<SweepResult> {
    if amplitudes.name != AMPLITUDE_AXIS {
        return Err(Error::InvalidSweep(format!("expected axis {AMPLITUDE_AXIS}, got {}", amplitudes.name)));
    }
    run_sweep(&SweepSpec {
        axes: vec![amplitudes.clone()],
        system: *config,
        drive: DriveConfig::new(0.0, 0.0, 0.0),
        observable: Observable::Visibility,
        evolution: Evolution::SteadyState,
        grid: GridResolution::default(),
    })
}

/// `max S = |ρ₄₂|/16π²` over an amplitude × detuning grid.
pub fn run_arnold_tongue(
    config: &SpinSystemConfig,
    amplitudes: &SweepAxis,
    detunings: &SweepAxis,
    evolution: Evolution,
) -> Result<SweepResult> {
    if amplitudes.name != AMPLITUDE_AXIS || detunings.name != DETUNING_AXIS {
        return Err(Error::InvalidSweep("Arnold tongue needs amplitude x detuning axes".into()));
    }
    let d = &detunings.values;
    let n = d.len();
    let symmetric = (0..n).all(|k| (d[k] + d[n - 1 - k]).abs() <= 1e-12 * d[0].abs().max(1.0));
    if !symmetric {
        return Err(Error::InvalidSweep("detuning axis must be symmetric about 0".into()));
    }
    run_sweep(&SweepSpec {
        axes: vec![amplitudes.clone(), detunings.clone()],
        system: *config,
        drive: DriveConfig::new(0.0, 0.0, 0.0),
        observable: Observable::MaxSync,
        evolution,
        grid: GridResolution::default(),
    })
}

/// True when the sequence rises (weakly) to its maximum and falls (weakly) after it.
pub fn is_unimodal(values: &[f64]) -> bool {
    let Some(peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
    else {
        return false;
    };
    values[..=peak].windows(2).all(|w| w[1] >= w[0]) && values[peak..].windows(2).all(|w| w[1] <= w[0])
}

/// Measure of `{x : f(x) ≥ max f / 2}` for a sampled profile, with linear interpolation
/// between samples. `None` when the profile is identically zero.
pub fn half_max_width(x: &[f64], y: &[f64]) -> Option<f64> {
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) || x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let half = max / 2.0;
    let mut width = 0.0;
    for k in 0..x.len() - 1 {
        let (x0, x1, y0, y1) = (x[k], x[k + 1], y[k], y[k + 1]);
        let (a, b) = (y0 >= half, y1 >= half);
        width += match (a, b) {
            (true, true) => x1 - x0,
            (false, false) => 0.0,
            _ => {
                let xc = x0 + (half - y0) / (y1 - y0) * (x1 - x0);
                if a {
                    xc - x0
                } else {
                    x1 - xc
                }
            }
        };
    }
    Some(width)
}

/// Per-row diagnostics of an Arnold tongue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TongueRow {
    pub amplitude: f64,
    pub on_resonance: f64,
    pub row_max: f64,
    pub argmax_detuning: f64,
    /// `max_Δ |f(Δ) − f(−Δ)| / max f`.
    pub asymmetry: f64,
    pub half_max_width: Option<f64>,
}

pub fn analyze_tongue(result: &SweepResult) -> Result<Vec<TongueRow>> {
    if result.axes.len() != 2 {
        return Err(Error::InvalidSweep("tongue analysis needs a 2-D sweep".into()));
    }
    let d = &result.axes[1].values;
    let zero = d
        .iter()
        .position(|x| x.abs() < 1e-12)
        .ok_or_else(|| Error::InvalidSweep("detuning axis does not contain 0".into()))?;
    Ok(result
        .values
        .iter()
        .zip(&result.axes[0].values)
        .map(|(row, &amp)| {
            let n = row.len();
            let (jmax, &row_max) = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty row");
            let asym = (0..n).map(|k| (row[k] - row[n - 1 - k]).abs()).fold(0.0, f64::max);
            TongueRow {
                amplitude: amp,
                on_resonance: row[zero],
                row_max,
                argmax_detuning: d[jmax],
                asymmetry: if row_max > 0.0 { asym / row_max } else { asym },
                half_max_width: half_max_width(d, row),
            }
        })
        .collect())
}

/// Result of a through-origin fit `s ≈ 2πΩ̂ t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub omega_hz: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// `max |2πΩ̂ t|` over the samples.
    pub max_angle: f64,
    /// Whether `max_angle` is inside the linear regime.
    pub small_angle: bool,
}

pub const SMALL_ANGLE_LIMIT: f64 = 0.3;

/// Recovers the drive amplitude from a nutation signal `s(t) ≈ sin(2πΩt) ≈ 2πΩt`.
pub fn calibrate_drive(samples: &[(f64, f64)]) -> Result<Calibration> {
    if samples.len() < 3 {
        return Err(Error::InvalidSweep(format!("need >= 3 samples, got {}", samples.len())));
    }
    if samples.iter().any(|(t, s)| !t.is_finite() || !s.is_finite()) {
        return Err(Error::InvalidSweep("non-finite sample".into()));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidSweep("sample times must be strictly ascending".into()));
    }
    let stt: f64 = samples.iter().map(|(t, _)| t * t).sum();
    if stt == 0.0 {
        return Err(Error::DegenerateInput("all sample times are zero".into()));
    }
    let sts: f64 = samples.iter().map(|(t, s)| t * s).sum();
    let slope = sts / stt;
    let residual = (samples.iter().map(|(t, s)| (s - slope * t).powi(2)).sum::<f64>()
        / samples.len() as f64)
        .sqrt();
    let max_angle = samples.iter().map(|(t, _)| (slope * t).abs()).fold(0.0, f64::max);
    Ok(Calibration {
        omega_hz: slope / (2.0 * PI),
        residual,
        max_angle,
        small_angle: max_angle < SMALL_ANGLE_LIMIT,
    })
}

/// `n` equally spaced times on `[start, end]`.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n).map(|k| start + (end - start) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` log-spaced values on `[start, end]`, both positive.
pub fn geomspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    linspace(start.ln(), end.ln(), n).into_iter().map(f64::exp).collect()
}

/// Twenty log-spaced sample times over one decade, 0.05–0.5 s.
///
/// Log spacing weights the early, most linear part of the nutation curve: at 0.1 Hz
/// the through-origin fit is biased low by 0.93% versus 1.03% for uniform spacing.
pub fn default_calibration_times() -> Vec<f64> {
    geomspace(0.05, 0.5, 20)
}

/// Synthetic nutation data `sin(2πΩt) + N(0, σ²)` with `σ = noise_fraction · max|s|`.
pub fn synthetic_nutation(omega_hz: f64, times: &[f64], noise_fraction: f64, seed: u64) -> Result<Vec<(f64, f64)>> {
    if !(noise_fraction >= 0.0 && noise_fraction.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise fraction must be >= 0, got {noise_fraction}")));
    }
    let clean: Vec<f64> = times.iter().map(|t| (2.0 * PI * omega_hz * t).sin()).collect();
    let peak = clean.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let sd = noise_fraction * peak;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(times
        .iter()
        .zip(clean)
        .map(|(&t, s)| (t, if sd > 0.0 { s + noise.sample(&mut rng) } else { s }))
        .collect())
}

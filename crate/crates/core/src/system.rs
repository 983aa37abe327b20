//! Physical configuration of the two-spin system, level conventions, elementary spin
//! operators and the high-temperature thermal state.
//!
//! Levels are labelled `|1⟩..|4⟩` and stored in matrices in the order
//! `(|4⟩, |3⟩, |2⟩, |1⟩)`. In terms of product spin states `(m_P, m_F)`:
//!
//! | level | row | `m_P` | `m_F` |
//! |-------|-----|-------|-------|
//! | `|4⟩` | 0   | −½    | −½    |
//! | `|3⟩` | 1   | −½    | +½    |
//! | `|2⟩` | 2   | +½    | −½    |
//! | `|1⟩` | 3   | +½    | +½    |
//!
//! With negative Larmor frequencies `ω = −γB₀`, `m = −½` is the high-energy orientation,
//! so `|4⟩` is the top of the ladder and `|1⟩` the bottom. `{|4⟩,|2⟩}` and `{|3⟩,|1⟩}` are
//! the two P-spin transitions; the first is the one made resonant by `ν_P = −J/2`.
//! The row order coincides with a `P ⊗ F` Kronecker product basis in which the
//! computational state `|0⟩` of each spin is its `m = −½` orientation.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// 4×4 complex operator on the two-spin Hilbert space.
pub type Operator = Matrix4<C64>;

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;
pub(crate) const TRACE_TOL: f64 = 1e-10;
pub(crate) const PSD_TOL: f64 = 1e-9;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Gyromagnetic ratios `γ/2π` in Hz/T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GyromagneticRatios {
    pub p_hz_per_tesla: f64,
    pub f_hz_per_tesla: f64,
}

impl Default for GyromagneticRatios {
    /// ³¹P and ¹⁹F reference values.
    fn default() -> Self {
        Self {
            p_hz_per_tesla: 17.235e6,
            f_hz_per_tesla: 40.078e6,
        }
    }
}

/// Static parameters of the coupled P–F spin pair. Frequencies in Hz, times in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSystemConfig {
    pub j_coupling: f64,
    pub offset_p: f64,
    pub offset_f: f64,
    pub t1_p: f64,
    pub t1_f: f64,
    pub epsilon_p: f64,
    pub epsilon_f: f64,
}

impl SpinSystemConfig {
    pub const DEFAULT_J: f64 = 868.0;
    pub const DEFAULT_T1: f64 = 10.0;
    pub const DEFAULT_FIELD: f64 = 11.4;
    pub const DEFAULT_TEMPERATURE: f64 = 298.0;

    /// Configuration with the given coupling and everything else defaulted:
    /// `ν_P = −J/2`, `ν_F = 0`, `T₁ = 10 s`, purity factors at 11.4 T / 298 K.
    pub fn with_coupling(j_coupling: f64) -> Self {
        let (epsilon_p, epsilon_f) = default_purity_factors(
            Self::DEFAULT_FIELD,
            Self::DEFAULT_TEMPERATURE,
            &GyromagneticRatios::default(),
        );
        Self {
            j_coupling,
            offset_p: -j_coupling / 2.0,
            offset_f: 0.0,
            t1_p: Self::DEFAULT_T1,
            t1_f: Self::DEFAULT_T1,
            epsilon_p,
            epsilon_f,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.j_coupling,
            self.offset_p,
            self.offset_f,
            self.t1_p,
            self.t1_f,
            self.epsilon_p,
            self.epsilon_f,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        if self.j_coupling <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "jCoupling must be > 0, got {}",
                self.j_coupling
            )));
        }
        if self.t1_p <= 0.0 || self.t1_f <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "relaxation times must be > 0, got t1P={} t1F={}",
                self.t1_p, self.t1_f
            )));
        }
        for (name, eps) in [("epsilonP", self.epsilon_p), ("epsilonF", self.epsilon_f)] {
            if !(0.0..0.1).contains(&eps) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 0.1), got {eps}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for SpinSystemConfig {
    fn default() -> Self {
        Self::with_coupling(Self::DEFAULT_J)
    }
}

/// Resonant drive on the `|2⟩↔|4⟩` transition. Amplitude and detuning in Hz, duration in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub amplitude: f64,
    pub detuning: f64,
    pub duration: f64,
}

impl DriveConfig {
    pub fn new(amplitude: f64, detuning: f64, duration: f64) -> Self {
        Self {
            amplitude,
            detuning,
            duration,
        }
    }

    pub fn undriven() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.detuning.is_finite() && self.duration.is_finite())
        {
            return Err(Error::InvalidConfig("non-finite drive parameter".into()));
        }
        if self.amplitude < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "drive amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        if self.duration < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "drive duration must be >= 0, got {}",
                self.duration
            )));
        }
        Ok(())
    }
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self::new(0.1, 0.0, 100.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    P,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Energy level label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    L1,
    L2,
    L3,
    L4,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::L4, Level::L3, Level::L2, Level::L1];

    /// Matrix row/column of this level.
    pub fn index(self) -> usize {
        match self {
            Level::L4 => 0,
            Level::L3 => 1,
            Level::L2 => 2,
            Level::L1 => 3,
        }
    }

    pub fn from_index(i: usize) -> Level {
        Level::ALL[i]
    }

    pub fn number(self) -> u8 {
        4 - self.index() as u8
    }
}

/// Assignment of level labels to product states `(m_P, m_F)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisOrdering;

impl BasisOrdering {
    pub fn standard() -> Self {
        BasisOrdering
    }

    /// `(m_P, m_F)` of a level.
    pub fn product_state(&self, level: Level) -> (f64, f64) {
        match level {
            Level::L4 => (-0.5, -0.5),
            Level::L3 => (-0.5, 0.5),
            Level::L2 => (0.5, -0.5),
            Level::L1 => (0.5, 0.5),
        }
    }

    /// Level with the given magnetic quantum numbers.
    pub fn level_of(&self, m_p: f64, m_f: f64) -> Level {
        *Level::ALL
            .iter()
            .find(|&&l| self.product_state(l) == (m_p, m_f))
            .expect("m values must be ±1/2")
    }

    /// Compact description stored alongside serialized density matrices.
    pub fn describe(&self) -> String {
        Level::ALL
            .iter()
            .map(|&l| {
                let (p, f) = self.product_state(l);
                format!(
                    "|{}>=(mP={:+},mF={:+})",
                    l.number(),
                    p,
                    f
                )
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Single-spin operator in the `(m = −½, m = +½)` basis.
fn single_spin(axis: Axis) -> Matrix2<C64> {
    let z = C64::new(0.0, 0.0);
    let h = C64::new(0.5, 0.0);
    let ih = C64::new(0.0, 0.5);
    match axis {
        Axis::X => Matrix2::new(z, h, h, z),
        Axis::Y => Matrix2::new(z, ih, -ih, z),
        Axis::Z => Matrix2::new(-h, z, z, h),
    }
}

/// Physical spin-½ operator `I_axis` of one species embedded in the two-spin space.
pub fn spin_operator(species: Species, axis: Axis) -> Operator {
    let op = single_spin(axis);
    let id = Matrix2::<C64>::identity();
    let m = match species {
        Species::P => op.kronecker(&id),
        Species::F => id.kronecker(&op),
    };
    Operator::from_iterator(m.iter().copied())
}

/// `ε = ħγB₀/(4k_BT)` for both species.
pub fn default_purity_factors(
    field_tesla: f64,
    temperature_kelvin: f64,
    ratios: &GyromagneticRatios,
) -> (f64, f64) {
    let eps = |gamma_hz: f64| {
        let gamma = 2.0 * std::f64::consts::PI * gamma_hz;
        HBAR * gamma * field_tesla / (4.0 * BOLTZMANN * temperature_kelvin)
    };
    (eps(ratios.p_hz_per_tesla), eps(ratios.f_hz_per_tesla))
}

/// Lab-frame Larmor frequencies `ω = −γB₀` in rad/s, `(ω_P, ω_F)`.
pub fn larmor_frequencies(field_tesla: f64, ratios: &GyromagneticRatios) -> (f64, f64) {
    let w = |g: f64| -2.0 * std::f64::consts::PI * g * field_tesla;
    (w(ratios.p_hz_per_tesla), w(ratios.f_hz_per_tesla))
}

/// A 4×4 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Validates all density-matrix invariants.
    pub fn new(m: Operator) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.check()?;
        Ok(rho)
    }

    /// Wraps without validation. Used for intermediate results that are checked later.
    pub fn from_matrix_unchecked(m: Operator) -> Self {
        DensityMatrix(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Operator::identity() * C64::new(0.25, 0.0))
    }

    /// Pure state `|ψ⟩⟨ψ|` of a normalised vector.
    pub fn pure(psi: &nalgebra::Vector4<C64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / C64::new(n, 0.0);
        Ok(DensityMatrix(v * v.adjoint()))
    }

    pub fn diagonal(pops: [f64; 4]) -> Result<Self> {
        let mut m = Operator::zeros();
        for (i, p) in pops.iter().enumerate() {
            m[(i, i)] = C64::new(*p, 0.0);
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Operator {
        &self.0
    }

    pub fn into_matrix(self) -> Operator {
        self.0
    }

    /// `ρ_ij = ⟨i|ρ|j⟩`.
    pub fn element(&self, i: Level, j: Level) -> C64 {
        self.0[(i.index(), j.index())]
    }

    /// The drive-induced coherence `ρ₄₂`.
    pub fn rho42(&self) -> C64 {
        self.element(Level::L4, Level::L2)
    }

    pub fn population(&self, level: Level) -> f64 {
        self.element(level, level).re
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(self.0 - self.0.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    m = m.max(self.0[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn check(&self) -> Result<()> {
        if self.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }
}

pub(crate) fn max_abs<R: nalgebra::Dim, Cc: nalgebra::Dim, S>(m: &nalgebra::Matrix<C64, R, Cc, S>) -> f64
where
    S: nalgebra::RawStorage<C64, R, Cc>,
{
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
/// Copy of `m` with its diagonal zeroed.
pub(crate) fn off_diagonal(m: &Operator) -> Operator {
    let mut out = *m;
    out.fill_diagonal(C64::new(0.0, 0.0));
    out
}

/// `ρ^eq = 𝟙/4 + ε_P I_z^P + ε_F I_z^F`.
///
/// Positive purity factors put more population in `m = +½`, the low-energy orientation.
pub fn thermal_state(config: &SpinSystemConfig) -> Result<DensityMatrix> {
    config.validate()?;
    let basis = BasisOrdering::standard();
    let mut pops = [0.0; 4];
    for level in Level::ALL {
        let (mp, mf) = basis.product_state(level);
        let p = 0.25 + config.epsilon_p * mp + config.epsilon_f * mf;
        if p < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "purity factors give negative population {p} for level |{}>",
                level.number()
            )));
        }
        pops[level.index()] = p;
    }
    DensityMatrix::diagonal(pops)
}

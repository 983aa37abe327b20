//! Coherent states, Husimi Q distributions and the synchronization measure.
//!
//! Public angles use the half-angle convention: component amplitudes are
//! `cos(θ/2)`, `sin(θ/2)` with `θ ∈ [0, π]`. Integrals over the Haar measure are taken in
//! `α = θ/2 ∈ [0, π/2]` with weight `cos α₁ sin⁵α₁ · cos α₂ sin³α₂ · cos α₃ sin α₃`
//! and `φ ∈ [0, 2π)³`, which gives `∫|n⟩⟨n| dμ = (π³/24) 𝟙`.
//!
//! Component `k` of the SU(4) coherent state pairs with the `k`-th basis row, i.e.
//! component 1 with `|4⟩` and component 4 with `|1⟩`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DVector, Vector2, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{DensityMatrix, Operator, C64};

/// `24/π³`, normalisation of the SU(4) Husimi function.
pub fn husimi_prefactor() -> f64 {
    24.0 / PI.powi(3)
}

/// `1/(16π²)`, coefficient of the closed-form synchronization measure.
pub fn sync_coefficient() -> f64 {
    1.0 / (16.0 * PI * PI)
}

pub fn coherent_state_su2(theta: f64, phi: f64) -> Vector2<C64> {
    Vector2::new(
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    )
}

/// Recursive SU(n) coherent state
/// `|n̂ₙ⟩ = C_θ e₁ + e^{iψ} S_θ (0, |n̂ₙ₋₁⟩)`.
///
/// `phis` are absolute phases: component `k+1` carries `e^{iφₖ}`. The recursion is fed
/// the successive differences `ψₖ = φₖ − φₖ₋₁`.
pub fn coherent_state_sun(n: usize, thetas: &[f64], phis: &[f64]) -> Result<DVector<C64>> {
    if n < 2 {
        return Err(Error::WrongAngleCount { expected: 1, got: 0 });
    }
    for len in [thetas.len(), phis.len()] {
        if len != n - 1 {
            return Err(Error::WrongAngleCount { expected: n - 1, got: len });
        }
    }
    let relative: Vec<f64> = (0..n - 1)
        .map(|k| if k == 0 { phis[0] } else { phis[k] - phis[k - 1] })
        .collect();
    Ok(recurse(thetas, &relative))
}

fn recurse(thetas: &[f64], psis: &[f64]) -> DVector<C64> {
    if thetas.is_empty() {
        return DVector::from_element(1, C64::new(1.0, 0.0));
    }
    let inner = recurse(&thetas[1..], &psis[1..]);
    let (s, c) = (thetas[0] / 2.0).sin_cos();
    let lift = C64::from_polar(s, psis[0]);
    let mut out = DVector::zeros(inner.len() + 1);
    out[0] = C64::new(c, 0.0);
    for (k, z) in inner.iter().enumerate() {
        out[k + 1] = lift * z;
    }
    out
}

/// SU(4) coherent state parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentStateSU4 {
    pub theta: [f64; 3],
    pub phi: [f64; 3],
}

impl CoherentStateSU4 {
    /// Validates `θᵢ ∈ [0, π]` and wraps phases into `[0, 2π)`.
    pub fn new(theta: [f64; 3], phi: [f64; 3]) -> Result<Self> {
        if theta.iter().any(|t| !(0.0..=PI).contains(t)) {
            return Err(Error::InvalidState(format!("polar angles {theta:?} outside [0, π]")));
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidState("non-finite phase".into()));
        }
        Ok(Self { theta, phi: phi.map(wrap_phase) })
    }

    /// `(C₁, e^{iφ₁}S₁C₂, e^{iφ₂}S₁S₂C₃, e^{iφ₃}S₁S₂S₃)`.
    pub fn vector(&self) -> Vector4<C64> {
        let [t1, t2, t3] = self.theta;
        let (s1, c1) = (t1 / 2.0).sin_cos();
        let (s2, c2) = (t2 / 2.0).sin_cos();
        let (s3, c3) = (t3 / 2.0).sin_cos();
        Vector4::new(
            C64::new(c1, 0.0),
            C64::from_polar(s1 * c2, self.phi[0]),
            C64::from_polar(s1 * s2 * c3, self.phi[1]),
            C64::from_polar(s1 * s2 * s3, self.phi[2]),
        )
    }
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2π
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Free evolution under `H₀ = Σᵢ ωᵢ |i⟩⟨i|`, with `ω` listed in coherent-state
/// component order. Phases shift as `φᵢ → φᵢ − (ωᵢ₊₁ − ω₁) t`.
pub fn free_phase_evolution(s: &CoherentStateSU4, omega: [f64; 4], t: f64) -> CoherentStateSU4 {
    let mut phi = s.phi;
    for (k, p) in phi.iter_mut().enumerate() {
        *p = wrap_phase(*p - (omega[k + 1] - omega[0]) * t);
    }
    CoherentStateSU4 { theta: s.theta, phi }
}

/// `Q = (24/π³)⟨n̂₄|ρ|n̂₄⟩`.
pub fn husimi_full(rho: &DensityMatrix, s: &CoherentStateSU4) -> f64 {
    let n = s.vector();
    husimi_prefactor() * (n.adjoint() * rho.matrix() * n)[(0, 0)].re
}

/// Reduced Husimi function on the `|4⟩,|2⟩` manifold:
/// `ρ₄₄C²_θ + Re(ρ₄₂e^{iφ}) sin θ + ρ₂₂S²_θ`, optionally times `24/π³`.
pub fn husimi_reduced(rho: &DensityMatrix, theta: f64, phi: f64, include_prefactor: bool) -> f64 {
    let m = rho.matrix();
    let (s, c) = (theta / 2.0).sin_cos();
    let bracket = m[(0, 0)].re * c * c
        + (m[(0, 2)] * C64::from_polar(1.0, phi)).re * theta.sin()
        + m[(2, 2)].re * s * s;
    if include_prefactor {
        husimi_prefactor() * bracket
    } else {
        bracket
    }
}

/// Closed-form synchronization measure
/// `(1/16π²) Re[ρ₄₃e^{iφ₁} + ρ₄₂e^{iφ₂} + ρ₄₁e^{iφ₃} + ρ₃₂e^{i(φ₂−φ₁)} + ρ₃₁e^{i(φ₃−φ₁)} + ρ₂₁e^{i(φ₃−φ₂)}]`.
pub fn sync_measure_full(rho: &DensityMatrix, phi1: f64, phi2: f64, phi3: f64) -> f64 {
    let m = rho.matrix();
    let e = |x: f64| C64::from_polar(1.0, x);
    let sum = m[(0, 1)] * e(phi1)
        + m[(0, 2)] * e(phi2)
        + m[(0, 3)] * e(phi3)
        + m[(1, 2)] * e(phi2 - phi1)
        + m[(1, 3)] * e(phi3 - phi1)
        + m[(2, 3)] * e(phi3 - phi2);
    sync_coefficient() * sum.re
}

/// `Re(ρ₄₂e^{iφ})/16π²`.
pub fn sync_measure_reduced(rho: &DensityMatrix, phi: f64) -> f64 {
    sync_coefficient() * (rho.rho42() * C64::from_polar(1.0, phi)).re
}

/// `|ρ₄₂|/16π²`.
pub fn sync_measure_max(rho: &DensityMatrix) -> f64 {
    sync_coefficient() * rho.rho42().norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureConvention {
    /// Full-angle amplitudes `cos αᵢ, sin αᵢ` with `αᵢ = θᵢ/2 ∈ [0, π/2]`.
    HalfAngle,
}

/// Product quadrature over the SU(4) Haar measure: Gauss–Legendre in each `α`,
/// trapezoid in each `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationScheme {
    pub alpha: Vec<(f64, f64)>,
    pub phi: Vec<(f64, f64)>,
    pub convention: MeasureConvention,
}

impl Default for IntegrationScheme {
    fn default() -> Self {
        Self::new(32, 64).expect("default orders are positive")
    }
}

/// Haar weight exponents `(cos, sin)` for `α₁, α₂, α₃`.
const HAAR_EXPONENTS: [(i32, i32); 3] = [(1, 5), (1, 3), (1, 1)];

impl IntegrationScheme {
    pub fn new(alpha_order: usize, phi_order: usize) -> Result<Self> {
        let order = NonZeroUsize::new(alpha_order)
            .ok_or_else(|| Error::InvalidConfig("quadrature order must be > 0".into()))?;
        if phi_order == 0 {
            return Err(Error::InvalidConfig("phase grid must be non-empty".into()));
        }
        let half = PI / 4.0;
        let alpha = GaussLegendre::new(order)
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (half * (x + 1.0), half * w))
            .collect();
        let h = 2.0 * PI / phi_order as f64;
        let phi = (0..phi_order).map(|k| (k as f64 * h, h)).collect();
        Ok(Self { alpha, phi, convention: MeasureConvention::HalfAngle })
    }

    /// `∫₀^{π/2} f(α) dα`.
    pub fn integrate_alpha(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.alpha.iter().map(|&(a, w)| w * f(a)).sum()
    }

    /// `∫₀^{2π} f(φ) dφ`.
    pub fn integrate_phi(&self, f: impl Fn(f64) -> C64) -> C64 {
        self.phi.iter().map(|&(p, w)| f(p) * w).sum()
    }

    /// `∫ n̄ᵢ nⱼ dμ` for components `i, j`.
    ///
    /// Each component is a product of one factor per variable, so the six-dimensional
    /// integral factorizes into one-dimensional quadratures.
    fn moment(&self, i: usize, j: usize) -> C64 {
        let mut radial = 1.0;
        for (k, &(pc, ps)) in HAAR_EXPONENTS.iter().enumerate() {
            let (ci, si) = amplitude_powers(i, k);
            let (cj, sj) = amplitude_powers(j, k);
            radial *= self.integrate_alpha(|a| {
                a.cos().powi(pc + ci + cj) * a.sin().powi(ps + si + sj)
            });
        }
        let mut angular = C64::new(1.0, 0.0);
        for k in 0..3 {
            let q = phase_index(j, k) - phase_index(i, k);
            angular *= self.integrate_phi(|p| C64::from_polar(1.0, q as f64 * p));
        }
        angular * radial
    }

    /// `M_ij = ∫ nᵢ n̄ⱼ dμ`.
    pub fn projector_integral(&self) -> Operator {
        Operator::from_fn(|i, j| self.moment(j, i))
    }

    /// `∫ Q dμ` for a state.
    pub fn integrate_husimi(&self, rho: &DensityMatrix) -> f64 {
        // ⟨n|ρ|n⟩ = Σ ρᵢⱼ n̄ᵢ nⱼ
        let m = self.projector_integral();
        husimi_prefactor() * (rho.matrix() * m).trace().re
    }
}

/// Powers of `(cos αₖ, sin αₖ)` in the amplitude of component `i`.
fn amplitude_powers(i: usize, k: usize) -> (i32, i32) {
    match i.cmp(&k) {
        std::cmp::Ordering::Less => (0, 0),
        std::cmp::Ordering::Equal => (1, 0),
        std::cmp::Ordering::Greater => (0, 1),
    }
}

/// Winding of component `i` in phase variable `φₖ₊₁`.
fn phase_index(i: usize, k: usize) -> i32 {
    i32::from(i == k + 1)
}

/// `∫|n̂₄⟩⟨n̂₄| dμ` under a quadrature scheme.
pub fn completeness_check(scheme: &IntegrationScheme) -> Operator {
    scheme.projector_integral()
}

/// Reduced Husimi function sampled on a `(θ, φ)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// `values[i][j] = Q(theta[i], phi[j])`.
    pub values: Vec<Vec<f64>>,
}

pub const DEFAULT_THETA_POINTS: usize = 64;
pub const DEFAULT_PHI_POINTS: usize = 128;

impl HusimiGrid {
    /// θ over `[0, π]` inclusive, φ over `[0, 2π)`.
    pub fn sample(
        rho: &DensityMatrix,
        theta_points: usize,
        phi_points: usize,
        include_prefactor: bool,
    ) -> Result<Self> {
        if theta_points < 2 || phi_points < 1 {
            return Err(Error::InvalidConfig(format!(
                "grid needs >= 2 theta and >= 1 phi points, got {theta_points}x{phi_points}"
            )));
        }
        let theta: Vec<f64> = (0..theta_points)
            .map(|i| PI * i as f64 / (theta_points - 1) as f64)
            .collect();
        let phi: Vec<f64> = (0..phi_points)
            .map(|j| 2.0 * PI * j as f64 / phi_points as f64)
            .collect();
        let values = theta
            .par_iter()
            .map(|&t| {
                phi.iter()
                    .map(|&p| husimi_reduced(rho, t, p, include_prefactor))
                    .collect()
            })
            .collect();
        Ok(Self { theta, phi, values })
    }

    /// `Q_φ = Σ_θ Q(θ, φ)`.
    pub fn phi_profile(&self) -> Vec<f64> {
        (0..self.phi.len())
            .map(|j| self.values.iter().map(|row| row[j]).sum())
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `(max Q_φ − min Q_φ)/(max Q_φ + min Q_φ)`.
pub fn visibility(grid: &HusimiGrid) -> Result<f64> {
    let profile = grid.phi_profile();
    if profile.is_empty() || grid.values.is_empty() {
        return Err(Error::DegenerateInput("empty Husimi grid".into()));
    }
    let max = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = profile.iter().copied().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return Err(Error::DegenerateInput(format!("negative column sum {min:e}")));
    }
    if max + min == 0.0 {
        return Err(Error::DegenerateInput("all-zero Husimi grid".into()));
    }
    Ok((max - min) / (max + min))
}

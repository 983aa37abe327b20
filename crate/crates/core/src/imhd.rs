//! Interferometric measurement of the reduced Husimi distribution.
//!
//! A pseudo-Hadamard on F and `U†_{θ,φ}` on P are followed by a controlled-phase gate.
//! The transverse F magnetization then encodes `Q(θ, φ)`. Gates are written in the
//! two-qubit computational basis with `|0⟩ ≡ m = −½`, `S = σ/2`.
//!
//! The measurement runs after the drive epoch and is treated as instantaneous and
//! unitary: no relaxation acts during the gates.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{husimi_prefactor, HusimiGrid};
use crate::system::{max_abs, DensityMatrix, Operator, SpinSystemConfig, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateLabel {
    PseudoHadamardF,
    UThetaPhiDaggerP,
    UThetaPhiP,
    ControlledPhase,
    JEvolution,
}

/// A labelled 4×4 unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    matrix: Operator,
    label: GateLabel,
}

const UNITARY_TOL: f64 = 1e-12;

impl GateMatrix {
    pub fn new(matrix: Operator, label: GateLabel) -> Result<Self> {
        let dev = max_abs(&(matrix.adjoint() * matrix - Operator::identity()));
        if dev > UNITARY_TOL {
            return Err(Error::InvalidConfig(format!(
                "{label:?} is not unitary (deviation {dev:e})"
            )));
        }
        Ok(Self { matrix, label })
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn label(&self) -> GateLabel {
        self.label
    }

    pub fn dagger(&self, label: GateLabel) -> Self {
        Self { matrix: self.matrix.adjoint(), label }
    }

    /// `U ρ U†`.
    pub fn apply(&self, rho: &Operator) -> Operator {
        self.matrix * rho * self.matrix.adjoint()
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `exp(−iθ S_y)` with `S_y = σ_y/2`.
fn rot_y(theta: f64) -> Matrix2<C64> {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix2::new(c(co), c(-s), c(s), c(co))
}

/// `exp(−iφ S_z)` with `S_z = σ_z/2`.
fn rot_z(phi: f64) -> Matrix2<C64> {
    Matrix2::new(
        C64::from_polar(1.0, -phi / 2.0),
        c(0.0),
        c(0.0),
        C64::from_polar(1.0, phi / 2.0),
    )
}

fn on_p(m: Matrix2<C64>) -> Operator {
    let k = m.kronecker(&Matrix2::identity());
    Operator::from_fn(|i, j| k[(i, j)])
}

fn on_f(m: Matrix2<C64>) -> Operator {
    let k = Matrix2::<C64>::identity().kronecker(&m);
    Operator::from_fn(|i, j| k[(i, j)])
}

/// `U_{θ,φ} = e^{−iφS_z}e^{−iθS_y} ⊗ 𝟙`, rotating P from `|0⟩` to the coherent state
/// `(cos θ/2, e^{iφ} sin θ/2)` up to a global phase.
pub fn build_u_theta_phi(theta: f64, phi: f64) -> GateMatrix {
    GateMatrix { matrix: on_p(rot_z(phi) * rot_y(theta)), label: GateLabel::UThetaPhiP }
}

/// `e^{−i(π/2)S_y}` on F.
pub fn build_pseudo_hadamard() -> GateMatrix {
    GateMatrix { matrix: on_f(rot_y(PI / 2.0)), label: GateLabel::PseudoHadamardF }
}

/// `𝟙_P ⊗ |0⟩⟨0|_F + σ_z^P ⊗ |1⟩⟨1|_F = diag(1, 1, 1, −1)`.
pub fn build_controlled_phase() -> GateMatrix {
    let mut m = Operator::identity();
    m[(3, 3)] = c(-1.0);
    GateMatrix { matrix: m, label: GateLabel::ControlledPhase }
}

/// Free J evolution for `1/(2J)`: `exp(−i 2πJ I_z^P I_z^F · 1/(2J)) = exp(−iπ I_z^P I_z^F)`.
pub fn build_j_evolution(config: &SpinSystemConfig) -> Result<GateMatrix> {
    config.validate()?;
    let tau = j_evolution_duration(config);
    let mut m = Operator::zeros();
    // I_z^P I_z^F = m_P m_F is +¼ on aligned and −¼ on anti-aligned pairs
    for (k, mm) in [0.25, -0.25, -0.25, 0.25].iter().enumerate() {
        m[(k, k)] = C64::from_polar(1.0, -2.0 * PI * config.j_coupling * mm * tau);
    }
    GateMatrix::new(m, GateLabel::JEvolution)
}

pub fn j_evolution_duration(config: &SpinSystemConfig) -> f64 {
    1.0 / (2.0 * config.j_coupling)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImhdVariant {
    /// Subtracts the true `ρ₁₁`, `ρ₃₃` populations.
    ExactPopulations,
    /// Assumes `ρ₁₁ = ρ₃₃ = ¼`.
    QuarterApproximation,
}

impl FromStr for ImhdVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-populations" | "exact" => Ok(Self::ExactPopulations),
            "quarter-approximation" | "quarter" => Ok(Self::QuarterApproximation),
            other => Err(Error::InvalidConfig(format!("unknown IMHD variant {other:?}"))),
        }
    }
}

impl fmt::Display for ImhdVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ExactPopulations => "exact-populations",
            Self::QuarterApproximation => "quarter-approximation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImhdReading {
    pub theta: f64,
    pub phi: f64,
    /// `⟨σ_x^F⟩/2` after the circuit.
    pub signal: f64,
    /// Closed-form signal, exact only for states whose sole coherence is `ρ₄₂`.
    pub closed_form_signal: f64,
    pub q: f64,
    pub variant: ImhdVariant,
}

impl ImhdReading {
    pub fn discrepancy(&self) -> f64 {
        (self.signal - self.closed_form_signal).abs()
    }
}

/// The full circuit `CZ · (U†_{θ,φ} ⊗ R_F)`.
pub fn circuit(theta: f64, phi: f64) -> GateMatrix {
    let u_dag = build_u_theta_phi(theta, phi).dagger(GateLabel::UThetaPhiDaggerP);
    let m = build_controlled_phase().matrix * u_dag.matrix * build_pseudo_hadamard().matrix;
    GateMatrix { matrix: m, label: GateLabel::ControlledPhase }
}

/// `Re Tr(ρ σ_x^F)/2`.
pub fn transverse_f_signal(rho: &Operator) -> f64 {
    let sx = Matrix2::new(c(0.0), c(0.5), c(0.5), c(0.0));
    (rho * on_f(sx)).trace().re
}

/// `½{cos θ (ρ₁₁ − ρ₂₂ − ρ₃₃ + ρ₄₄) + 2 sin θ Re(ρ₄₂e^{iφ})}`.
pub fn closed_form_signal(rho: &DensityMatrix, theta: f64, phi: f64) -> f64 {
    let m = rho.matrix();
    let pops = m[(3, 3)].re - m[(2, 2)].re - m[(1, 1)].re + m[(0, 0)].re;
    0.5 * (theta.cos() * pops + 2.0 * theta.sin() * (m[(0, 2)] * C64::from_polar(1.0, phi)).re)
}

/// Q from a signal reading.
pub fn reconstruct_q(rho: &DensityMatrix, theta: f64, signal: f64, variant: ImhdVariant) -> f64 {
    let m = rho.matrix();
    match variant {
        ImhdVariant::ExactPopulations => {
            let (s, co) = (theta / 2.0).sin_cos();
            let (rho11, rho33) = (m[(3, 3)].re, m[(1, 1)].re);
            husimi_prefactor() * ((1.0 + 2.0 * signal) / 2.0 - (rho11 * co * co + rho33 * s * s))
        }
        ImhdVariant::QuarterApproximation => husimi_prefactor() * (signal + 0.25),
    }
}

pub fn run_imhd(rho: &DensityMatrix, theta: f64, phi: f64, variant: ImhdVariant) -> Result<ImhdReading> {
    rho.check()?;
    Ok(reading(rho, theta, phi, variant))
}

fn reading(rho: &DensityMatrix, theta: f64, phi: f64, variant: ImhdVariant) -> ImhdReading {
    let out = circuit(theta, phi).apply(rho.matrix());
    let signal = transverse_f_signal(&out);
    ImhdReading {
        theta,
        phi,
        signal,
        closed_form_signal: closed_form_signal(rho, theta, phi),
        q: reconstruct_q(rho, theta, signal, variant),
        variant,
    }
}

pub fn imhd_scan(
    rho: &DensityMatrix,
    theta: &[f64],
    phi: &[f64],
    variant: ImhdVariant,
) -> Result<HusimiGrid> {
    rho.check()?;
    for (name, axis) in [("theta", theta), ("phi", phi)] {
        if axis.is_empty() || axis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(format!("{name} grid must be non-empty and increasing")));
        }
    }
    let values = theta
        .par_iter()
        .map(|&t| phi.iter().map(|&p| reading(rho, t, p, variant).q).collect())
        .collect();
    Ok(HusimiGrid { theta: theta.to_vec(), phi: phi.to_vec(), values })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::liouville::{build_liouvillian, steady_state};
    use crate::phase_space::{husimi_reduced, visibility, HusimiGrid};
    use crate::random::{random_density_matrix, random_rho42_state};
    use crate::system::{thermal_state, DriveConfig};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn driven_steady_state() -> DensityMatrix {
        let l = build_liouvillian(&SpinSystemConfig::default(), &DriveConfig::new(0.1, 0.0, 0.0)).unwrap();
        steady_state(&l).unwrap()
    }

    #[test]
    fn gates_are_unitary() {
        let mut r = rng(1);
        for _ in 0..10 {
            let (t, p) = (r.random::<f64>() * PI, r.random::<f64>() * 2.0 * PI);
            for g in [build_u_theta_phi(t, p), circuit(t, p)] {
                assert!(GateMatrix::new(*g.matrix(), g.label()).is_ok());
            }
        }
        for g in [build_pseudo_hadamard(), build_controlled_phase()] {
            assert!(GateMatrix::new(*g.matrix(), g.label()).is_ok());
        }
        let mut bad = Operator::identity();
        bad[(0, 0)] = c(2.0);
        assert!(GateMatrix::new(bad, GateLabel::ControlledPhase).is_err());
    }

    #[test]
    fn u_theta_phi_examples() {
        assert!(max_abs(&(build_u_theta_phi(0.0, 0.0).matrix() - Operator::identity())) < 1e-16);
        // full flip maps |0>_P to |1>_P in both F sectors
        let flip = build_u_theta_phi(PI, 0.0);
        for (from, to) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            assert!((flip.matrix()[(to, from)].norm() - 1.0).abs() < 1e-15);
        }
        let (t, p) = (0.7, 2.1);
        let u = build_u_theta_phi(t, p);
        let explicit = on_p(rot_y(-t) * rot_z(-p));
        assert!(max_abs(&(u.dagger(GateLabel::UThetaPhiDaggerP).matrix() - explicit)) < 1e-14);
        // column 0 restricted to P is the SU(2) coherent state up to a phase
        let col = u.matrix().column(0);
        let ratio = col[2] / col[0];
        assert!((ratio - C64::from_polar((t / 2.0).tan(), p)).norm() < 1e-14);
        assert!(col[1].norm() == 0.0 && col[3].norm() == 0.0);
    }

    #[test]
    fn controlled_phase_and_j_evolution() {
        let cz = build_controlled_phase();
        assert_eq!(cz.matrix() * cz.matrix(), Operator::identity());
        let diag: Vec<f64> = (0..4).map(|k| cz.matrix()[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, 1.0, -1.0]);

        let config = SpinSystemConfig::default();
        assert!((j_evolution_duration(&config) - 1.0 / 1736.0).abs() < 1e-18);
        let j = build_j_evolution(&config).unwrap();
        assert_eq!(off_diagonal_norm(j.matrix()), 0.0);
        // strip a global phase and single-spin z phases: fit d_ab = g·p_a·f_b
        let r: Vec<C64> = (0..4).map(|k| j.matrix()[(k, k)] / cz.matrix()[(k, k)]).collect();
        let g = r[0];
        let f1 = r[1] / g;
        let p1 = r[2] / g;
        let fit = [g, g * f1, g * p1, g * p1 * f1];
        let stripped = Operator::from_fn(|i, k| {
            if i == k {
                j.matrix()[(i, i)] / fit[i]
            } else {
                c(0.0)
            }
        });
        assert!(max_abs(&(stripped - cz.matrix())) < 1e-10);
        for k in 0..4 {
            assert!((j.matrix()[(k, k)].norm() - 1.0).abs() < 1e-15);
        }
    }

    fn off_diagonal_norm(m: &Operator) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for k in 0..4 {
                if i != k {
                    s += m[(i, k)].norm();
                }
            }
        }
        s
    }

    #[test]
    fn signal_matches_closed_form_on_sparse_states() {
        let mut r = rng(2);
        for _ in 0..20 {
            let rho = random_rho42_state(&mut r, 0.3);
            let (t, p) = (r.random::<f64>() * PI, r.random::<f64>() * 2.0 * PI);
            let rd = run_imhd(&rho, t, p, ImhdVariant::ExactPopulations).unwrap();
            assert!(rd.discrepancy() < 1e-10);
            assert!(rd.signal.abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn general_states_report_both_signals() {
        let mut r = rng(3);
        let mut largest: f64 = 0.0;
        for _ in 0..20 {
            let rho = random_density_matrix(&mut r);
            let rd = run_imhd(&rho, 1.1, 0.4, ImhdVariant::ExactPopulations).unwrap();
            assert!(rd.signal.abs() <= 0.5 + 1e-12);
            largest = largest.max(rd.discrepancy());
        }
        // extra coherences feed the readout, so the closed form no longer holds
        assert!(largest > 1e-3);
    }

    #[test]
    fn theta_zero_and_mixed_examples() {
        let mut r = rng(4);
        let rho = random_rho42_state(&mut r, 0.3);
        let m = rho.matrix();
        let rd = run_imhd(&rho, 0.0, 1.3, ImhdVariant::ExactPopulations).unwrap();
        let want = 0.5 * (m[(3, 3)].re - m[(2, 2)].re - m[(1, 1)].re + m[(0, 0)].re);
        assert!((rd.signal - want).abs() < 1e-15);

        let mixed = DensityMatrix::maximally_mixed();
        for (t, p) in [(0.0, 0.0), (1.0, 2.0), (PI, 5.0)] {
            let rd = run_imhd(&mixed, t, p, ImhdVariant::ExactPopulations).unwrap();
            assert!(rd.signal.abs() < 1e-16);
            assert!((rd.q - 6.0 / PI.powi(3)).abs() < 1e-15);
        }
    }

    #[test]
    fn reconstruction_identity() {
        let mut r = rng(5);
        for _ in 0..20 {
            let rho = random_rho42_state(&mut r, 0.3);
            let (t, p) = (r.random::<f64>() * PI, r.random::<f64>() * 2.0 * PI);
            let s = closed_form_signal(&rho, t, p);
            let q = reconstruct_q(&rho, t, s, ImhdVariant::ExactPopulations);
            assert!((q - husimi_reduced(&rho, t, p, true)).abs() < 1e-12);
            let quarter = reconstruct_q(&rho, t, s, ImhdVariant::QuarterApproximation);
            let bound = husimi_prefactor()
                * ((rho.matrix()[(3, 3)].re - 0.25).abs() + (rho.matrix()[(1, 1)].re - 0.25).abs());
            assert!((q - quarter).abs() <= bound + 1e-15);
        }
    }

    #[test]
    fn steady_state_scan_matches_direct_husimi() {
        let ss = driven_steady_state();
        let direct = HusimiGrid::sample(&ss, 64, 128, true).unwrap();
        let scan = imhd_scan(&ss, &direct.theta, &direct.phi, ImhdVariant::ExactPopulations).unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in scan.values.iter().flatten().zip(direct.values.iter().flatten()) {
            worst = worst.max((a - b).abs());
        }
        assert!(worst < 1e-9, "{worst:e}");
        assert!(scan.min_value() >= -1e-12);
        let quarter = imhd_scan(&ss, &direct.theta, &direct.phi, ImhdVariant::QuarterApproximation).unwrap();
        let eps = SpinSystemConfig::default().epsilon_f;
        for (a, b) in quarter.values.iter().flatten().zip(scan.values.iter().flatten()) {
            assert!((a - b).abs() < 10.0 * eps);
        }
        // scan equals pointwise readings
        let rd = run_imhd(&ss, scan.theta[10], scan.phi[17], ImhdVariant::ExactPopulations).unwrap();
        assert_eq!(rd.q, scan.values[10][17]);
    }

    #[test]
    fn thermal_scan_is_uniform() {
        let eq = thermal_state(&SpinSystemConfig::default()).unwrap();
        let g = HusimiGrid::sample(&eq, 16, 32, true).unwrap();
        let scan = imhd_scan(&eq, &g.theta, &g.phi, ImhdVariant::ExactPopulations).unwrap();
        assert!(visibility(&scan).unwrap() < 1e-10);
        assert!(imhd_scan(&eq, &[], &g.phi, ImhdVariant::ExactPopulations).is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("exact-populations".parse::<ImhdVariant>().unwrap(), ImhdVariant::ExactPopulations);
        assert_eq!("quarter".parse::<ImhdVariant>().unwrap(), ImhdVariant::QuarterApproximation);
        assert!("bogus".parse::<ImhdVariant>().is_err());
        assert_eq!(ImhdVariant::QuarterApproximation.to_string().parse::<ImhdVariant>().unwrap(), ImhdVariant::QuarterApproximation);
    }
}

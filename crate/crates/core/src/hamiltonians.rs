//! Hamiltonians in the lab frame, the doubly rotating frame and the drive frame.
//!
//! Configuration values are in Hz; every matrix built here is in rad/s.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::system::{
    max_abs, spin_operator, Axis, DriveConfig, Level, Operator, Species, SpinSystemConfig, C64,
    HERMITIAN_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    DoublyRotating,
    DriveRotating,
    FourLevelLab,
}

/// Hermitian 4×4 matrix in rad/s tagged with the frame it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    matrix: Operator,
    frame: Frame,
}

impl HamiltonianMatrix {
    pub fn new(matrix: Operator, frame: Frame) -> Result<Self> {
        let deviation = max_abs(&(matrix - matrix.adjoint()));
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitian {
                what: "Hamiltonian",
                deviation,
            });
        }
        Ok(Self { matrix, frame })
    }

    pub fn zero(frame: Frame) -> Self {
        Self {
            matrix: Operator::zeros(),
            frame,
        }
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(self.matrix)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Diagonal entry for a level, the level energy when the matrix is diagonal.
    pub fn level_energy(&self, level: Level) -> f64 {
        self.matrix[(level.index(), level.index())].re
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `H_NMR = ω_P I_z^P + ω_F I_z^F + 2πJ I_z^P I_z^F`, Larmor frequencies in rad/s.
pub fn build_lab_hamiltonian(
    config: &SpinSystemConfig,
    larmor_p: f64,
    larmor_f: f64,
) -> HamiltonianMatrix {
    let izp = spin_operator(Species::P, Axis::Z);
    let izf = spin_operator(Species::F, Axis::Z);
    let m = izp * real(larmor_p) + izf * real(larmor_f) + izp * izf * real(2.0 * PI * config.j_coupling);
    HamiltonianMatrix::new(m, Frame::Lab).expect("diagonal real matrix")
}

/// Drift part `H₀ = −2π(ν_P + Δ) I_z^P − 2πν_F I_z^F + 2πJ I_z^P I_z^F` of the doubly
/// rotating frame. The detuning shifts the P carrier offset.
pub fn build_drift_hamiltonian(config: &SpinSystemConfig, detuning: f64) -> HamiltonianMatrix {
    let izp = spin_operator(Species::P, Axis::Z);
    let izf = spin_operator(Species::F, Axis::Z);
    let m = izp * real(-2.0 * PI * (config.offset_p + detuning))
        + izf * real(-2.0 * PI * config.offset_f)
        + izp * izf * real(2.0 * PI * config.j_coupling);
    HamiltonianMatrix::new(m, Frame::DoublyRotating).expect("diagonal real matrix")
}

/// Drive term `V = 2πΩ I_y^P`.
pub fn build_drive_operator(amplitude: f64) -> HamiltonianMatrix {
    let m = spin_operator(Species::P, Axis::Y) * real(2.0 * PI * amplitude);
    HamiltonianMatrix::new(m, Frame::DoublyRotating).expect("I_y is Hermitian")
}

/// `H_tot = H₀ + V` in the doubly rotating frame, time independent.
pub fn build_rotating_hamiltonian(
    config: &SpinSystemConfig,
    drive: &DriveConfig,
) -> HamiltonianMatrix {
    let h0 = build_drift_hamiltonian(config, drive.detuning);
    let v = build_drive_operator(drive.amplitude);
    HamiltonianMatrix::new(h0.matrix + v.matrix, Frame::DoublyRotating).expect("sum of Hermitian")
}

/// Abstract driven four-level Hamiltonian
/// `H(t) = Σ ωᵢ|i⟩⟨i| + Ω(|2⟩⟨4|e^{iω_d t} + |4⟩⟨2|e^{−iω_d t})`.
///
/// `level_freqs[k]` is `ω_{k+1}`, i.e. indexed by level number minus one.
pub fn build_four_level_drive_hamiltonian(
    level_freqs: [f64; 4],
    coupling: f64,
    drive_freq: f64,
    t: f64,
) -> HamiltonianMatrix {
    let mut m = Operator::zeros();
    for (k, w) in level_freqs.iter().enumerate() {
        let l = Level::from_index(3 - k);
        m[(l.index(), l.index())] = real(*w);
    }
    let (i2, i4) = (Level::L2.index(), Level::L4.index());
    let phase = C64::from_polar(coupling, drive_freq * t);
    m[(i2, i4)] = phase;
    m[(i4, i2)] = phase.conj();
    HamiltonianMatrix::new(m, Frame::FourLevelLab).expect("constructed Hermitian")
}

/// Drive-frame form `H_R = Δ|4⟩⟨4| + Ω(|2⟩⟨4| + |4⟩⟨2|)`, both arguments in rad/s.
pub fn build_reduced_rotating_hamiltonian(detuning: f64, coupling: f64) -> HamiltonianMatrix {
    let mut m = Operator::zeros();
    let (i2, i4) = (Level::L2.index(), Level::L4.index());
    m[(i4, i4)] = real(detuning);
    m[(i2, i4)] = real(coupling);
    m[(i4, i2)] = real(coupling);
    HamiltonianMatrix::new(m, Frame::DriveRotating).expect("real symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{larmor_frequencies, GyromagneticRatios};

    fn gap(h: &HamiltonianMatrix, a: Level, b: Level) -> f64 {
        h.level_energy(a) - h.level_energy(b)
    }

    #[test]
    fn lab_hamiltonian_zero_and_diagonal() {
        let mut c = SpinSystemConfig::default();
        c.j_coupling = 0.0;
        let h = build_lab_hamiltonian(&c, 0.0, 0.0);
        assert_eq!(max_abs(h.matrix()), 0.0);

        let c = SpinSystemConfig::default();
        let (wp, wf) = larmor_frequencies(11.4, &GyromagneticRatios::default());
        let h = build_lab_hamiltonian(&c, wp, wf);
        for s in [Species::P, Species::F] {
            let iz = spin_operator(s, Axis::Z);
            assert_eq!(max_abs(&(h.matrix() * iz - iz * h.matrix())), 0.0);
        }
    }

    #[test]
    fn lab_p_doublet_split_by_j() {
        let c = SpinSystemConfig::default();
        let (wp, wf) = larmor_frequencies(11.4, &GyromagneticRatios::default());
        let h = build_lab_hamiltonian(&c, wp, wf);
        let diff = gap(&h, Level::L4, Level::L2) - gap(&h, Level::L3, Level::L1);
        let want = 2.0 * PI * c.j_coupling;
        assert!((diff - want).abs() < 1e-6 * want, "{diff} vs {want}");
        // top and bottom of the ladder
        let e: Vec<f64> = Level::ALL.iter().map(|&l| h.level_energy(l)).collect();
        assert!(e[0] > e[1] && e[0] > e[2] && e[3] < e[1] && e[3] < e[2]);
    }

    #[test]
    fn rotating_frame_resonance() {
        let c = SpinSystemConfig::default();
        let h = build_rotating_hamiltonian(&c, &DriveConfig::new(0.0, 0.0, 0.0));
        assert!(gap(&h, Level::L4, Level::L2).abs() < 1e-12);
        let g31 = gap(&h, Level::L3, Level::L1).abs();
        assert!((g31 - 2.0 * PI * c.j_coupling).abs() < 1e-9);
        let izf = spin_operator(Species::F, Axis::Z);
        assert_eq!(max_abs(&(h.matrix() * izf - izf * h.matrix())), 0.0);
    }

    #[test]
    fn drive_entries_have_half_amplitude_weight() {
        let c = SpinSystemConfig::default();
        let h0 = build_drift_hamiltonian(&c, 0.0);
        let h = build_rotating_hamiltonian(&c, &DriveConfig::new(0.1, 0.0, 0.0));
        let v = h.matrix() - h0.matrix();
        assert!((max_abs(&v) - PI * 0.1).abs() < 1e-15);
        assert!((v[(Level::L4.index(), Level::L2.index())].norm() - PI * 0.1).abs() < 1e-15);
    }

    #[test]
    fn detuning_opens_gap() {
        let c = SpinSystemConfig::default();
        let h = build_drift_hamiltonian(&c, 3.0);
        assert!((gap(&h, Level::L4, Level::L2).abs() - 2.0 * PI * 3.0).abs() < 1e-10);
    }

    #[test]
    fn four_level_form() {
        let h = build_four_level_drive_hamiltonian([1.0, 2.0, 3.0, 4.0], 0.0, 5.0, 0.7);
        assert_eq!(crate::system::off_diagonal(h.matrix()), Operator::zeros());
        let h = build_four_level_drive_hamiltonian([1.0, 2.0, 3.0, 4.0], 0.3, 5.0, 0.0);
        let c = h.matrix()[(Level::L2.index(), Level::L4.index())];
        assert_eq!(c, C64::new(0.3, 0.0));
        assert_eq!(h.level_energy(Level::L4), 4.0);
        assert_eq!(h.level_energy(Level::L1), 1.0);
    }

    #[test]
    fn reduced_form_eigenvalues() {
        assert_eq!(max_abs(build_reduced_rotating_hamiltonian(0.0, 0.0).matrix()), 0.0);
        let ev = build_reduced_rotating_hamiltonian(0.0, 0.7).eigenvalues();
        let want = [-0.7, 0.0, 0.0, 0.7];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        // block [[1,1],[1,0]] -> (1 ± √5)/2
        let ev = build_reduced_rotating_hamiltonian(1.0, 1.0).eigenvalues();
        let s5 = 5f64.sqrt();
        let want = [(1.0 - s5) / 2.0, 0.0, 0.0, (1.0 + s5) / 2.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-14, "{ev:?}");
        }
        let m = build_reduced_rotating_hamiltonian(1.0, 1.0);
        let nz_off = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && m.matrix()[(i, j)].norm() > 0.0)
            .count();
        assert_eq!(nz_off, 2);
    }

    /// `U H U† + i (dU/dt) U†` with `U = exp(i A t)` and diagonal `A`.
    fn to_rotating_frame(h: &Operator, gen: [f64; 4], t: f64) -> Operator {
        let mut u = Operator::zeros();
        let mut a = Operator::zeros();
        for i in 0..4 {
            u[(i, i)] = C64::from_polar(1.0, gen[i] * t);
            a[(i, i)] = C64::new(gen[i], 0.0);
        }
        u * h * u.adjoint() - a
    }

    #[test]
    fn four_level_transforms_into_reduced_form() {
        let w = [0.3, 1.1, 2.9, 4.6]; // ω1..ω4
        let omega = 0.25;
        let wd = 3.2;
        let delta = (w[3] - w[1]) - wd;
        // generator in row order (|4>,|3>,|2>,|1>)
        let gen = [wd + w[1], w[2], w[1], w[0]];
        let want = build_reduced_rotating_hamiltonian(delta, omega);
        for t in [0.0, 0.1, 1.0] {
            let h = build_four_level_drive_hamiltonian(w, omega, wd, t);
            let hr = to_rotating_frame(h.matrix(), gen, t);
            assert!(max_abs(&(hr - want.matrix())) < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn driven_block_matches_reduced_splitting() {
        let c = SpinSystemConfig::default();
        for (om, de) in [(0.1, 0.0), (0.5, 1.3), (2.0, -0.7)] {
            let h = build_rotating_hamiltonian(&c, &DriveConfig::new(om, de, 0.0));
            let (i4, i2) = (Level::L4.index(), Level::L2.index());
            let a = h.matrix()[(i4, i4)].re;
            let d = h.matrix()[(i2, i2)].re;
            let b = h.matrix()[(i4, i2)].norm();
            let split_tot = ((a - d).powi(2) + 4.0 * b * b).sqrt();
            let ev = build_reduced_rotating_hamiltonian(2.0 * PI * de, PI * om).eigenvalues();
            let split_r = ev[3] - ev[0];
            assert!((split_tot - split_r).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Operator::zeros();
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            HamiltonianMatrix::new(m, Frame::Lab),
            Err(Error::NonHermitian { .. })
        ));
    }
}

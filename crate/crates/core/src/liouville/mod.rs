//! Liouville-space form of the master equation
//! `dρ/dt = −i[H₀ + V, ρ] + Σ_j D[O_j]ρ`.
//!
//! Density matrices are vectorized by stacking columns, so that
//! `vec(BρC) = (Cᵀ ⊗ B) vec(ρ)`.

pub mod expm;

use nalgebra::{DMatrix, DVector};

use crate::dissipation::JumpOperator;
use crate::error::{Error, Result};
use crate::hamiltonians::{build_drift_hamiltonian, build_drive_operator, HamiltonianMatrix};
use crate::system::{
    BasisOrdering, DensityMatrix, DriveConfig, Operator, SpinSystemConfig, C64, HERMITIAN_TOL,
};

pub use expm::expm;

pub const DIM: usize = 4;
pub const LIOUVILLE_DIM: usize = DIM * DIM;

/// Kernel is reported ambiguous when the second-smallest singular value falls below
/// this fraction of the largest.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Column-stacked density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedState(DVector<C64>);

impl VectorizedState {
    pub fn new(v: DVector<C64>) -> Result<Self> {
        if v.len() != LIOUVILLE_DIM {
            return Err(Error::ShapeMismatch {
                expected: LIOUVILLE_DIM,
                got: v.len(),
            });
        }
        Ok(Self(v))
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.0
    }

    /// `⟨⟨vec(𝟙)|v⟩⟩`, the trace of the underlying matrix.
    pub fn trace(&self) -> C64 {
        (0..DIM).map(|i| self.0[i * DIM + i]).sum()
    }
}

pub fn vectorize_operator(m: &Operator) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn devectorize_operator(v: &DVector<C64>) -> Result<Operator> {
    if v.len() != LIOUVILLE_DIM {
        return Err(Error::ShapeMismatch {
            expected: LIOUVILLE_DIM,
            got: v.len(),
        });
    }
    Ok(Operator::from_column_slice(v.as_slice()))
}

pub fn vectorize(rho: &DensityMatrix) -> VectorizedState {
    VectorizedState(vectorize_operator(rho.matrix()))
}

/// Inverse of [`vectorize`]. The result is not validated as a physical state.
pub fn devectorize(v: &VectorizedState) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(Operator::from_column_slice(v.0.as_slice()))
}

fn to_dmatrix(m: &Operator) -> DMatrix<C64> {
    DMatrix::from_column_slice(DIM, DIM, m.as_slice())
}

/// Superoperator of `ρ ↦ BρC`, i.e. `Cᵀ ⊗ B`.
pub fn kron_sandwich(left: &Operator, right: &Operator) -> DMatrix<C64> {
    to_dmatrix(&right.transpose()).kronecker(&to_dmatrix(left))
}

fn commutator_superop(h: &Operator) -> DMatrix<C64> {
    let id = Operator::identity();
    // −i(I⊗H − Hᵀ⊗I)
    (kron_sandwich(h, &id) - kron_sandwich(&id, h)) * C64::new(0.0, -1.0)
}

fn check_hermitian(h: &HamiltonianMatrix, what: &'static str) -> Result<()> {
    let m = h.matrix();
    let deviation = crate::system::max_abs(&(m - m.adjoint()));
    if deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitian { what, deviation });
    }
    Ok(())
}

/// 16×16 generator stored as drift/dissipation part plus drive part.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvillianMatrix {
    drift: DMatrix<C64>,
    drive: DMatrix<C64>,
}

impl LiouvillianMatrix {
    pub fn from_parts(drift: DMatrix<C64>, drive: DMatrix<C64>) -> Result<Self> {
        for m in [&drift, &drive] {
            if m.nrows() != LIOUVILLE_DIM || m.ncols() != LIOUVILLE_DIM {
                return Err(Error::ShapeMismatch {
                    expected: LIOUVILLE_DIM,
                    got: m.nrows().max(m.ncols()),
                });
            }
        }
        Ok(Self { drift, drive })
    }

    pub fn drift(&self) -> &DMatrix<C64> {
        &self.drift
    }

    pub fn drive(&self) -> &DMatrix<C64> {
        &self.drive
    }

    /// `L = L₀ + L_V`.
    pub fn total(&self) -> DMatrix<C64> {
        &self.drift + &self.drive
    }

    /// Combines the drift of `self` with the drive of `other`.
    pub fn with_drive(self, other: &LiouvillianMatrix) -> Self {
        Self {
            drift: self.drift,
            drive: other.drive.clone(),
        }
    }

    /// `L` applied to a 4×4 operator.
    pub fn apply(&self, m: &Operator) -> Operator {
        let v = self.total() * vectorize_operator(m);
        Operator::from_column_slice(v.as_slice())
    }
}

/// `L₀ = −i(I⊗H₀ − H₀ᵀ⊗I) + Σ_j [O_j*⊗O_j − ½(I⊗O_j†O_j) − ½((O_j†O_j)ᵀ⊗I)]`.
pub fn build_l0(h0: &HamiltonianMatrix, jumps: &[JumpOperator]) -> Result<LiouvillianMatrix> {
    check_hermitian(h0, "drift Hamiltonian")?;
    let id = Operator::identity();
    let mut l = commutator_superop(h0.matrix());
    for j in jumps {
        let o = &j.matrix;
        let oo = o.adjoint() * o;
        l += kron_sandwich(o, &o.adjoint());
        l -= (kron_sandwich(&id, &oo) + kron_sandwich(&oo, &id)) * C64::new(0.5, 0.0);
    }
    LiouvillianMatrix::from_parts(l, DMatrix::zeros(LIOUVILLE_DIM, LIOUVILLE_DIM))
}

/// `L_V = −i(I⊗V − Vᵀ⊗I)`.
pub fn build_lv(v: &HamiltonianMatrix) -> Result<LiouvillianMatrix> {
    check_hermitian(v, "drive Hamiltonian")?;
    LiouvillianMatrix::from_parts(
        DMatrix::zeros(LIOUVILLE_DIM, LIOUVILLE_DIM),
        commutator_superop(v.matrix()),
    )
}

/// Full generator of the driven, relaxing two-spin system in the doubly rotating frame.
pub fn build_liouvillian(
    config: &SpinSystemConfig,
    drive: &DriveConfig,
) -> Result<LiouvillianMatrix> {
    config.validate()?;
    drive.validate()?;
    let jumps = crate::dissipation::build_jump_operators(config, &BasisOrdering::standard())?;
    let l0 = build_l0(&build_drift_hamiltonian(config, drive.detuning), &jumps)?;
    let lv = build_lv(&build_drive_operator(drive.amplitude))?;
    Ok(l0.with_drive(&lv))
}

fn quarter_identity() -> Operator {
    Operator::identity() * C64::new(0.25, 0.0)
}

/// `ρ(t) = e^{Lt} ρ₀`.
///
/// The state is split as `𝟙/4 + δ` and the affine system
/// `dδ/dt = Lδ + L(𝟙/4)` is exponentiated as one augmented matrix. This keeps rounding
/// errors proportional to the deviation from the maximally mixed state, which is
/// ~10⁻⁵ for thermal NMR states.
pub fn propagate(l: &LiouvillianMatrix, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let n = LIOUVILLE_DIM;
    let lt = l.total();
    let source = &lt * vectorize_operator(&quarter_identity());
    let mut aug = DMatrix::<C64>::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(lt * C64::new(t, 0.0)));
    aug.view_mut((0, n), (n, 1))
        .copy_from(&(source * C64::new(t, 0.0)));
    let prop = expm(&aug);
    let delta0 = vectorize_operator(&(rho0.matrix() - quarter_identity()));
    let mut x = DVector::<C64>::zeros(n + 1);
    x.rows_mut(0, n).copy_from(&delta0);
    x[n] = C64::new(1.0, 0.0);
    let y = prop * x;
    let delta = Operator::from_column_slice(&y.as_slice()[..n]);
    Ok(DensityMatrix::from_matrix_unchecked(quarter_identity() + delta))
}

/// `e^{Lt} vec(ρ₀)` without the deviation split. Kept as a cross-check of [`propagate`].
pub fn propagate_direct(l: &LiouvillianMatrix, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let v = expm(&(l.total() * C64::new(t, 0.0))) * vectorize_operator(rho0.matrix());
    Ok(DensityMatrix::from_matrix_unchecked(Operator::from_column_slice(
        v.as_slice(),
    )))
}

/// Unique stationary state of `L`.
///
/// The kernel is located with an SVD. The state is then assembled as `𝟙/4 + δ`, where
/// `δ` solves `Lδ = −L(𝟙/4)` through the pseudo-inverse on the complement of the kernel
/// and is shifted along the kernel to zero trace. The result is Hermitized.
pub fn steady_state(l: &LiouvillianMatrix) -> Result<DensityMatrix> {
    let lt = l.total();
    let svd = nalgebra::SVD::try_new(lt.clone(), true, true, f64::EPSILON, 10_000)
        .ok_or(Error::NonConvergence("SVD of the Liouvillian"))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].partial_cmp(&sv[b]).unwrap());
    let (k, second, largest) = (order[0], sv[order[1]], sv[order[sv.len() - 1]]);
    if largest == 0.0 || second < DEGENERACY_THRESHOLD * largest {
        return Err(Error::AmbiguousSteadyState { second, largest });
    }
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V†");

    let kernel: DVector<C64> = v_t.row(k).adjoint();
    let source = &lt * vectorize_operator(&quarter_identity());
    let mut delta = DVector::<C64>::zeros(LIOUVILLE_DIM);
    for &i in &order[1..] {
        let coeff = u.column(i).dotc(&source) / C64::new(sv[i], 0.0);
        delta -= v_t.row(i).adjoint() * coeff;
    }
    let kernel_trace: C64 = (0..DIM).map(|i| kernel[i * DIM + i]).sum();
    if kernel_trace.norm() < 1e-12 {
        return Err(Error::NonConvergence("kernel vector is traceless"));
    }
    let delta_trace: C64 = (0..DIM).map(|i| delta[i * DIM + i]).sum();
    delta -= kernel * (delta_trace / kernel_trace);

    let m = quarter_identity() + Operator::from_column_slice(delta.as_slice());
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = herm.trace().re;
    Ok(DensityMatrix::from_matrix_unchecked(herm / C64::new(tr, 0.0)))
}

/// Eigenvalues of `L` sorted by decreasing real part, and the spectral gap `|Re λ₂|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub eigenvalues: Vec<C64>,
    pub gap: f64,
}

pub fn spectral_report(l: &LiouvillianMatrix) -> Result<SpectralReport> {
    let schur = nalgebra::Schur::try_new(l.total(), f64::EPSILON, 100_000)
        .ok_or(Error::NonConvergence("Schur decomposition of the Liouvillian"))?;
    let (_, t) = schur.unpack();
    let mut eigenvalues: Vec<C64> = (0..LIOUVILLE_DIM).map(|i| t[(i, i)]).collect();
    eigenvalues.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
    let gap = eigenvalues.get(1).map_or(0.0, |z| z.re.abs());
    Ok(SpectralReport { eigenvalues, gap })
}

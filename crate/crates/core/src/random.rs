//! Random states and operators for property checks and demos.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::system::{DensityMatrix, Operator, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn random_operator<R: Rng + ?Sized>(rng: &mut R) -> Operator {
    Operator::from_fn(|_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R) -> Operator {
    let g = random_operator(rng);
    (g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// `GG†/Tr(GG†)` for a Ginibre `G`, full rank with probability one.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let g = random_operator(rng);
    let m = g * g.adjoint();
    let m = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(m / C64::new(tr, 0.0))
}

/// Random state whose only coherence is `ρ₄₂`, with populations near `1/4`.
pub fn random_rho42_state<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> DensityMatrix {
    use crate::system::Level;
    let mut pops = [0.0; 4];
    for p in pops.iter_mut() {
        *p = 0.25 + spread * (rng.random::<f64>() - 0.5);
    }
    let s: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= s);
    let mut m = Operator::zeros();
    for (i, p) in pops.iter().enumerate() {
        m[(i, i)] = C64::new(*p, 0.0);
    }
    let (i4, i2) = (Level::L4.index(), Level::L2.index());
    let bound = (pops[i4] * pops[i2]).sqrt();
    let c = C64::from_polar(
        bound * rng.random::<f64>(),
        2.0 * std::f64::consts::PI * rng.random::<f64>(),
    );
    m[(i4, i2)] = c;
    m[(i2, i4)] = c.conj();
    DensityMatrix::from_matrix_unchecked(m)
}

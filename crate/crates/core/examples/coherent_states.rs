//! SU(4) coherent states, the phase-space measure and the driven steady state's
//! reduced Husimi profile.

use std::f64::consts::PI;

use nmr_sync::liouville::{build_liouvillian, spectral_report, steady_state};
use nmr_sync::phase_space::{
    completeness_check, sync_measure_max, sync_measure_reduced, CoherentStateSU4, HusimiGrid, IntegrationScheme,
};
use nmr_sync::{DriveConfig, SpinSystemConfig};

fn main() -> nmr_sync::Result<()> {
    let s = CoherentStateSU4::new([PI / 2.0; 3], [0.0, 0.0, 0.0])?;
    println!("|Omega> at theta=pi/2, phi=0: {:.6?}", s.vector().iter().map(|z| z.re).collect::<Vec<_>>());

    let scheme = IntegrationScheme::default();
    let c = completeness_check(&scheme);
    println!("completeness: diag {:.12} (pi^3/24 = {:.12})", c[(0, 0)].re, PI.powi(3) / 24.0);

    let l = build_liouvillian(&SpinSystemConfig::default(), &DriveConfig::default())?;
    println!("spectral gap {:.6} rad/s", spectral_report(&l)?.gap);
    let ss = steady_state(&l)?;
    println!("Tr integral of Q = {:.12}", scheme.integrate_husimi(&ss));
    println!("max S = {:.6e}", sync_measure_max(&ss));
    let grid = HusimiGrid::sample(&ss, 64, 128, true)?;
    let profile = grid.phi_profile();
    for (phi, q) in grid.phi.iter().zip(&profile).step_by(16) {
        println!("phi={phi:.3}  sum_theta Q={q:.9}  S={:+.3e}", sync_measure_reduced(&ss, *phi));
    }
    Ok(())
}

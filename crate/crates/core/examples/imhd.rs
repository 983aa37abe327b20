//! Interferometric readout of the reduced Husimi distribution from one transverse
//! expectation value, compared with the direct overlap.

use nmr_sync::imhd::{imhd_scan, run_imhd, ImhdVariant};
use nmr_sync::liouville::{build_liouvillian, steady_state};
use nmr_sync::phase_space::HusimiGrid;
use nmr_sync::{DriveConfig, SpinSystemConfig};

fn main() -> nmr_sync::Result<()> {
    let l = build_liouvillian(&SpinSystemConfig::default(), &DriveConfig::default())?;
    let ss = steady_state(&l)?;

    let r = run_imhd(&ss, 1.0, 0.5, ImhdVariant::ExactPopulations)?;
    println!("theta=1.0 phi=0.5: s={:.12e}  closed form={:.12e}  Q={:.12e}", r.signal, r.closed_form_signal, r.q);

    let direct = HusimiGrid::sample(&ss, 64, 128, true)?;
    for variant in [ImhdVariant::ExactPopulations, ImhdVariant::QuarterApproximation] {
        let scan = imhd_scan(&ss, &direct.theta, &direct.phi, variant)?;
        let diff = scan
            .values
            .iter()
            .flatten()
            .zip(direct.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("{variant}: max |Q_IF - Q| = {diff:.3e}");
    }
    Ok(())
}

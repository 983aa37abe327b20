//! Growth of phase localization as the drive is applied for longer.

use nmr_sync::experiments::{run_drive_series, GridResolution, DEFAULT_SERIES_DURATIONS};
use nmr_sync::phase_space::sync_measure_max;
use nmr_sync::{DriveConfig, SpinSystemConfig};

fn main() -> nmr_sync::Result<()> {
    let drive = DriveConfig::new(0.1, 0.0, 0.0);
    let series = run_drive_series(&SpinSystemConfig::default(), &drive, &DEFAULT_SERIES_DURATIONS, GridResolution::default())?;
    println!("{:>8} {:>12} {:>12} {:>12}", "t [s]", "|rho42|", "visibility", "max S");
    for p in &series {
        println!(
            "{:>8} {:>12.4e} {:>12.4e} {:>12.4e}",
            p.duration,
            p.abs_rho42,
            p.visibility,
            sync_measure_max(&p.state)
        );
    }
    Ok(())
}

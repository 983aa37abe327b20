//! Drive-amplitude calibration from a short nutation record.

use nmr_sync::experiments::{calibrate_drive, default_calibration_times, synthetic_nutation};

fn main() -> nmr_sync::Result<()> {
    let times = default_calibration_times();
    for noise in [0.0, 0.01] {
        let samples = synthetic_nutation(0.1, &times, noise, 42)?;
        let cal = calibrate_drive(&samples)?;
        println!(
            "noise {noise:.2}: omega = {:.6} Hz (bias {:+.3}%), max angle {:.3} rad, small-angle: {}",
            cal.omega_hz,
            100.0 * (cal.omega_hz - 0.1) / 0.1,
            cal.max_angle,
            cal.small_angle
        );
    }
    Ok(())
}

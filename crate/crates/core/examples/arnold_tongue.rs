//! Synchronization measure over drive amplitude and detuning after a 100 s drive.

use nmr_sync::experiments::{analyze_tongue, default_arnold_axes, run_arnold_tongue, Evolution, DEFAULT_ARNOLD_DURATION};
use nmr_sync::SpinSystemConfig;

fn main() -> nmr_sync::Result<()> {
    let (amps, dets) = default_arnold_axes();
    let r = run_arnold_tongue(
        &SpinSystemConfig::default(),
        &amps,
        &dets,
        Evolution::Finite { duration: DEFAULT_ARNOLD_DURATION },
    )?;
    println!("{:>10} {:>12} {:>12} {:>10} {:>10}", "Omega[Hz]", "S(0)", "max S", "argmax", "FWHM[Hz]");
    for row in analyze_tongue(&r)? {
        println!(
            "{:>10.4} {:>12.4e} {:>12.4e} {:>10.3} {:>10}",
            row.amplitude,
            row.on_resonance,
            row.row_max,
            row.argmax_detuning,
            row.half_max_width.map_or("-".into(), |w| format!("{w:.3}"))
        );
    }
    Ok(())
}

//! Steady-state visibility versus drive amplitude: weak drives cannot lock the phase,
//! strong drives saturate the transition.

use nmr_sync::experiments::{default_amplitude_axis, is_unimodal, run_amplitude_sweep};
use nmr_sync::SpinSystemConfig;

fn main() -> nmr_sync::Result<()> {
    let axis = default_amplitude_axis();
    let r = run_amplitude_sweep(&SpinSystemConfig::default(), &axis)?;
    let v = r.column();
    for (a, vis) in axis.values.iter().zip(&v).step_by(5) {
        println!("{a:>10.3e} Hz  {vis:.4e}");
    }
    let (i, _) = r.argmax();
    println!("peak {:.4e} at {:.4e} Hz, unimodal: {}", v[i], axis.values[i], is_unimodal(&v));
    Ok(())
}

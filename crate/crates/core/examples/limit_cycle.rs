//! Undriven steady state: thermal populations, no coherences, phase-uniform Q.

use nmr_sync::experiments::{run_limit_cycle, GridResolution};
use nmr_sync::SpinSystemConfig;

fn main() -> nmr_sync::Result<()> {
    let lc = run_limit_cycle(&SpinSystemConfig::default(), GridResolution::default())?;
    let m = lc.steady_state.matrix();
    println!("populations |4>,|3>,|2>,|1>:");
    for i in 0..4 {
        println!("  {:.12}", m[(i, i)].re);
    }
    println!("max |off-diagonal| = {:.3e}", lc.steady_state.max_off_diagonal());
    println!("visibility         = {:.3e}", lc.visibility);
    println!("max S              = {:.3e}", lc.max_sync);
    Ok(())
}

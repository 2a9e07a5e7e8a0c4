//! Benchmark PDC, then shape the pump to the strongest eigenmode.

use multimode_squeeze::scenarios::{run, ScenarioConfig, ScenarioName};

fn main() -> multimode_squeeze::Result<()> {
    let out = run(&ScenarioConfig::defaults(ScenarioName::PdcEigenPump))?;
    let m = &out.metrics;
    println!("benchmark: u00 {:.3}, λ1 {:.3} (normalized variance)", m["benchmark_u00_var_x1_normalized"], m["benchmark_lambda1_var_normalized"]);
    println!("eigen pump: λ1 {:.3}, {:.2} dB below benchmark u00", m["lambda1_var_normalized"], m["lambda1_improvement_db_vs_benchmark_u00"]);
    if let Some(pump) = &out.pump {
        for (idx, z) in pump.basis.order().iter().zip(&pump.coefficients) {
            if z.norm() > 0.0 {
                println!("  pump l={},p={}: {:+.4} {:+.4}i", idx.ell, idx.p, z.re, z.im);
            }
        }
    }
    Ok(())
}

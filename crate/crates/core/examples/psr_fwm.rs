//! Single-beam baseline versus two-beam four-wave mixing at frozen gain.

use multimode_squeeze::scenarios::{run, ScenarioConfig, ScenarioName};

fn main() -> multimode_squeeze::Result<()> {
    for name in [ScenarioName::PsrSinglePhoton, ScenarioName::PsrPCrosstalk, ScenarioName::FwmTwoPhoton] {
        let out = run(&ScenarioConfig::defaults(name))?;
        let m = &out.metrics;
        println!(
            "{name:<16} n̄ = {:.4}  u00 V1 = {:.4} (vacuum 0.25)  noise increase {:+.2}% of vacuum",
            out.report.nbar_total,
            m["u00_var_x1"],
            100.0 * m.get("u00_noise_increase_vacuum_units").copied().unwrap_or(0.0)
        );
    }
    Ok(())
}

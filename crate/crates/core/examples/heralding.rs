//! Heralding quality: a smaller pump waist concentrates pairs on the diagonal.

use multimode_squeeze::scenarios::{run, ScenarioConfig, ScenarioName};

fn main() -> multimode_squeeze::Result<()> {
    let out = run(&ScenarioConfig::defaults(ScenarioName::PdcHeralding))?;
    let m = &out.metrics;
    println!("diagonal dominance: {:.3} -> {:.3}", m["reference_diagonal_dominance"], m["diagonal_dominance"]);
    println!("n00 / total n:      {:.3} -> {:.3}", m["reference_n00_fraction"], m["n00_fraction"]);
    println!("occupation beyond p = 2: {:.1}%", 100.0 * m["diagnostic_occupation_beyond_p2"]);
    Ok(())
}

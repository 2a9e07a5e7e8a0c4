//! Scan pump and collection waists; print the heralding-metric grid.

use multimode_squeeze::scenarios::{run, ScenarioConfig, ScenarioName};

fn main() -> multimode_squeeze::Result<()> {
    let out = run(&ScenarioConfig::defaults(ScenarioName::WaistScan))?;
    let s = out.scan.expect("scan result");
    print!("{:>8}", "wP\\wDC");
    for w in &s.collection_waists {
        print!("{w:>7.0}");
    }
    println!();
    for (i, row) in s.metric.iter().enumerate() {
        print!("{:>8.0}", s.pump_waists[i]);
        for (j, v) in row.iter().enumerate() {
            let mark = if s.island.contains(&(i, j)) { '*' } else { ' ' };
            match v {
                Some(v) => print!("{v:>6.3}{mark}"),
                None => print!("{:>7}", "-"),
            }
        }
        println!();
    }
    println!("argmax at ({:.1}, {:.1}) μm: {:.3}; * marks the half-max region", s.argmax_waists.0, s.argmax_waists.1, s.argmax_value);
    Ok(())
}

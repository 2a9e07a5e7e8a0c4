//! Assemble ξ for down-conversion with a Gaussian pump and print its
//! modulus. Entries with ℓ + m ≠ 0 vanish exactly.

use multimode_squeeze::coupling::{assemble_squeeze_matrix, scale_to_mean_photons};
use multimode_squeeze::modes::ModeBasis;
use multimode_squeeze::scenarios::{ScenarioConfig, ScenarioName};

fn main() -> multimode_squeeze::Result<()> {
    let mut cfg = ScenarioConfig::defaults(ScenarioName::PdcBenchmark);
    cfg.coupling.basis = ModeBasis::new(1, 1)?;
    let raw = assemble_squeeze_matrix(&cfg.coupling)?;
    let (sq, gain) = scale_to_mean_photons(&raw, 1.0)?;

    let labels = sq.basis().labels();
    println!("gain for n̄ = 1: {gain:.4e}");
    print!("{:>10}", "");
    for l in &labels {
        print!("{l:>10}");
    }
    println!();
    for (i, l) in labels.iter().enumerate() {
        print!("{l:>10}");
        for j in 0..labels.len() {
            print!("{:>10.4}", sq.xi()[(i, j)].norm());
        }
        println!();
    }
    Ok(())
}

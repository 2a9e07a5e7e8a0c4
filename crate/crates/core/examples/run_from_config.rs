//! Run a JSON config and write the full output set, as `msq --config` does.
//!
//!     cargo run --example run_from_config -- examples/configs/pdc_small_pump.json out/

use std::path::PathBuf;

use multimode_squeeze::{io, scenarios};

fn main() -> multimode_squeeze::Result<()> {
    let mut args = std::env::args().skip(1);
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| here.join("examples/configs/pdc_small_pump.json"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("msq-example"));

    let cfg = io::parse_config(&config)?;
    let outcome = scenarios::run(&cfg)?;
    let outputs = io::emit_report(&outcome, &cfg, &out)?;
    let manifest = io::manifest_for(&outcome, &cfg, outputs, 0.0);
    io::write_manifest(&out, &manifest)?;
    for line in io::summary_lines(&outcome) {
        println!("{line}");
    }
    println!("wrote {} files to {}", manifest.outputs.len() + 1, out.display());
    Ok(())
}

//! `msq` command line: run one scenario and write its files.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgGroup, Parser};

use crate::fock::{compare, largest_cut, vacuum_statistics, OracleKind, TruncatedFockSpace};
use crate::io::{self, OracleFile, OracleSummary};
use crate::scenarios::{self, ScenarioConfig, ScenarioName, ScenarioOutcome};
use crate::{Error, Result};

/// Oracle truncation bound accepted as conclusive.
pub const ORACLE_TOLERANCE: f64 = 1e-3;
/// Largest basis the oracle is run on.
pub const ORACLE_MAX_MODES: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "msq", version, about = "Multimode squeezing scenarios: matrices, statistics and eigenmodes")]
#[command(group(ArgGroup::new("source").required(true).args(["scenario", "config"])))]
pub struct Args {
    /// Built-in scenario (PsrSinglePhoton, PsrPCrosstalk, FwmTwoPhoton,
    /// PdcBenchmark, PdcEigenPump, PdcHeralding, WaistScan).
    #[arg(long, value_parser = parse_name)]
    pub scenario: Option<ScenarioName>,
    /// JSON config; only "scenario" is required.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $OUT_DIR, else ./out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub lmax: Option<u32>,
    #[arg(long)]
    pub pmax: Option<u32>,
    /// Absolute gain; skips mean-photon calibration.
    #[arg(long = "seed-gain")]
    pub seed_gain: Option<f64>,
    /// Cross-check against the truncated Fock-space oracle (N ≤ 3).
    #[arg(long)]
    pub oracle: bool,
    /// Re-run at ell_max = 2, p_max = 4 and report drift.
    #[arg(long = "convergence-check")]
    pub convergence_check: bool,
    #[arg(long)]
    pub quiet: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_name(s: &str) -> std::result::Result<ScenarioName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Resolves the config from flags (file or built-in, then overrides).
pub fn resolve_config(args: &Args) -> Result<ScenarioConfig> {
    let mut cfg = match (&args.scenario, &args.config) {
        (Some(name), None) => ScenarioConfig::defaults(*name),
        (None, Some(path)) => io::parse_config(path)?,
        _ => return Err(Error::InvalidArgument("exactly one of --scenario and --config is required".into())),
    };
    io::override_basis(&mut cfg, args.lmax, args.pmax)?;
    if let Some(g) = args.seed_gain {
        cfg.fixed_gain = Some(g);
    }
    if args.convergence_check {
        cfg.convergence_check = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn out_dir(args: &Args) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os("OUT_DIR").filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Oracle cross-check of an outcome's ξ.
pub fn oracle_check(outcome: &ScenarioOutcome) -> Result<OracleFile> {
    let n = outcome.xi.nrows();
    if n > ORACLE_MAX_MODES {
        return Err(Error::InvalidArgument(format!(
            "--oracle needs a basis of at most {ORACLE_MAX_MODES} modes, this one has {n} (try --lmax 0 --pmax 0)"
        )));
    }
    let (kind, modes) = if outcome.report.interaction.is_two_beam() { (OracleKind::TwoBeam, 2 * n) } else { (OracleKind::Degenerate, n) };
    let cut = largest_cut(modes).ok_or(Error::DimensionGuard { dimension: usize::MAX, limit: crate::fock::DIMENSION_GUARD })?;
    let space = TruncatedFockSpace::new(modes, cut)?;
    let oracle = vacuum_statistics(&outcome.xi, &space, kind, ORACLE_TOLERANCE)?;
    let agreement = compare(&outcome.report, &oracle);
    Ok(OracleFile { agreement, oracle })
}

/// Runs everything for parsed arguments; returns the manifest path.
pub fn execute(args: &Args, stdout: &mut dyn Write) -> Result<PathBuf> {
    let cfg = resolve_config(args)?;
    let dir = out_dir(args);
    let start = Instant::now();
    let outcome = match args.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| scenarios::run(&cfg))?,
        None => scenarios::run(&cfg)?,
    };
    let oracle = if args.oracle { Some(oracle_check(&outcome)?) } else { None };
    let wall = start.elapsed().as_secs_f64();

    let mut outputs = io::emit_report(&outcome, &cfg, &dir)?;
    let mut manifest = io::manifest_for(&outcome, &cfg, Vec::new(), wall);
    if let Some(file) = &oracle {
        let name = io::write_oracle(&dir, file)?;
        let a = &file.agreement;
        manifest.oracle = Some(OracleSummary {
            file: name.clone(),
            max_deviation: a.max_deviation,
            truncation_bound: a.truncation_bound,
            within_bound: a.within_bound,
            conclusive: a.conclusive,
        });
        outputs.push(name);
    }
    manifest.outputs = outputs;
    let path = io::write_manifest(&dir, &manifest)?;

    if !args.quiet {
        for line in io::summary_lines(&outcome) {
            writeln!(stdout, "{line}")?;
        }
        if let Some(a) = &manifest.argmax {
            writeln!(stdout, "argmax w_P = {:.1} μm, w_DC = {:.1} μm, metric {:.4}", a.pump_waist, a.collection_waist, a.value)?;
        }
        if let Some(c) = &manifest.convergence {
            writeln!(stdout, "convergence (ell_max={}, p_max={}): max relative drift {:.3e}", c.ell_max, c.p_max, c.max_drift)?;
        }
        if let Some(o) = &manifest.oracle {
            writeln!(
                stdout,
                "oracle: max deviation {:.3e}, truncation bound {:.3e} ({})",
                o.max_deviation,
                o.truncation_bound,
                match (o.conclusive, o.within_bound) {
                    (false, _) => "inconclusive: truncation bound above tolerance",
                    (true, true) => "agrees",
                    (true, false) => "DISAGREES",
                }
            )?;
        }
        writeln!(stdout, "wrote {} files to {}", manifest.outputs.len() + 1, dir.display())?;
    }
    Ok(path)
}

/// Entry point; returns the process exit code (0 ok, 1 runtime error, 2 usage).
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&args, &mut std::io::stdout()) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("msq: error: {e}");
            match e {
                Error::Config { .. } | Error::InvalidArgument(_) => 2,
                _ => 1,
            }
        }
    }
}

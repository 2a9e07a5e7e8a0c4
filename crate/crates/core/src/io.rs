//! Config parsing and output files.
//!
//! Configs are JSON. Only `scenario` is required; every other key overrides
//! the scenario's built-in defaults (objects merge key by key, everything else
//! replaces). Derived fields (`rayleigh_zr`) are recomputed unless given.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::fock::{Agreement, OracleReport};
use crate::modes::ModeBasis;
use crate::scenarios::{ConvergenceSummary, ScenarioConfig, ScenarioName, ScenarioOutcome};
use crate::{CMatrix, Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

// Keys that must be strictly positive wherever they appear.
const POSITIVE_KEYS: [&str; 5] = ["wavelength", "waist_w0", "cell_length", "n_target", "reference_pump_waist"];

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| config_err(path.display().to_string(), e.to_string()))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let user: Value = serde_json::from_str(text).map_err(|e| config_err("<root>", format!("malformed JSON: {e}")))?;
    let Value::Object(obj) = &user else {
        return Err(config_err("<root>", "config must be a JSON object"));
    };
    let name = match obj.get("scenario") {
        Some(Value::String(s)) => s.parse::<ScenarioName>().map_err(|e| config_err("scenario", e.to_string()))?,
        Some(_) => return Err(config_err("scenario", "must be a string")),
        None => return Err(config_err("scenario", "missing")),
    };
    check_positive(&user, "")?;

    let mut merged = serde_json::to_value(ScenarioConfig::defaults(name))?;
    strip_derived(&mut merged);
    merge(&mut merged, user);
    fill_derived(&mut merged, "")?;

    let cfg: ScenarioConfig = serde_path_to_error::deserialize(merged).map_err(|e| {
        let path = e.path().to_string();
        config_err(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
    })?;
    cfg.validate().map_err(|e| config_err("<root>", e.to_string()))?;
    Ok(cfg)
}

fn check_positive(v: &Value, path: &str) -> Result<()> {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                if POSITIVE_KEYS.contains(&k.as_str()) {
                    match child.as_f64() {
                        Some(x) if x > 0.0 && x.is_finite() => {}
                        _ => return Err(config_err(p, format!("must be a positive number, got {child}"))),
                    }
                }
                check_positive(child, &p)?;
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                check_positive(child, &format!("{path}[{i}]"))?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn strip_derived(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("rayleigh_zr");
            map.values_mut().for_each(strip_derived);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_derived),
        _ => {}
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

// Recompute z_R = π w₀²/λ for geometry objects that do not give it.
fn fill_derived(v: &mut Value, path: &str) -> Result<()> {
    if let Value::Object(map) = v {
        if map.contains_key("wavelength") && map.contains_key("waist_w0") && !map.contains_key("rayleigh_zr") {
            let (Some(l), Some(w)) = (map["wavelength"].as_f64(), map["waist_w0"].as_f64()) else {
                return Err(config_err(path, "wavelength and waist_w0 must be numbers"));
            };
            let zr = std::f64::consts::PI * w * w / l;
            map.insert("rayleigh_zr".into(), serde_json::json!(zr));
        }
        for (k, child) in map.iter_mut() {
            let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            fill_derived(child, &p)?;
        }
    }
    Ok(())
}

/// Canonical JSON text of a resolved config; parses back to the same value.
pub fn config_to_string(cfg: &ScenarioConfig) -> Result<String> {
    Ok(serde_json::to_string_pretty(cfg)? + "\n")
}

/// Shortest decimal that round-trips to the same f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn write_matrix_csv(path: &Path, labels: &[String], rows: usize, cols: usize, value: impl Fn(usize, usize) -> f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["mode".to_string()];
    header.extend(labels.iter().take(cols).cloned());
    w.write_record(&header)?;
    for i in 0..rows {
        let mut rec = vec![labels[i].clone()];
        rec.extend((0..cols).map(|j| fmt_f64(value(i, j))));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_long_csv(path: &Path, labels: &[String], n: usize, value: impl Fn(usize, usize) -> f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["row", "col", "value"])?;
    for i in 0..n {
        for j in 0..n {
            w.write_record([labels[i].as_str(), labels[j].as_str(), fmt_f64(value(i, j)).as_str()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a matrix CSV written by [`emit_report`] back as (labels, rows).
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let labels: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("{}: bad number {s:?}: {e}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((labels, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanArgmax {
    pub pump_waist: f64,
    pub collection_waist: f64,
    pub value: f64,
    pub reference_in_island: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSummary {
    pub file: String,
    pub max_deviation: f64,
    pub truncation_bound: f64,
    pub within_bound: bool,
    pub conclusive: bool,
}

/// Record of one run. `wall_time_seconds` is the only field that varies
/// between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub scenario: ScenarioName,
    pub resolved_config: ScenarioConfig,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub convergence: Option<ConvergenceSummary>,
    pub argmax: Option<ScanArgmax>,
    pub oracle: Option<OracleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleFile {
    pub agreement: Agreement,
    pub oracle: OracleReport,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "resolved_config.json";
pub const ORACLE_FILE: &str = "oracle.json";

fn write_text(dir: &Path, name: &str, text: &str, outputs: &mut Vec<String>) -> Result<()> {
    fs::write(dir.join(name), text)?;
    outputs.push(name.to_string());
    Ok(())
}

/// Writes every data file for an outcome and returns the file names (relative
/// to `out_dir`), excluding the manifest.
pub fn emit_report(outcome: &ScenarioOutcome, cfg: &ScenarioConfig, out_dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();
    let labels = outcome.basis.labels();
    let n = outcome.basis.len();
    let rep = &outcome.report;

    let complex: [(&str, &CMatrix); 5] = [
        ("xi", &outcome.xi),
        ("var_x1", &rep.var_x1),
        ("var_x2", &rep.var_x2),
        ("cross_cov", &rep.cross_cov),
        ("nbar", &rep.nbar_matrix),
    ];
    for (name, m) in complex {
        let file = format!("{name}.csv");
        write_matrix_csv(&out_dir.join(&file), &labels, n, n, |i, j| m[(i, j)].re)?;
        outputs.push(file);
        let file = format!("{name}_imag.csv");
        write_matrix_csv(&out_dir.join(&file), &labels, n, n, |i, j| m[(i, j)].im)?;
        outputs.push(file);
    }
    let pair = &rep.pair_matrix;
    for (file, f) in [("pair_abs.csv", 0), ("pair_arg.csv", 1), ("pair_normalized.csv", 2)] {
        write_matrix_csv(&out_dir.join(file), &labels, n, n, |i, j| match f {
            0 => pair[(i, j)].norm(),
            1 => pair[(i, j)].arg(),
            _ => rep.pair_normalized[(i, j)],
        })?;
        outputs.push(file.to_string());
    }

    let heat: [(&str, Box<dyn Fn(usize, usize) -> f64>); 6] = [
        ("var_x1", Box::new(|i, j| rep.var_x1[(i, j)].re)),
        ("var_x2", Box::new(|i, j| rep.var_x2[(i, j)].re)),
        ("cross_cov", Box::new(|i, j| rep.cross_cov[(i, j)].re)),
        ("nbar", Box::new(|i, j| rep.nbar_matrix[(i, j)].re)),
        ("pair_abs", Box::new(|i, j| pair[(i, j)].norm())),
        ("pair_normalized", Box::new(|i, j| rep.pair_normalized[(i, j)])),
    ];
    for (name, f) in heat {
        let file = format!("heatmap_{name}.csv");
        write_long_csv(&out_dir.join(&file), &labels, n, f)?;
        outputs.push(file);
    }

    let mut w = csv::Writer::from_path(out_dir.join("modes.csv"))?;
    w.write_record(["mode", "var_x1", "var_x2", "squeezing_db", "nbar"])?;
    for i in 0..n {
        w.write_record([
            labels[i].clone(),
            fmt_f64(rep.var_x1[(i, i)].re),
            fmt_f64(rep.var_x2[(i, i)].re),
            fmt_f64(rep.squeezing_db_per_mode[i]),
            fmt_f64(rep.nbar_matrix[(i, i)].re),
        ])?;
    }
    w.flush()?;
    outputs.push("modes.csv".into());

    if let Some(eig) = &outcome.eigen {
        let mut w = csv::Writer::from_path(out_dir.join("eigenmodes.csv"))?;
        w.write_record(["k", "lambda", "variance_minus", "variance_minus_normalized", "db", "nbar", "nbar_fraction", "theta"])?;
        for (k, (m, frac)) in eig.modes.iter().zip(&eig.nbar_fractions).enumerate() {
            w.write_record([
                (k + 1).to_string(),
                fmt_f64(m.lambda),
                fmt_f64(m.variance_minus),
                fmt_f64(m.normalized_minus()),
                fmt_f64(m.db_minus()),
                fmt_f64(m.nbar),
                fmt_f64(*frac),
                fmt_f64(m.theta),
            ])?;
        }
        w.flush()?;
        outputs.push("eigenmodes.csv".into());
        let u = &eig.decomposition.u;
        write_matrix_csv(&out_dir.join("eigenvectors.csv"), &labels, n, n, |i, j| u[(i, j)].re)?;
        write_matrix_csv(&out_dir.join("eigenvectors_imag.csv"), &labels, n, n, |i, j| u[(i, j)].im)?;
        outputs.push("eigenvectors.csv".into());
        outputs.push("eigenvectors_imag.csv".into());
    }

    if let Some(scan) = &outcome.scan {
        let mut w = csv::Writer::from_path(out_dir.join("scan_grid.csv"))?;
        w.write_record(["pump_waist", "collection_waist", "metric", "in_island"])?;
        for (i, wp) in scan.pump_waists.iter().enumerate() {
            for (j, wc) in scan.collection_waists.iter().enumerate() {
                w.write_record([
                    fmt_f64(*wp),
                    fmt_f64(*wc),
                    scan.metric[i][j].map(fmt_f64).unwrap_or_default(),
                    scan.island.contains(&(i, j)).to_string(),
                ])?;
            }
        }
        w.flush()?;
        outputs.push("scan_grid.csv".into());
    }

    let mut w = csv::Writer::from_path(out_dir.join("metrics.csv"))?;
    w.write_record(["metric", "value"])?;
    for (k, v) in &outcome.metrics {
        w.write_record([k.clone(), fmt_f64(*v)])?;
    }
    w.flush()?;
    outputs.push("metrics.csv".into());

    write_text(out_dir, REPORT_FILE, &(serde_json::to_string_pretty(outcome)? + "\n"), &mut outputs)?;
    write_text(out_dir, CONFIG_FILE, &config_to_string(cfg)?, &mut outputs)?;
    Ok(outputs)
}

pub fn write_oracle(out_dir: &Path, file: &OracleFile) -> Result<String> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(ORACLE_FILE), serde_json::to_string_pretty(file)? + "\n")?;
    Ok(ORACLE_FILE.to_string())
}

pub fn manifest_for(outcome: &ScenarioOutcome, cfg: &ScenarioConfig, outputs: Vec<String>, wall_time_seconds: f64) -> RunManifest {
    RunManifest {
        scenario: outcome.scenario,
        resolved_config: cfg.clone(),
        tool_version: TOOL_VERSION.to_string(),
        wall_time_seconds,
        outputs,
        convergence: outcome.convergence.clone(),
        argmax: outcome.scan.as_ref().map(|s| ScanArgmax {
            pump_waist: s.argmax_waists.0,
            collection_waist: s.argmax_waists.1,
            value: s.argmax_value,
            reference_in_island: s.reference_in_island,
        }),
        oracle: None,
    }
}

pub fn write_manifest(out_dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(path)
}

pub fn read_report(path: &Path) -> Result<ScenarioOutcome> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Applies command-line basis overrides to a resolved config.
pub fn override_basis(cfg: &mut ScenarioConfig, lmax: Option<u32>, pmax: Option<u32>) -> Result<()> {
    if lmax.is_none() && pmax.is_none() {
        return Ok(());
    }
    let b = &cfg.coupling.basis;
    let l = lmax.unwrap_or(b.ell_max());
    let p = pmax.unwrap_or(b.p_max());
    cfg.coupling.basis = ModeBasis::new(l.into(), p.into())?;
    Ok(())
}

/// Text summary of key metrics, one per line.
pub fn summary_lines(outcome: &ScenarioOutcome) -> Vec<String> {
    let mut lines = vec![format!("scenario {} ({} modes, gain {})", outcome.scenario, outcome.basis.len(), fmt_f64(outcome.gain))];
    let metrics: &BTreeMap<String, f64> = &outcome.metrics;
    lines.extend(metrics.iter().map(|(k, v)| format!("  {k} = {v:.6}")));
    lines
}

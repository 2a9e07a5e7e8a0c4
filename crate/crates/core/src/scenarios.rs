//! Named simulation campaigns: the PSR/FWM gain-frozen family, the PDC
//! benchmark with its eigenmode-pumped and heralding variants, and the
//! pump/collection waist scan.
//!
//! Every runner takes a [`ScenarioConfig`] and returns a [`ScenarioOutcome`];
//! nothing here touches the filesystem.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{assemble_squeeze_matrix, scale_to_mean_photons, CouplingConfig, InteractionType, MediumConfig, PumpSpec};
use crate::eigenmodes::{decompose, eigenmode_pump, eigenmode_report, EigenDecomposition, EigenmodeStats};
use crate::linalg::{self, c};
use crate::modes::{BeamGeometry, ModeBasis, ModeIndex};
use crate::squeeze::{state_report, SqueezeMatrix, StateReport, VACUUM_VARIANCE};
use crate::{CMatrix, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioName {
    PsrSinglePhoton,
    PsrPCrosstalk,
    FwmTwoPhoton,
    PdcBenchmark,
    PdcEigenPump,
    PdcHeralding,
    WaistScan,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::PsrSinglePhoton,
        ScenarioName::PsrPCrosstalk,
        ScenarioName::FwmTwoPhoton,
        ScenarioName::PdcBenchmark,
        ScenarioName::PdcEigenPump,
        ScenarioName::PdcHeralding,
        ScenarioName::WaistScan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::PsrSinglePhoton => "PsrSinglePhoton",
            ScenarioName::PsrPCrosstalk => "PsrPCrosstalk",
            ScenarioName::FwmTwoPhoton => "FwmTwoPhoton",
            ScenarioName::PdcBenchmark => "PdcBenchmark",
            ScenarioName::PdcEigenPump => "PdcEigenPump",
            ScenarioName::PdcHeralding => "PdcHeralding",
            ScenarioName::WaistScan => "WaistScan",
        }
    }

    /// The interaction type this scenario runs with.
    pub fn interaction(self) -> InteractionType {
        match self {
            ScenarioName::PsrSinglePhoton => InteractionType::DegenerateSingleBeam,
            ScenarioName::PsrPCrosstalk => InteractionType::PCrosstalkOnly,
            _ => InteractionType::FullCrosstalk,
        }
    }

    fn is_psr_family(self) -> bool {
        matches!(self, ScenarioName::PsrSinglePhoton | ScenarioName::PsrPCrosstalk | ScenarioName::FwmTwoPhoton)
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|n| n.as_str()).collect();
            Error::InvalidArgument(format!("unknown scenario {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Log-spaced (w_P, w_DC) grid in μm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    pub pump: [f64; 2],
    pub collection: [f64; 2],
    pub points: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self { pump: [50.0, 800.0], collection: [50.0, 800.0], points: 8 }
    }
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("pump", self.pump), ("collection", self.collection)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::InvalidArgument(format!("grid.{name} must satisfy 0 < lo ≤ hi, got [{lo}, {hi}]")));
            }
        }
        if self.points == 0 {
            return Err(Error::InvalidArgument("grid.points must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn pump_waists(&self) -> Vec<f64> {
        log_space(self.pump, self.points)
    }

    pub fn collection_waists(&self) -> Vec<f64> {
        log_space(self.collection, self.points)
    }
}

fn log_space([lo, hi]: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Heralding comparison settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeraldingOptions {
    /// Pump waist of the reference (benchmark) run, μm.
    pub reference_pump_waist: f64,
    /// Radial cutoff of the extended-basis occupation diagnostic.
    pub diagnostic_p_max: u32,
}

impl Default for HeraldingOptions {
    fn default() -> Self {
        Self { reference_pump_waist: 200.0, diagnostic_p_max: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "scenario")]
    pub name: ScenarioName,
    pub coupling: CouplingConfig,
    pub n_target: f64,
    /// Absolute gain to use instead of n̄ calibration. `None` runs the usual
    /// protocol (scale to `n_target`; PSR crosstalk runs freeze the gain
    /// calibrated on the single-beam baseline).
    pub fixed_gain: Option<f64>,
    #[serde(rename = "grid")]
    pub scan_grid: Option<ScanGrid>,
    pub heralding: Option<HeraldingOptions>,
    /// Re-run at ell_max = 2, p_max = 4 and report metric drift.
    pub convergence_check: bool,
}

pub const PSR_WAVELENGTH: f64 = 0.795;
pub const PSR_WAIST: f64 = 80.0;
pub const PDC_PUMP_WAVELENGTH: f64 = 0.405;
pub const PDC_SIGNAL_WAVELENGTH: f64 = 0.810;
pub const PDC_WAIST: f64 = 200.0;
/// 100 mm crystal.
pub const PDC_CRYSTAL_LENGTH: f64 = 100_000.0;

impl ScenarioConfig {
    /// Built-in geometry for a scenario.
    pub fn defaults(name: ScenarioName) -> Self {
        let basis = ModeBasis::new(1, 2).expect("default basis");
        let coupling = if name.is_psr_family() {
            let g = BeamGeometry::new(PSR_WAVELENGTH, PSR_WAIST, 0.0).expect("default geometry");
            CouplingConfig {
                interaction: name.interaction(),
                medium: MediumConfig::uniform(3.0 * g.rayleigh_zr, 0.0),
                pump1: PumpSpec::gaussian(g),
                pump2: Some(PumpSpec::gaussian(g)),
                collection: g,
                basis,
            }
        } else {
            let pump_waist = if name == ScenarioName::PdcHeralding { 2.0 * PDC_WAIST } else { PDC_WAIST };
            let pump = BeamGeometry::new(PDC_PUMP_WAVELENGTH, pump_waist, 0.0).expect("default geometry");
            CouplingConfig {
                interaction: name.interaction(),
                medium: MediumConfig::uniform(PDC_CRYSTAL_LENGTH, 0.0),
                pump1: PumpSpec::gaussian(pump),
                pump2: None,
                collection: BeamGeometry::new(PDC_SIGNAL_WAVELENGTH, PDC_WAIST, 0.0).expect("default geometry"),
                basis,
            }
        };
        Self {
            name,
            coupling,
            n_target: 1.0,
            fixed_gain: None,
            scan_grid: (name == ScenarioName::WaistScan).then(ScanGrid::default),
            heralding: (name == ScenarioName::PdcHeralding).then(HeraldingOptions::default),
            convergence_check: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.coupling.validate()?;
        if self.coupling.interaction != self.name.interaction() {
            return Err(Error::InvalidArgument(format!(
                "scenario {} runs with {:?}, config says {:?}",
                self.name,
                self.name.interaction(),
                self.coupling.interaction
            )));
        }
        if !(self.n_target > 0.0 && self.n_target.is_finite()) {
            return Err(Error::InvalidArgument(format!("n_target must be positive, got {}", self.n_target)));
        }
        if let Some(g) = self.fixed_gain {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::InvalidArgument(format!("fixed_gain must be ≥ 0, got {g}")));
            }
        }
        if let Some(grid) = &self.scan_grid {
            grid.validate()?;
        }
        if self.name == ScenarioName::WaistScan && self.scan_grid.is_none() {
            return Err(Error::InvalidArgument("WaistScan needs a grid".into()));
        }
        if let Some(h) = &self.heralding {
            if !(h.reference_pump_waist > 0.0 && h.reference_pump_waist.is_finite()) {
                return Err(Error::InvalidArgument("heralding.reference_pump_waist must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSummary {
    pub decomposition: EigenDecomposition,
    pub modes: Vec<EigenmodeStats>,
    /// n̄_λᵢ / Σ n̄_λ.
    pub nbar_fractions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanResult {
    pub pump_waists: Vec<f64>,
    pub collection_waists: Vec<f64>,
    /// metric[i][j] at (pump_waists[i], collection_waists[j]); `None` if the cell failed.
    pub metric: Vec<Vec<Option<f64>>>,
    pub failures: Vec<String>,
    pub argmax: (usize, usize),
    pub argmax_waists: (f64, f64),
    pub argmax_value: f64,
    /// 4-connected cells around the argmax with metric ≥ ½·max.
    pub island: Vec<(usize, usize)>,
    pub reference_waists: (f64, f64),
    /// Grid cells nearest (in log distance) to the reference waists.
    pub reference_cells: Vec<(usize, usize)>,
    pub reference_in_island: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSummary {
    pub ell_max: u32,
    pub p_max: u32,
    /// |metric(large) − metric(default)| / max(|metric(default)|, 1e-300), per metric.
    pub drift: BTreeMap<String, f64>,
    pub max_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOutcome {
    pub scenario: ScenarioName,
    pub basis: ModeBasis,
    #[serde(with = "linalg::serde_cmatrix")]
    pub xi: CMatrix,
    /// Absolute gain multiplying the raw overlaps (before the degenerate ½).
    pub gain: f64,
    pub report: StateReport,
    pub eigen: Option<EigenSummary>,
    /// Pump used for the run when it differs from a plain u₀₀.
    pub pump: Option<PumpSpec>,
    pub metrics: BTreeMap<String, f64>,
    pub scan: Option<ScanResult>,
    pub convergence: Option<ConvergenceSummary>,
}

/// Diagonal dominance Σᵢ|Mᵢᵢ| / Σᵢⱼ|Mᵢⱼ| of the pair-creation matrix.
pub fn diagonal_dominance(report: &StateReport) -> f64 {
    let m = &report.pair_matrix;
    let total: f64 = m.iter().map(|z| z.norm()).sum();
    let diag: f64 = (0..m.nrows()).map(|i| m[(i, i)].norm()).sum();
    if total > 0.0 {
        diag / total
    } else {
        0.0
    }
}

/// n̄₀₀ / Σᵢ n̄ᵢᵢ.
pub fn n00_fraction(report: &StateReport) -> f64 {
    let Some(k) = report.position(ModeIndex::new(0, 0)) else { return 0.0 };
    let tr: f64 = (0..report.dim()).map(|i| report.nbar_matrix[(i, i)].re).sum();
    if tr > 0.0 {
        report.nbar_matrix[(k, k)].re / tr
    } else {
        0.0
    }
}

/// |M₀₀| / Σᵢⱼ|Mᵢⱼ| × n̄₀₀ / Σᵢ n̄ᵢᵢ.
pub fn waist_metric(report: &StateReport) -> f64 {
    let Some(k) = report.position(ModeIndex::new(0, 0)) else { return 0.0 };
    let m = &report.pair_matrix;
    let total: f64 = m.iter().map(|z| z.norm()).sum();
    if total == 0.0 {
        return 0.0;
    }
    m[(k, k)].norm() / total * n00_fraction(report)
}

fn u00_position(report: &StateReport) -> Result<usize> {
    report.position(ModeIndex::new(0, 0)).ok_or_else(|| Error::InvalidArgument("basis lacks the u00 mode".into()))
}

fn with_gain(coupling: &CouplingConfig, gain: f64) -> CouplingConfig {
    let mut c = coupling.clone();
    c.medium.gain_scale = gain;
    c
}

struct Run {
    sq: SqueezeMatrix,
    gain: f64,
    report: StateReport,
}

// Assemble, then either scale to n̄ or keep the given absolute gain.
fn run_coupling(coupling: &CouplingConfig, n_target: f64, fixed_gain: Option<f64>) -> Result<Run> {
    let (sq, gain) = match fixed_gain {
        Some(g) => (assemble_squeeze_matrix(&with_gain(coupling, g))?, g),
        None => {
            let raw = assemble_squeeze_matrix(coupling)?;
            let (sq, s) = scale_to_mean_photons(&raw, n_target)?;
            (sq, coupling.medium.gain_scale * s)
        }
    };
    let report = state_report(&sq)?;
    Ok(Run { sq, gain, report })
}

fn eigen_summary(sq: &SqueezeMatrix) -> Result<EigenSummary> {
    let decomposition = decompose(sq)?;
    let modes = eigenmode_report(&decomposition);
    let total: f64 = modes.iter().map(|m| m.nbar).sum();
    let nbar_fractions = modes.iter().map(|m| if total > 0.0 { m.nbar / total } else { 0.0 }).collect();
    Ok(EigenSummary { decomposition, modes, nbar_fractions })
}

fn outcome(cfg: &ScenarioConfig, run: Run) -> ScenarioOutcome {
    ScenarioOutcome {
        scenario: cfg.name,
        basis: cfg.coupling.basis.clone(),
        xi: run.sq.xi().clone(),
        gain: run.gain,
        report: run.report,
        eigen: None,
        pump: None,
        metrics: BTreeMap::new(),
        scan: None,
        convergence: None,
    }
}

fn expect(cfg: &ScenarioConfig, name: ScenarioName) -> Result<()> {
    if cfg.name != name {
        return Err(Error::InvalidArgument(format!("config is for {}, not {name}", cfg.name)));
    }
    cfg.validate()
}

fn max_offdiag(m: &CMatrix, keep: impl Fn(usize, usize) -> bool) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && keep(i, j) {
                best = best.max(m[(i, j)].norm());
            }
        }
    }
    best
}

fn u00_metrics(metrics: &mut BTreeMap<String, f64>, prefix: &str, report: &StateReport) -> Result<()> {
    let k = u00_position(report)?;
    let v = report.var_x1[(k, k)].re;
    metrics.insert(format!("{prefix}u00_var_x1"), v);
    metrics.insert(format!("{prefix}u00_var_x1_normalized"), v / VACUUM_VARIANCE);
    metrics.insert(format!("{prefix}u00_db"), report.squeezing_db_per_mode[k]);
    Ok(())
}

/// Degenerate single-beam baseline, scaled to n̄ = n_target. The calibrated
/// gain is returned in [`ScenarioOutcome::gain`].
pub fn run_psr_single_photon(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    expect(cfg, ScenarioName::PsrSinglePhoton)?;
    let run = run_coupling(&cfg.coupling, cfg.n_target, cfg.fixed_gain)?;
    let mut out = outcome(cfg, run);
    let rep = &out.report;
    let order = cfg.coupling.basis.order();
    let mut m = BTreeMap::new();
    m.insert("gain".into(), out.gain);
    m.insert("nbar_total".into(), rep.nbar_total);
    u00_metrics(&mut m, "", rep)?;
    m.insert("offdiag_var_x1_max".into(), max_offdiag(&rep.var_x1, |_, _| true));
    m.insert("offdiag_cross_cov_max".into(), max_offdiag(&rep.cross_cov, |_, _| true));
    let nonzero_ell = (0..rep.dim())
        .flat_map(|i| (0..rep.dim()).map(move |j| (i, j)))
        .filter(|&(i, j)| order[i].ell != 0 || order[j].ell != 0)
        .map(|(i, j)| rep.nbar_matrix[(i, j)].norm())
        .fold(0.0, f64::max);
    m.insert("nonzero_ell_nbar_max".into(), nonzero_ell);
    out.metrics = m;
    Ok(out)
}

// Gain for the crosstalk runs: explicit, or calibrated on the degenerate baseline.
fn frozen_gain(cfg: &ScenarioConfig) -> Result<(f64, StateReport)> {
    let mut base = ScenarioConfig { name: ScenarioName::PsrSinglePhoton, ..cfg.clone() };
    base.coupling.interaction = InteractionType::DegenerateSingleBeam;
    base.convergence_check = false;
    let out = run_psr_single_photon(&base)?;
    Ok((out.gain, out.report))
}

fn run_psr_crosstalk(cfg: &ScenarioConfig, name: ScenarioName) -> Result<ScenarioOutcome> {
    expect(cfg, name)?;
    let (gain, baseline) = frozen_gain(cfg)?;
    let run = run_coupling(&cfg.coupling, cfg.n_target, Some(gain))?;
    let mut out = outcome(cfg, run);
    let rep = &out.report;
    let order = cfg.coupling.basis.order();
    let mut m = BTreeMap::new();
    m.insert("gain".into(), gain);
    m.insert("nbar_total".into(), rep.nbar_total);
    m.insert("baseline_nbar_total".into(), baseline.nbar_total);
    m.insert("nbar_ratio".into(), rep.nbar_total / baseline.nbar_total);
    u00_metrics(&mut m, "", rep)?;
    u00_metrics(&mut m, "baseline_", &baseline)?;
    let (v, vb) = (m["u00_var_x1"], m["baseline_u00_var_x1"]);
    m.insert("u00_noise_ratio".into(), v / vb);
    m.insert("u00_noise_increase_vacuum_units".into(), (v - vb) / VACUUM_VARIANCE);
    m.insert(
        "ell0_offdiag_var_x1_max".into(),
        max_offdiag(&rep.var_x1, |i, j| order[i].ell == 0 && order[j].ell == 0),
    );
    let opposite = (0..rep.dim())
        .flat_map(|i| (0..rep.dim()).map(move |j| (i, j)))
        .filter(|&(i, j)| order[i].ell != 0 && order[i].ell == -order[j].ell)
        .map(|(i, j)| rep.pair_matrix[(i, j)].norm())
        .fold(0.0, f64::max);
    m.insert("opposite_ell_pair_max".into(), opposite);
    out.metrics = m;
    Ok(out)
}

/// Two-beam run restricted to equal-ℓ pairs, at the gain frozen on the
/// single-beam baseline (or `fixed_gain`).
pub fn run_psr_p_crosstalk(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    run_psr_crosstalk(cfg, ScenarioName::PsrPCrosstalk)
}

/// Full OAM-conserving crosstalk at the frozen baseline gain.
pub fn run_fwm_two_photon(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    run_psr_crosstalk(cfg, ScenarioName::FwmTwoPhoton)
}

fn pdc_metrics(m: &mut BTreeMap<String, f64>, prefix: &str, rep: &StateReport, eig: &EigenSummary) -> Result<()> {
    u00_metrics(m, prefix, rep)?;
    let first = &eig.modes[0];
    m.insert(format!("{prefix}lambda1"), first.lambda);
    m.insert(format!("{prefix}lambda1_var"), first.variance_minus);
    m.insert(format!("{prefix}lambda1_var_normalized"), first.normalized_minus());
    m.insert(format!("{prefix}lambda1_db"), first.db_minus());
    m.insert(format!("{prefix}nbar_lambda1_fraction"), eig.nbar_fractions[0]);
    let u00 = m[&format!("{prefix}u00_var_x1")];
    m.insert(format!("{prefix}eigen_gap_db"), 10.0 * (u00 / first.variance_minus).log10());
    m.insert(format!("{prefix}diagonal_dominance"), diagonal_dominance(rep));
    m.insert(format!("{prefix}n00_fraction"), n00_fraction(rep));
    m.insert(format!("{prefix}waist_metric"), waist_metric(rep));
    m.insert(format!("{prefix}offdiag_var_x1_spread"), offdiag_spread(&rep.var_x1));
    Ok(())
}

/// Standard deviation of the off-diagonal moduli.
fn offdiag_spread(m: &CMatrix) -> f64 {
    let vals: Vec<f64> =
        (0..m.nrows()).flat_map(|i| (0..m.ncols()).filter(move |&j| j != i).map(move |j| (i, j))).map(|ij| m[ij].norm()).collect();
    if vals.is_empty() {
        return 0.0;
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt()
}

fn pdc_run(cfg: &ScenarioConfig) -> Result<(ScenarioOutcome, EigenSummary)> {
    let run = run_coupling(&cfg.coupling, cfg.n_target, cfg.fixed_gain)?;
    let eig = eigen_summary(&run.sq)?;
    let mut out = outcome(cfg, run);
    let mut m = BTreeMap::new();
    m.insert("gain".into(), out.gain);
    m.insert("nbar_total".into(), out.report.nbar_total);
    pdc_metrics(&mut m, "", &out.report, &eig)?;
    out.metrics = m;
    out.eigen = Some(eig.clone());
    Ok((out, eig))
}

/// χ⁽²⁾ benchmark with eigenmode analysis.
pub fn run_pdc_benchmark(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    expect(cfg, ScenarioName::PdcBenchmark)?;
    Ok(pdc_run(cfg)?.0)
}

/// Pump shaped as the first eigenmode of the benchmark ξ, expressed over
/// the configured basis.
pub fn eigen_pump_spec(cfg: &ScenarioConfig, benchmark: &EigenDecomposition) -> Result<PumpSpec> {
    let mut coeffs = eigenmode_pump(benchmark, 1)?;
    // clear eigensolver dust so OAM selection stays exact
    let max = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for z in coeffs.iter_mut() {
        if z.norm() < 1e-12 * max {
            *z = c(0.0);
        }
    }
    let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let coeffs = coeffs.into_iter().map(|z| z / norm).collect();
    PumpSpec::new(cfg.coupling.pump1.geometry, cfg.coupling.basis.clone(), coeffs)
}

/// Re-pumps with the benchmark's first eigenmode and compares.
pub fn run_pdc_eigen_pump(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    expect(cfg, ScenarioName::PdcEigenPump)?;
    let bench_cfg = ScenarioConfig { name: ScenarioName::PdcBenchmark, convergence_check: false, ..cfg.clone() };
    let (bench, bench_eig) = pdc_run(&bench_cfg)?;
    let pump = eigen_pump_spec(cfg, &bench_eig.decomposition)?;
    let mut pumped = cfg.clone();
    pumped.coupling.pump1 = pump.clone();
    let (mut out, _) = pdc_run(&pumped)?;
    pdc_metrics(&mut out.metrics, "benchmark_", &bench.report, &bench_eig)?;
    let m = &mut out.metrics;
    m.insert("lambda1_improvement_db_vs_benchmark_u00".into(), 10.0 * (m["benchmark_u00_var_x1"] / m["lambda1_var"]).log10());
    m.insert("lambda1_improvement_db_vs_benchmark_lambda1".into(), 10.0 * (m["benchmark_lambda1_var"] / m["lambda1_var"]).log10());
    out.pump = Some(pump);
    Ok(out)
}

/// Wider pump with the extended-basis occupation diagnostic.
pub fn run_pdc_heralding(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    expect(cfg, ScenarioName::PdcHeralding)?;
    let opts = cfg.heralding.clone().unwrap_or_default();
    let (mut out, _) = pdc_run(cfg)?;

    let mut reference = ScenarioConfig { name: ScenarioName::PdcBenchmark, convergence_check: false, ..cfg.clone() };
    let g = cfg.coupling.pump1.geometry;
    reference.coupling.pump1.geometry = BeamGeometry::new(g.wavelength, opts.reference_pump_waist, g.focus_z)?;
    let (reference, ref_eig) = pdc_run(&reference)?;
    pdc_metrics(&mut out.metrics, "reference_", &reference.report, &ref_eig)?;

    let mut wide = cfg.coupling.clone();
    wide.basis = ModeBasis::new(cfg.coupling.basis.ell_max() as i64, opts.diagnostic_p_max as i64)?;
    let diag = run_coupling(&wide, cfg.n_target, cfg.fixed_gain)?;
    let order = wide.basis.order();
    let occ: Vec<f64> = (0..order.len()).map(|i| diag.report.nbar_matrix[(i, i)].re).collect();
    let total: f64 = occ.iter().sum();
    let beyond: f64 = occ.iter().zip(order).filter(|(_, m)| m.p > 2).map(|(n, _)| n).sum();
    let peak = occ.iter().copied().fold(0.0, f64::max);
    let highest_p = occ.iter().zip(order).filter(|(n, _)| **n >= 1e-3 * peak).map(|(_, m)| m.p).max().unwrap_or(0);
    let m = &mut out.metrics;
    m.insert("diagnostic_p_max".into(), f64::from(opts.diagnostic_p_max));
    m.insert("diagnostic_occupation_beyond_p2".into(), if total > 0.0 { beyond / total } else { 0.0 });
    m.insert("diagnostic_highest_p_above_1e-3_of_peak".into(), f64::from(highest_p));
    Ok(out)
}

fn pdc_cell(cfg: &ScenarioConfig, wp: f64, wc: f64) -> Result<(f64, StateReport, SqueezeMatrix, f64)> {
    let mut coupling = cfg.coupling.clone();
    let p = coupling.pump1.geometry;
    coupling.pump1.geometry = BeamGeometry::new(p.wavelength, wp, p.focus_z)?;
    let col = coupling.collection;
    coupling.collection = BeamGeometry::new(col.wavelength, wc, col.focus_z)?;
    let run = run_coupling(&coupling, cfg.n_target, cfg.fixed_gain)?;
    Ok((waist_metric(&run.report), run.report, run.sq, run.gain))
}

/// Metric grid over (w_P, w_DC). Cells that fail are recorded and skipped.
pub fn run_waist_scan(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    expect(cfg, ScenarioName::WaistScan)?;
    let grid = cfg.scan_grid.clone().unwrap_or_default();
    let (wps, wcs) = (grid.pump_waists(), grid.collection_waists());
    let cells: Vec<(usize, usize)> = (0..wps.len()).flat_map(|i| (0..wcs.len()).map(move |j| (i, j))).collect();
    let values: Vec<Result<f64>> = cells.par_iter().map(|&(i, j)| pdc_cell(cfg, wps[i], wcs[j]).map(|r| r.0)).collect();

    let mut metric = vec![vec![None; wcs.len()]; wps.len()];
    let mut failures = Vec::new();
    for (&(i, j), v) in cells.iter().zip(values) {
        match v {
            Ok(x) => metric[i][j] = Some(x),
            Err(e) => failures.push(format!("w_P={} w_DC={}: {e}", wps[i], wcs[j])),
        }
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for &(i, j) in &cells {
        if let Some(x) = metric[i][j] {
            if best.is_none_or(|(_, _, b)| x > b) {
                best = Some((i, j, x));
            }
        }
    }
    let (bi, bj, bv) = best.ok_or_else(|| Error::Numerical(format!("every scan cell failed: {}", failures.join("; "))))?;

    let island = half_max_island(&metric, (bi, bj), bv);
    let reference_waists = (PDC_WAIST, PDC_WAIST);
    let reference_cells = nearest_cells(&wps, &wcs, reference_waists);
    let reference_in_island = reference_cells.iter().any(|c| island.contains(c));

    let (_, report, sq, gain) = pdc_cell(cfg, wps[bi], wcs[bj])?;
    let mut out = outcome(cfg, Run { sq, gain, report });
    let m = &mut out.metrics;
    m.insert("argmax_pump_waist".into(), wps[bi]);
    m.insert("argmax_collection_waist".into(), wcs[bj]);
    m.insert("argmax_value".into(), bv);
    m.insert("island_size".into(), island.len() as f64);
    m.insert("reference_in_island".into(), if reference_in_island { 1.0 } else { 0.0 });
    m.insert("failed_cells".into(), failures.len() as f64);
    let ref_best = reference_cells.iter().filter_map(|&(i, j)| metric[i][j]).fold(0.0, f64::max);
    m.insert("reference_cell_value".into(), ref_best);
    out.scan = Some(ScanResult {
        pump_waists: wps,
        collection_waists: wcs,
        metric,
        failures,
        argmax: (bi, bj),
        argmax_waists: (out.metrics["argmax_pump_waist"], out.metrics["argmax_collection_waist"]),
        argmax_value: bv,
        island,
        reference_waists,
        reference_cells,
        reference_in_island,
    });
    Ok(out)
}

/// Flood fill (4-connected) from `start` over cells with metric ≥ max/2.
pub fn half_max_island(metric: &[Vec<Option<f64>>], start: (usize, usize), max: f64) -> Vec<(usize, usize)> {
    let rows = metric.len();
    let cols = metric.first().map_or(0, Vec::len);
    let inside = |i: usize, j: usize| metric[i][j].is_some_and(|x| x >= 0.5 * max);
    let mut seen = vec![vec![false; cols]; rows];
    let mut stack = vec![start];
    let mut island = Vec::new();
    while let Some((i, j)) = stack.pop() {
        if seen[i][j] || !inside(i, j) {
            continue;
        }
        seen[i][j] = true;
        island.push((i, j));
        if i > 0 {
            stack.push((i - 1, j));
        }
        if i + 1 < rows {
            stack.push((i + 1, j));
        }
        if j > 0 {
            stack.push((i, j - 1));
        }
        if j + 1 < cols {
            stack.push((i, j + 1));
        }
    }
    island.sort_unstable();
    island
}

/// All cells tied (within 1e-9) for the smallest log-distance to `target`.
pub fn nearest_cells(wps: &[f64], wcs: &[f64], target: (f64, f64)) -> Vec<(usize, usize)> {
    let dist = |i: usize, j: usize| ((wps[i] / target.0).ln().powi(2) + (wcs[j] / target.1).ln().powi(2)).sqrt();
    let all: Vec<(usize, usize)> = (0..wps.len()).flat_map(|i| (0..wcs.len()).map(move |j| (i, j))).collect();
    let best = all.iter().map(|&(i, j)| dist(i, j)).fold(f64::INFINITY, f64::min);
    all.into_iter().filter(|&(i, j)| dist(i, j) <= best + 1e-9).collect()
}

/// Runs the configured scenario, plus the basis-size convergence check when
/// requested.
pub fn run(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let mut out = run_once(cfg)?;
    if cfg.convergence_check && cfg.name != ScenarioName::WaistScan {
        out.convergence = Some(convergence(cfg, &out)?);
    }
    Ok(out)
}

fn run_once(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    match cfg.name {
        ScenarioName::PsrSinglePhoton => run_psr_single_photon(cfg),
        ScenarioName::PsrPCrosstalk => run_psr_p_crosstalk(cfg),
        ScenarioName::FwmTwoPhoton => run_fwm_two_photon(cfg),
        ScenarioName::PdcBenchmark => run_pdc_benchmark(cfg),
        ScenarioName::PdcEigenPump => run_pdc_eigen_pump(cfg),
        ScenarioName::PdcHeralding => run_pdc_heralding(cfg),
        ScenarioName::WaistScan => run_waist_scan(cfg),
    }
}

pub const CONVERGENCE_BASIS: (u32, u32) = (2, 4);

fn convergence(cfg: &ScenarioConfig, base: &ScenarioOutcome) -> Result<ConvergenceSummary> {
    let (ell_max, p_max) = CONVERGENCE_BASIS;
    let mut big = cfg.clone();
    big.convergence_check = false;
    big.coupling.basis = ModeBasis::new(ell_max.into(), p_max.into())?;
    let other = run_once(&big)?;
    let drift: BTreeMap<String, f64> = base
        .metrics
        .iter()
        .filter_map(|(k, &v)| other.metrics.get(k).map(|&w| (k.clone(), (w - v).abs() / v.abs().max(1e-300))))
        .collect();
    let max_drift = drift.values().copied().fold(0.0, f64::max);
    Ok(ConvergenceSummary { ell_max, p_max, drift, max_drift })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for n in ScenarioName::ALL {
            assert_eq!(n.as_str().parse::<ScenarioName>().unwrap(), n);
            assert_eq!(serde_json::to_string(&n).unwrap(), format!("\"{n}\""));
        }
        assert!("Nope".parse::<ScenarioName>().is_err());
    }

    #[test]
    fn default_grid_is_log_spaced() {
        let w = ScanGrid::default().pump_waists();
        assert_eq!(w.len(), 8);
        assert_eq!((w[0], w[7]), (50.0, 800.0));
        assert!((w[1] - 74.3).abs() < 0.05 && (w[3] - 164.1).abs() < 0.05);
    }

    #[test]
    fn island_flood_fill() {
        let g = |x: f64| Some(x);
        let metric = vec![vec![g(1.0), g(0.6), g(0.1)], vec![g(0.2), g(0.5), None], vec![g(0.9), g(0.1), g(0.8)]];
        let island = half_max_island(&metric, (0, 0), 1.0);
        assert_eq!(island, vec![(0, 0), (0, 1), (1, 1)]);
        let near = nearest_cells(&[50.0, 100.0, 400.0], &[50.0, 200.0, 800.0], (200.0, 200.0));
        assert_eq!(near, vec![(1, 1), (2, 1)]);
    }

    #[test]
    fn psr_baseline_is_diagonal_and_scaled() {
        let cfg = ScenarioConfig::defaults(ScenarioName::PsrSinglePhoton);
        let out = run_psr_single_photon(&cfg).unwrap();
        assert!((out.report.nbar_total - 1.0).abs() < 1e-9);
        assert!(out.metrics["offdiag_var_x1_max"] < 1e-15);
        assert!(out.metrics["nonzero_ell_nbar_max"] < 1e-15);
    }

    #[test]
    fn mismatched_interaction_is_rejected() {
        let mut cfg = ScenarioConfig::defaults(ScenarioName::PdcBenchmark);
        cfg.coupling.interaction = InteractionType::PCrosstalkOnly;
        assert!(run(&cfg).is_err());
        let cfg = ScenarioConfig::defaults(ScenarioName::PdcBenchmark);
        assert!(run_psr_single_photon(&cfg).is_err());
    }
}

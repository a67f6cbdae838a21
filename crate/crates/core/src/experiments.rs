//! Experiment orchestration: configs, runners and run reports.
//!
//! A run is a pure function of its [`ExperimentConfig`] (seed included) and
//! the crate version. Worker pools only change how fast it finishes; every
//! parallel map is collected in input order before aggregation.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::analytic::{uniform_grid, DensityModel, PredictionCurve};
use crate::charpoly::CharPoly;
use crate::ellcurve::{
    partition_by_sign, root_number, Curve, CurveSummary, FamilyKind, FamilyOrdering, FamilySpec, LData,
};
use crate::ensembles::{sample_ensemble, EigenangleSample, EnsembleKind, EnsembleSpec, McmcParams};
use crate::error::{Error, Result};
use crate::leval::{
    central_derivative, central_order, find_zeros, functional_equation_residual, numeric_sign, prepare, EvalParams, ZeroList,
};
use crate::spectra::{
    moment_estimator, nn_spacing, one_level_density, pair_correlation, unfold, unfold_lzeros, BinSpec,
    DensityTable, UnfoldedZeros,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Note attached to every exponent fit.
pub const FIT_NOTE: &str = "leading-order, desk-scale fit only";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Sample,
    EnsembleDensity,
    EnsembleMoments,
    EcDensity,
    EcMoments,
    Compare,
    Analytic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    #[default]
    OneLevel,
    PairCorrelation,
    NnSpacing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub kind: EnsembleKind,
    /// Matrix dimension `M`.
    pub dimension: usize,
    #[serde(default)]
    pub r: usize,
    /// Independent Model only; defaults to `(-1)^M`.
    #[serde(default)]
    pub sign: Option<i8>,
    pub samples: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default)]
    pub statistic: Statistic,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub thinning: Option<usize>,
    #[serde(default)]
    pub proposal_width: Option<f64>,
}

fn default_chains() -> usize {
    8
}

impl EnsembleConfig {
    pub fn spec(&self) -> Result<EnsembleSpec> {
        let sign = if self.kind == EnsembleKind::Independent { self.sign } else { None };
        if self.sign.is_some() && self.kind != EnsembleKind::Independent {
            return config_err("ensemble.sign applies to the independent model only");
        }
        EnsembleSpec::new(self.kind, self.dimension, self.r, sign)
    }

    fn mcmc(&self, spec: &EnsembleSpec, seed: u64) -> Result<McmcParams> {
        let mut p = McmcParams::for_spec(spec, seed);
        if let Some(b) = self.burn_in {
            p.burn_in = b;
        }
        if let Some(t) = self.thinning {
            p.thinning = t;
        }
        if let Some(w) = self.proposal_width {
            p.proposal_width = w;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    F1,
    F2,
    F4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignClass {
    Minus,
    Plus,
}

impl SignClass {
    pub fn sign(self) -> i8 {
        match self {
            SignClass::Minus => -1,
            SignClass::Plus => 1,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            SignClass::Minus => "minus",
            SignClass::Plus => "plus",
        }
    }
}

/// What to do with a curve whose zeros or functional equation fail to check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailurePolicy {
    #[default]
    Drop,
    Abort,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyName,
    pub x: f64,
    /// F4 coefficient polynomials in `T`, constant term first.
    #[serde(default)]
    pub a_poly: Vec<i64>,
    #[serde(default)]
    pub b_poly: Vec<i64>,
    #[serde(default = "yes")]
    pub semistable_only: bool,
    #[serde(default)]
    pub ordering: FamilyOrdering,
    #[serde(default = "default_max_curves")]
    pub max_curves: usize,
    #[serde(default = "default_signs")]
    pub signs: Vec<SignClass>,
    #[serde(default)]
    pub numeric_sign_fallback: bool,
    /// Rank forced by the family's construction; F2 defaults to 1, others to 0.
    #[serde(default)]
    pub forced_rank: Option<usize>,
    /// Overrides the `round(log X)` matrix size.
    #[serde(default)]
    pub matrix_size: Option<usize>,
    #[serde(default = "default_max_height")]
    pub max_height: f64,
    #[serde(default = "default_fe_tolerance")]
    pub fe_tolerance: f64,
    #[serde(default)]
    pub on_failure: FailurePolicy,
}

fn yes() -> bool {
    true
}
fn default_max_curves() -> usize {
    10_000
}
fn default_signs() -> Vec<SignClass> {
    vec![SignClass::Minus]
}
fn default_max_height() -> f64 {
    30.0
}
fn default_fe_tolerance() -> f64 {
    1e-6
}

impl FamilyConfig {
    pub fn spec_at(&self, x: f64) -> Result<FamilySpec> {
        let kind = match self.kind {
            FamilyName::F1 => FamilyKind::F1,
            FamilyName::F2 => FamilyKind::F2,
            FamilyName::F4 => FamilyKind::F4 { a_poly: self.a_poly.clone(), b_poly: self.b_poly.clone() },
        };
        let mut spec = FamilySpec::new(kind, x)?;
        spec.semistable_only = self.semistable_only;
        spec.ordering = self.ordering;
        Ok(spec)
    }

    pub fn forced_rank(&self) -> usize {
        self.forced_rank.unwrap_or(match self.kind {
            FamilyName::F2 => 1,
            _ => 0,
        })
    }

    pub fn matrix_size(&self, x: f64) -> usize {
        self.matrix_size.unwrap_or_else(|| EnsembleSpec::matrix_size_for_scale(x))
    }

    fn label(&self) -> &'static str {
        match self.kind {
            FamilyName::F1 => "f1",
            FamilyName::F2 => "f2",
            FamilyName::F4 => "f4",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentModel {
    /// `SO(2N+1)`.
    #[default]
    SoOdd,
    /// `I_1 ⊕ SO(2N)`: even orthogonal spectrum with one inserted zero.
    ForcedEven,
}

impl MomentModel {
    pub fn spec(self, n: usize) -> Result<EnsembleSpec> {
        match self {
            MomentModel::SoOdd => EnsembleSpec::so_odd(2 * n + 1),
            MomentModel::ForcedEven => EnsembleSpec::independent(2 * n + 1, 1, -1),
        }
    }

    /// Predicted growth exponent of `E|Λ'(1)|^k` in `N`.
    pub fn expected_exponent(self, k: u32) -> f64 {
        let k = k as f64;
        match self {
            MomentModel::SoOdd => k * (k + 1.0) / 2.0,
            MomentModel::ForcedEven => k * (k - 1.0) / 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default)]
    pub model: MomentModel,
    /// Half-sizes `N` for ensemble runs, family sizes `X` for curve runs.
    pub ladder: Vec<f64>,
    #[serde(default = "default_moment_samples")]
    pub samples: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
}

fn default_k() -> u32 {
    1
}
fn default_moment_samples() -> usize {
    4000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub report_a: PathBuf,
    pub report_b: PathBuf,
    /// `max |z|` above which two densities are called distinguishable.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    5.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    /// Labels such as `so_even` or `interaction_r3`.
    pub models: Vec<String>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    500
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: BinSpec,
    #[serde(default)]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub moments: Option<MomentsConfig>,
    #[serde(default)]
    pub compare: Option<CompareConfig>,
    #[serde(default)]
    pub analytic: Option<AnalyticConfig>,
    #[serde(default)]
    pub eval: EvalParams,
    /// Fails the run's check when any overlay discrepancy exceeds this.
    #[serde(default)]
    pub max_discrepancy: Option<f64>,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// A config for a single experiment: its kind settled, seed present,
    /// required sections present, counts positive.
    pub fn resolve(mut self, kind: Option<ExperimentKind>, seed: Option<u64>) -> Result<Self> {
        let kind = match (self.experiment, kind) {
            (Some(a), Some(b)) if a != b => {
                return config_err(format!("config declares {a:?} but {b:?} was requested"))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return config_err("experiment kind missing"),
        };
        self.experiment = Some(kind);
        if seed.is_some() {
            self.seed = seed;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.experiment.ok_or_else(|| Error::Config("experiment kind missing".into()))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("seed is mandatory".into()))
    }

    fn ensemble(&self) -> Result<&EnsembleConfig> {
        self.ensemble.as_ref().ok_or_else(|| Error::Config("[ensemble] section missing".into()))
    }

    fn family(&self) -> Result<&FamilyConfig> {
        self.family.as_ref().ok_or_else(|| Error::Config("[family] section missing".into()))
    }

    fn moments(&self) -> Result<&MomentsConfig> {
        self.moments.as_ref().ok_or_else(|| Error::Config("[moments] section missing".into()))
    }

    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        let kind = self.kind()?;
        if kind != Analytic && kind != Compare {
            self.seed()?;
        }
        if !(self.grid.max > 0.0) || self.grid.bins == 0 {
            return config_err(format!("bad grid: max {}, bins {}", self.grid.max, self.grid.bins));
        }
        self.eval.validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(e) = &self.ensemble {
            if e.samples == 0 || e.chains == 0 || e.dimension == 0 {
                return config_err("ensemble counts must be positive");
            }
        }
        if let Some(f) = &self.family {
            if !(f.x >= 1.0) || f.max_curves == 0 || f.signs.is_empty() {
                return config_err("family needs x >= 1, max_curves > 0 and at least one sign");
            }
            if f.kind == FamilyName::F4 && (f.a_poly.is_empty() || f.b_poly.is_empty()) {
                return config_err("f4 needs a_poly and b_poly");
            }
        }
        if let Some(m) = &self.moments {
            if m.k == 0 || m.samples == 0 || m.chains == 0 {
                return config_err("moment order and counts must be positive");
            }
            if m.ladder.len() < 4 {
                return config_err("exponent fits need at least 4 ladder points");
            }
            if m.ladder.iter().any(|&v| !(v >= 1.0)) {
                return config_err("ladder values must be >= 1");
            }
        }
        match kind {
            Sample | EnsembleDensity => {
                self.ensemble()?;
            }
            EnsembleMoments => {
                let m = self.moments()?;
                if m.ladder.iter().any(|v| v.fract() != 0.0) {
                    return config_err("ensemble ladder values are integer half-sizes N");
                }
            }
            EcDensity => {
                self.family()?;
            }
            EcMoments => {
                self.family()?;
                let m = self.moments()?;
                if m.ladder.iter().any(|&v| v <= 1.0) {
                    return config_err("family ladder values must exceed 1");
                }
            }
            Compare => {
                if self.compare.is_none() {
                    return config_err("[compare] section missing");
                }
            }
            Analytic => match &self.analytic {
                None => return config_err("[analytic] section missing"),
                Some(a) => {
                    if a.points < 2 {
                        return config_err("analytic.points must be at least 2");
                    }
                    for m in &a.models {
                        m.parse::<DensityModel>().map_err(|e| Error::Config(e.to_string()))?;
                    }
                }
            },
        }
        Ok(())
    }
}

/// A named density estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedDensity {
    pub name: String,
    pub table: DensityTable,
}

/// An analytic curve laid over a density: bin averages plus a fine tabulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub target: String,
    pub model: DensityModel,
    pub label: String,
    pub bin_values: Vec<f64>,
    pub curve: PredictionCurve<f64>,
}

impl Overlay {
    pub fn new(target: &str, model: DensityModel, grid: &BinSpec) -> Result<Self> {
        Ok(Self {
            target: target.to_string(),
            model,
            label: model.label(),
            bin_values: model.bin_averages(&grid.edges()),
            curve: PredictionCurve::tabulate(model, uniform_grid(grid.max, 500))?,
        })
    }

    pub fn file_stem(&self) -> String {
        format!("overlay_{}_{}", self.target, self.label)
    }
}

/// Worst per-bin disagreement between a density and an overlay, in standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancySummary {
    pub density: String,
    pub overlay: String,
    pub max: f64,
    pub worst_bin: usize,
    pub per_bin: Vec<f64>,
}

/// Pooled unfolded values inside the grid, kept for two-sample tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledValues {
    pub name: String,
    pub sets: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    /// `N` or `X`.
    pub scale: f64,
    /// Regression abscissa: `log N` or `log log X`.
    pub log_scale: f64,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
    pub expected: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub name: String,
    pub k: u32,
    pub rows: Vec<MomentRow>,
    pub fit: Option<ExponentFit>,
}

impl MomentTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,log_scale,mean,stderr,count\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.scale, r.log_scale, r.mean, r.stderr, r.count);
        }
        out
    }

    pub fn to_gnuplot(&self) -> String {
        let mut out = format!("# log_scale log_mean ({})\n", self.name);
        for r in &self.rows {
            let _ = writeln!(out, "{} {}", r.log_scale, r.mean.ln());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveStatus {
    Used,
    /// Zeros up to the grid would need a height beyond the limit.
    TooTall,
    MissingZeros,
    FunctionalEquation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub summary: CurveSummary,
    pub status: CurveStatus,
    pub height: f64,
    pub central_order: Option<usize>,
    /// `L'(½)` for odd sign, `L(½)` for even sign.
    pub central_value: Option<f64>,
    pub zeros: Vec<f64>,
    pub bracket_widths: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropCounts {
    pub too_tall: usize,
    pub missing_zeros: usize,
    pub functional_equation: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderCount {
    pub order: usize,
    pub count: usize,
}

/// One sign class of one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRun {
    pub name: String,
    pub x: f64,
    pub sign: i8,
    pub matrix_size: usize,
    pub sampled: usize,
    pub plus: usize,
    pub minus: usize,
    pub undetermined: usize,
    pub considered: usize,
    pub used: usize,
    pub dropped: DropCounts,
    pub central_orders: Vec<OrderCount>,
    /// Used curves whose central order exceeds the parity-forced one; kept in
    /// densities, left out of central-value moments.
    pub excess_central_order: usize,
    /// Curves entering the central-value moments.
    pub moment_count: usize,
    pub mean_central_value: Option<f64>,
    pub central_value_stderr: Option<f64>,
    pub leading_mass: Option<(f64, f64)>,
    pub records: Vec<CurveRecord>,
}

impl FamilyRun {
    pub fn summaries_csv(&self) -> String {
        let rows: Vec<CurveSummary> = self.records.iter().map(|r| r.summary.clone()).collect();
        crate::ellcurve::summaries_to_csv(&rows)
    }

    pub fn status_csv(&self) -> String {
        let mut out = String::from("a,b,status,height,central_order,central_value,zeros\n");
        for r in &self.records {
            let status = serde_json::to_value(r.status).expect("plain enum");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.summary.a,
                r.summary.b,
                status.as_str().unwrap_or_default(),
                r.height,
                r.central_order.map_or(String::new(), |o| o.to_string()),
                r.central_value.map_or(String::new(), |v| v.to_string()),
                r.zeros.len()
            );
        }
        out
    }

    pub fn zeros_csv(&self) -> String {
        let mut out = String::from(ZeroList::CSV_HEADER);
        for r in self.records.iter().filter(|r| r.status == CurveStatus::Used) {
            let id = format!("\"[{},{}]\"", r.summary.a, r.summary.b);
            for (j, (g, w)) in r.zeros.iter().zip(&r.bracket_widths).enumerate() {
                let _ = writeln!(out, "{id},{},{g:.12},{w:.3e}", j + 1);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub density: String,
    pub edges: Vec<f64>,
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    pub ks_statistic: Option<f64>,
    pub ks_p_value: Option<f64>,
    pub distinguishable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub threshold: f64,
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("density,bin_left,bin_right,z\n");
        for row in &self.rows {
            for (i, z) in row.z.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", row.density, row.edges[i], row.edges[i + 1], z);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub seed: Option<u64>,
    pub config: ExperimentConfig,
    #[serde(default)]
    pub densities: Vec<NamedDensity>,
    #[serde(default)]
    pub overlays: Vec<Overlay>,
    #[serde(default)]
    pub discrepancies: Vec<DiscrepancySummary>,
    #[serde(default)]
    pub moments: Vec<MomentTable>,
    #[serde(default)]
    pub families: Vec<FamilyRun>,
    #[serde(default)]
    pub pooled: Vec<PooledValues>,
    #[serde(default)]
    pub comparison: Option<CompareTable>,
    #[serde(default)]
    pub checks: Vec<CheckResult>,
    #[serde(default)]
    pub notes: Vec<String>,
    /// Kept out of the serialized report so replays compare byte for byte.
    #[serde(skip)]
    pub wall_time_seconds: f64,
}

impl RunReport {
    fn new(config: &ExperimentConfig) -> Self {
        Self {
            version: VERSION.to_string(),
            seed: config.seed,
            config: config.clone(),
            densities: Vec::new(),
            overlays: Vec::new(),
            discrepancies: Vec::new(),
            moments: Vec::new(),
            families: Vec::new(),
            pooled: Vec::new(),
            comparison: None,
            checks: Vec::new(),
            notes: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("unreadable report: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn density(&self, name: &str) -> Option<&DensityTable> {
        self.densities.iter().find(|d| d.name == name).map(|d| &d.table)
    }

    pub fn family(&self, name: &str) -> Option<&FamilyRun> {
        self.families.iter().find(|f| f.name == name)
    }

    /// Writes `report.json`, `timing.json` and every table as CSV plus a gnuplot file.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        put("report.json".into(), self.to_json())?;
        put("timing.json".into(), format!("{{\n  \"wall_time_seconds\": {}\n}}\n", self.wall_time_seconds))?;
        for d in &self.densities {
            put(format!("density_{}.csv", d.name), d.table.to_csv())?;
            put(format!("density_{}.dat", d.name), d.table.to_gnuplot())?;
        }
        for o in &self.overlays {
            put(format!("{}.csv", o.file_stem()), o.curve.to_csv())?;
            put(format!("{}.dat", o.file_stem()), o.curve.to_gnuplot())?;
        }
        for m in &self.moments {
            put(format!("moments_{}.csv", m.name), m.to_csv())?;
            put(format!("moments_{}.dat", m.name), m.to_gnuplot())?;
        }
        for f in &self.families {
            put(format!("curves_{}.csv", f.name), f.summaries_csv())?;
            put(format!("status_{}.csv", f.name), f.status_csv())?;
            put(format!("zeros_{}.csv", f.name), f.zeros_csv())?;
        }
        if let Some(c) = &self.comparison {
            put("compare.csv".into(), c.to_csv())?;
        }
        Ok(written)
    }
}

/// Independent substream seed for work item `i`.
pub fn derive_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs whatever the config describes.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let start = std::time::Instant::now();
    let mut report = match config.kind()? {
        ExperimentKind::Sample => run_sample(config)?.0,
        ExperimentKind::EnsembleDensity => run_ensemble_density(config)?,
        ExperimentKind::EnsembleMoments | ExperimentKind::EcMoments => run_moments(config)?,
        ExperimentKind::EcDensity => run_ec_density(config)?,
        ExperimentKind::Compare => run_compare(config)?,
        ExperimentKind::Analytic => run_analytic(config)?,
    };
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn draw(config: &ExperimentConfig) -> Result<(EnsembleSpec, Vec<EigenangleSample>)> {
    let e = config.ensemble()?;
    let spec = e.spec()?;
    let mcmc = e.mcmc(&spec, config.seed()?)?;
    let samples = sample_ensemble(&spec, &mcmc, e.samples, e.chains)?;
    Ok((spec, samples))
}

/// Raw draws; the report carries only bookkeeping.
pub fn run_sample(config: &ExperimentConfig) -> Result<(RunReport, Vec<EigenangleSample>)> {
    let (spec, samples) = draw(config)?;
    let mut report = RunReport::new(config);
    report.notes.push(format!(
        "{} samples of {:?}, dimension {}, {} free angles",
        samples.len(),
        spec.kind,
        spec.matrix_dimension,
        spec.free_angle_count
    ));
    Ok((report, samples))
}

/// `sample,j,angle` rows.
pub fn samples_to_csv(samples: &[EigenangleSample]) -> String {
    let mut out = String::from("sample,j,angle\n");
    for (i, s) in samples.iter().enumerate() {
        for (j, a) in s.angles.iter().enumerate() {
            let _ = writeln!(out, "{i},{},{a}", j + 1);
        }
    }
    out
}

/// The limiting curve a statistic of `spec` should follow, if one is known.
pub fn ensemble_overlay(spec: &EnsembleSpec, statistic: Statistic) -> Result<Option<DensityModel>> {
    Ok(match statistic {
        Statistic::OneLevel => Some(match spec.kind {
            EnsembleKind::Unitary => DensityModel::Unitary,
            EnsembleKind::SoEven => DensityModel::SoEven,
            EnsembleKind::SoOdd => DensityModel::SoOdd,
            EnsembleKind::Symplectic => DensityModel::Symplectic,
            EnsembleKind::Interaction => DensityModel::Interaction(spec.forced_multiplicity),
            EnsembleKind::Independent => match spec.independent_base()?.kind {
                EnsembleKind::SoOdd => DensityModel::SoOdd,
                _ => DensityModel::SoEven,
            },
        }),
        Statistic::PairCorrelation if spec.kind.is_unitary() => Some(DensityModel::SineKernel),
        _ => None,
    })
}

/// Independent-model and Interaction-model curves for a family with `forced_rank`
/// constructed zeros and sign `sign`.
pub fn family_overlays(forced_rank: usize, sign: i8) -> [DensityModel; 2] {
    let base_odd = (forced_rank % 2 == 1) != (sign < 0);
    let independent = if base_odd { DensityModel::SoOdd } else { DensityModel::SoEven };
    [independent, DensityModel::Interaction(forced_rank + usize::from(base_odd))]
}

fn pooled(name: &str, sets: &[UnfoldedZeros], grid: &BinSpec) -> PooledValues {
    PooledValues {
        name: name.to_string(),
        sets: sets.len(),
        values: sets
            .iter()
            .flat_map(|s| s.values.iter().copied().filter(|&v| v >= 0.0 && v < grid.max))
            .collect(),
    }
}

fn add_overlay(report: &mut RunReport, target: &str, table: &DensityTable, model: DensityModel) -> Result<()> {
    let grid = BinSpec::new(*table.edges.last().expect("nonempty grid"), table.bins())?;
    let overlay = Overlay::new(target, model, &grid)?;
    let per_bin = table.discrepancies(&overlay.bin_values)?;
    let (worst_bin, max) = per_bin
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    if let Some(limit) = report.config.max_discrepancy {
        report.checks.push(CheckResult {
            name: format!("discrepancy {target} vs {}", overlay.label),
            value: max,
            threshold: limit,
            passed: max <= limit,
        });
    }
    report.discrepancies.push(DiscrepancySummary {
        density: target.to_string(),
        overlay: overlay.label.clone(),
        max,
        worst_bin,
        per_bin,
    });
    report.overlays.push(overlay);
    Ok(())
}

fn statistic_table(statistic: Statistic, sets: &[UnfoldedZeros], grid: &BinSpec) -> Result<DensityTable> {
    match statistic {
        Statistic::OneLevel => one_level_density(sets, grid),
        Statistic::PairCorrelation => pair_correlation(sets, grid),
        Statistic::NnSpacing => nn_spacing(sets, grid),
    }
}

fn ensemble_name(spec: &EnsembleSpec) -> String {
    let kind = serde_json::to_value(spec.kind).expect("plain enum");
    let kind = kind.as_str().unwrap_or("ensemble");
    match spec.kind {
        EnsembleKind::Interaction | EnsembleKind::Independent => {
            format!("{kind}_m{}_r{}", spec.matrix_dimension, spec.forced_multiplicity)
        }
        _ => format!("{kind}_m{}", spec.matrix_dimension),
    }
}

/// Samples, unfolds, bins and overlays the matching limiting curve.
pub fn run_ensemble_density(config: &ExperimentConfig) -> Result<RunReport> {
    let e = config.ensemble()?;
    let (spec, samples) = draw(config)?;
    let sets: Vec<UnfoldedZeros> = samples.iter().map(unfold).collect();
    let table = statistic_table(e.statistic, &sets, &config.grid)?;
    let name = ensemble_name(&spec);
    let mut report = RunReport::new(config);
    if let Some(model) = ensemble_overlay(&spec, e.statistic)? {
        add_overlay(&mut report, &name, &table, model)?;
    } else {
        report.notes.push(format!("no closed-form overlay for {:?} of {name}", e.statistic));
    }
    report.pooled.push(pooled(&name, &sets, &config.grid));
    report.densities.push(NamedDensity { name, table });
    Ok(report)
}

fn process_curve(
    curve: Curve,
    sign: i8,
    grid: &BinSpec,
    family: &FamilyConfig,
    params: &EvalParams,
) -> Result<CurveRecord> {
    let mut l = LData::new(curve, 1).with_root_number(sign);
    let c = l.refined_conductor;
    let height = grid.max * 2.0 * PI / c;
    let mut record = CurveRecord {
        summary: l.summary(),
        status: CurveStatus::TooTall,
        height,
        central_order: None,
        central_value: None,
        zeros: Vec::new(),
        bracket_widths: Vec::new(),
    };
    if !(height <= family.max_height) {
        return Ok(record);
    }
    prepare(&mut l, height, params);
    let residual = functional_equation_residual(&l, Complex64::new(0.75, 0.5), params)?;
    if !(residual <= family.fe_tolerance) {
        record.status = CurveStatus::FunctionalEquation;
        return Ok(record);
    }
    let zeros = match find_zeros(&l, height, params) {
        Ok(z) => z,
        Err(Error::MissingZeros { .. }) => {
            record.status = CurveStatus::MissingZeros;
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    let derivative = if sign < 0 { 1 } else { 0 };
    record.central_value = Some(central_derivative(&l, derivative, params)?);
    record.central_order = Some(zeros.central_order);
    record.bracket_widths = zeros.brackets.iter().map(|(lo, hi)| hi - lo).collect();
    record.zeros = zeros.ordinates;
    record.status = CurveStatus::Used;
    Ok(record)
}

/// Signs for `curves`, by closed form or numerically when allowed.
fn family_partition(
    curves: &[Curve],
    family: &FamilyConfig,
    params: &EvalParams,
) -> Result<crate::ellcurve::SignPartition> {
    let fallback = |c: &Curve| -> Option<i8> {
        let mut l = LData::new(*c, 1);
        prepare(&mut l, 2.0, params);
        numeric_sign(&l, params).ok()
    };
    let part = if family.numeric_sign_fallback {
        partition_by_sign(curves, Some(&fallback))
    } else {
        partition_by_sign(curves, None)
    };
    if !family.numeric_sign_fallback {
        if let Some(c) = part.undetermined.first() {
            root_number(c)?;
        }
    }
    Ok(part)
}

fn family_curves(config: &ExperimentConfig, x: f64, seed: u64) -> Result<Vec<Curve>> {
    let family = config.family()?;
    family.spec_at(x)?.sample(family.max_curves, seed)
}

fn run_family_class(
    config: &ExperimentConfig,
    x: f64,
    class: SignClass,
    curves: &[Curve],
    part: &crate::ellcurve::SignPartition,
    with_zeros: bool,
) -> Result<(FamilyRun, Vec<UnfoldedZeros>)> {
    let family = config.family()?;
    let params = &config.eval;
    let members = match class {
        SignClass::Minus => &part.minus,
        SignClass::Plus => &part.plus,
    };
    let sign = class.sign();
    let name = format!("{}_{}", family.label(), class.suffix());
    let records: Vec<CurveRecord> = if with_zeros {
        members
            .par_iter()
            .map(|&c| process_curve(c, sign, &config.grid, family, params))
            .collect::<Result<_>>()?
    } else {
        members
            .par_iter()
            .map(|&c| central_only(c, sign, params))
            .collect::<Result<_>>()?
    };
    let parity_order = usize::from(sign < 0);
    let mut dropped = DropCounts::default();
    let mut orders = std::collections::BTreeMap::new();
    let mut used = 0;
    let mut excess = 0;
    let mut values = Vec::new();
    let mut sets = Vec::new();
    for r in &records {
        match r.status {
            CurveStatus::Used => {
                used += 1;
                let order = r.central_order.unwrap_or(parity_order);
                *orders.entry(order).or_insert(0usize) += 1;
                if order > parity_order {
                    excess += 1;
                } else if let Some(v) = r.central_value {
                    values.push(v);
                }
                if with_zeros {
                    let c = r.summary.c_l;
                    sets.push(unfold_lzeros(&r.zeros, c, &name)?);
                }
            }
            CurveStatus::TooTall => dropped.too_tall += 1,
            CurveStatus::MissingZeros | CurveStatus::FunctionalEquation => {
                if family.on_failure == FailurePolicy::Abort {
                    return Err(Error::MissingZeros { sign_changes: 0, argument: -1 });
                }
                if r.status == CurveStatus::MissingZeros {
                    dropped.missing_zeros += 1;
                } else {
                    dropped.functional_equation += 1;
                }
            }
        }
    }
    let (mean, se) = match moment_estimator(&values, 1) {
        Ok((m, s)) => (Some(m), Some(s)),
        Err(_) => (None, None),
    };
    let run = FamilyRun {
        name,
        x,
        sign,
        matrix_size: family.matrix_size(x),
        sampled: curves.len(),
        plus: part.plus.len(),
        minus: part.minus.len(),
        undetermined: part.undetermined.len(),
        considered: members.len(),
        used,
        dropped,
        central_orders: orders.into_iter().map(|(order, count)| OrderCount { order, count }).collect(),
        excess_central_order: excess,
        moment_count: values.len(),
        mean_central_value: mean,
        central_value_stderr: se,
        leading_mass: None,
        records,
    };
    Ok((run, sets))
}

/// Central value only, for moment ladders.
fn central_only(curve: Curve, sign: i8, params: &EvalParams) -> Result<CurveRecord> {
    let mut l = LData::new(curve, 1).with_root_number(sign);
    prepare(&mut l, 1.0, params);
    let derivative = if sign < 0 { 1 } else { 0 };
    Ok(CurveRecord {
        summary: l.summary(),
        status: CurveStatus::Used,
        height: 0.0,
        central_order: Some(central_order(&l, params)?),
        central_value: Some(central_derivative(&l, derivative, params)?),
        zeros: Vec::new(),
        bracket_widths: Vec::new(),
    })
}

/// Enumerates a family, splits it by sign, finds zeros per curve and bins the
/// unfolded low-lying zeros of each sign class.
pub fn run_ec_density(config: &ExperimentConfig) -> Result<RunReport> {
    let family = config.family()?;
    let seed = config.seed()?;
    let curves = family_curves(config, family.x, seed)?;
    if curves.is_empty() {
        return Err(Error::InvalidInput("family is empty after filters".into()));
    }
    let part = family_partition(&curves, family, &config.eval)?;
    let mut report = RunReport::new(config);
    for &class in &family.signs {
        let (mut run, sets) = run_family_class(config, family.x, class, &curves, &part, true)?;
        if sets.is_empty() {
            report.notes.push(format!("{}: no usable curves", run.name));
            report.families.push(run);
            continue;
        }
        let table = one_level_density(&sets, &config.grid)?;
        run.leading_mass = Some(table.leading_mass(3));
        for model in family_overlays(family.forced_rank(), class.sign()) {
            add_overlay(&mut report, &run.name, &table, model)?;
        }
        report.pooled.push(pooled(&run.name, &sets, &config.grid));
        report.densities.push(NamedDensity { name: run.name.clone(), table });
        report.families.push(run);
    }
    Ok(report)
}

/// Least-squares slope of `y` on `x` with a two-sided 95% t interval.
pub fn fit_exponent(x: &[f64], y: &[f64], expected: Option<f64>) -> Result<ExponentFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(Error::InvalidInput("a fit needs at least 3 paired points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidInput("fit abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let df = nf - 2.0;
    let stderr = (rss / df / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(ExponentFit {
        exponent: slope,
        stderr,
        ci_low: slope - t * stderr,
        ci_high: slope + t * stderr,
        points: n,
        expected,
        note: FIT_NOTE.to_string(),
    })
}

fn fit_rows(rows: &[MomentRow], expected: Option<f64>) -> Option<ExponentFit> {
    if rows.iter().any(|r| !(r.mean > 0.0)) {
        return None;
    }
    let x: Vec<f64> = rows.iter().map(|r| r.log_scale).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.mean.ln()).collect();
    fit_exponent(&x, &y, expected).ok()
}

/// `E|Λ'(1)|^k` across matrix sizes, or the family mean of `L'(½)^k` across `X`,
/// with the growth exponent fitted on log scales.
pub fn run_moments(config: &ExperimentConfig) -> Result<RunReport> {
    match config.kind()? {
        ExperimentKind::EcMoments => run_ec_moments(config),
        _ => run_ensemble_moments(config),
    }
}

fn run_ensemble_moments(config: &ExperimentConfig) -> Result<RunReport> {
    let m = config.moments()?;
    let seed = config.seed()?;
    let mut rows = Vec::with_capacity(m.ladder.len());
    for (i, &n) in m.ladder.iter().enumerate() {
        let n = n as usize;
        let spec = m.model.spec(n)?;
        let mcmc = McmcParams::for_spec(&spec, derive_seed(seed, i as u64));
        let samples = sample_ensemble(&spec, &mcmc, m.samples, m.chains)?;
        let values: Vec<f64> = samples
            .into_iter()
            .map(|s| CharPoly::new(s).critical_derivative(1).abs())
            .collect();
        let (mean, stderr) = moment_estimator(&values, m.k)?;
        rows.push(MomentRow { scale: n as f64, log_scale: (n as f64).ln(), mean, stderr, count: values.len() });
    }
    let expected = Some(m.model.expected_exponent(m.k));
    let name = match m.model {
        MomentModel::SoOdd => "so_odd",
        MomentModel::ForcedEven => "forced_even",
    };
    let mut report = RunReport::new(config);
    report.moments.push(MomentTable { name: name.into(), k: m.k, fit: fit_rows(&rows, expected), rows });
    report.notes.push(format!("exponent fits: {FIT_NOTE}"));
    Ok(report)
}

fn run_ec_moments(config: &ExperimentConfig) -> Result<RunReport> {
    let m = config.moments()?;
    let family = config.family()?;
    let seed = config.seed()?;
    let mut report = RunReport::new(config);
    for &class in &family.signs {
        let mut rows = Vec::new();
        let mut name = String::new();
        for (i, &x) in m.ladder.iter().enumerate() {
            let curves = family_curves(config, x, derive_seed(seed, i as u64))?;
            let part = family_partition(&curves, family, &config.eval)?;
            let (mut run, _) = run_family_class(config, x, class, &curves, &part, false)?;
            name = run.name.clone();
            let parity_order = usize::from(class.sign() < 0);
            let values: Vec<f64> = run
                .records
                .iter()
                .filter(|r| r.central_order.is_some_and(|o| o <= parity_order))
                .filter_map(|r| r.central_value)
                .collect();
            match moment_estimator(&values, m.k) {
                Ok((mean, stderr)) => rows.push(MomentRow {
                    scale: x,
                    log_scale: x.ln().ln(),
                    mean,
                    stderr,
                    count: values.len(),
                }),
                Err(_) => report.notes.push(format!("{name}: no curves at X = {x}")),
            }
            run.name = format!("{}_x{}", run.name, i);
            report.families.push(run);
        }
        let fit = if rows.len() >= 4 { fit_rows(&rows, None) } else { None };
        report.moments.push(MomentTable { name, k: m.k, rows, fit });
    }
    report.notes.push(format!("exponent fits: {FIT_NOTE}"));
    Ok(report)
}

/// Asymptotic Kolmogorov tail `P(D > d)` for effective size `n`.
pub fn kolmogorov_p_value(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Per-bin differences in pooled standard errors and a two-sample KS test on the
/// unfolded values. Densities are paired by name, or by position when names differ.
pub fn compare(a: &RunReport, b: &RunReport, threshold: f64) -> Result<CompareTable> {
    if a.densities.is_empty() || a.densities.len() != b.densities.len() {
        return Err(Error::InvalidInput(format!(
            "reports hold {} and {} densities",
            a.densities.len(),
            b.densities.len()
        )));
    }
    let same_names = a.densities.iter().all(|d| b.density(&d.name).is_some());
    let mut rows = Vec::new();
    for (i, da) in a.densities.iter().enumerate() {
        let db = if same_names { b.densities.iter().find(|d| d.name == da.name) } else { b.densities.get(i) };
        let db = db.expect("paired above");
        let (ta, tb) = (&da.table, &db.table);
        let grids_match = ta.edges.len() == tb.edges.len()
            && ta.edges.iter().zip(&tb.edges).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0));
        if !grids_match {
            return Err(Error::InvalidInput(format!("grid mismatch between {} and {}", da.name, db.name)));
        }
        let floor = ta.unit_error().hypot(tb.unit_error());
        let z: Vec<f64> = (0..ta.bins())
            .map(|j| {
                let diff = ta.heights[j] - tb.heights[j];
                if diff == 0.0 {
                    return 0.0;
                }
                diff / ta.stderr[j].hypot(tb.stderr[j]).max(floor)
            })
            .collect();
        let max_abs_z = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let pa = a.pooled.iter().find(|p| p.name == da.name);
        let pb = b.pooled.iter().find(|p| p.name == db.name);
        let (ks, p) = match (pa, pb) {
            (Some(pa), Some(pb)) if !pa.values.is_empty() && !pb.values.is_empty() => {
                let d = crate::spectra::ks_statistic(&pa.values, &pb.values);
                // Values within one set are correlated; count sets, not values.
                let (na, nb) = (pa.sets as f64, pb.sets as f64);
                (Some(d), Some(kolmogorov_p_value(d, na * nb / (na + nb))))
            }
            _ => (None, None),
        };
        let distinguishable = max_abs_z > threshold || p.is_some_and(|p| p < 1e-3);
        rows.push(CompareRow {
            density: da.name.clone(),
            edges: ta.edges.clone(),
            z,
            max_abs_z,
            ks_statistic: ks,
            ks_p_value: p,
            distinguishable,
        });
    }
    Ok(CompareTable { threshold, rows })
}

fn run_compare(config: &ExperimentConfig) -> Result<RunReport> {
    let c = config.compare.as_ref().ok_or_else(|| Error::Config("[compare] section missing".into()))?;
    let a = RunReport::from_path(&c.report_a)?;
    let b = RunReport::from_path(&c.report_b)?;
    let mut report = RunReport::new(config);
    report.comparison = Some(compare(&a, &b, c.threshold)?);
    Ok(report)
}

/// Tabulates analytic curves on `[0, grid.max]`.
pub fn run_analytic(config: &ExperimentConfig) -> Result<RunReport> {
    let a = config.analytic.as_ref().ok_or_else(|| Error::Config("[analytic] section missing".into()))?;
    let mut report = RunReport::new(config);
    for label in &a.models {
        let model: DensityModel = label.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        report.overlays.push(Overlay {
            target: "analytic".into(),
            model,
            label: model.label(),
            bin_values: model.bin_averages(&config.grid.edges()),
            curve: PredictionCurve::tabulate(model, uniform_grid(config.grid.max, a.points))?,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ensemble_config(kind: &str, m: usize, r: usize, samples: usize) -> ExperimentConfig {
        let text = format!(
            "experiment = \"ensemble_density\"\nseed = 11\n[ensemble]\nkind = \"{kind}\"\ndimension = {m}\nr = {r}\nsamples = {samples}\n"
        );
        ExperimentConfig::from_toml_str(&text).unwrap().resolve(None, None).unwrap()
    }

    #[test]
    fn config_requires_seed_and_sections() {
        let c = ExperimentConfig::from_toml_str("experiment = \"ensemble_density\"\n").unwrap();
        assert!(matches!(c.clone().resolve(None, None), Err(Error::Config(_))));
        assert!(matches!(c.resolve(None, Some(3)), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_toml_str("bogus = 1"), Err(Error::Config(_))));
        let c = ExperimentConfig::from_toml_str("seed = 1").unwrap();
        assert!(c.resolve(None, None).is_err());
    }

    #[test]
    fn config_kind_conflict_is_rejected() {
        let c = ensemble_config("so_even", 10, 0, 10);
        assert!(c.clone().resolve(Some(ExperimentKind::EcDensity), None).is_err());
        assert!(c.resolve(Some(ExperimentKind::EnsembleDensity), Some(5)).is_ok());
    }

    #[test]
    fn moments_need_four_points() {
        let text = "experiment = \"ensemble_moments\"\nseed = 1\n[moments]\nladder = [2, 3, 4]\n";
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert!(matches!(c.resolve(None, None), Err(Error::Config(_))));
    }

    #[test]
    fn overlays_follow_parity() {
        let ind = |m, r| EnsembleSpec::independent(m, r, if m % 2 == 0 { 1 } else { -1 }).unwrap();
        assert_eq!(ensemble_overlay(&ind(20, 2), Statistic::OneLevel).unwrap(), Some(DensityModel::SoEven));
        assert_eq!(ensemble_overlay(&ind(20, 1), Statistic::OneLevel).unwrap(), Some(DensityModel::SoOdd));
        let int3 = EnsembleSpec::interaction(23, 3).unwrap();
        assert_eq!(ensemble_overlay(&int3, Statistic::OneLevel).unwrap(), Some(DensityModel::Interaction(3)));
        assert_eq!(family_overlays(0, -1)[0], DensityModel::SoOdd);
        assert_eq!(family_overlays(1, -1)[0], DensityModel::SoEven);
        assert_eq!(family_overlays(0, 1)[0], DensityModel::SoEven);
        assert_eq!(family_overlays(1, 1), [DensityModel::SoOdd, DensityModel::Interaction(2)]);
    }

    #[test]
    fn ensemble_density_is_replayable() {
        let c = ensemble_config("so_even", 12, 0, 400);
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.discrepancies.len(), 1);
        let t = &a.densities[0].table;
        assert!((t.integral() - t.counted as f64 / t.normalizer).abs() < 1e-9);
        let back = RunReport::from_json(&a.to_json()).unwrap();
        assert_eq!(back.densities, a.densities);
    }

    #[test]
    fn compare_self_is_zero() {
        let a = run(&ensemble_config("so_odd", 11, 0, 300)).unwrap();
        let t = compare(&a, &a, 5.0).unwrap();
        assert!(t.rows[0].z.iter().all(|&z| z == 0.0));
        assert_eq!(t.rows[0].ks_statistic, Some(0.0));
        assert!(!t.rows[0].distinguishable);
    }

    #[test]
    fn compare_rejects_grid_mismatch() {
        let a = run(&ensemble_config("so_odd", 11, 0, 100)).unwrap();
        let mut b = a.clone();
        b.densities[0].table.edges[3] += 0.01;
        assert!(matches!(compare(&a, &b, 5.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn fit_recovers_slope() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0 + if *v as i32 % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let f = fit_exponent(&x, &y, Some(2.0)).unwrap();
        assert!((f.exponent - 2.0).abs() < 0.02);
        assert!(f.ci_low < 2.0 && 2.0 < f.ci_high);
        assert_eq!(f.note, FIT_NOTE);
    }

    #[test]
    fn kolmogorov_tail_values() {
        assert!((kolmogorov_p_value(1.36 / 100.0, 1e4) - 0.05).abs() < 0.01);
        assert_eq!(kolmogorov_p_value(0.0, 10.0), 1.0);
        assert!(kolmogorov_p_value(0.5, 1e4) < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        assert_eq!(s.len(), 100);
    }

    #[test]
    fn analytic_run_tabulates() {
        let text = "experiment = \"analytic\"\n[analytic]\nmodels = [\"so_even\", \"interaction_r2\"]\npoints = 50\n";
        let c = ExperimentConfig::from_toml_str(text).unwrap().resolve(None, None).unwrap();
        let r = run(&c).unwrap();
        assert_eq!(r.overlays.len(), 2);
        assert_eq!(r.overlays[1].curve.values.len(), 51);
        assert!((r.overlays[0].curve.values[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn small_family_run_accounts_for_every_curve() {
        let text = "experiment = \"ec_density\"\nseed = 2\n[family]\nkind = \"f2\"\nx = 1e6\nmax_curves = 60\nsigns = [\"minus\", \"plus\"]\n";
        let c = ExperimentConfig::from_toml_str(text).unwrap().resolve(None, None).unwrap();
        let r = run(&c).unwrap();
        for f in &r.families {
            let d = &f.dropped;
            assert_eq!(f.used + d.too_tall + d.missing_zeros + d.functional_equation, f.considered);
            assert_eq!(f.records.len(), f.considered);
        }
        assert_eq!(r.to_json(), run(&c).unwrap().to_json());
    }

    #[test]
    fn unsupported_sign_without_fallback() {
        let text = "experiment = \"ec_density\"\nseed = 2\n[family]\nkind = \"f1\"\nx = 200\nsemistable_only = false\n";
        let c = ExperimentConfig::from_toml_str(text).unwrap().resolve(None, None).unwrap();
        assert!(matches!(run(&c), Err(Error::UnsupportedRootNumber { .. })));
    }
}

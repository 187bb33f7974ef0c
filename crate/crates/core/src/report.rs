//! End-to-end analysis run and the files it emits.
//!
//! Output directory layout:
//!
//! | file | contents |
//! |------|----------|
//! | `summary.json` | `provenance`, `variability`, `ensemble`, `auc`, `coverage` |
//! | `records.csv` | one row per (case, finding) |
//! | `auc_full.csv` | `finding,model_id,auc` on all cases |
//! | `auc_evaluation.csv` | per (finding, model) point AUC with DeLong and bootstrap intervals on the evaluation set |
//! | `auc_empirical.csv` | `set,finding,mean_auc,ci_low,ci_high,width` |
//! | `limited_cases.csv` | the sampled limited evaluation set |
//! | `overlay.csv` | one example case: `finding,model_id,probability,percentile_rank` |
//! | `hist_<name>.csv` | `bin_low,bin_high,count` |
//!
//! `summary.json` contains no timings or paths beyond the echoed
//! configuration, so identical configurations produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ensemble::{cv_reduction_report, Assignment, Averaging, CvReduction};
use crate::error::{Error, Result};
use crate::io;
use crate::model::{validate_pair, Dataset};
use crate::roc::{
    self, empirical_cross_model_ci, model_intervals, per_model_auc_table, AucEstimate, AucMethod,
    AucTable, CoverageReport, IntervalCell, IntervalMethod,
};
use crate::sampling::{self, sample_limited_set, LimitedSet};
use crate::synthetic::{generate_dataset, GeneratorConfig};
use crate::variability::{
    case_records, histogram, pooled_populations, summarize, CaseVariabilityRecord, Histogram,
    VariabilitySummary,
};

pub const TOOL_NAME: &str = "predvar";

fn default_output_dir() -> PathBuf {
    PathBuf::from("predvar-out")
}
fn default_level() -> f64 {
    roc::DEFAULT_LEVEL
}
fn default_group_size() -> usize {
    10
}
fn default_replicates() -> usize {
    roc::DEFAULT_REPLICATES
}
fn default_true() -> bool {
    true
}
fn default_normals() -> usize {
    sampling::DEFAULT_NORMALS
}
fn default_per_finding() -> usize {
    sampling::DEFAULT_PER_FINDING
}
fn default_bins() -> usize {
    50
}

/// Everything a run depends on. Exactly one input source is allowed: the
/// `predictions` + `labels` pair or a `generator` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    /// Its `seed` is replaced by the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_group_size")]
    pub group_size: usize,
    #[serde(default)]
    pub shuffle_groups: bool,
    #[serde(default)]
    pub averaging: Averaging,
    /// Zero skips the bootstrap.
    #[serde(default = "default_replicates")]
    pub bootstrap_replicates: usize,
    /// Master seed for generation, sampling, shuffling and resampling.
    #[serde(default)]
    pub seed: u64,
    /// Restrict the analysis to these findings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub findings: Option<Vec<String>>,
    /// Evaluate intervals on a sampled limited set rather than all cases.
    #[serde(default = "default_true")]
    pub limited_set: bool,
    #[serde(default = "default_normals")]
    pub limited_normals: usize,
    #[serde(default = "default_per_finding")]
    pub limited_per_finding: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    /// Case for `overlay.csv`; defaults to the widest rank range on the first finding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example_case: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            predictions: None,
            labels: None,
            generator: None,
            output_dir: default_output_dir(),
            level: default_level(),
            group_size: default_group_size(),
            shuffle_groups: false,
            averaging: Averaging::default(),
            bootstrap_replicates: default_replicates(),
            seed: 0,
            findings: None,
            limited_set: true,
            limited_normals: default_normals(),
            limited_per_finding: default_per_finding(),
            histogram_bins: default_bins(),
            example_case: None,
        }
    }
}

impl RunConfig {
    /// Parses a TOML config, a JSON config, or the `provenance.config` block
    /// of a previous `summary.json`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            let mut value: Value =
                serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            if let Some(cfg) = value.pointer_mut("/provenance/config") {
                value = cfg.take();
            }
            serde_json::from_value(value).map_err(|e| Error::InvalidConfig(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let files = self.predictions.is_some() || self.labels.is_some();
        match (files, &self.generator) {
            (true, Some(_)) => {
                return Err(Error::InvalidConfig(
                    "give either prediction/label files or a generator, not both".into(),
                ))
            }
            (false, None) => {
                return Err(Error::InvalidConfig(
                    "no input: give prediction/label files or a generator".into(),
                ))
            }
            (true, None) if self.predictions.is_none() || self.labels.is_none() => {
                return Err(Error::InvalidConfig(
                    "both predictions and labels files are required".into(),
                ))
            }
            _ => {}
        }
        if let Some(g) = &self.generator {
            g.validate()?;
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "level {} outside (0, 1)",
                self.level
            )));
        }
        if self.group_size == 0 {
            return Err(Error::InvalidConfig("group_size must be at least 1".into()));
        }
        if self.bootstrap_replicates != 0 && self.bootstrap_replicates < roc::MIN_REPLICATES {
            return Err(Error::InvalidConfig(format!(
                "bootstrap_replicates must be 0 (skip) or at least {}",
                roc::MIN_REPLICATES
            )));
        }
        if self.histogram_bins == 0 {
            return Err(Error::InvalidBinCount);
        }
        Ok(())
    }

    /// The generator configuration with the run seed applied.
    pub fn effective_generator(&self) -> Option<GeneratorConfig> {
        self.generator.clone().map(|mut g| {
            g.seed = self.seed;
            g
        })
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        self.validate()?;
        let dataset = match (&self.predictions, &self.labels, self.effective_generator()) {
            (Some(p), Some(l), None) => {
                validate_pair(io::load_predictions(p)?, io::load_labels(l)?)?
            }
            (None, None, Some(g)) => generate_dataset(&g)?,
            _ => unreachable!("validated above"),
        };
        match &self.findings {
            Some(names) => dataset.select_findings(names),
            None => Ok(dataset),
        }
    }

    pub fn assignment(&self) -> Assignment {
        if self.shuffle_groups {
            Assignment::Shuffled { seed: self.seed }
        } else {
            Assignment::Ordered
        }
    }
}

/// Ensemble comparison, or why it was not run.
#[derive(Debug, Clone)]
pub enum EnsembleOutcome {
    Done(CvReduction),
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct EvaluationSet {
    /// `"limited"` or `"full"`.
    pub kind: &'static str,
    pub case_ids: Vec<String>,
    pub sampling: Option<LimitedSet>,
    pub aucs: AucTable,
    pub empirical: Vec<std::result::Result<AucEstimate, String>>,
    /// Findings with at least two cases per class; only these get intervals.
    pub evaluated: Vec<usize>,
    pub delong: Vec<IntervalCell>,
    pub bootstrap: Option<Vec<IntervalCell>>,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub config: RunConfig,
    pub n_models: usize,
    pub n_cases: usize,
    pub findings: Vec<String>,
    pub model_ids: Vec<String>,
    pub records: Vec<CaseVariabilityRecord>,
    pub variability: VariabilitySummary,
    pub ensemble: EnsembleOutcome,
    pub auc_full: AucTable,
    pub empirical_full: Vec<std::result::Result<AucEstimate, String>>,
    pub evaluation: EvaluationSet,
    pub coverage_delong: Option<CoverageReport>,
    pub coverage_bootstrap: Option<CoverageReport>,
    pub histograms: Vec<(String, Histogram)>,
    pub overlay_case: String,
    /// `(finding, model_id, probability, percentile_rank)`.
    pub overlay: Vec<(String, String, f64, f64)>,
    /// Wall time per stage; not part of any output file.
    pub timings: Vec<(&'static str, Duration)>,
}

impl ReportBundle {
    pub fn timing(&self, stage: &str) -> Option<Duration> {
        self.timings
            .iter()
            .find(|(s, _)| *s == stage)
            .map(|(_, d)| *d)
    }
}

fn empirical_per_finding(table: &AucTable) -> Vec<std::result::Result<AucEstimate, String>> {
    table
        .per_finding
        .iter()
        .map(|f| match &f.aucs {
            Some(a) => empirical_cross_model_ci(a).map_err(|e| e.to_string()),
            None => Err(f.error.clone().unwrap_or_default()),
        })
        .collect()
}

/// Filename-safe form of a finding name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn upper_bound(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(1.0_f64, |acc, v| acc.max(v.ceil()))
}

struct Stopwatch {
    last: Instant,
    laps: Vec<(&'static str, Duration)>,
}

impl Stopwatch {
    fn new() -> Self {
        Self {
            last: Instant::now(),
            laps: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        let d = now - self.last;
        info!("{stage}: {:.2?}", d);
        self.laps.push((stage, d));
        self.last = now;
    }
}

/// Runs the whole pipeline in memory.
pub fn analyze(config: &RunConfig) -> Result<ReportBundle> {
    let mut clock = Stopwatch::new();
    let dataset = config.load_dataset()?;
    clock.lap("load");
    analyze_dataset(config, &dataset, clock)
}

fn analyze_dataset(
    config: &RunConfig,
    dataset: &Dataset,
    mut clock: Stopwatch,
) -> Result<ReportBundle> {
    let preds = dataset.preds();
    let names = dataset.findings().names().to_vec();

    let pools = pooled_populations(preds)?;
    let records = case_records(preds, &pools)?;
    let variability = summarize(&records)?;
    clock.lap("variability");

    let needed = 2 * config.group_size;
    let ensemble = if dataset.n_models() >= needed {
        EnsembleOutcome::Done(cv_reduction_report(
            dataset,
            config.group_size,
            config.assignment(),
            config.averaging,
        )?)
    } else {
        EnsembleOutcome::Skipped(format!(
            "{} models cannot form two groups of {}",
            dataset.n_models(),
            config.group_size
        ))
    };
    clock.lap("ensemble");

    let auc_full = per_model_auc_table(dataset)?;
    let empirical_full = empirical_per_finding(&auc_full);
    clock.lap("auc_full");

    let (kind, sampling, eval_data) = if config.limited_set {
        let set = sample_limited_set(
            dataset.labels(),
            config.limited_normals,
            config.limited_per_finding,
            config.seed,
        )?;
        let subset = dataset.select_cases(&set.cases)?;
        ("limited", Some(set), subset)
    } else {
        ("full", None, dataset.clone())
    };
    let aucs = per_model_auc_table(&eval_data)?;
    let empirical = empirical_per_finding(&aucs);
    let evaluated: Vec<usize> = aucs
        .per_finding
        .iter()
        .enumerate()
        .filter(|(_, f)| f.n_pos >= 2 && f.n_neg >= 2)
        .map(|(i, _)| i)
        .collect();
    let eval_names: Vec<&str> = evaluated.iter().map(|&i| names[i].as_str()).collect();
    let interval_data = if evaluated.is_empty() {
        None
    } else {
        Some(eval_data.select_findings(&eval_names)?)
    };
    // cell findings index into `evaluated`; map back to dataset finding indices
    let remap = |mut cells: Vec<IntervalCell>| {
        for c in &mut cells {
            c.finding = evaluated[c.finding];
        }
        cells
    };
    let delong = match &interval_data {
        Some(d) => remap(model_intervals(d, config.level, IntervalMethod::Delong)?),
        None => Vec::new(),
    };
    clock.lap("delong");
    let bootstrap = match (&interval_data, config.bootstrap_replicates) {
        (Some(d), r) if r > 0 => Some(remap(model_intervals(
            d,
            config.level,
            IntervalMethod::Bootstrap {
                replicates: r,
                seed: config.seed,
            },
        )?)),
        _ => None,
    };
    clock.lap("bootstrap");

    let audit = dataset.n_models() >= 2 && !delong.is_empty();
    let coverage_delong =
        audit.then(|| CoverageReport::tally(&delong, AucMethod::Delong, config.level));
    let coverage_bootstrap = match &bootstrap {
        Some(cells) if audit => Some(CoverageReport::tally(
            cells,
            AucMethod::Bootstrap,
            config.level,
        )),
        _ => None,
    };

    let bins = config.histogram_bins;
    let mut histograms = Vec::new();
    for (f, name) in names.iter().enumerate() {
        histograms.push((
            format!("pooled_{}", file_stem(name)),
            histogram(pools[f].sorted(), bins, (0.0, 1.0))?,
        ));
    }
    let ln_high = upper_bound(records.iter().map(|r| r.ln_ratio));
    let all_ln: Vec<f64> = records.iter().map(|r| r.ln_ratio).collect();
    histograms.push((
        "ln_ratio_all".to_string(),
        histogram(&all_ln, bins, (0.0, ln_high))?,
    ));
    let k = names.len();
    for (f, name) in names.iter().enumerate() {
        let v: Vec<f64> = records
            .iter()
            .skip(f)
            .step_by(k)
            .map(|r| r.ln_ratio)
            .collect();
        histograms.push((
            format!("ln_ratio_{}", file_stem(name)),
            histogram(&v, bins, (0.0, ln_high))?,
        ));
    }
    let cv_all: Vec<f64> = records.iter().map(|r| r.cv).collect();
    histograms.push((
        "cv_all".to_string(),
        histogram(&cv_all, bins, (0.0, upper_bound(cv_all.iter().copied())))?,
    ));
    let rr_all: Vec<f64> = records.iter().map(|r| r.rank_range).collect();
    histograms.push((
        "rank_range_all".to_string(),
        histogram(&rr_all, bins, (0.0, 100.0))?,
    ));

    let overlay_index = match &config.example_case {
        Some(id) => preds
            .case_ids()
            .iter()
            .position(|c| c == id)
            .ok_or_else(|| Error::InvalidArgument(format!("example case `{id}` not found")))?,
        None => {
            let mut best = 0;
            for case in 0..dataset.n_cases() {
                if records[case * k].rank_range > records[best * k].rank_range {
                    best = case;
                }
            }
            best
        }
    };
    let mut overlay = Vec::with_capacity(k * dataset.n_models());
    for (f, name) in names.iter().enumerate() {
        for (m, model_id) in preds.model_ids().iter().enumerate() {
            let p = preds.get(m, overlay_index, f);
            overlay.push((
                name.clone(),
                model_id.clone(),
                p,
                pools[f].percentile_rank(p),
            ));
        }
    }
    clock.lap("figures");

    Ok(ReportBundle {
        config: config.clone(),
        n_models: dataset.n_models(),
        n_cases: dataset.n_cases(),
        findings: names,
        model_ids: preds.model_ids().to_vec(),
        records,
        variability,
        ensemble,
        auc_full,
        empirical_full,
        evaluation: EvaluationSet {
            kind,
            case_ids: eval_data.preds().case_ids().to_vec(),
            sampling,
            aucs,
            empirical,
            evaluated,
            delong,
            bootstrap,
        },
        coverage_delong,
        coverage_bootstrap,
        histograms,
        overlay_case: preds.case_ids()[overlay_index].clone(),
        overlay,
        timings: clock.laps,
    })
}

fn empirical_json(est: &std::result::Result<AucEstimate, String>) -> Value {
    match est {
        Ok(e) => json!({
            "mean_auc": e.auc,
            "ci_low": e.ci_low,
            "ci_high": e.ci_high,
            "width": e.width(),
            "content": e.level,
        }),
        Err(msg) => json!({ "error": msg }),
    }
}

fn mean_width(cells: &[IntervalCell], finding: usize) -> Option<f64> {
    let widths: Vec<f64> = cells
        .iter()
        .filter(|c| c.finding == finding)
        .map(|c| c.estimate.width())
        .collect();
    (!widths.is_empty()).then(|| widths.iter().sum::<f64>() / widths.len() as f64)
}

/// JSON form of a [`CvReduction`] as it appears under `ensemble` in `summary.json`.
pub fn cv_reduction_json(r: &CvReduction, averaging: Averaging) -> Value {
    let (t_test, t_error) = match &r.t_test {
        Ok(t) => (serde_json::to_value(t).unwrap_or(Value::Null), Value::Null),
        Err(msg) => (Value::Null, Value::String(msg.clone())),
    };
    json!({
        "status": "done",
        "group_size": r.group_size,
        "n_groups": r.n_groups,
        "leftover_models": r.leftover_models,
        "averaging": averaging,
        "mean_cv_raw": r.mean_cv_raw,
        "mean_cv_averaged": r.mean_cv_averaged,
        "cv_ratio": r.cv_ratio,
        "mean_sd_raw": r.mean_sd_raw,
        "mean_sd_averaged": r.mean_sd_averaged,
        "pairing": r.pairing,
        "t_test": t_test,
        "t_test_error": t_error,
    })
}

impl ReportBundle {
    pub fn summary_json(&self) -> Value {
        let provenance = json!({
            "tool": TOOL_NAME,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.config.seed,
            "config": self.config,
            "dataset": {
                "n_models": self.n_models,
                "n_cases": self.n_cases,
                "findings": self.findings,
            },
            "conventions": {
                "sd": "sample (n - 1)",
                "percentile_rank": "midrank: 100 * (below + equal / 2) / n over the finding's pooled predictions",
                "t_test_pairing": crate::ensemble::PAIRING_PER_RECORD,
                "empirical_interval": "second-smallest to second-largest per-model AUC; content = (n - 2) / n",
                "bootstrap": "non-stratified case resampling, percentile interval, single-class replicates redrawn",
            },
        });

        let ensemble = match &self.ensemble {
            EnsembleOutcome::Done(r) => cv_reduction_json(r, self.config.averaging),
            EnsembleOutcome::Skipped(reason) => json!({ "status": "skipped", "reason": reason }),
        };

        let full: Vec<Value> = self
            .auc_full
            .per_finding
            .iter()
            .zip(&self.empirical_full)
            .map(|(f, emp)| {
                json!({
                    "finding": f.finding,
                    "n_pos": f.n_pos,
                    "n_neg": f.n_neg,
                    "mean_auc": f.mean(),
                    "error": f.error,
                    "empirical": empirical_json(emp),
                })
            })
            .collect();
        let ev = &self.evaluation;
        let eval: Vec<Value> = ev
            .aucs
            .per_finding
            .iter()
            .zip(&ev.empirical)
            .enumerate()
            .map(|(i, (f, emp))| {
                json!({
                    "finding": f.finding,
                    "n_pos": f.n_pos,
                    "n_neg": f.n_neg,
                    "mean_auc": f.mean(),
                    "error": f.error,
                    "empirical": empirical_json(emp),
                    "delong_mean_width": mean_width(&ev.delong, i),
                    "bootstrap_mean_width": ev.bootstrap.as_ref().and_then(|b| mean_width(b, i)),
                })
            })
            .collect();
        let auc = json!({
            "full": { "n_cases": self.n_cases, "per_finding": full },
            "evaluation": {
                "set": ev.kind,
                "n_cases": ev.case_ids.len(),
                "sampling": ev.sampling.as_ref().map(|s| json!({ "normals": s.normals, "quotas": s.quotas })),
                "level": self.config.level,
                "bootstrap_replicates": self.config.bootstrap_replicates,
                "per_finding": eval,
            },
        });
        let coverage = json!({
            "mean_auc_target": "cross-model mean AUC per finding on the evaluation set",
            "delong": self.coverage_delong,
            "bootstrap": self.coverage_bootstrap,
        });
        json!({
            "provenance": provenance,
            "variability": self.variability,
            "ensemble": ensemble,
            "auc": auc,
            "coverage": coverage,
        })
    }

    /// Writes every output file into `dir` (created if needed).
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let summary = to_json_string(&self.summary_json())?;
        io::write_atomic(&dir.join("summary.json"), |w| {
            w.write_all(summary.as_bytes())
                .map_err(|e| Error::io(dir.join("summary.json"), e))
        })?;
        io::write_atomic(&dir.join("records.csv"), |w| {
            io::write_records(&self.records, w)
        })?;
        io::write_atomic(&dir.join("auc_full.csv"), |w| {
            write_auc_table(&self.auc_full, w)
        })?;
        io::write_atomic(&dir.join("auc_evaluation.csv"), |w| {
            self.write_evaluation(w)
        })?;
        io::write_atomic(&dir.join("auc_empirical.csv"), |w| self.write_empirical(w))?;
        if self.evaluation.sampling.is_some() {
            let ids: Vec<&str> = self
                .evaluation
                .case_ids
                .iter()
                .map(String::as_str)
                .collect();
            io::write_atomic(&dir.join("limited_cases.csv"), |w| {
                io::write_case_list(&ids, w)
            })?;
        }
        io::write_atomic(&dir.join("overlay.csv"), |w| self.write_overlay(w))?;
        for (name, hist) in &self.histograms {
            io::write_atomic(&dir.join(format!("hist_{name}.csv")), |w| {
                io::write_histogram(hist, w)
            })?;
        }
        Ok(())
    }

    fn write_evaluation(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        out.write_record([
            "finding",
            "model_id",
            "auc",
            "delong_low",
            "delong_high",
            "delong_contains_mean",
            "bootstrap_low",
            "bootstrap_high",
            "bootstrap_contains_mean",
        ])
        .map_err(ser)?;
        let ev = &self.evaluation;
        let k = self.findings.len();
        let find = |cells: &[IntervalCell], m: usize, f: usize| {
            cells
                .iter()
                .find(|c| c.model == m && c.finding == f)
                .cloned()
        };
        for f in 0..k {
            let Some(aucs) = &ev.aucs.per_finding[f].aucs else {
                continue;
            };
            for (m, auc) in aucs.iter().enumerate() {
                let d = find(&ev.delong, m, f);
                let b = ev.bootstrap.as_deref().and_then(|cells| find(cells, m, f));
                let opt = |v: Option<String>| v.unwrap_or_default();
                out.write_record([
                    self.findings[f].clone(),
                    self.model_ids[m].clone(),
                    auc.to_string(),
                    opt(d.as_ref().map(|c| c.estimate.ci_low.to_string())),
                    opt(d.as_ref().map(|c| c.estimate.ci_high.to_string())),
                    opt(d.as_ref().map(|c| c.contains_mean.to_string())),
                    opt(b.as_ref().map(|c| c.estimate.ci_low.to_string())),
                    opt(b.as_ref().map(|c| c.estimate.ci_high.to_string())),
                    opt(b.as_ref().map(|c| c.contains_mean.to_string())),
                ])
                .map_err(ser)?;
            }
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }

    fn write_empirical(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        out.write_record(["set", "finding", "mean_auc", "ci_low", "ci_high", "width"])
            .map_err(ser)?;
        let sets = [
            ("full", &self.empirical_full),
            (self.evaluation.kind, &self.evaluation.empirical),
        ];
        for (set, rows) in sets {
            for (f, est) in rows.iter().enumerate() {
                if let Ok(e) = est {
                    out.write_record([
                        set.to_string(),
                        self.findings[f].clone(),
                        e.auc.to_string(),
                        e.ci_low.to_string(),
                        e.ci_high.to_string(),
                        e.width().to_string(),
                    ])
                    .map_err(ser)?;
                }
            }
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }

    fn write_overlay(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        out.write_record([
            "case_id",
            "finding",
            "model_id",
            "probability",
            "percentile_rank",
        ])
        .map_err(ser)?;
        for (finding, model, p, r) in &self.overlay {
            out.write_record([
                &self.overlay_case,
                finding,
                model,
                &p.to_string(),
                &r.to_string(),
            ])
            .map_err(ser)?;
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Long AUC table: `finding,model_id,auc`.
pub fn write_auc_table(table: &AucTable, w: &mut dyn Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    out.write_record(["finding", "model_id", "auc"])
        .map_err(ser)?;
    for f in &table.per_finding {
        if let Some(aucs) = &f.aucs {
            for (model, auc) in table.model_ids.iter().zip(aucs) {
                out.write_record([f.finding.as_str(), model, &auc.to_string()])
                    .map_err(ser)?;
            }
        }
    }
    out.flush().map_err(|e| Error::Serialize(e.to_string()))
}

/// Pretty JSON with every float written to 17 significant digits;
/// non-finite values become `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter::default());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Serialize(e.to_string()))
}

#[derive(Default)]
struct SigFormatter {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + std::io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
                self.pretty.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl serde_json::ser::Formatter for SigFormatter {
    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }

    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f32,
    ) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

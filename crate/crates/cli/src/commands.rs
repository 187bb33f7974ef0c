use std::io::Write;
use std::path::Path;

use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use predvar_core::report::{cv_reduction_json, to_json_string, write_auc_table};
use predvar_core::roc::model_intervals;
use predvar_core::{
    analyze, canonical_config, coverage_audit, empirical_cross_model_ci, generate, io,
    per_model_auc_table, sample_limited_set, summarize, tensor_cv_reduction, variability,
    Averaging, Dataset, Error, GeneratorConfig, IntervalMethod, LabelTable, PredictionTensor,
    RunConfig,
};

use crate::args::*;
use crate::Failure;

type CmdResult = Result<(), Failure>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Metrics(a) => metrics(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Auc(a) => auc(a),
        Command::Coverage(a) => coverage(a),
        Command::Simulate(a) => simulate(a),
        Command::SampleLimited(a) => sample(a),
        Command::Report(a) => report(a),
    }
}

/// Config file first, then flags. Any input flag replaces the file's input source.
fn base_config(input: &InputArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &input.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if input.predictions.is_some() || input.labels.is_some() {
        cfg.generator = None;
        if input.predictions.is_some() {
            cfg.predictions = input.predictions.clone();
        }
        if input.labels.is_some() {
            cfg.labels = input.labels.clone();
        }
    }
    if let Some(path) = &input.generator {
        cfg.generator = Some(GeneratorConfig::from_path(path)?);
        cfg.predictions = None;
        cfg.labels = None;
    }
    if input.canonical {
        cfg.generator = Some(canonical_config());
        cfg.predictions = None;
        cfg.labels = None;
    }
    if let Some(seed) = input.seed {
        cfg.seed = seed;
    }
    if input.findings.is_some() {
        cfg.findings = input.findings.clone();
    }
    Ok(cfg)
}

fn apply_ensemble(cfg: &mut RunConfig, opts: &EnsembleOpts) {
    if let Some(g) = opts.group_size {
        cfg.group_size = g;
    }
    if opts.shuffle_groups {
        cfg.shuffle_groups = true;
    }
    if let Some(a) = opts.averaging {
        cfg.averaging = match a {
            AveragingArg::Probability => Averaging::Probability,
            AveragingArg::Logit => Averaging::Logit,
        };
    }
}

fn apply_limited(cfg: &mut RunConfig, opts: &LimitedOpts) {
    if opts.full_set {
        cfg.limited_set = false;
    }
    if let Some(n) = opts.limited_normals {
        cfg.limited_normals = n;
    }
    if let Some(n) = opts.limited_per_finding {
        cfg.limited_per_finding = n;
    }
}

fn select_findings(
    preds: PredictionTensor,
    names: Option<&[String]>,
) -> Result<PredictionTensor, Error> {
    let Some(names) = names else { return Ok(preds) };
    let idx = names
        .iter()
        .map(|n| {
            preds
                .findings()
                .index_of(n)
                .ok_or_else(|| Error::UnknownFinding(n.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    preds.select_findings(&idx)
}

/// Predictions without requiring labels.
fn predictions_only(cfg: &RunConfig) -> Result<PredictionTensor, Failure> {
    let preds = match (cfg.effective_generator(), &cfg.predictions) {
        (Some(g), _) => generate(&g)?.0,
        (None, Some(path)) => io::load_predictions(path)?,
        (None, None) => {
            return Err(Failure::usage(
                "no input: give --predictions, --generator or --canonical",
            ))
        }
    };
    Ok(select_findings(preds, cfg.findings.as_deref())?)
}

/// Labels without requiring predictions.
fn labels_only(cfg: &RunConfig) -> Result<LabelTable, Failure> {
    match (cfg.effective_generator(), &cfg.labels) {
        (Some(g), _) => Ok(generate(&g)?.1),
        (None, Some(path)) => Ok(io::load_labels(path)?),
        (None, None) => Err(Failure::usage(
            "no input: give --labels, --generator or --canonical",
        )),
    }
}

fn print_json<T: Serialize>(value: &T) -> CmdResult {
    let text = to_json_string(value)?;
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| Failure::from(Error::io("<stdout>", e)))
}

fn metrics(a: MetricsArgs) -> CmdResult {
    let cfg = base_config(&a.input)?;
    let preds = predictions_only(&cfg)?;
    let records = variability::tensor_case_metrics(&preds)?;
    let summary = summarize(&records)?;
    if let Some(path) = &a.records {
        io::write_atomic(path, |w| io::write_records(&records, w))?;
        info!("wrote {} records to {}", records.len(), path.display());
    }
    print_json(&json!({
        "n_models": preds.n_models(),
        "n_cases": preds.n_cases(),
        "variability": summary,
    }))
}

fn ensemble(a: EnsembleArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    apply_ensemble(&mut cfg, &a.opts);
    let preds = predictions_only(&cfg)?;
    let r = tensor_cv_reduction(&preds, cfg.group_size, cfg.assignment(), cfg.averaging)?;
    if !r.leftover_models.is_empty() {
        warn!("{} models left out of the groups", r.leftover_models.len());
    }
    print_json(&cv_reduction_json(&r, cfg.averaging))
}

fn load(cfg: &RunConfig) -> Result<Dataset, Failure> {
    Ok(cfg.load_dataset()?)
}

fn to_output(
    path: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
) -> CmdResult {
    match path {
        Some(p) => Ok(io::write_atomic(p, body)?),
        None => {
            let mut out = std::io::stdout().lock();
            body(&mut out)?;
            Ok(())
        }
    }
}

fn auc(a: AucArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    if let Some(l) = a.level {
        cfg.level = l;
    }
    if let Some(r) = a.replicates {
        cfg.bootstrap_replicates = r;
    }
    let data = load(&cfg)?;
    let out = a.output.as_deref();
    let csv_err = |e: csv::Error| Error::Serialize(e.to_string());
    match a.method {
        AucMethodArg::Point => {
            let table = per_model_auc_table(&data)?;
            for f in &table.per_finding {
                if let Some(e) = &f.error {
                    warn!("finding `{}` skipped: {e}", f.finding);
                }
            }
            to_output(out, |w| write_auc_table(&table, w))
        }
        AucMethodArg::Empirical => {
            let table = per_model_auc_table(&data)?;
            to_output(out, |w| {
                let mut wr = csv::Writer::from_writer(w);
                wr.write_record([
                    "finding", "mean_auc", "ci_low", "ci_high", "width", "content",
                ])
                .map_err(csv_err)?;
                for f in &table.per_finding {
                    let Some(aucs) = &f.aucs else { continue };
                    let e = empirical_cross_model_ci(aucs)?;
                    wr.write_record([
                        f.finding.clone(),
                        e.auc.to_string(),
                        e.ci_low.to_string(),
                        e.ci_high.to_string(),
                        e.width().to_string(),
                        e.level.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                wr.flush().map_err(|e| Error::Serialize(e.to_string()))
            })
        }
        AucMethodArg::Delong | AucMethodArg::Bootstrap => {
            cfg.validate()?;
            let method = if a.method == AucMethodArg::Delong {
                IntervalMethod::Delong
            } else {
                if cfg.bootstrap_replicates == 0 {
                    return Err(Failure::usage("bootstrap needs --replicates > 0"));
                }
                IntervalMethod::Bootstrap {
                    replicates: cfg.bootstrap_replicates,
                    seed: cfg.seed,
                }
            };
            let cells = model_intervals(&data, cfg.level, method)?;
            let findings = data.findings().names();
            let models = data.preds().model_ids();
            to_output(out, |w| {
                let mut wr = csv::Writer::from_writer(w);
                wr.write_record([
                    "finding", "model_id", "auc", "ci_low", "ci_high", "level", "method",
                ])
                .map_err(csv_err)?;
                for c in &cells {
                    let e = &c.estimate;
                    wr.write_record([
                        findings[c.finding].clone(),
                        models[c.model].clone(),
                        e.auc.to_string(),
                        e.ci_low.to_string(),
                        e.ci_high.to_string(),
                        e.level.to_string(),
                        e.method.as_str().to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                wr.flush().map_err(|e| Error::Serialize(e.to_string()))
            })
        }
    }
}

fn coverage(a: CoverageArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    apply_limited(&mut cfg, &a.limited);
    if let Some(l) = a.level {
        cfg.level = l;
    }
    if let Some(r) = a.replicates {
        cfg.bootstrap_replicates = r;
    }
    let data = load(&cfg)?;
    let (set, data) = if cfg.limited_set {
        let s = sample_limited_set(
            data.labels(),
            cfg.limited_normals,
            cfg.limited_per_finding,
            cfg.seed,
        )?;
        ("limited", data.select_cases(&s.cases)?)
    } else {
        ("full", data)
    };
    let delong = match a.method {
        CoverageMethodArg::Delong | CoverageMethodArg::Both => {
            Some(coverage_audit(&data, cfg.level, IntervalMethod::Delong)?)
        }
        CoverageMethodArg::Bootstrap => None,
    };
    let bootstrap = match a.method {
        CoverageMethodArg::Bootstrap | CoverageMethodArg::Both if cfg.bootstrap_replicates > 0 => {
            let method = IntervalMethod::Bootstrap {
                replicates: cfg.bootstrap_replicates,
                seed: cfg.seed,
            };
            Some(coverage_audit(&data, cfg.level, method)?)
        }
        CoverageMethodArg::Bootstrap => {
            return Err(Failure::usage("bootstrap needs --replicates > 0"))
        }
        _ => None,
    };
    print_json(&json!({
        "set": set,
        "n_cases": data.n_cases(),
        "level": cfg.level,
        "delong": delong,
        "bootstrap": bootstrap,
    }))
}

fn simulate(a: SimulateArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    let Some(g) = cfg.generator.as_mut() else {
        return Err(Failure::usage(
            "simulate needs --generator, --canonical or a config with a generator table",
        ));
    };
    if let Some(n) = a.models {
        g.n_models = n;
    }
    if let Some(n) = a.cases {
        g.n_cases = n;
    }
    if let Some(sd) = a.model_noise_sd {
        g.model_noise_sd = sd;
    }
    if let Some(sd) = a.case_noise_sd {
        g.case_noise_sd = sd;
    }
    let g = cfg.effective_generator().expect("generator present");
    let (preds, labels) = generate(&g)?;
    let dir = &a.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Failure::from(Error::io(dir, e)))?;
    io::write_atomic(&dir.join("predictions.csv"), |w| {
        io::write_predictions(&preds, w)
    })?;
    io::write_atomic(&dir.join("labels.csv"), |w| io::write_labels(&labels, w))?;
    if a.wide {
        io::write_atomic(&dir.join("predictions_wide.csv"), |w| {
            io::write_predictions_wide(&preds, w)
        })?;
    }
    let generator_json = to_json_string(&g)?;
    io::write_atomic(&dir.join("generator.json"), |w| {
        w.write_all(generator_json.as_bytes())
            .map_err(|e| Error::io(dir.join("generator.json"), e))
    })?;
    let population_auc: Vec<f64> = (0..g.n_findings).map(|f| g.population_auc(f)).collect();
    print_json(&json!({
        "output_dir": dir,
        "n_models": preds.n_models(),
        "n_cases": preds.n_cases(),
        "findings": preds.findings().names(),
        "population_auc": population_auc,
    }))
}

fn sample(a: SampleArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    if let Some(n) = a.normals {
        cfg.limited_normals = n;
    }
    if let Some(n) = a.per_finding {
        cfg.limited_per_finding = n;
    }
    let labels = labels_only(&cfg)?;
    let set = sample_limited_set(
        &labels,
        cfg.limited_normals,
        cfg.limited_per_finding,
        cfg.seed,
    )?;
    let ids: Vec<&str> = set
        .cases
        .iter()
        .map(|&c| labels.case_ids()[c].as_str())
        .collect();
    if let Some(path) = &a.output {
        io::write_atomic(path, |w| io::write_case_list(&ids, w))?;
    }
    print_json(&json!({
        "n_cases": set.cases.len(),
        "normals": set.normals,
        "quotas": set.quotas,
        "case_ids": ids,
    }))
}

fn report(a: ReportArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    apply_ensemble(&mut cfg, &a.ensemble);
    apply_limited(&mut cfg, &a.limited);
    if let Some(l) = a.level {
        cfg.level = l;
    }
    if let Some(r) = a.replicates {
        cfg.bootstrap_replicates = r;
    }
    if let Some(b) = a.bins {
        cfg.histogram_bins = b;
    }
    if a.example_case.is_some() {
        cfg.example_case = a.example_case.clone();
    }
    if let Some(dir) = &a.output_dir {
        cfg.output_dir = dir.clone();
    }
    let bundle = analyze(&cfg)?;
    bundle.write(&cfg.output_dir)?;
    print_json(&json!({
        "output_dir": cfg.output_dir,
        "summary": cfg.output_dir.join("summary.json"),
        "mean_cv": bundle.variability.overall.mean_cv,
        "coverage_delong": bundle.coverage_delong.as_ref().map(|c| c.fraction),
        "coverage_bootstrap": bundle.coverage_bootstrap.as_ref().map(|c| c.fraction),
    }))
}

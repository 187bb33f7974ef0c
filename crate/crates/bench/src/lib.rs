//! Shared fixtures for the criterion benches.

use predvar_core::{generate, GeneratorConfig, PerFinding, PredictionTensor};

/// A small synthetic tensor: `n_models` x `n_cases` x 2 findings.
pub fn tensor(n_models: usize, n_cases: usize, seed: u64) -> PredictionTensor {
    generate(&config(n_models, n_cases, 2, seed))
        .expect("valid config")
        .0
}

pub fn config(n_models: usize, n_cases: usize, n_findings: usize, seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        n_models,
        n_cases,
        n_findings,
        finding_names: None,
        prevalence: PerFinding::Uniform(0.2),
        separation: PerFinding::Uniform(1.5),
        model_noise_sd: 0.6,
        case_noise_sd: 1.5,
        seed,
    }
}

/// Scores and labels of one model on one finding.
pub fn scored(n_cases: usize, seed: u64) -> (Vec<f64>, Vec<bool>) {
    let (preds, labels) = generate(&config(1, n_cases, 1, seed)).expect("valid config");
    (preds.model_finding(0, 0), labels.finding_labels(0))
}

//! Disjoint-group ensemble averaging and the paired comparison of
//! coefficients of variation before and after averaging.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, PredictionTensor};
use crate::rng::{self, Domain};
use crate::special::student_t_two_sided_p;
use crate::variability::case_metrics;

/// How models are assigned to groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Assignment {
    /// Contiguous runs in model order.
    Ordered,
    /// A seeded permutation of the models, then contiguous runs.
    Shuffled { seed: u64 },
}

/// Space in which member predictions are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Probability,
    /// Average log-odds, then map back through the sigmoid.
    Logit,
}

#[derive(Debug, Clone)]
pub struct EnsembleGrouping {
    pub group_size: usize,
    /// Model indices per group.
    pub groups: Vec<Vec<usize>>,
    /// Models not assigned to any group.
    pub leftovers: Vec<usize>,
    /// One "model" per group.
    pub averaged: PredictionTensor,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn group_average(
    preds: &PredictionTensor,
    group_size: usize,
    assignment: Assignment,
    averaging: Averaging,
) -> Result<EnsembleGrouping> {
    let n_models = preds.n_models();
    if group_size == 0 {
        return Err(Error::InvalidArgument(
            "group size must be at least 1".into(),
        ));
    }
    if group_size > n_models {
        return Err(Error::GroupTooLarge {
            group_size,
            n_models,
        });
    }
    let order: Vec<usize> = match assignment {
        Assignment::Ordered => (0..n_models).collect(),
        Assignment::Shuffled { seed } => {
            let mut r = rng::substream(seed, Domain::GroupShuffle, 0);
            let all: Vec<usize> = (0..n_models).collect();
            rng::sample_without_replacement(&mut r, &all, n_models)
        }
    };
    let n_groups = n_models / group_size;
    let groups: Vec<Vec<usize>> = order
        .chunks_exact(group_size)
        .take(n_groups)
        .map(<[usize]>::to_vec)
        .collect();
    let leftovers = order[n_groups * group_size..].to_vec();
    if !leftovers.is_empty() {
        warn!(
            "{} model(s) do not fill a group of {group_size} and are excluded: {leftovers:?}",
            leftovers.len()
        );
    }

    let k = preds.n_findings();
    let gs = group_size as f64;
    let group_ids = (0..n_groups).map(|g| format!("group_{g}")).collect();
    let averaged = PredictionTensor::from_fn(
        group_ids,
        preds.case_ids().to_vec(),
        preds.findings().clone(),
        |g, case, f| {
            let block = preds.case_block(case);
            let members = groups[g].iter().map(|&m| block[m * k + f]);
            match averaging {
                Averaging::Probability => members.sum::<f64>() / gs,
                Averaging::Logit => sigmoid(members.map(logit).sum::<f64>() / gs),
            }
        },
    )?;
    Ok(EnsembleGrouping {
        group_size,
        groups,
        leftovers,
        averaged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: usize,
    /// Two-sided.
    pub p_value: f64,
    /// Mean of `a - b`.
    pub mean_difference: f64,
    pub n_pairs: usize,
}

/// Paired two-sided t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "paired t-test needs at least 2 pairs, got {n}"
        )));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let ss: f64 = diffs.iter().map(|d| (d - mean) * (d - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::DegenerateDifferences);
    }
    let t = mean / (sd / (n as f64).sqrt());
    let df = n - 1;
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: student_t_two_sided_p(t, df as f64)?,
        mean_difference: mean,
        n_pairs: n,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReduction {
    pub group_size: usize,
    pub n_groups: usize,
    pub leftover_models: Vec<String>,
    pub mean_cv_raw: f64,
    pub mean_cv_averaged: f64,
    /// `mean_cv_averaged / mean_cv_raw`.
    pub cv_ratio: f64,
    pub mean_sd_raw: f64,
    pub mean_sd_averaged: f64,
    /// Pairing unit of the t-test.
    pub pairing: String,
    pub t_test: std::result::Result<TTestResult, String>,
}

pub const PAIRING_PER_RECORD: &str = "per (case, finding) record";

/// Compares per-record cv across all models with cv across group averages.
///
/// A degenerate t-test (identical cv vectors) is reported in `t_test` rather
/// than failing the whole comparison.
pub fn cv_reduction_report(
    dataset: &Dataset,
    group_size: usize,
    assignment: Assignment,
    averaging: Averaging,
) -> Result<CvReduction> {
    tensor_cv_reduction(dataset.preds(), group_size, assignment, averaging)
}

/// [`cv_reduction_report`] on a bare tensor; labels play no part.
pub fn tensor_cv_reduction(
    preds: &PredictionTensor,
    group_size: usize,
    assignment: Assignment,
    averaging: Averaging,
) -> Result<CvReduction> {
    let needed = 2 * group_size.max(1);
    if preds.n_models() < needed {
        return Err(Error::TooFewModels {
            required: needed,
            actual: preds.n_models(),
        });
    }
    let grouping = group_average(preds, group_size, assignment, averaging)?;
    let (raw_cv, raw_sd) = cv_vector(preds)?;
    let (avg_cv, avg_sd) = cv_vector(&grouping.averaged)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_cv_raw = mean(&raw_cv);
    let mean_cv_averaged = mean(&avg_cv);
    let t_test = match paired_t_test(&raw_cv, &avg_cv) {
        Ok(t) => Ok(t),
        Err(e @ Error::DegenerateDifferences) => Err(e.to_string()),
        Err(e) => return Err(e),
    };
    Ok(CvReduction {
        group_size,
        n_groups: grouping.groups.len(),
        leftover_models: grouping
            .leftovers
            .iter()
            .map(|&m| preds.model_ids()[m].clone())
            .collect(),
        mean_cv_raw,
        mean_cv_averaged,
        cv_ratio: mean_cv_averaged / mean_cv_raw,
        mean_sd_raw: mean(&raw_sd),
        mean_sd_averaged: mean(&avg_sd),
        pairing: PAIRING_PER_RECORD.to_string(),
        t_test,
    })
}

/// Per-record (cv, sd) vectors in case-major order.
fn cv_vector(preds: &PredictionTensor) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = preds.n_cases() * preds.n_findings();
    let mut cv = Vec::with_capacity(n);
    let mut sd = Vec::with_capacity(n);
    let mut buf = Vec::with_capacity(preds.n_models());
    for case in 0..preds.n_cases() {
        for f in 0..preds.n_findings() {
            preds.case_finding_into(case, f, &mut buf);
            let s = case_metrics(&buf)?;
            cv.push(s.cv);
            sd.push(s.sd);
        }
    }
    Ok((cv, sd))
}

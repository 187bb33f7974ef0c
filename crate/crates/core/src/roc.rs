//! AUC point estimates and confidence intervals: DeLong, percentile
//! bootstrap, and the empirical interval across retrained models. Also the
//! audit of how often per-model intervals contain the cross-model mean AUC.
//!
//! Ties between a positive and a negative score count one half everywhere.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::rng::{self, Domain};
use crate::special::normal_quantile;

pub const DEFAULT_LEVEL: f64 = 0.95;
pub const DEFAULT_REPLICATES: usize = 2000;
pub const MIN_REPLICATES: usize = 100;
/// Redraws beyond this fraction of the replicate count abort the bootstrap.
pub const MAX_REDRAW_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucMethod {
    Point,
    EmpiricalCrossModel,
    Delong,
    Bootstrap,
}

impl AucMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AucMethod::Point => "point",
            AucMethod::EmpiricalCrossModel => "empirical_cross_model",
            AucMethod::Delong => "delong",
            AucMethod::Bootstrap => "bootstrap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucEstimate {
    pub auc: f64,
    pub method: AucMethod,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Nominal confidence. For the empirical cross-model interval this is the
    /// fraction of the per-model AUCs inside the interval, `(n - 2) / n`.
    pub level: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    /// DeLong only: `Var(AUC)` and the interval before clamping to [0, 1].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unclamped: Option<(f64, f64)>,
    /// Bootstrap only: single-class replicates that were redrawn.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub redraws: Option<usize>,
}

impl AucEstimate {
    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    fn point(auc: f64, n_pos: usize, n_neg: usize) -> Self {
        Self {
            auc,
            method: AucMethod::Point,
            ci_low: auc,
            ci_high: auc,
            level: 0.0,
            n_pos,
            n_neg,
            variance: None,
            unclamped: None,
            redraws: None,
        }
    }
}

fn check_inputs(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::InvalidArgument(format!("score {s} is not a number")));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::OneClassOnly { n_pos, n_neg });
    }
    Ok((n_pos, n_neg))
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    Ok(())
}

/// 1-based midranks of `values` (tied values share the average of their ranks).
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share their mean
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Mann-Whitney AUC from midranks, `O(n log n)`.
pub fn auc_point(scores: &[f64], labels: &[bool]) -> Result<AucEstimate> {
    let (n_pos, n_neg) = check_inputs(scores, labels)?;
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| r)
        .sum();
    let np = n_pos as f64;
    let u = rank_sum - np * (np + 1.0) / 2.0;
    Ok(AucEstimate::point(u / (np * n_neg as f64), n_pos, n_neg))
}

/// DeLong structural components.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralComponents {
    pub auc: f64,
    /// Per positive: mean win rate against all negatives.
    pub v10: Vec<f64>,
    /// Per negative: mean loss rate against all positives.
    pub v01: Vec<f64>,
}

/// Components via midranks: a positive's rank among all scores minus its rank
/// among positives counts the negatives it beats (ties as one half).
pub fn structural_components(scores: &[f64], labels: &[bool]) -> Result<StructuralComponents> {
    let (n_pos, n_neg) = check_inputs(scores, labels)?;
    let pos: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(s, _)| *s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| !l)
        .map(|(s, _)| *s)
        .collect();
    let all = midranks(scores);
    let pos_within = midranks(&pos);
    let neg_within = midranks(&neg);
    let (np, nn) = (n_pos as f64, n_neg as f64);
    let (mut v10, mut v01) = (Vec::with_capacity(n_pos), Vec::with_capacity(n_neg));
    let (mut pi, mut ni) = (0, 0);
    for (r, &l) in all.iter().zip(labels) {
        if l {
            v10.push((r - pos_within[pi]) / nn);
            pi += 1;
        } else {
            v01.push(1.0 - (r - neg_within[ni]) / np);
            ni += 1;
        }
    }
    let auc = v10.iter().sum::<f64>() / np;
    Ok(StructuralComponents { auc, v10, v01 })
}

fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// `Var(AUC) = S10 / n_pos + S01 / n_neg`.
pub fn delong_variance(scores: &[f64], labels: &[bool]) -> Result<(f64, StructuralComponents)> {
    let sc = structural_components(scores, labels)?;
    if sc.v10.len() < 2 || sc.v01.len() < 2 {
        return Err(Error::TooFewPerClass {
            n_pos: sc.v10.len(),
            n_neg: sc.v01.len(),
        });
    }
    let var = sample_variance(&sc.v10) / sc.v10.len() as f64
        + sample_variance(&sc.v01) / sc.v01.len() as f64;
    Ok((var, sc))
}

pub fn delong_ci(scores: &[f64], labels: &[bool], level: f64) -> Result<AucEstimate> {
    check_level(level)?;
    let (var, sc) = delong_variance(scores, labels)?;
    // the rank route can be off by an ulp from the component mean
    let auc = auc_point(scores, labels)?.auc;
    let z = normal_quantile((1.0 + level) / 2.0)?;
    let half = z * var.sqrt();
    let (lo, hi) = (auc - half, auc + half);
    Ok(AucEstimate {
        auc,
        method: AucMethod::Delong,
        ci_low: lo.clamp(0.0, 1.0),
        ci_high: hi.clamp(0.0, 1.0),
        level,
        n_pos: sc.v10.len(),
        n_neg: sc.v01.len(),
        variance: Some(var),
        unclamped: Some((lo, hi)),
        redraws: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            level: DEFAULT_LEVEL,
            seed: 0,
        }
    }
}

/// Scores sorted once so each bootstrap replicate is an `O(n)` pass over
/// resampling weights instead of a re-sort.
struct TieBlocks {
    /// Case indices in ascending score order.
    order: Vec<usize>,
    /// Block boundaries into `order`; each block shares one score.
    bounds: Vec<usize>,
}

impl TieBlocks {
    fn new(scores: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        let mut bounds = vec![0];
        for i in 1..order.len() {
            if scores[order[i]] != scores[order[i - 1]] {
                bounds.push(i);
            }
        }
        bounds.push(order.len());
        Self { order, bounds }
    }

    /// AUC of the weighted sample; weights are resampling multiplicities.
    fn weighted_auc(&self, weights: &[u32], labels: &[bool]) -> f64 {
        let mut neg_below = 0.0;
        let mut wins = 0.0;
        let (mut w_pos, mut w_neg) = (0.0, 0.0);
        for block in self.bounds.windows(2) {
            let (mut bp, mut bn) = (0u64, 0u64);
            for &i in &self.order[block[0]..block[1]] {
                let w = weights[i] as u64;
                if labels[i] {
                    bp += w;
                } else {
                    bn += w;
                }
            }
            let (bp, bn) = (bp as f64, bn as f64);
            wins += bp * (neg_below + 0.5 * bn);
            neg_below += bn;
            w_pos += bp;
            w_neg += bn;
        }
        wins / (w_pos * w_neg)
    }
}

/// Linear interpolation between order statistics (R's type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Non-stratified percentile bootstrap over whole cases. Replicate `r` draws
/// from substream `r` of the seed, so results do not depend on scheduling.
pub fn bootstrap_ci(
    scores: &[f64],
    labels: &[bool],
    config: BootstrapConfig,
) -> Result<AucEstimate> {
    let (n_pos, n_neg) = check_inputs(scores, labels)?;
    check_level(config.level)?;
    if config.replicates < MIN_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_REPLICATES} bootstrap replicates are required, got {}",
            config.replicates
        )));
    }
    let auc = auc_point(scores, labels)?.auc;
    let blocks = TieBlocks::new(scores);
    let n = scores.len();
    let max_redraws = (MAX_REDRAW_FRACTION * config.replicates as f64).floor() as usize;

    let results: Vec<(f64, usize)> = (0..config.replicates)
        .into_par_iter()
        .map_init(
            || vec![0u32; n],
            |weights, r| {
                let mut rng = rng::substream(config.seed, Domain::Bootstrap, r as u64);
                let mut redraws = 0;
                loop {
                    weights.iter_mut().for_each(|w| *w = 0);
                    let mut pos = 0usize;
                    for _ in 0..n {
                        let i = rng::index(&mut rng, n);
                        weights[i] += 1;
                        pos += labels[i] as usize;
                    }
                    if pos > 0 && pos < n {
                        return (blocks.weighted_auc(weights, labels), redraws);
                    }
                    redraws += 1;
                    if redraws > max_redraws {
                        return (f64::NAN, redraws);
                    }
                }
            },
        )
        .collect();

    let redraws: usize = results.iter().map(|r| r.1).sum();
    if redraws > max_redraws {
        return Err(Error::TooManyDegenerateReplicates {
            redraws,
            replicates: config.replicates,
        });
    }
    let mut aucs: Vec<f64> = results.into_iter().map(|r| r.0).collect();
    aucs.sort_unstable_by(f64::total_cmp);
    let alpha = (1.0 - config.level) / 2.0;
    Ok(AucEstimate {
        auc,
        method: AucMethod::Bootstrap,
        ci_low: quantile_sorted(&aucs, alpha),
        ci_high: quantile_sorted(&aucs, 1.0 - alpha),
        level: config.level,
        n_pos,
        n_neg,
        variance: None,
        unclamped: None,
        redraws: Some(redraws),
    })
}

/// Interval from the second-smallest to the second-largest per-model AUC,
/// centred on their mean.
pub fn empirical_cross_model_ci(aucs: &[f64]) -> Result<AucEstimate> {
    if aucs.len() < 4 {
        return Err(Error::TooFewModels {
            required: 4,
            actual: aucs.len(),
        });
    }
    let mut sorted = aucs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    Ok(AucEstimate {
        auc: aucs.iter().sum::<f64>() / n as f64,
        method: AucMethod::EmpiricalCrossModel,
        ci_low: sorted[1],
        ci_high: sorted[n - 2],
        level: (n - 2) as f64 / n as f64,
        n_pos: 0,
        n_neg: 0,
        variance: None,
        unclamped: None,
        redraws: None,
    })
}

/// Point AUCs for every model on one finding, or why they could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingAucs {
    pub finding: String,
    pub n_pos: usize,
    pub n_neg: usize,
    /// One per model, in model order.
    pub aucs: Option<Vec<f64>>,
    pub error: Option<String>,
}

impl FindingAucs {
    pub fn mean(&self) -> Option<f64> {
        self.aucs
            .as_ref()
            .map(|a| a.iter().sum::<f64>() / a.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucTable {
    pub model_ids: Vec<String>,
    pub per_finding: Vec<FindingAucs>,
}

/// Point AUC per (model, finding). A finding with a single class is reported
/// with its error and does not stop the others.
pub fn per_model_auc_table(dataset: &Dataset) -> Result<AucTable> {
    let preds = dataset.preds();
    let per_finding = (0..dataset.n_findings())
        .into_par_iter()
        .map(|f| {
            let labels = dataset.labels().finding_labels(f);
            let aucs: Result<Vec<f64>> = (0..preds.n_models())
                .map(|m| auc_point(&preds.model_finding(m, f), &labels).map(|e| e.auc))
                .collect();
            let n_pos = labels.iter().filter(|&&l| l).count();
            let finding = preds.findings().names()[f].clone();
            match aucs {
                Ok(a) => Ok(FindingAucs {
                    finding,
                    n_pos,
                    n_neg: labels.len() - n_pos,
                    aucs: Some(a),
                    error: None,
                }),
                Err(e @ Error::OneClassOnly { .. }) => Ok(FindingAucs {
                    finding,
                    n_pos,
                    n_neg: labels.len() - n_pos,
                    aucs: None,
                    error: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AucTable {
        model_ids: preds.model_ids().to_vec(),
        per_finding,
    })
}

/// How each model's interval is built in the coverage audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum IntervalMethod {
    Delong,
    /// Cell `(model, finding)` resamples with a seed derived from `seed`.
    Bootstrap {
        replicates: usize,
        seed: u64,
    },
}

impl IntervalMethod {
    pub fn auc_method(&self) -> AucMethod {
        match self {
            IntervalMethod::Delong => AucMethod::Delong,
            IntervalMethod::Bootstrap { .. } => AucMethod::Bootstrap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCell {
    pub model: usize,
    pub finding: usize,
    pub estimate: AucEstimate,
    /// Mean point AUC over all models for this finding.
    pub cross_model_mean: f64,
    pub contains_mean: bool,
}

/// One interval per (model, finding), model-major.
pub fn model_intervals(
    dataset: &Dataset,
    level: f64,
    method: IntervalMethod,
) -> Result<Vec<IntervalCell>> {
    check_level(level)?;
    let preds = dataset.preds();
    let k = dataset.n_findings();
    let labels: Vec<Vec<bool>> = (0..k).map(|f| dataset.labels().finding_labels(f)).collect();
    let means = (0..k)
        .map(|f| {
            let total = (0..preds.n_models())
                .map(|m| auc_point(&preds.model_finding(m, f), &labels[f]).map(|e| e.auc))
                .sum::<Result<f64>>()?;
            Ok(total / preds.n_models() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    (0..preds.n_models() * k)
        .into_par_iter()
        .map(|cell| {
            let (model, finding) = (cell / k, cell % k);
            let scores = preds.model_finding(model, finding);
            let estimate = match method {
                IntervalMethod::Delong => delong_ci(&scores, &labels[finding], level)?,
                IntervalMethod::Bootstrap { replicates, seed } => bootstrap_ci(
                    &scores,
                    &labels[finding],
                    BootstrapConfig {
                        replicates,
                        level,
                        seed: rng::derive_seed(seed, Domain::CoverageCell, cell as u64),
                    },
                )?,
            };
            let cross_model_mean = means[finding];
            Ok(IntervalCell {
                model,
                finding,
                contains_mean: estimate.contains(cross_model_mean),
                estimate,
                cross_model_mean,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub method: AucMethod,
    pub level: f64,
    pub contained: usize,
    pub total: usize,
    pub fraction: f64,
    /// Mean interval width over all cells.
    pub mean_width: f64,
}

impl CoverageReport {
    pub fn tally(cells: &[IntervalCell], method: AucMethod, level: f64) -> Self {
        let contained = cells.iter().filter(|c| c.contains_mean).count();
        let total = cells.len();
        let width: f64 = cells.iter().map(|c| c.estimate.width()).sum();
        Self {
            method,
            level,
            contained,
            total,
            fraction: contained as f64 / total as f64,
            mean_width: width / total as f64,
        }
    }
}

/// How often each model's interval contains the cross-model mean AUC.
pub fn coverage_audit(
    dataset: &Dataset,
    level: f64,
    method: IntervalMethod,
) -> Result<CoverageReport> {
    if dataset.n_models() < 2 {
        return Err(Error::TooFewModels {
            required: 2,
            actual: dataset.n_models(),
        });
    }
    let cells = model_intervals(dataset, level, method)?;
    Ok(CoverageReport::tally(&cells, method.auc_method(), level))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(pos: &[f64], neg: &[f64]) -> (Vec<f64>, Vec<bool>) {
        let scores = pos.iter().chain(neg).copied().collect();
        let labels = pos
            .iter()
            .map(|_| true)
            .chain(neg.iter().map(|_| false))
            .collect();
        (scores, labels)
    }

    #[test]
    fn auc_examples() {
        let (s, l) = split(&[0.8, 0.4], &[0.6, 0.2]);
        assert_eq!(auc_point(&s, &l).unwrap().auc, 0.75);
        let (s, l) = split(&[0.9, 0.8, 0.7], &[0.3, 0.1]);
        assert_eq!(auc_point(&s, &l).unwrap().auc, 1.0);
        let (s, l) = split(&[0.5], &[0.5]);
        assert_eq!(auc_point(&s, &l).unwrap().auc, 0.5);
        let (s, l) = split(&[0.5, 0.6], &[]);
        assert!(matches!(
            auc_point(&s, &l),
            Err(Error::OneClassOnly { n_pos: 2, n_neg: 0 })
        ));
    }

    #[test]
    fn midranks_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn delong_hand_example() {
        let (s, l) = split(&[0.8, 0.4], &[0.6, 0.2]);
        let sc = structural_components(&s, &l).unwrap();
        assert_eq!(sc.v10, vec![1.0, 0.5]);
        assert_eq!(sc.v01, vec![0.5, 1.0]);
        let est = delong_ci(&s, &l, 0.95).unwrap();
        assert_eq!(est.variance, Some(0.125));
        let half = 1.959_963_984_540_054 * 0.125_f64.sqrt();
        assert!((est.unclamped.unwrap().0 - (0.75 - half)).abs() < 1e-12);
        assert!((est.ci_low - 0.057_04).abs() < 1e-4);
        assert_eq!(est.ci_high, 1.0);
    }

    #[test]
    fn delong_perfect_separation() {
        let (s, l) = split(&[0.9, 0.8, 0.7], &[0.3, 0.1, 0.2]);
        let est = delong_ci(&s, &l, 0.95).unwrap();
        assert_eq!(est.variance, Some(0.0));
        assert_eq!((est.ci_low, est.auc, est.ci_high), (1.0, 1.0, 1.0));
        let (s, l) = split(&[0.9], &[0.3, 0.1]);
        assert!(matches!(
            delong_ci(&s, &l, 0.95),
            Err(Error::TooFewPerClass { .. })
        ));
    }

    #[test]
    fn bootstrap_perfect_separation() {
        let pos: Vec<f64> = (0..30).map(|i| 0.6 + 0.01 * i as f64).collect();
        let neg: Vec<f64> = (0..30).map(|i| 0.1 + 0.01 * i as f64).collect();
        let (s, l) = split(&pos, &neg);
        let est = bootstrap_ci(
            &s,
            &l,
            BootstrapConfig {
                replicates: 500,
                level: 0.95,
                seed: 4,
            },
        )
        .unwrap();
        assert_eq!((est.ci_low, est.ci_high), (1.0, 1.0));
        assert_eq!(est.redraws, Some(0));
    }

    #[test]
    fn bootstrap_deterministic_and_reports_redraws() {
        let (s, l) = split(&[0.7, 0.4], &[0.5, 0.3, 0.2, 0.1]);
        let cfg = BootstrapConfig {
            replicates: 1000,
            level: 0.9,
            seed: 11,
        };
        // P(no positive among 6 draws) = (4/6)^6 ~ 8.8%, plus all-positive ~ 0.14%
        let a = bootstrap_ci(&s, &l, cfg);
        let b = bootstrap_ci(&s, &l, cfg);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a, b);
                assert!(a.redraws.unwrap() > 0);
            }
            (
                Err(Error::TooManyDegenerateReplicates { .. }),
                Err(Error::TooManyDegenerateReplicates { .. }),
            ) => {}
            other => panic!("non-deterministic outcome {other:?}"),
        }
        let (s, l) = split(&[0.7], &[0.5, 0.3, 0.2, 0.1, 0.05, 0.01, 0.02, 0.03]);
        // P(positive missing from 9 draws) = (8/9)^9 ~ 35%
        assert!(matches!(
            bootstrap_ci(
                &s,
                &l,
                BootstrapConfig {
                    replicates: 200,
                    level: 0.95,
                    seed: 1
                }
            ),
            Err(Error::TooManyDegenerateReplicates { .. })
        ));
        assert!(matches!(
            bootstrap_ci(
                &s,
                &l,
                BootstrapConfig {
                    replicates: 99,
                    level: 0.95,
                    seed: 1
                }
            ),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn weighted_auc_matches_expanded_sample() {
        let scores = [0.3, 0.3, 0.7, 0.1, 0.7, 0.5];
        let labels = [true, false, true, false, false, true];
        let weights = [2u32, 1, 0, 3, 1, 2];
        let blocks = TieBlocks::new(&scores);
        let (mut es, mut el) = (Vec::new(), Vec::new());
        for i in 0..6 {
            for _ in 0..weights[i] {
                es.push(scores[i]);
                el.push(labels[i]);
            }
        }
        assert_eq!(
            blocks.weighted_auc(&weights, &labels),
            auc_point(&es, &el).unwrap().auc
        );
    }

    #[test]
    fn empirical_examples() {
        let aucs: Vec<f64> = (1..=50).map(|i| i as f64 / 100.0).collect();
        let est = empirical_cross_model_ci(&aucs).unwrap();
        assert_eq!((est.ci_low, est.ci_high), (0.02, 0.49));
        assert!((est.width() - 0.47).abs() < 1e-12);
        assert!((est.level - 0.96).abs() < 1e-15);
        let flat = empirical_cross_model_ci(&[0.8; 6]).unwrap();
        assert_eq!(flat.width(), 0.0);
        assert!(matches!(
            empirical_cross_model_ci(&[0.5; 3]),
            Err(Error::TooFewModels { .. })
        ));
    }

    #[test]
    fn quantile_type7() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
    }
}

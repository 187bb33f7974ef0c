//! Per-(case, finding) disagreement statistics across models, their
//! dataset-level summaries, and histogram data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{pooled_predictions, Dataset, PredictionTensor};

/// Dispersion of one case's predictions across models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseStats {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    /// `sd / mean`.
    pub cv: f64,
    pub p_max: f64,
    pub p_min: f64,
    /// `ln(p_max / p_min)`.
    pub ln_ratio: f64,
}

pub fn case_metrics(preds: &[f64]) -> Result<CaseStats> {
    if preds.len() < 2 {
        return Err(Error::TooFewModels {
            required: 2,
            actual: preds.len(),
        });
    }
    if let Some(&v) = preds.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
        return Err(Error::ProbabilityOutOfRange(v));
    }
    let (p_min, p_max) = preds
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if p_min == p_max {
        return Ok(CaseStats {
            mean: p_min,
            sd: 0.0,
            cv: 0.0,
            p_max,
            p_min,
            ln_ratio: 0.0,
        });
    }
    let n = preds.len() as f64;
    let mean = (preds.iter().sum::<f64>() / n).clamp(p_min, p_max);
    let ss: f64 = preds.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1.0)).sqrt();
    Ok(CaseStats {
        mean,
        sd,
        cv: sd / mean,
        p_max,
        p_min,
        ln_ratio: p_max.ln() - p_min.ln(),
    })
}

/// A finding's pooled prediction population, sorted for rank queries.
#[derive(Debug, Clone)]
pub struct PooledPopulation {
    sorted: Vec<f64>,
}

impl PooledPopulation {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyPool);
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn from_tensor(preds: &PredictionTensor, finding: usize) -> Result<Self> {
        Self::new(pooled_predictions(preds, finding)?)
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Midrank percentile: `100 * (#below + #equal / 2) / n`.
    pub fn percentile_rank(&self, p: f64) -> f64 {
        let below = self.sorted.partition_point(|&x| x < p);
        let not_above = below + self.sorted[below..].partition_point(|&x| x <= p);
        let equal = not_above - below;
        100.0 * (below as f64 + 0.5 * equal as f64) / self.sorted.len() as f64
    }

    pub fn rank_range(&self, case_preds: &[f64]) -> Result<f64> {
        if case_preds.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (lo, hi) = case_preds
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if lo == hi {
            return Ok(0.0);
        }
        Ok(self.percentile_rank(hi) - self.percentile_rank(lo))
    }
}

/// Percentile rank of `p` within an unsorted pooled population.
pub fn percentile_rank(pooled: &[f64], p: f64) -> Result<f64> {
    if pooled.is_empty() {
        return Err(Error::EmptyPool);
    }
    let below = pooled.iter().filter(|&&x| x < p).count();
    let equal = pooled.iter().filter(|&&x| x == p).count();
    Ok(100.0 * (below as f64 + 0.5 * equal as f64) / pooled.len() as f64)
}

/// `R(max(case_preds)) - R(min(case_preds))` within `pooled`.
pub fn rank_range(pooled: &[f64], case_preds: &[f64]) -> Result<f64> {
    PooledPopulation::new(pooled.to_vec())?.rank_range(case_preds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseVariabilityRecord {
    pub case_id: String,
    pub finding: String,
    pub mean: f64,
    pub sd: f64,
    pub cv: f64,
    pub p_max: f64,
    pub p_min: f64,
    pub ln_ratio: f64,
    /// Percentage points in [0, 100].
    pub rank_range: f64,
}

/// Sorted pooled populations, one per finding.
pub fn pooled_populations(preds: &PredictionTensor) -> Result<Vec<PooledPopulation>> {
    (0..preds.n_findings())
        .into_par_iter()
        .map(|f| PooledPopulation::from_tensor(preds, f))
        .collect()
}

/// Records for every (case, finding), case-major, ranked against `pools`.
pub fn case_records(
    preds: &PredictionTensor,
    pools: &[PooledPopulation],
) -> Result<Vec<CaseVariabilityRecord>> {
    if pools.len() != preds.n_findings() {
        return Err(Error::InvalidArgument(format!(
            "{} pooled populations for {} findings",
            pools.len(),
            preds.n_findings()
        )));
    }
    let names = preds.findings().names();
    let per_case = (0..preds.n_cases())
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(preds.n_models()),
            |buf, case| {
                (0..preds.n_findings())
                    .map(|f| {
                        preds.case_finding_into(case, f, buf);
                        let stats = case_metrics(buf)?;
                        let rank_range = pools[f].rank_range(buf)?;
                        Ok(CaseVariabilityRecord {
                            case_id: preds.case_ids()[case].clone(),
                            finding: names[f].clone(),
                            mean: stats.mean,
                            sd: stats.sd,
                            cv: stats.cv,
                            p_max: stats.p_max,
                            p_min: stats.p_min,
                            ln_ratio: stats.ln_ratio,
                            rank_range,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            },
        )
        .collect::<Result<Vec<_>>>()?;
    Ok(per_case.into_iter().flatten().collect())
}

pub fn tensor_case_metrics(preds: &PredictionTensor) -> Result<Vec<CaseVariabilityRecord>> {
    case_records(preds, &pooled_populations(preds)?)
}

pub fn all_case_metrics(dataset: &Dataset) -> Result<Vec<CaseVariabilityRecord>> {
    tensor_case_metrics(dataset.preds())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMeans {
    pub n_records: usize,
    pub mean_cv: f64,
    pub mean_ln_ratio: f64,
    pub mean_rank_range: f64,
    pub mean_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingSummary {
    pub finding: String,
    #[serde(flatten)]
    pub means: MetricMeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariabilitySummary {
    pub overall: MetricMeans,
    pub per_finding: Vec<FindingSummary>,
}

#[derive(Default)]
struct Acc {
    n: usize,
    cv: f64,
    ln_ratio: f64,
    rank_range: f64,
    sd: f64,
}

impl Acc {
    fn push(&mut self, r: &CaseVariabilityRecord) {
        self.n += 1;
        self.cv += r.cv;
        self.ln_ratio += r.ln_ratio;
        self.rank_range += r.rank_range;
        self.sd += r.sd;
    }

    fn means(&self) -> MetricMeans {
        let n = self.n as f64;
        MetricMeans {
            n_records: self.n,
            mean_cv: self.cv / n,
            mean_ln_ratio: self.ln_ratio / n,
            mean_rank_range: self.rank_range / n,
            mean_sd: self.sd / n,
        }
    }
}

/// Unweighted means per finding (in order of first appearance) and overall.
pub fn summarize(records: &[CaseVariabilityRecord]) -> Result<VariabilitySummary> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut order: Vec<&str> = Vec::new();
    let mut accs: Vec<Acc> = Vec::new();
    let mut overall = Acc::default();
    for r in records {
        let slot = match order.iter().position(|f| *f == r.finding) {
            Some(i) => i,
            None => {
                order.push(&r.finding);
                accs.push(Acc::default());
                order.len() - 1
            }
        };
        accs[slot].push(r);
        overall.push(r);
    }
    Ok(VariabilitySummary {
        overall: overall.means(),
        per_finding: order
            .iter()
            .zip(&accs)
            .map(|(f, a)| FindingSummary {
                finding: f.to_string(),
                means: a.means(),
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bin_count + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(e, &c)| (e[0], e[1], c))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Equal-width bins over `[low, high]`: left-closed, right-open, except the
/// last bin which also includes `high`. Values outside the range are an error.
pub fn histogram(values: &[f64], bin_count: usize, range: (f64, f64)) -> Result<Histogram> {
    if bin_count == 0 {
        return Err(Error::InvalidBinCount);
    }
    let (low, high) = range;
    if !(low.is_finite() && high.is_finite() && low < high) {
        return Err(Error::InvalidArgument(format!(
            "histogram range [{low}, {high}]"
        )));
    }
    let width = (high - low) / bin_count as f64;
    let mut edges: Vec<f64> = (0..bin_count).map(|i| low + i as f64 * width).collect();
    edges.push(high);
    let mut counts = vec![0u64; bin_count];
    for &v in values {
        if !(v >= low && v <= high) {
            return Err(Error::ValueOutsideRange {
                value: v,
                low,
                high,
            });
        }
        let mut idx = (((v - low) / width) as usize).min(bin_count - 1);
        // settle rounding at the edges against the emitted edge values
        while idx > 0 && v < edges[idx] {
            idx -= 1;
        }
        while idx + 1 < bin_count && v >= edges[idx + 1] {
            idx += 1;
        }
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FindingSet, LabelTable, PredictionTensor};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constant_predictions() {
        let s = case_metrics(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!((s.mean, s.sd, s.cv, s.ln_ratio), (0.5, 0.0, 0.0, 0.0));
        // a mean that does not round-trip still reports zero spread
        let s = case_metrics(&[0.1, 0.1, 0.1]).unwrap();
        assert_eq!((s.mean, s.sd), (0.1, 0.0));
    }

    #[test]
    fn three_value_example() {
        // mean 0.7/3, squared deviations sum to 0.04667, / 2, sqrt
        let s = case_metrics(&[0.1, 0.2, 0.4]).unwrap();
        let mean: f64 = 0.7 / 3.0;
        let sd = (((0.1_f64 - mean).powi(2) + (0.2_f64 - mean).powi(2) + (0.4_f64 - mean).powi(2))
            / 2.0)
            .sqrt();
        assert!(close(s.mean, 0.233_333_333_333_333_3, 1e-15));
        assert!(close(s.sd, sd, 1e-15));
        assert!(close(s.sd, 0.152_752_523_165_195, 1e-12));
        assert!(close(s.cv, 0.654_653_670_707_977, 1e-12));
        assert!(close(s.ln_ratio, 4.0_f64.ln(), 1e-15));
        assert_eq!((s.p_min, s.p_max), (0.1, 0.4));
    }

    #[test]
    fn case_metrics_errors() {
        assert!(matches!(
            case_metrics(&[0.3]),
            Err(Error::TooFewModels { .. })
        ));
        assert!(matches!(
            case_metrics(&[0.3, 1.0]),
            Err(Error::ProbabilityOutOfRange(_))
        ));
    }

    fn grid() -> Vec<f64> {
        (1..=10).map(|i| i as f64 / 10.0).collect()
    }

    #[test]
    fn percentile_rank_examples() {
        let pool = PooledPopulation::new(grid()).unwrap();
        assert!(close(pool.percentile_rank(0.9), 85.0, 1e-12));
        assert!(close(pool.percentile_rank(0.2), 15.0, 1e-12));
        assert_eq!(pool.percentile_rank(0.01), 0.0);
        assert!(close(percentile_rank(&grid(), 0.9).unwrap(), 85.0, 1e-12));
        assert_eq!(percentile_rank(&[0.3; 7], 0.3).unwrap(), 50.0);
        assert!(matches!(percentile_rank(&[], 0.3), Err(Error::EmptyPool)));
        assert!(matches!(
            PooledPopulation::new(vec![]),
            Err(Error::EmptyPool)
        ));
    }

    #[test]
    fn rank_range_examples() {
        assert!(close(
            rank_range(&grid(), &[0.2, 0.9]).unwrap(),
            70.0,
            1e-12
        ));
        assert_eq!(rank_range(&grid(), &[0.4, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[0.5; 10], 2, (0.0, 1.0)).unwrap();
        assert_eq!(h.counts, vec![0, 10]);
        assert_eq!(
            histogram(&[0.1, 0.9], 2, (0.0, 1.0)).unwrap().counts,
            vec![1, 1]
        );
        let uniform: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let h = histogram(&uniform, 10, (0.0, 1.0)).unwrap();
        // direct count oracle
        for (lo, hi, count) in h.bins() {
            let direct = uniform.iter().filter(|&&v| v >= lo && v < hi).count() as u64;
            assert_eq!(count, direct);
            assert_eq!(count, 100);
        }
        assert_eq!(
            histogram(&[1.0, 0.0], 4, (0.0, 1.0)).unwrap().counts,
            vec![1, 0, 0, 1]
        );
        assert!(matches!(
            histogram(&[0.5], 0, (0.0, 1.0)),
            Err(Error::InvalidBinCount)
        ));
        assert!(matches!(
            histogram(&[1.5], 3, (0.0, 1.0)),
            Err(Error::ValueOutsideRange { .. })
        ));
    }

    #[test]
    fn summarize_examples() {
        let rec = |finding: &str, cv: f64| CaseVariabilityRecord {
            case_id: "c".into(),
            finding: finding.into(),
            mean: 0.5,
            sd: cv * 0.5,
            cv,
            p_max: 0.6,
            p_min: 0.4,
            ln_ratio: 1.5_f64.ln(),
            rank_range: 12.5,
        };
        let one = summarize(&[rec("a", 0.2)]).unwrap();
        assert_eq!(one.overall.mean_cv, 0.2);
        assert_eq!(one.overall.mean_rank_range, 12.5);
        assert_eq!(one.per_finding[0].means, one.overall);
        let two = summarize(&[rec("a", 0.2), rec("b", 0.4)]).unwrap();
        assert!(close(two.overall.mean_cv, 0.3, 1e-15));
        assert_eq!(two.per_finding.len(), 2);
        assert!(matches!(summarize(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn record_counts_and_identical_models() {
        let preds = PredictionTensor::from_fn(
            vec!["m0".into(), "m1".into()],
            vec!["c0".into(), "c1".into(), "c2".into()],
            FindingSet::new(["a", "b"]).unwrap(),
            |_, c, f| 0.1 + 0.2 * c as f64 + 0.05 * f as f64,
        )
        .unwrap();
        let labels = LabelTable::from_fn(
            preds.case_ids().to_vec(),
            preds.findings().clone(),
            |c, _| c == 0,
        )
        .unwrap();
        let ds = crate::model::validate_pair(preds, labels).unwrap();
        let recs = all_case_metrics(&ds).unwrap();
        assert_eq!(recs.len(), 6);
        for r in &recs {
            assert_eq!((r.cv, r.ln_ratio, r.rank_range), (0.0, 0.0, 0.0));
        }
        assert_eq!(
            (recs[1].case_id.as_str(), recs[1].finding.as_str()),
            ("c0", "b")
        );
    }

    fn probs(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.001f64..0.999, n)
    }

    proptest! {
        #[test]
        fn record_invariants(v in probs(2..60)) {
            let s = case_metrics(&v).unwrap();
            prop_assert!(s.p_min <= s.mean && s.mean <= s.p_max);
            prop_assert!(s.sd >= 0.0 && s.cv >= 0.0 && s.ln_ratio >= 0.0);
            prop_assert_eq!(s.ln_ratio == 0.0, s.sd == 0.0);
            prop_assert_eq!(s.sd == 0.0, s.cv == 0.0);
        }

        #[test]
        fn scale_invariance(v in probs(2..40), k in 0.01f64..=1.0) {
            let a = case_metrics(&v).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            let b = case_metrics(&scaled).unwrap();
            prop_assert!((a.ln_ratio - b.ln_ratio).abs() < 1e-9);
            prop_assert!((a.cv - b.cv).abs() < 1e-9 * a.cv.max(1.0));
        }

        #[test]
        fn percentile_rank_monotone(pool in probs(1..100), p in 0.0f64..1.0, q in 0.0f64..1.0) {
            let pop = PooledPopulation::new(pool.clone()).unwrap();
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(pop.percentile_rank(lo) <= pop.percentile_rank(hi));
            let r = pop.percentile_rank(p);
            prop_assert!((0.0..=100.0).contains(&r));
            prop_assert!((r - percentile_rank(&pool, p).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn rank_range_monotone_transform(pool in probs(2..80), pick in prop::collection::vec(0usize..1000, 2..10)) {
            let case: Vec<f64> = pick.iter().map(|i| pool[i % pool.len()]).collect();
            let rr = rank_range(&pool, &case).unwrap();
            let t = |x: f64| (x / (1.0 - x)).ln().powi(3);
            let pool_t: Vec<f64> = pool.iter().map(|&x| t(x)).collect();
            let case_t: Vec<f64> = case.iter().map(|&x| t(x)).collect();
            prop_assert!((rr - rank_range(&pool_t, &case_t).unwrap()).abs() < 1e-9);
            prop_assert!((0.0..=100.0).contains(&rr));
        }

        #[test]
        fn self_pooled_rank_range(mut v in prop::collection::btree_set(1u32..99_999, 2..50)
            .prop_map(|s| s.into_iter().map(|x| x as f64 / 100_000.0).collect::<Vec<_>>()))
        {
            let n = v.len() as f64;
            v.reverse();
            let rr = rank_range(&v, &v).unwrap();
            prop_assert!((rr - 100.0 * (n - 1.0) / n).abs() < 1e-9);
        }

        #[test]
        fn histogram_conserves(v in prop::collection::vec(0.0f64..=1.0, 0..200), bins in 1usize..40) {
            let h = histogram(&v, bins, (0.0, 1.0)).unwrap();
            prop_assert_eq!(h.total(), v.len() as u64);
            prop_assert_eq!(h.edges.len(), bins + 1);
        }
    }
}

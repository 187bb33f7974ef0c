//! Seeded generator of multi-model prediction tensors with known structure.
//!
//! Each (case, finding) has a latent log-odds
//! `logit(prevalence) + separation * label + N(0, case_noise_sd)`, shared by
//! all models. Each model adds its own `N(0, model_noise_sd)` perturbation in
//! log-odds space before the sigmoid, so disagreement between models is
//! controlled by `model_noise_sd` alone.
//!
//! Case `c` draws from substream `(seed, Generate, c)`: first, for each
//! finding in order, the label uniform, the case latent normal and then one
//! normal per model. Generation is therefore identical whether cases are
//! produced sequentially or in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_pair, Dataset, FindingSet, LabelTable, PredictionTensor};
use crate::rng::{self, open_unit, Domain, NormalPairs};
use crate::special::{normal_cdf, normal_quantile};

/// A per-finding parameter: one value for all findings, or one each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerFinding {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerFinding {
    pub fn get(&self, finding: usize) -> f64 {
        match self {
            PerFinding::Uniform(v) => *v,
            PerFinding::Each(v) => v[finding],
        }
    }

    fn check_len(&self, n: usize, what: &str) -> Result<()> {
        match self {
            PerFinding::Each(v) if v.len() != n => Err(Error::InvalidConfig(format!(
                "{what} has {} entries for {n} findings",
                v.len()
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_models: usize,
    pub n_cases: usize,
    pub n_findings: usize,
    /// Defaults to `finding_0`, `finding_1`, ...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finding_names: Option<Vec<String>>,
    pub prevalence: PerFinding,
    /// Log-odds shift of positive cases.
    pub separation: PerFinding,
    pub model_noise_sd: f64,
    pub case_noise_sd: f64,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_models == 0 || self.n_cases == 0 || self.n_findings == 0 {
            return bad("n_models, n_cases and n_findings must be at least 1".into());
        }
        self.prevalence.check_len(self.n_findings, "prevalence")?;
        self.separation.check_len(self.n_findings, "separation")?;
        for f in 0..self.n_findings {
            let p = self.prevalence.get(f);
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("prevalence {p} for finding {f} is outside (0, 1)"));
            }
            if !self.separation.get(f).is_finite() {
                return bad(format!("separation for finding {f} is not finite"));
            }
        }
        for (name, sd) in [
            ("model_noise_sd", self.model_noise_sd),
            ("case_noise_sd", self.case_noise_sd),
        ] {
            if !(sd >= 0.0 && sd.is_finite()) {
                return bad(format!("{name} must be finite and non-negative, got {sd}"));
            }
        }
        if let Some(names) = &self.finding_names {
            if names.len() != self.n_findings {
                return bad(format!(
                    "{} finding names for {} findings",
                    names.len(),
                    self.n_findings
                ));
            }
        }
        Ok(())
    }

    /// Reads a TOML or (by `.json` extension) JSON generator table.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        let config: Self = parsed.map_err(Error::InvalidConfig)?;
        config.validate()?;
        Ok(config)
    }

    pub fn finding_set(&self) -> Result<FindingSet> {
        match &self.finding_names {
            Some(names) => FindingSet::new(names.clone()),
            None => FindingSet::new((0..self.n_findings).map(|f| format!("finding_{f}"))),
        }
    }

    /// AUC of any single model on an infinite sample:
    /// `Phi(separation / sqrt(2 (case_sd^2 + model_sd^2)))`.
    pub fn population_auc(&self, finding: usize) -> f64 {
        let spread = (2.0 * (self.case_noise_sd.powi(2) + self.model_noise_sd.powi(2))).sqrt();
        let sep = self.separation.get(finding);
        if spread == 0.0 {
            return if sep > 0.0 {
                1.0
            } else if sep < 0.0 {
                0.0
            } else {
                0.5
            };
        }
        normal_cdf(sep / spread)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Sigmoid kept strictly inside (0, 1); log-odds beyond about +/-36.7 would
/// otherwise round to exactly 1 (or underflow to 0 far below).
fn open_sigmoid(x: f64) -> f64 {
    let p = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

fn generate_case(
    config: &GeneratorConfig,
    base: &[f64],
    case: usize,
    block: &mut [f64],
    labels: &mut [bool],
) {
    let k = config.n_findings;
    let mut rng = rng::substream(config.seed, Domain::Generate, case as u64);
    let mut normals = NormalPairs::new();
    for f in 0..k {
        let label = open_unit(&mut rng) < config.prevalence.get(f);
        let latent = base[f]
            + if label { config.separation.get(f) } else { 0.0 }
            + config.case_noise_sd * normals.sample(&mut rng);
        labels[f] = label;
        for m in 0..config.n_models {
            block[m * k + f] =
                open_sigmoid(latent + config.model_noise_sd * normals.sample(&mut rng));
        }
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<(PredictionTensor, LabelTable)> {
    config.validate()?;
    let findings = config.finding_set()?;
    let (m, c, k) = (config.n_models, config.n_cases, config.n_findings);
    let base: Vec<f64> = (0..k).map(|f| logit(config.prevalence.get(f))).collect();
    let mut values = vec![0.0; m * c * k];
    let mut labels = vec![false; c * k];
    values
        .par_chunks_mut(m * k)
        .zip(labels.par_chunks_mut(k))
        .enumerate()
        .for_each(|(case, (block, lab))| generate_case(config, &base, case, block, lab));

    let width = c.to_string().len();
    let case_ids: Vec<String> = (0..c).map(|i| format!("case_{i:0width$}")).collect();
    let mwidth = m.to_string().len();
    let model_ids = (0..m).map(|i| format!("model_{i:0mwidth$}")).collect();
    let preds =
        PredictionTensor::from_case_major(model_ids, case_ids.clone(), findings.clone(), values)?;
    let labels = LabelTable::new(case_ids, findings, labels)?;
    Ok((preds, labels))
}

pub fn generate_dataset(config: &GeneratorConfig) -> Result<Dataset> {
    let (preds, labels) = generate(config)?;
    validate_pair(preds, labels)
}

/// Finding names of the canonical configuration.
pub const CANONICAL_FINDINGS: [&str; 14] = [
    "Atelectasis",
    "Cardiomegaly",
    "Effusion",
    "Infiltration",
    "Mass",
    "Nodule",
    "Pneumonia",
    "Pneumothorax",
    "Consolidation",
    "Edema",
    "Emphysema",
    "Fibrosis",
    "Pleural_Thickening",
    "Hernia",
];

/// Label prevalences of the canonical configuration, in finding order.
/// Approximate public chest radiograph label frequencies; Hernia is set so
/// the expected count in 22,433 cases is 42.
pub const CANONICAL_PREVALENCE: [f64; 14] = [
    0.103,
    0.025,
    0.119,
    0.177,
    0.052,
    0.056,
    0.013,
    0.047,
    0.042,
    0.021,
    0.022,
    0.015,
    0.030,
    42.0 / 22_433.0,
];

/// Single-model population AUC targets of the canonical configuration.
pub const CANONICAL_AUC: [f64; 14] = [
    0.81, 0.91, 0.87, 0.71, 0.84, 0.78, 0.76, 0.87, 0.80, 0.88, 0.91, 0.82, 0.79, 0.90,
];

pub const CANONICAL_MODEL_NOISE_SD: f64 = 0.60;
pub const CANONICAL_CASE_NOISE_SD: f64 = 1.5;

/// 50 models x 22,433 cases x 14 findings. The two noise levels are
/// calibrated so that mean cv is about 0.54 and mean ln(p_max / p_min) about
/// 2.4; separations are solved from [`CANONICAL_AUC`].
pub fn canonical_config() -> GeneratorConfig {
    let spread =
        (2.0 * (CANONICAL_CASE_NOISE_SD.powi(2) + CANONICAL_MODEL_NOISE_SD.powi(2))).sqrt();
    let separation = CANONICAL_AUC
        .iter()
        .map(|&auc| normal_quantile(auc).expect("AUC targets lie in (0, 1)") * spread)
        .collect();
    GeneratorConfig {
        n_models: 50,
        n_cases: 22_433,
        n_findings: 14,
        finding_names: Some(CANONICAL_FINDINGS.iter().map(|s| s.to_string()).collect()),
        prevalence: PerFinding::Each(CANONICAL_PREVALENCE.to_vec()),
        separation: PerFinding::Each(separation),
        model_noise_sd: CANONICAL_MODEL_NOISE_SD,
        case_noise_sd: CANONICAL_CASE_NOISE_SD,
        seed: 20_191_029,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            n_models: 5,
            n_cases: 40,
            n_findings: 3,
            finding_names: None,
            prevalence: PerFinding::Each(vec![0.2, 0.5, 0.05]),
            separation: PerFinding::Uniform(1.5),
            model_noise_sd: 0.4,
            case_noise_sd: 1.0,
            seed,
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let (a, la) = generate(&small(5)).unwrap();
        let (b, lb) = generate(&small(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        let (c, _) = generate(&small(6)).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn sequential_matches_parallel_layout() {
        let cfg = small(9);
        let (preds, labels) = generate(&cfg).unwrap();
        let base: Vec<f64> = (0..3).map(|f| logit(cfg.prevalence.get(f))).collect();
        for case in [0, 17, 39] {
            let mut block = vec![0.0; 15];
            let mut lab = vec![false; 3];
            generate_case(&cfg, &base, case, &mut block, &mut lab);
            assert_eq!(preds.case_block(case), &block[..]);
            for (f, &l) in lab.iter().enumerate() {
                assert_eq!(labels.get(case, f), l);
            }
        }
    }

    #[test]
    fn noise_free_models_agree() {
        let mut cfg = small(1);
        cfg.model_noise_sd = 0.0;
        let (preds, _) = generate(&cfg).unwrap();
        for case in 0..cfg.n_cases {
            for f in 0..3 {
                let v = preds.case_finding(case, f);
                assert!(v.iter().all(|&x| x == v[0]));
            }
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = small(1);
        cfg.prevalence = PerFinding::Uniform(1.0);
        assert!(matches!(generate(&cfg), Err(Error::InvalidConfig(_))));
        let mut cfg = small(1);
        cfg.model_noise_sd = -0.1;
        assert!(matches!(generate(&cfg), Err(Error::InvalidConfig(_))));
        let mut cfg = small(1);
        cfg.separation = PerFinding::Each(vec![1.0]);
        assert!(matches!(generate(&cfg), Err(Error::InvalidConfig(_))));
        let mut cfg = small(1);
        cfg.n_cases = 0;
        assert!(matches!(generate(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn extreme_log_odds_stay_open() {
        assert!(open_sigmoid(80.0) < 1.0);
        assert!(open_sigmoid(-800.0) > 0.0);
        assert_eq!(open_sigmoid(0.0), 0.5);
    }

    #[test]
    fn canonical_shape() {
        let cfg = canonical_config();
        assert_eq!(
            (cfg.n_models, cfg.n_cases, cfg.n_findings),
            (50, 22_433, 14)
        );
        cfg.validate().unwrap();
        for (f, &target) in CANONICAL_AUC.iter().enumerate() {
            assert!((cfg.population_auc(f) - target).abs() < 1e-12);
        }
    }
}

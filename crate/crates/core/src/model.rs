//! In-memory data model: model predictions, ground-truth labels and the
//! validated pairing of the two.
//!
//! Both containers are dense and immutable once built. Predictions are stored
//! case-major (`[case][model][finding]`) so that the per-case view across
//! models, which most statistics consume, is a contiguous block.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// Ordered, unique finding names. The position of a name is its finding index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FindingSet {
    names: Vec<String>,
}

impl FindingSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidFindingSet(
                "at least one finding is required".into(),
            ));
        }
        let mut seen = HashSet::with_capacity(names.len());
        for name in &names {
            if name.is_empty() {
                return Err(Error::InvalidFindingSet(
                    "finding names must be non-empty".into(),
                ));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateEntry(format!("finding `{name}`")));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> Result<&str> {
        self.names
            .get(index)
            .map(String::as_str)
            .ok_or(Error::InvalidFindingIndex {
                index,
                len: self.names.len(),
            })
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateEntry(format!("{what} `{id}`")));
        }
    }
    Ok(())
}

/// Dense probabilities indexed by (model, case, finding), each strictly in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTensor {
    model_ids: Vec<String>,
    case_ids: Vec<String>,
    findings: FindingSet,
    values: Vec<f64>,
}

impl PredictionTensor {
    /// Builds a tensor from case-major values: the value for
    /// `(model, case, finding)` sits at `(case * n_models + model) * n_findings + finding`.
    pub fn from_case_major(
        model_ids: Vec<String>,
        case_ids: Vec<String>,
        findings: FindingSet,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_unique(&model_ids, "model")?;
        check_unique(&case_ids, "case")?;
        if model_ids.is_empty() {
            return Err(Error::TooFewModels {
                required: 1,
                actual: 0,
            });
        }
        let expected = model_ids.len() * case_ids.len() * findings.len();
        if values.len() != expected {
            return Err(Error::IncompleteTensor {
                expected,
                actual: values.len(),
            });
        }
        let tensor = Self {
            model_ids,
            case_ids,
            findings,
            values,
        };
        if let Some(pos) = tensor.values.iter().position(|v| !(*v > 0.0 && *v < 1.0)) {
            let (model, case, finding) = tensor.unravel(pos);
            return Err(Error::OutOfRangeProbability {
                model_id: tensor.model_ids[model].clone(),
                case_id: tensor.case_ids[case].clone(),
                finding: tensor.findings.names[finding].clone(),
                value: tensor.values[pos],
            });
        }
        Ok(tensor)
    }

    /// Builds a tensor by evaluating `f(model, case, finding)` for every cell.
    pub fn from_fn(
        model_ids: Vec<String>,
        case_ids: Vec<String>,
        findings: FindingSet,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let (m, c, k) = (model_ids.len(), case_ids.len(), findings.len());
        let mut values = Vec::with_capacity(m * c * k);
        for case in 0..c {
            for model in 0..m {
                for finding in 0..k {
                    values.push(f(model, case, finding));
                }
            }
        }
        Self::from_case_major(model_ids, case_ids, findings, values)
    }

    fn unravel(&self, pos: usize) -> (usize, usize, usize) {
        let k = self.findings.len();
        let m = self.model_ids.len();
        let finding = pos % k;
        let model = (pos / k) % m;
        let case = pos / (k * m);
        (model, case, finding)
    }

    #[inline]
    fn offset(&self, model: usize, case: usize, finding: usize) -> usize {
        (case * self.model_ids.len() + model) * self.findings.len() + finding
    }

    pub fn n_models(&self) -> usize {
        self.model_ids.len()
    }

    pub fn n_cases(&self) -> usize {
        self.case_ids.len()
    }

    pub fn n_findings(&self) -> usize {
        self.findings.len()
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn case_ids(&self) -> &[String] {
        &self.case_ids
    }

    pub fn findings(&self) -> &FindingSet {
        &self.findings
    }

    /// Raw case-major storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, model: usize, case: usize, finding: usize) -> f64 {
        self.values[self.offset(model, case, finding)]
    }

    /// The `n_models * n_findings` block for one case, model-major.
    pub fn case_block(&self, case: usize) -> &[f64] {
        let width = self.model_ids.len() * self.findings.len();
        &self.values[case * width..(case + 1) * width]
    }

    /// Fills `out` with every model's prediction for one (case, finding).
    pub fn case_finding_into(&self, case: usize, finding: usize, out: &mut Vec<f64>) {
        out.clear();
        let k = self.findings.len();
        out.extend(
            self.case_block(case)
                .iter()
                .skip(finding)
                .step_by(k)
                .copied(),
        );
    }

    pub fn case_finding(&self, case: usize, finding: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_models());
        self.case_finding_into(case, finding, &mut out);
        out
    }

    /// One model's scores for a finding across all cases, in case order.
    pub fn model_finding(&self, model: usize, finding: usize) -> Vec<f64> {
        (0..self.n_cases())
            .map(|case| self.get(model, case, finding))
            .collect()
    }

    fn check_finding(&self, finding: usize) -> Result<()> {
        if finding >= self.findings.len() {
            return Err(Error::InvalidFindingIndex {
                index: finding,
                len: self.findings.len(),
            });
        }
        Ok(())
    }

    /// Restricts the tensor to the given case indices, in the given order.
    pub fn select_cases(&self, cases: &[usize]) -> Result<Self> {
        let width = self.model_ids.len() * self.findings.len();
        let mut values = Vec::with_capacity(cases.len() * width);
        let mut case_ids = Vec::with_capacity(cases.len());
        for &case in cases {
            if case >= self.n_cases() {
                return Err(Error::InvalidArgument(format!(
                    "case index {case} out of range"
                )));
            }
            values.extend_from_slice(self.case_block(case));
            case_ids.push(self.case_ids[case].clone());
        }
        Self::from_case_major(
            self.model_ids.clone(),
            case_ids,
            self.findings.clone(),
            values,
        )
    }

    /// Restricts the tensor to the given finding indices, in the given order.
    pub fn select_findings(&self, findings: &[usize]) -> Result<Self> {
        for &f in findings {
            self.check_finding(f)?;
        }
        let names: Vec<String> = findings
            .iter()
            .map(|&f| self.findings.names[f].clone())
            .collect();
        let set = FindingSet::new(names)?;
        let mut values = Vec::with_capacity(self.n_models() * self.n_cases() * findings.len());
        for case in 0..self.n_cases() {
            for model in 0..self.n_models() {
                values.extend(findings.iter().map(|&f| self.get(model, case, f)));
            }
        }
        Self::from_case_major(self.model_ids.clone(), self.case_ids.clone(), set, values)
    }
}

/// Every model's prediction for one finding, across all cases.
pub fn pooled_predictions(preds: &PredictionTensor, finding: usize) -> Result<Vec<f64>> {
    preds.check_finding(finding)?;
    let k = preds.n_findings();
    Ok(preds
        .values
        .iter()
        .skip(finding)
        .step_by(k)
        .copied()
        .collect())
}

/// Binary ground truth per (case, finding), stored case-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    case_ids: Vec<String>,
    findings: FindingSet,
    labels: Vec<bool>,
}

impl LabelTable {
    pub fn new(case_ids: Vec<String>, findings: FindingSet, labels: Vec<bool>) -> Result<Self> {
        check_unique(&case_ids, "case")?;
        let expected = case_ids.len() * findings.len();
        if labels.len() != expected {
            return Err(Error::IncompleteTensor {
                expected,
                actual: labels.len(),
            });
        }
        Ok(Self {
            case_ids,
            findings,
            labels,
        })
    }

    pub fn from_fn(
        case_ids: Vec<String>,
        findings: FindingSet,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let k = findings.len();
        let labels = (0..case_ids.len())
            .flat_map(|c| (0..k).map(move |j| (c, j)))
            .map(|(c, j)| f(c, j))
            .collect();
        Self::new(case_ids, findings, labels)
    }

    pub fn n_cases(&self) -> usize {
        self.case_ids.len()
    }

    pub fn case_ids(&self) -> &[String] {
        &self.case_ids
    }

    pub fn findings(&self) -> &FindingSet {
        &self.findings
    }

    #[inline]
    pub fn get(&self, case: usize, finding: usize) -> bool {
        self.labels[case * self.findings.len() + finding]
    }

    /// A case is normal when none of its findings is positive.
    pub fn is_normal(&self, case: usize) -> bool {
        let k = self.findings.len();
        !self.labels[case * k..(case + 1) * k].iter().any(|&l| l)
    }

    pub fn finding_labels(&self, finding: usize) -> Vec<bool> {
        (0..self.n_cases()).map(|c| self.get(c, finding)).collect()
    }

    pub fn positives(&self, finding: usize) -> Vec<usize> {
        (0..self.n_cases())
            .filter(|&c| self.get(c, finding))
            .collect()
    }

    pub fn normals(&self) -> Vec<usize> {
        (0..self.n_cases()).filter(|&c| self.is_normal(c)).collect()
    }

    pub fn select_cases(&self, cases: &[usize]) -> Result<Self> {
        let k = self.findings.len();
        let mut labels = Vec::with_capacity(cases.len() * k);
        let mut case_ids = Vec::with_capacity(cases.len());
        for &case in cases {
            if case >= self.n_cases() {
                return Err(Error::InvalidArgument(format!(
                    "case index {case} out of range"
                )));
            }
            labels.extend_from_slice(&self.labels[case * k..(case + 1) * k]);
            case_ids.push(self.case_ids[case].clone());
        }
        Self::new(case_ids, self.findings.clone(), labels)
    }

    /// Reorders rows and columns to the given case and finding order.
    fn aligned_to(&self, case_ids: &[String], findings: &FindingSet) -> Self {
        let row: HashMap<&str, usize> = self
            .case_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let col: Vec<usize> = findings
            .names()
            .iter()
            .map(|n| {
                self.findings
                    .index_of(n)
                    .expect("finding sets already matched")
            })
            .collect();
        let labels = case_ids
            .iter()
            .flat_map(|id| {
                let r = row[id.as_str()];
                col.iter().map(move |&c| (r, c))
            })
            .map(|(r, c)| self.get(r, c))
            .collect();
        Self {
            case_ids: case_ids.to_vec(),
            findings: findings.clone(),
            labels,
        }
    }
}

/// Predictions and labels checked to describe the same cases and findings,
/// with labels reordered to the prediction tensor's case and finding order.
#[derive(Debug, Clone)]
pub struct Dataset {
    preds: PredictionTensor,
    labels: LabelTable,
}

/// Pairs a prediction tensor with its labels.
pub fn validate_pair(preds: PredictionTensor, labels: LabelTable) -> Result<Dataset> {
    let mut pred_names: Vec<&String> = preds.findings.names().iter().collect();
    let mut label_names: Vec<&String> = labels.findings.names().iter().collect();
    pred_names.sort();
    label_names.sort();
    if pred_names != label_names {
        return Err(Error::MismatchedFindings {
            predictions: preds.findings.names().to_vec(),
            labels: labels.findings.names().to_vec(),
        });
    }

    let label_cases: HashSet<&str> = labels.case_ids.iter().map(String::as_str).collect();
    let pred_cases: HashSet<&str> = preds.case_ids.iter().map(String::as_str).collect();
    if let Some(id) = preds
        .case_ids
        .iter()
        .find(|id| !label_cases.contains(id.as_str()))
    {
        return Err(Error::MismatchedCases {
            case_id: id.clone(),
            present_in: "predictions",
            missing_from: "labels",
        });
    }
    if let Some(id) = labels
        .case_ids
        .iter()
        .find(|id| !pred_cases.contains(id.as_str()))
    {
        return Err(Error::MismatchedCases {
            case_id: id.clone(),
            present_in: "labels",
            missing_from: "predictions",
        });
    }

    let same_order = labels.case_ids == preds.case_ids && labels.findings == preds.findings;
    let labels = if same_order {
        labels
    } else {
        labels.aligned_to(&preds.case_ids, &preds.findings)
    };
    Ok(Dataset { preds, labels })
}

impl Dataset {
    pub fn new(preds: PredictionTensor, labels: LabelTable) -> Result<Self> {
        validate_pair(preds, labels)
    }

    pub fn preds(&self) -> &PredictionTensor {
        &self.preds
    }

    pub fn labels(&self) -> &LabelTable {
        &self.labels
    }

    pub fn n_models(&self) -> usize {
        self.preds.n_models()
    }

    pub fn n_cases(&self) -> usize {
        self.preds.n_cases()
    }

    pub fn n_findings(&self) -> usize {
        self.preds.n_findings()
    }

    pub fn findings(&self) -> &FindingSet {
        self.preds.findings()
    }

    pub fn into_parts(self) -> (PredictionTensor, LabelTable) {
        (self.preds, self.labels)
    }

    pub fn select_cases(&self, cases: &[usize]) -> Result<Self> {
        Ok(Self {
            preds: self.preds.select_cases(cases)?,
            labels: self.labels.select_cases(cases)?,
        })
    }

    /// Keeps only the named findings, in the given order.
    pub fn select_findings<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| {
                self.findings()
                    .index_of(n.as_ref())
                    .ok_or_else(|| Error::UnknownFinding(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let preds = self.preds.select_findings(&idx)?;
        let labels = self.labels.aligned_to(preds.case_ids(), preds.findings());
        Ok(Self { preds, labels })
    }
}

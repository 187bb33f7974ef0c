//! Limited evaluation subset: a fixed number of normal cases plus a quota of
//! positives per finding, drawn without replacement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LabelTable;
use crate::rng::{self, Domain};

pub const DEFAULT_NORMALS: usize = 100;
pub const DEFAULT_PER_FINDING: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingQuota {
    pub finding: String,
    pub requested: usize,
    /// Positives for this finding in the whole table.
    pub available: usize,
    /// Positives already in the subset before this finding was sampled.
    pub carried_over: usize,
    /// Positives drawn for this finding.
    pub drawn: usize,
    /// Positives for this finding in the final subset.
    pub in_subset: usize,
    /// `requested - min(requested, available)`.
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitedSet {
    /// Selected case indices, ascending.
    pub cases: Vec<usize>,
    pub normals: usize,
    pub quotas: Vec<FindingQuota>,
}

/// Draws `normals` normal cases, then for each finding in order tops the
/// subset up to `min(per_finding, available)` positives. Positives already
/// selected for earlier findings count toward later quotas, so a case appears
/// once even when it is positive for several findings.
pub fn sample_limited_set(
    labels: &LabelTable,
    normals: usize,
    per_finding: usize,
    seed: u64,
) -> Result<LimitedSet> {
    let normal_pool = labels.normals();
    if normal_pool.len() < normals {
        return Err(Error::NotEnoughNormals {
            requested: normals,
            available: normal_pool.len(),
        });
    }
    let mut selected = vec![false; labels.n_cases()];
    let mut r = rng::substream(seed, Domain::LimitedSet, 0);
    for c in rng::sample_without_replacement(&mut r, &normal_pool, normals) {
        selected[c] = true;
    }

    let mut quotas = Vec::with_capacity(labels.findings().len());
    for (f, name) in labels.findings().names().iter().enumerate() {
        let positives = labels.positives(f);
        let target = per_finding.min(positives.len());
        let carried_over = positives.iter().filter(|&&c| selected[c]).count();
        let fresh: Vec<usize> = positives
            .iter()
            .copied()
            .filter(|&c| !selected[c])
            .collect();
        let need = target.saturating_sub(carried_over);
        let mut r = rng::substream(seed, Domain::LimitedSet, 1 + f as u64);
        let drawn = rng::sample_without_replacement(&mut r, &fresh, need);
        for &c in &drawn {
            selected[c] = true;
        }
        quotas.push(FindingQuota {
            finding: name.clone(),
            requested: per_finding,
            available: positives.len(),
            carried_over,
            drawn: drawn.len(),
            in_subset: 0,
            shortfall: per_finding - target,
        });
    }
    let cases: Vec<usize> = (0..labels.n_cases()).filter(|&c| selected[c]).collect();
    for (f, q) in quotas.iter_mut().enumerate() {
        q.in_subset = cases.iter().filter(|&&c| labels.get(c, f)).count();
    }
    Ok(LimitedSet {
        cases,
        normals,
        quotas,
    })
}

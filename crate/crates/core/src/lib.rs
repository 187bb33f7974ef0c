//! Disagreement statistics for ensembles of retrained binary classifiers.
//!
//! Given probabilities from several independently trained models over the
//! same cases and findings, this crate measures how much the models disagree
//! on each case ([`variability`]), how much averaging disjoint groups of models
//! reduces that disagreement ([`ensemble`]), and how per-model AUC confidence
//! intervals compare with the spread of AUC across models ([`roc`]). A seeded
//! generator ([`synthetic`]) produces ensembles with known structure, and
//! [`report`] runs the whole pipeline and writes its outputs.

pub mod ensemble;
pub mod error;
pub mod io;
pub mod model;
pub mod report;
pub mod rng;
pub mod roc;
pub mod sampling;
pub mod special;
pub mod synthetic;
pub mod variability;

pub use ensemble::{
    cv_reduction_report, group_average, paired_t_test, tensor_cv_reduction, Assignment, Averaging,
    CvReduction, EnsembleGrouping, TTestResult,
};
pub use error::{Error, ErrorKind, Result};
pub use model::{
    pooled_predictions, validate_pair, Dataset, FindingSet, LabelTable, PredictionTensor,
};
pub use report::{analyze, ReportBundle, RunConfig};
pub use roc::{
    auc_point, bootstrap_ci, coverage_audit, delong_ci, empirical_cross_model_ci,
    per_model_auc_table, AucEstimate, AucMethod, AucTable, BootstrapConfig, CoverageReport,
    IntervalMethod,
};
pub use sampling::{sample_limited_set, LimitedSet};
pub use synthetic::{canonical_config, generate, generate_dataset, GeneratorConfig, PerFinding};
pub use variability::{
    all_case_metrics, case_metrics, histogram, percentile_rank, rank_range, summarize, CaseStats,
    CaseVariabilityRecord, Histogram, VariabilitySummary,
};

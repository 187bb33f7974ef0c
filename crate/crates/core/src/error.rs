use std::path::PathBuf;

use thiserror::Error;

/// Broad class of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed, inconsistent or insufficient input data.
    Data,
    /// A statistic is undefined or an iteration failed to converge.
    Numerical,
    /// Invalid parameters supplied by the caller.
    Usage,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Data => "data",
            ErrorKind::Numerical => "numerical",
            ErrorKind::Usage => "usage",
        }
    }

    /// 1 usage, 2 data, 3 numerical.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("case `{case_id}` is present in the {present_in} but not the {missing_from}")]
    MismatchedCases {
        case_id: String,
        present_in: &'static str,
        missing_from: &'static str,
    },
    #[error("finding sets differ: predictions have {predictions:?}, labels have {labels:?}")]
    MismatchedFindings {
        predictions: Vec<String>,
        labels: Vec<String>,
    },
    #[error("probability {value} for model `{model_id}`, case `{case_id}`, finding `{finding}` is outside (0, 1)")]
    OutOfRangeProbability {
        model_id: String,
        case_id: String,
        finding: String,
        value: f64,
    },
    #[error("probability {0} is outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("duplicate entry {0}")]
    DuplicateEntry(String),
    #[error("invalid finding set: {0}")]
    InvalidFindingSet(String),
    #[error("finding index {index} out of range for {len} findings")]
    InvalidFindingIndex { index: usize, len: usize },
    #[error("unknown finding `{0}`")]
    UnknownFinding(String),
    #[error("tensor is incomplete: expected {expected} values, got {actual}")]
    IncompleteTensor { expected: usize, actual: usize },
    #[error("missing (case, finding) pair ({case_id}, {finding})")]
    MissingPair { case_id: String, finding: String },
    #[error("invalid label `{value}` at line {line} (expected 0 or 1)")]
    InvalidLabel { line: u64, value: String },
    #[error("parse error at line {line}, column `{column}`: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("at least {required} models are required, got {actual}")]
    TooFewModels { required: usize, actual: usize },
    #[error("pooled population is empty")]
    EmptyPool,
    #[error("no records to summarize")]
    EmptyInput,
    #[error("bin count must be at least 1")]
    InvalidBinCount,
    #[error("value {value} lies outside the histogram range [{low}, {high}]")]
    ValueOutsideRange { value: f64, low: f64, high: f64 },
    #[error("group size {group_size} exceeds the {n_models} available models")]
    GroupTooLarge { group_size: usize, n_models: usize },
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("paired differences have zero variance; the t statistic is undefined")]
    DegenerateDifferences,
    #[error("both classes are required; got {n_pos} positives and {n_neg} negatives")]
    OneClassOnly { n_pos: usize, n_neg: usize },
    #[error(
        "at least 2 cases per class are required; got {n_pos} positives and {n_neg} negatives"
    )]
    TooFewPerClass { n_pos: usize, n_neg: usize },
    #[error("{redraws} of {replicates} bootstrap replicates contained a single class")]
    TooManyDegenerateReplicates { redraws: usize, replicates: usize },
    #[error("not enough normal cases: requested {requested}, available {available}")]
    NotEnoughNormals { requested: usize, available: usize },
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            DegenerateDifferences | NoConvergence(_) | TooManyDegenerateReplicates { .. } => {
                ErrorKind::Numerical
            }
            InvalidBinCount | GroupTooLarge { .. } | InvalidConfig(_) | InvalidArgument(_) => {
                ErrorKind::Usage
            }
            _ => ErrorKind::Data,
        }
    }

    /// Stable snake_case tag for structured error output.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            MismatchedCases { .. } => "mismatched_cases",
            MismatchedFindings { .. } => "mismatched_findings",
            OutOfRangeProbability { .. } | ProbabilityOutOfRange(_) => "out_of_range_probability",
            DuplicateEntry(_) => "duplicate_entry",
            InvalidFindingSet(_) => "invalid_finding_set",
            InvalidFindingIndex { .. } => "invalid_finding_index",
            UnknownFinding(_) => "unknown_finding",
            IncompleteTensor { .. } => "incomplete_tensor",
            MissingPair { .. } => "missing_pair",
            InvalidLabel { .. } => "invalid_label",
            Parse { .. } => "parse_error",
            Io { .. } => "io_error",
            TooFewModels { .. } => "too_few_models",
            EmptyPool => "empty_pool",
            EmptyInput => "empty_input",
            InvalidBinCount => "invalid_bin_count",
            ValueOutsideRange { .. } => "value_outside_range",
            GroupTooLarge { .. } => "group_too_large",
            LengthMismatch(..) => "length_mismatch",
            DegenerateDifferences => "degenerate_differences",
            OneClassOnly { .. } => "one_class_only",
            TooFewPerClass { .. } => "too_few_per_class",
            TooManyDegenerateReplicates { .. } => "too_many_degenerate_replicates",
            NotEnoughNormals { .. } => "not_enough_normals",
            InvalidConfig(_) => "invalid_config",
            InvalidArgument(_) => "invalid_argument",
            NoConvergence(_) => "no_convergence",
            Serialize(_) => "serialize_error",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("thesaurus parse error at line {line}: {message}")]
    ThesaurusParse { line: usize, message: String },
    #[error("duplicate descriptor id {id:?} at line {line}")]
    DuplicateDescriptor { id: String, line: usize },
    #[error("descriptor {id:?} (line {line}) has {relation} link to unknown descriptor {target:?}")]
    DanglingReference {
        id: String,
        relation: &'static str,
        target: String,
        line: usize,
    },
    #[error("descriptor {id:?} (line {line}) has no label for language {language:?}")]
    MissingLabel {
        id: String,
        language: String,
        line: usize,
    },
    #[error("unknown descriptor {0:?}")]
    UnknownDescriptor(String),
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),

    #[error("corpus parse error at line {line}: {message}")]
    CorpusParse { line: usize, message: String },
    #[error("duplicate document id {id:?} at line {line}")]
    DuplicateDocument { id: String, line: usize },
    #[error("document {id:?} at line {line} has empty text")]
    EmptyText { id: String, line: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("test fraction {0} outside [0, 1]")]
    InvalidFraction(f64),

    #[error("{path}:{line}: {message}")]
    Resource {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid contingency counts k1={k1} n1={n1} k2={k2} n2={n2}")]
    InvalidCounts { k1: u64, n1: u64, k2: u64, n2: u64 },
    #[error("p-value {0} outside (0, 1]")]
    InvalidPValue(f64),
    #[error("descriptor frequency table is empty")]
    EmptyDescriptorFrequencies,

    #[error("gold descriptor set is empty")]
    EmptyGold,
    #[error("descriptor {0:?} appears more than once in the ranking")]
    DuplicateRanked(String),
    #[error("no test document has gold descriptors")]
    NoGoldDocuments,
    #[error("model has no associate lists")]
    EmptyModel,

    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("model file is truncated")]
    TruncatedModel,
    #[error("model file is malformed: {0}")]
    ModelParse(String),
    #[error("model was trained with a different preprocessing pipeline: {0}")]
    PipelineMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

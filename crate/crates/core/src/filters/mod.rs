//! Binary filters applied to candidate mentions before disambiguation:
//! names that are part of a known person name, and geo-stop words.
//! Also the builders that propose stop words from corpora and first-name
//! lists.

mod persons;
mod stopwords;

use std::path::PathBuf;

use thiserror::Error;

pub use persons::{filter_persons, match_persons, PersonLexicon, PersonMatches};
pub use stopwords::{
    build_stoplist_from_corpus, build_stoplist_from_firstnames, filter_stopwords,
    propose_from_counts, write_proposals, CorpusCounts, StopEvidence, StopList, StopProposal,
    StopProvenance,
};

/// Default corpus threshold, in occurrences per million tokens.
pub const DEFAULT_THRESHOLD_PER_MILLION: f64 = 5.0;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus has no tokens; frequencies cannot be estimated")]
    EmptyCorpus,
    #[error("threshold must be a positive number of occurrences per million, got {0}")]
    InvalidThreshold(f64),
    #[error("stop list line {line}: {message}")]
    StopList { line: usize, message: String },
}

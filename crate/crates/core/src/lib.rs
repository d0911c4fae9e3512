//! Multilingual geoparsing: gazetteer lookup, person-name and geo-stop-word
//! filtering, toponym disambiguation, evaluation and map-format export.

pub mod context;
pub mod disambig;
pub mod evalkit;
pub mod export;
pub mod filters;
pub mod gazetteer;
pub mod pipeline;
pub mod scalar;
pub mod textmatch;

pub use disambig::{Decision, Mode, ResolveOptions};
pub use evalkit::{EvalCounts, MatchMode, MetricsReport};
pub use gazetteer::{CountryCode, GazetteerIndex, LangScope, PlaceClass, PlaceId};
pub use pipeline::{DocumentRecord, Heuristic, Heuristics, TaggedRecord, Tagger, TaggerConfig};
pub use scalar::Scalar;

/// Double-precision instantiations used by the pipeline and CLI.
pub type ScoringParams64 = disambig::ScoringParams<f64>;
pub type ResolvedMention64 = disambig::ResolvedMention<f64>;
pub type CandidateScore64 = disambig::CandidateScore<f64>;
pub type AnchorSet64 = disambig::AnchorSet<f64>;
pub type LatLon64 = disambig::LatLon<f64>;
pub type Prf64 = evalkit::Prf<f64>;

/// Single-precision instantiations.
pub type ScoringParams32 = disambig::ScoringParams<f32>;
pub type ResolvedMention32 = disambig::ResolvedMention<f32>;
pub type LatLon32 = disambig::LatLon<f32>;

//! Geographic information retrieval over vague spatial language.
//!
//! The engine ingests a text corpus, extracts absolute toponyms and vague
//! relative expressions ("near", "within walking distance of", "to the
//! east of"), grounds them as possibility distributions over geographic
//! space, indexes them at five granularity levels, and answers spatial
//! event queries with fuzzy-rule-graded relevance and a defuzzified
//! most-possible event location.
//!
//! Pipeline: [`corpus`] ingest -> [`extract`] mentions against a
//! [`gazetteer`] -> [`index`] weighted spatial terms and grid cells ->
//! [`retrieval`] grade/rank/fuse -> [`geojson`] export.

pub mod config;
pub mod corpus;
pub mod error;
pub mod extract;
pub mod fixtures;
pub mod fuzzy;
pub mod gazetteer;
pub mod geo;
pub mod geojson;
pub mod index;
pub mod retrieval;

pub use config::{EngineConfig, ExtractionConfig, FusionOp, FuzzyConfig, RetrievalConfig};
pub use corpus::{tokenize, CorpusStats, CorpusStore, Document, Token};
pub use error::{Error, Result};
pub use extract::{
    Direction, Extractor, MentionKind, RelationTerm, SpatialMention,
};
pub use fuzzy::{
    defuzzify, fuse, mamdani_infer, FusionMode, FuzzyRuleBase, FuzzySet1D, GridSurface, Hedge,
    Shape, Surface, TNorm,
};
pub use gazetteer::{Footprint, Gazetteer, GranularityLevel, PlaceEntry};
pub use geo::{BBox, GeoPoint};
pub use geojson::{emit_geojson, validate_geojson, EmitOptions, MentionMarker};
pub use index::{compute_swf, spatial_similarity, SpatialIndex, SpatialTermVector};
pub use retrieval::{Engine, QueryPlan, RelevanceJudgment, ResolvedLocation};

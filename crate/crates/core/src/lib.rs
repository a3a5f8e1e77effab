//! Multi-truth discovery over conflicting multi-source claims.
//!
//! Each object may have several true values. Sources assert value sets per
//! object; every value a source leaves out on an object it covers counts as
//! disclaimed. The engine estimates two-sided source precision from random
//! walks on agreement graphs, discounts sources that share likely-false
//! values with others, weights evidence by object popularity, and keeps the
//! values whose confidence of being true beats their confidence of being
//! false.
//!
//! ```
//! use mtd_core::{engine, ClaimTable, EngineConfig};
//!
//! let mut claims = ClaimTable::new();
//! claims.insert("s1", "book", "alice");
//! claims.insert("s1", "book", "bob");
//! claims.insert("s2", "book", "alice");
//! claims.insert("s3", "book", "alice");
//! claims.insert("s3", "book", "bob");
//! let (_view, out) = engine::run(&claims, &EngineConfig::default()).unwrap();
//! assert!(out.truths.get("book").unwrap().contains("alice"));
//! ```

pub mod baselines;
pub mod claims;
pub mod engine;
pub mod graph;
pub mod malicious;
pub mod metrics;
pub mod popularity;
pub mod supportive;
pub mod synth;

pub use claims::{
    derive_view, ingest_claims, ingest_truths, write_claims, write_truths, ClaimFormat, ClaimTable, ClaimsError,
    DerivedView, ObjectId, SourceId, TruthAssignment,
};
pub use engine::{ConfidenceTable, EngineConfig, EngineError, RunOutcome, Variant};
pub use graph::{EndorsementGraph, GraphError, StationaryDistribution, WalkFailure, WalkParams};
pub use malicious::DependenceMap;
pub use metrics::{EvalError, MetricsReport};
pub use popularity::{compute_popularity, PopularityTable};
pub use supportive::{SourceProfile, SupportiveGraphs};
pub use synth::{SynthError, SynthSpec};

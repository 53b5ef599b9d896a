//! Close-kin detection in call-detail records.
//!
//! The pipeline turns raw call records into pseudonymized dyad aggregates,
//! joins subscriber metadata, picks each ego's most-called contact in four
//! cross-generational slots (mother, father, daughter, son), splits those
//! contacts into kin and quasi-kin with the two-surname rule, and builds
//! life-course tables comparing the two groups. A synthetic society
//! generator supplies ground truth for validation.
//!
//! ## Examples
//!
//! - **`ingest_cdr`** - raw records to dyad aggregates, with the rejection report
//! - **`registry_resolve`** - family-plan resolution and grey nodes
//! - **`ego_metrics`** - frequency, fraction of time, out-call fraction and call length
//! - **`classify_network`** - the slot filters on a six-node network
//! - **`synth_world`** - pedigree, registry and call stream of a synthetic world
//! - **`lifecourse_tables`** - curves, KS/t/WMW table and age-variation table
//! - **`score_classifier`** - precision and recall against ground truth
//! - **`end_to_end`** - every stage through files, with manifests
//!
//! ```bash
//! cargo run --release --example lifecourse_tables
//! ```

pub mod config;
pub mod error;
pub mod graph;
pub mod hashing;
pub mod ingest;
pub mod kinclass;
pub mod lifecourse;
pub mod pipeline;
pub mod registry;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};

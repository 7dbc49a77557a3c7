//! Condensed transition graphs for zero-shot relation prediction between
//! knowledge-graph entities.
//!
//! The pipeline, end to end:
//!
//! 1. [`kg`] loads and interns TSV triples into an indexed store.
//! 2. [`transition`] extracts the k-hop (s,t)-transition graph and can
//!    enumerate every simple s->t path in it (the exponential oracle).
//! 3. [`condense`] replaces path enumeration with one condensed path per
//!    edge, built from two BFS shortest-path trees, linear in the edge count.
//! 4. [`embed`] turns path/edge texts into fixed-dimension vectors through
//!    interchangeable backends.
//! 5. [`encoder`] trains a feed-forward condensed-graph encoder with an
//!    in-batch contrastive loss so the condensed embedding approximates the
//!    all-paths embedding.
//! 6. [`prompt`] projects graph embeddings into soft-prompt prefix vectors
//!    and assembles/export prompts for a downstream language model.
//! 7. [`eval`] predicts relations over candidate sets and scores micro
//!    precision/recall/F1, with zero-shot hygiene enforcement and a
//!    relation-masking harness.
//!
//! [`synth`] provides seeded graph generators for tests and benchmarks.

pub mod condense;
pub mod embed;
pub mod encoder;
mod error;
pub mod eval;
pub mod kg;
pub mod linalg;
pub mod prompt;
pub mod synth;
pub mod transition;

pub use error::{Error, Result};

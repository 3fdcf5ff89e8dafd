//! Detect and characterize an emerging research theme inside a bibliographic
//! corpus.
//!
//! The crate follows a five stage pipeline:
//!
//! 1. [`corpus`] and [`descriptors`]: load a flat bibliographic export, pull
//!    keywords from documents mentioning a core term, and pick the primary
//!    descriptors from their co-occurrence network.
//! 2. [`participation`]: count, per source, the documents matching every
//!    descriptor (and its spelling or acronym variants).
//! 3. [`participation`]: turn those counts into a participation percentage.
//! 4. [`participation`]: tabulate percentage bands against relatedness labels
//!    and pick the cut-off.
//! 5. [`simnet`], [`vosmap`], [`overlay`] and [`categraph`]: build a
//!    source-level similarity network, lay it out, cluster it, overlay the
//!    selected sources and summarize their categories.
//!
//! [`pipeline`] wires the stages together behind file artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod categraph;
pub mod corpus;
pub mod descriptors;
pub mod layout;
pub mod overlay;
pub mod participation;
pub mod pipeline;
pub mod similarity;
pub mod simnet;
pub mod svg;
pub mod synth;
pub mod vosmap;

mod percent;

pub use percent::round_half_up;
pub use similarity::SimilarityMatrix;

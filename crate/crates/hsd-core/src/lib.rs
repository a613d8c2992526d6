//! Hierarchical speculative decoding (HSD) for simulated document parsing.
//!
//! The crate models a two-stage page parser: a layout/draft pipeline proposes
//! token drafts per region, a target language model verifies region drafts in
//! parallel (stage 1), and the verified region outputs seed a page-level
//! speculative decode (stage 2). Verification is decoupled from drafting:
//! drafts are produced once per page and re-aligned to the evolving prefix
//! through a sliding reference window, so the drafter is never re-invoked.
//!
//! Modules map onto the moving parts:
//! - [`token`]: token ids, 1-indexed sequences, vocabulary files
//! - [`model`]: target-model trait plus scripted and n-gram toy models
//! - [`doc`]: document/region simulation and corpus generation
//! - [`draft`]: noisy draft pipeline (jitter / substitution / deletion)
//! - [`dsv`]: windowed alignment, prefix trees, packed verification steps
//! - [`hier`]: stage-1/stage-2 orchestration and run modes
//! - [`metrics`]: acceptance length, latency model, speedup ratios
//!
//! Probability-bearing types are generic over the scalar (`f32`/`f64`) via
//! [`Scalar`]; `f64` is the default used by the CLI and the aliases below.

pub mod corpus;
pub mod doc;
pub mod draft;
pub mod dsv;
pub mod error;
pub mod hier;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod token;

pub use error::{Error, Result};
pub use scalar::Scalar;

// Concrete instantiations. f64 is the reference precision; the f32 variants
// exist for embedding in space-constrained hosts and carry the same contracts.
pub type NextTokenDist64 = model::NextTokenDist<f64>;
pub type NextTokenDist32 = model::NextTokenDist<f32>;
pub type ScriptedModel64 = model::ScriptedModel<f64>;
pub type ScriptedModel32 = model::ScriptedModel<f32>;
pub type NGramModel64 = model::NGramModel<f64>;
pub type NGramModel32 = model::NGramModel<f32>;
pub type AlignParams64 = dsv::AlignParams<f64>;
pub type AlignParams32 = dsv::AlignParams<f32>;
pub type LatencyModel64 = metrics::LatencyModel<f64>;
pub type LatencyModel32 = metrics::LatencyModel<f32>;
pub type RunMetrics64 = metrics::RunMetrics<f64>;
pub type RunMetrics32 = metrics::RunMetrics<f32>;

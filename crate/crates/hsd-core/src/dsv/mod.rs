//! Decoupled speculative verification.
//!
//! Drafts are produced once per page. Each step re-aligns them to the
//! evolving prefix: the reference window (last `n` accepted tokens) is
//! located inside every draft, the continuations after the matches become a
//! candidate set, and the merged candidate prefix tree is verified in one
//! packed forward pass. No candidates means a plain greedy step, so decoding
//! always makes progress.

pub mod align;
pub mod tree;
pub mod verify;

pub use align::{
    anchored_candidates, extract_candidates, find_matches, reference_window, CandidateSet, MatchSet,
};
pub use tree::{build_prefix_tree, linearize_with_mask, AncestryMask, PackedTree, PrefixTree};
pub use verify::{accept_token, verify_step, Acceptance, StepOutcome, WalkEvent, WalkOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ScoringContext, TargetModel};
use crate::scalar::Scalar;
use crate::token::{Token, TokenSeq};

/// Alignment and acceptance parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignParams<S: Scalar> {
    /// Reference window length; while the prefix is shorter, the whole prefix
    /// is the window.
    pub n: usize,
    /// Acceptance threshold in (0, 1]; `1.0` is the exact-match ablation.
    pub tau: S,
    /// Packed-tree budget per step.
    pub max_tree_tokens: usize,
    /// Generation cap (tokens).
    pub max_len: usize,
    /// Candidate depth cap; halved once when a tree overflows the budget.
    pub depth_cap: usize,
}

impl<S: Scalar> Default for AlignParams<S> {
    fn default() -> Self {
        AlignParams {
            n: 3,
            tau: S::from_f64_lossy(0.75),
            max_tree_tokens: 256,
            max_len: 2048,
            depth_cap: 16,
        }
    }
}

impl<S: Scalar> AlignParams<S> {
    pub fn with_tau(tau: S) -> Self {
        AlignParams { tau, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("window length n must be at least 1".into()));
        }
        if !(self.tau > S::zero() && self.tau <= S::one()) {
            return Err(Error::Config("tau must lie in (0, 1]".into()));
        }
        if self.max_tree_tokens == 0 || self.depth_cap == 0 || self.max_len == 0 {
            return Err(Error::Config("caps must be positive".into()));
        }
        Ok(())
    }
}

/// Per-step accounting. Prefix growth of a step is `a_i + bonus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index within its decode.
    pub step: usize,
    /// Accepted draft tokens.
    pub a_i: usize,
    /// 1 when a correction/continuation token was appended, 0 on EOS.
    pub bonus: usize,
    /// Positions scored this step (packed tree plus the root continuation).
    pub packed_size: usize,
    /// Candidate continuations found by alignment (before any dedup retry).
    pub candidates_found: usize,
}

/// A finished decode: output tokens plus the per-step records.
#[derive(Debug, Clone)]
pub struct DecodeRun {
    pub output: TokenSeq,
    pub records: Vec<StepRecord>,
    pub eos_reached: bool,
}

/// Verbose step description for tracing.
#[derive(Debug, Clone)]
pub struct StepDetail<S: Scalar> {
    pub step: usize,
    pub window: TokenSeq,
    /// True for the empty-prefix startup step (candidates anchored at draft
    /// starts rather than window matches).
    pub anchored: bool,
    pub candidates_found: usize,
    pub tree_tokens: usize,
    pub walk: Vec<WalkEvent<S>>,
    pub a_i: usize,
    pub appended: Option<Token>,
    pub eos: bool,
}

/// Decode a full sequence against fixed drafts.
pub fn spec_decode<S: Scalar, M: TargetModel<S> + ?Sized>(
    model: &M,
    ctx: &ScoringContext,
    drafts: &[TokenSeq],
    params: &AlignParams<S>,
) -> Result<DecodeRun> {
    Ok(decode_inner(model, ctx, drafts, params, None)?.0)
}

/// As [`spec_decode`], additionally returning verbose per-step details.
pub fn spec_decode_traced<S: Scalar, M: TargetModel<S> + ?Sized>(
    model: &M,
    ctx: &ScoringContext,
    drafts: &[TokenSeq],
    params: &AlignParams<S>,
) -> Result<(DecodeRun, Vec<StepDetail<S>>)> {
    let mut details = Vec::new();
    let (run, _) = decode_inner(model, ctx, drafts, params, Some(&mut details))?;
    Ok((run, details))
}

fn decode_inner<S: Scalar, M: TargetModel<S> + ?Sized>(
    model: &M,
    ctx: &ScoringContext,
    drafts: &[TokenSeq],
    params: &AlignParams<S>,
    mut details: Option<&mut Vec<StepDetail<S>>>,
) -> Result<(DecodeRun, ())> {
    params.validate()?;
    let mut prefix = TokenSeq::new();
    let mut records: Vec<StepRecord> = Vec::new();
    let mut eos = false;

    while !eos && prefix.len() < params.max_len {
        // Never let a step overshoot the generation cap: the accepted path
        // plus the bonus token fits in the remaining budget.
        let remaining = params.max_len - prefix.len();
        let depth = params.depth_cap.min(remaining.saturating_sub(1));
        let window = reference_window(&prefix, params.n);
        let anchored = prefix.is_empty();
        let cands = if anchored {
            anchored_candidates(drafts, depth)
        } else {
            extract_candidates(drafts, &window, depth)
        };

        let before = prefix.len();
        let mut out = verify_step(model, ctx, &prefix, &cands, params)?;
        out.record.step = records.len() + 1;
        debug_assert_eq!(out.prefix.len(), before + out.record.a_i + out.record.bonus);

        if let Some(sink) = details.as_deref_mut() {
            let appended = if out.record.bonus == 1 { out.prefix.get1(out.prefix.len()) } else { None };
            sink.push(StepDetail {
                step: out.record.step,
                window: window.clone(),
                anchored,
                candidates_found: out.record.candidates_found,
                tree_tokens: out.tree_tokens,
                walk: out.walk.clone(),
                a_i: out.record.a_i,
                appended,
                eos: out.eos_reached,
            });
        }

        prefix = out.prefix;
        eos = out.eos_reached;
        records.push(out.record);
    }

    debug_assert_eq!(prefix.len(), records.iter().map(|r| r.a_i + r.bonus).sum::<usize>());
    Ok((DecodeRun { output: prefix, records, eos_reached: eos }, ()))
}

//! Two-stage hierarchical orchestration.
//!
//! Stage 1 verifies each pipeline region independently (and in parallel)
//! against the target model's region view; stage 2 treats the corrected
//! stage-1 outputs as an unordered draft set for one page-level pass, which
//! restores reading order and inserts structural separators. Baseline and
//! page-only modes share the same entry point so benchmark runs differ only
//! in the `RunMode`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::doc::Document;
use crate::draft::{aggregate_page_drafts, draft_quality_score, DraftSet, NoiseSpec, PageDraftSet};
use crate::dsv::{spec_decode, AlignParams, DecodeRun, StepRecord};
use crate::error::{Error, Result};
use crate::model::{greedy_decode, ScoringContext, TargetModel};
use crate::scalar::Scalar;
use crate::token::TokenSeq;

/// Benchmark execution modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Plain greedy decoding of the full page, no drafts.
    Ar,
    /// One page-level verification pass over the raw pipeline drafts.
    PageOnly,
    /// Region-level verification first, then the page-level pass.
    Hierarchical,
}

impl RunMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunMode::Ar => "ar",
            RunMode::PageOnly => "page_only",
            RunMode::Hierarchical => "hierarchical",
        }
    }
}

/// Outcome of one region's stage-1 verification.
#[derive(Debug, Clone, Serialize)]
pub struct Stage1Region {
    /// 1-based pipeline reading-order index.
    pub region_index: usize,
    /// 1-based source document region (the scoring view used).
    pub source: usize,
    pub output: TokenSeq,
    pub records: Vec<StepRecord>,
    /// True when verification failed (oversized tree) and the best-scoring
    /// raw draft was passed through instead.
    pub degraded: bool,
}

/// Full trace of one page run.
#[derive(Debug, Clone, Serialize)]
pub struct PageResult {
    pub mode: RunMode,
    pub output: TokenSeq,
    pub eos_reached: bool,
    pub stage1: Vec<Stage1Region>,
    pub stage2_records: Vec<StepRecord>,
    /// Pipeline draft quality (absent for the draft-free baseline).
    pub draft_quality: Option<f64>,
}

impl PageResult {
    /// All verification step records, region passes first then the page pass.
    pub fn pooled_records(&self) -> Vec<StepRecord> {
        let mut out: Vec<StepRecord> =
            self.stage1.iter().flat_map(|r| r.records.iter().copied()).collect();
        out.extend(self.stage2_records.iter().copied());
        out
    }
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Total model log-probability of `seq` (with end-of-sequence) under `ctx`,
/// used to rank raw drafts when a region must be passed through unverified.
fn sequence_logprob<S: Scalar, M: TargetModel<S> + ?Sized>(
    model: &M,
    ctx: &ScoringContext,
    seq: &TokenSeq,
) -> Result<S> {
    let mut total = S::zero();
    let mut prefix = TokenSeq::new();
    for tok in seq.iter() {
        let dist = model.next_dist(ctx, &prefix)?;
        total = total + dist.logprob(tok);
        prefix.push(tok);
    }
    Ok(total)
}

fn degraded_output<S: Scalar, M: TargetModel<S> + ?Sized>(
    model: &M,
    ctx: &ScoringContext,
    drafts: &[TokenSeq],
) -> Result<TokenSeq> {
    let mut best: Option<(S, &TokenSeq)> = None;
    for d in drafts {
        let lp = sequence_logprob(model, ctx, d)?;
        if best.as_ref().map_or(true, |(b, _)| lp > *b) {
            best = Some((lp, d));
        }
    }
    best.map(|(_, d)| d.clone())
        .ok_or_else(|| Error::Context("cannot degrade a region with no drafts".into()))
}

/// Verify every pipeline region against its regional view. Regions run in
/// parallel; results are collected back in reading order, so the outcome is
/// independent of scheduling.
pub fn run_stage1<S: Scalar, M: TargetModel<S> + Sync + ?Sized>(
    model: &M,
    doc: &Document,
    drafts: &DraftSet,
    params: &AlignParams<S>,
) -> Result<Vec<Stage1Region>> {
    drafts
        .per_region
        .par_iter()
        .map(|rd| {
            let ctx = ScoringContext::region(&doc.doc_id, rd.region_ref.source);
            match spec_decode(model, &ctx, &rd.drafts, params) {
                Ok(run) => Ok(Stage1Region {
                    region_index: rd.region_ref.region_index,
                    source: rd.region_ref.source,
                    output: run.output,
                    records: run.records,
                    degraded: false,
                }),
                Err(Error::TreeSize { .. }) => Ok(Stage1Region {
                    region_index: rd.region_ref.region_index,
                    source: rd.region_ref.source,
                    output: degraded_output(model, &ctx, &rd.drafts)?,
                    records: Vec::new(),
                    degraded: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// One page-level verification pass over an unordered draft set.
pub fn run_stage2<S: Scalar, M: TargetModel<S> + ?Sized>(
    model: &M,
    doc: &Document,
    page_drafts: &PageDraftSet,
    params: &AlignParams<S>,
) -> Result<DecodeRun> {
    let ctx = ScoringContext::page(&doc.doc_id);
    spec_decode(model, &ctx, page_drafts.drafts(), params)
}

/// Run one page end to end in the given mode.
pub fn run_page<S: Scalar, M: TargetModel<S> + Sync + ?Sized>(
    model: &M,
    doc: &Document,
    mode: RunMode,
    noise: &NoiseSpec,
    drafts_per_region: usize,
    params: &AlignParams<S>,
) -> Result<PageResult> {
    params.validate()?;
    match mode {
        RunMode::Ar => {
            let ctx = ScoringContext::page(&doc.doc_id);
            let output = greedy_decode(model, &ctx, params.max_len)?;
            let eos_reached = output.len() < params.max_len;
            Ok(PageResult {
                mode,
                output,
                eos_reached,
                stage1: Vec::new(),
                stage2_records: Vec::new(),
                draft_quality: None,
            })
        }
        RunMode::PageOnly => {
            let drafts = crate::draft::run_pipeline(doc, noise, drafts_per_region, model.vocab_size())?;
            let quality = draft_quality_score(doc, &drafts);
            let page_drafts = aggregate_page_drafts(&drafts.all_drafts());
            let run = run_stage2(model, doc, &page_drafts, params)?;
            Ok(PageResult {
                mode,
                output: run.output,
                eos_reached: run.eos_reached,
                stage1: Vec::new(),
                stage2_records: run.records,
                draft_quality: Some(quality),
            })
        }
        RunMode::Hierarchical => {
            let drafts = crate::draft::run_pipeline(doc, noise, drafts_per_region, model.vocab_size())?;
            let quality = draft_quality_score(doc, &drafts);
            let stage1 = run_stage1(model, doc, &drafts, params)?;
            let outputs: Vec<TokenSeq> = stage1.iter().map(|r| r.output.clone()).collect();
            let page_drafts = aggregate_page_drafts(&outputs);
            let run = run_stage2(model, doc, &page_drafts, params)?;
            Ok(PageResult {
                mode,
                output: run.output,
                eos_reached: run.eos_reached,
                stage1,
                stage2_records: run.records,
                draft_quality: Some(quality),
            })
        }
    }
}

/// Concatenation of stage-1 outputs in reading order — deliberately *not* the
/// page output, since it lacks the page view's structural separators.
pub fn stage1_concat(stage1: &[Stage1Region]) -> TokenSeq {
    let mut out = TokenSeq::new();
    for r in stage1 {
        out = out.concat(&r.output);
    }
    out
}

//! Acceptance metrics and the analytic latency model.
//!
//! Wall-clock numbers on small toy models mostly measure interpreter and
//! allocator noise, so speedups are primarily *modeled*: every verification
//! step is charged a fixed overhead plus a per-packed-token cost, prefill is
//! charged once per page, and the draft pipeline once per page for draft-based
//! modes. Stage-1 regions verify in parallel, so their modeled wall cost is
//! the maximum over regions, not the sum. Measured times ride along for
//! reference only.

use serde::{Deserialize, Serialize};

use crate::dsv::StepRecord;
use crate::error::{Error, Result};
use crate::hier::{PageResult, RunMode};
use crate::scalar::Scalar;

/// Analytic cost model, in abstract milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel<S: Scalar> {
    /// One-off cost of the cheap draft pipeline, charged per page to
    /// draft-based modes only.
    pub pipeline_page_cost: S,
    /// Prefill cost: `prefill_a + prefill_b * context_tokens`.
    pub prefill_a: S,
    pub prefill_b: S,
    /// Decode step cost: `step_a + step_b * packed_size`.
    pub step_a: S,
    pub step_b: S,
}

impl<S: Scalar> Default for LatencyModel<S> {
    fn default() -> Self {
        let c = S::from_f64_lossy;
        LatencyModel {
            pipeline_page_cost: c(2.0),
            prefill_a: c(5.0),
            prefill_b: c(0.5),
            step_a: c(1.0),
            step_b: c(0.01),
        }
    }
}

impl<S: Scalar> LatencyModel<S> {
    pub fn prefill_cost(&self, context_tokens: usize) -> S {
        self.prefill_a + self.prefill_b * S::from_f64_lossy(context_tokens as f64)
    }

    pub fn step_cost(&self, packed_size: usize) -> S {
        self.step_a + self.step_b * S::from_f64_lossy(packed_size as f64)
    }

    /// Total decode cost of a record trace.
    pub fn records_cost(&self, records: &[StepRecord]) -> S {
        records.iter().map(|r| self.step_cost(r.packed_size)).fold(S::zero(), |a, b| a + b)
    }

    /// Scale prefill cost by `factor`, leaving decode costs untouched.
    pub fn with_prefill_scaled(&self, factor: f64) -> Self {
        let f = S::from_f64_lossy(factor);
        LatencyModel { prefill_a: self.prefill_a * f, prefill_b: self.prefill_b * f, ..*self }
    }
}

// ---------------------------------------------------------------------------
// Trace statistics
// ---------------------------------------------------------------------------

/// Average acceptance length: the mean of per-step accepted-token counts.
pub fn compute_aal<S: Scalar>(records: &[StepRecord]) -> Result<S> {
    if records.is_empty() {
        return Err(Error::Metric("average acceptance length of an empty trace".into()));
    }
    let total: usize = records.iter().map(|r| r.a_i).sum();
    Ok(S::from_f64_lossy(total as f64 / records.len() as f64))
}

/// Mean tokens emitted per verification step (accepted plus the bonus token).
pub fn tokens_per_step<S: Scalar>(records: &[StepRecord]) -> Result<S> {
    if records.is_empty() {
        return Err(Error::Metric("tokens-per-step of an empty trace".into()));
    }
    let total: usize = records.iter().map(|r| r.a_i + r.bonus).sum();
    Ok(S::from_f64_lossy(total as f64 / records.len() as f64))
}

/// Modeled (decode, full) times for a flat record trace.
pub fn modeled_times<S: Scalar>(
    records: &[StepRecord],
    lat: &LatencyModel<S>,
    context_tokens: usize,
    include_pipeline: bool,
) -> (S, S) {
    let mut decode = lat.records_cost(records);
    if include_pipeline {
        decode = decode + lat.pipeline_page_cost;
    }
    (decode, decode + lat.prefill_cost(context_tokens))
}

// ---------------------------------------------------------------------------
// Per-run metrics
// ---------------------------------------------------------------------------

/// Headline numbers for one page run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics<S: Scalar> {
    /// Mean accepted tokens per step (0 for the baseline, by convention).
    pub aal: S,
    pub tokens_per_step: S,
    /// Number of target-model decode steps.
    pub steps: usize,
    pub modeled_decode_time: S,
    pub modeled_full_time: S,
    /// Wall-clock seconds, informational only; 0 until the harness fills them.
    pub measured_decode_time: f64,
    pub measured_full_time: f64,
}

/// Compute modeled metrics for one page run. `context_tokens` is the page's
/// conditioning size, charged as prefill once to every mode.
pub fn page_metrics<S: Scalar>(
    result: &PageResult,
    lat: &LatencyModel<S>,
    context_tokens: usize,
) -> Result<RunMetrics<S>> {
    let prefill = lat.prefill_cost(context_tokens);
    match result.mode {
        RunMode::Ar => {
            let steps = result.output.len();
            let decode = lat.step_cost(1) * S::from_f64_lossy(steps as f64);
            Ok(RunMetrics {
                aal: S::zero(),
                tokens_per_step: S::one(),
                steps,
                modeled_decode_time: decode,
                modeled_full_time: decode + prefill,
                measured_decode_time: 0.0,
                measured_full_time: 0.0,
            })
        }
        RunMode::PageOnly | RunMode::Hierarchical => {
            let pooled = result.pooled_records();
            if pooled.is_empty() {
                return Err(Error::Metric("draft-based run produced no verification steps".into()));
            }
            // Stage 1 runs regions in parallel: wall cost is the slowest region.
            let stage1_wall = result
                .stage1
                .iter()
                .map(|r| lat.records_cost(&r.records))
                .fold(S::zero(), |a, b| if b > a { b } else { a });
            let stage2 = lat.records_cost(&result.stage2_records);
            let decode = lat.pipeline_page_cost + stage1_wall + stage2;
            Ok(RunMetrics {
                aal: compute_aal(&pooled)?,
                tokens_per_step: tokens_per_step(&pooled)?,
                steps: pooled.len(),
                modeled_decode_time: decode,
                modeled_full_time: decode + prefill,
                measured_decode_time: 0.0,
                measured_full_time: 0.0,
            })
        }
    }
}

/// Modeled speedup ratios `(decode, end-to-end)` of `accelerated` over the
/// `baseline` run.
pub fn speedup<S: Scalar>(baseline: &RunMetrics<S>, accelerated: &RunMetrics<S>) -> Result<(S, S)> {
    if accelerated.modeled_decode_time <= S::zero() || accelerated.modeled_full_time <= S::zero() {
        return Err(Error::Metric("speedup over a non-positive modeled time".into()));
    }
    Ok((
        baseline.modeled_decode_time / accelerated.modeled_decode_time,
        baseline.modeled_full_time / accelerated.modeled_full_time,
    ))
}

//! Noisy draft pipeline.
//!
//! Simulates the cheap end-to-end parser that drafts each region once per
//! page. Noise has three knobs applied in order: layout jitter (boundary
//! moves plus occasional region split/merge), per-token substitution and
//! per-token deletion. All draws come from labeled substreams of the noise
//! seed, so a draft set is a pure function of (document, noise spec).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::doc::{Document, Region, RegionKind};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::token::{Token, TokenSeq};

/// Noise parameters for one pipeline invocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Per-token substitution probability.
    pub sub_rate: f64,
    /// Per-token deletion probability.
    pub del_rate: f64,
    /// Layout jitter magnitude δ >= 0: up to ⌊δ⌋ tokens move across each
    /// region boundary, and regions split/merge with probability min(1, δ/10).
    pub jitter: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noiseless(seed: u64) -> Self {
        NoiseSpec { sub_rate: 0.0, del_rate: 0.0, jitter: 0.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.sub_rate) || !unit(self.del_rate) {
            return Err(Error::Config("substitution/deletion rates must lie in [0, 1]".into()));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::Config("jitter must be a finite non-negative magnitude".into()));
        }
        Ok(())
    }
}

/// A region as the pipeline sees it after jitter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineRegion {
    /// 1-based position in the pipeline's reading order.
    pub region_index: usize,
    /// 1-based document region this crop primarily covers (splits share a
    /// source; a merge keeps the left source).
    pub source: usize,
    pub kind: RegionKind,
}

/// Drafts for one pipeline region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDrafts {
    pub region_ref: PipelineRegion,
    pub drafts: Vec<TokenSeq>,
}

/// Fixed per-page draft output: one entry per pipeline region, in pipeline
/// reading order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DraftSet {
    pub per_region: Vec<RegionDrafts>,
}

impl DraftSet {
    pub fn n_regions(&self) -> usize {
        self.per_region.len()
    }

    /// First (primary) draft of every region, in reading order.
    pub fn primary_drafts(&self) -> Vec<TokenSeq> {
        self.per_region.iter().filter_map(|r| r.drafts.first().cloned()).collect()
    }

    /// Every draft of every region, in reading order.
    pub fn all_drafts(&self) -> Vec<TokenSeq> {
        self.per_region.iter().flat_map(|r| r.drafts.iter().cloned()).collect()
    }
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct JitterSlot {
    tokens: Vec<Token>,
    source: usize,
    kind: RegionKind,
}

fn apply_jitter<R: Rng>(rng: &mut R, regions: &[Region], jitter: f64) -> Vec<JitterSlot> {
    let mut slots: Vec<JitterSlot> = regions
        .iter()
        .map(|r| JitterSlot { tokens: r.truth.as_slice().to_vec(), source: r.region_index, kind: r.kind })
        .collect();
    if jitter <= 0.0 {
        return slots;
    }
    let p_structure = (jitter / 10.0).min(1.0);

    // Merge pass: each boundary collapses at most once.
    let mut i = 0;
    while i + 1 < slots.len() {
        if rng.gen::<f64>() < p_structure {
            let right = slots.remove(i + 1);
            slots[i].tokens.extend(right.tokens);
        }
        i += 1;
    }

    // Split pass: each region splits at most once, at a uniform cut point.
    let mut i = 0;
    while i < slots.len() {
        if slots[i].tokens.len() >= 2 && rng.gen::<f64>() < p_structure {
            let cut = rng.gen_range(1..slots[i].tokens.len());
            let tail = slots[i].tokens.split_off(cut);
            let (source, kind) = (slots[i].source, slots[i].kind);
            slots.insert(i + 1, JitterSlot { tokens: tail, source, kind });
            i += 1; // skip the new right half
        }
        i += 1;
    }

    // Boundary shifts: move up to ⌊δ⌋ tokens across each boundary, keeping
    // every region non-empty.
    let d = jitter.floor() as i64;
    if d > 0 {
        for i in 0..slots.len().saturating_sub(1) {
            let shift = rng.gen_range(-d..=d);
            if shift < 0 {
                // Left-shift: the boundary moves left, tokens flow rightwards.
                let take = (-shift as usize).min(slots[i].tokens.len().saturating_sub(1));
                let at = slots[i].tokens.len() - take;
                let moved = slots[i].tokens.split_off(at);
                slots[i + 1].tokens.splice(0..0, moved);
            } else if shift > 0 {
                let take = (shift as usize).min(slots[i + 1].tokens.len().saturating_sub(1));
                let moved: Vec<Token> = slots[i + 1].tokens.drain(0..take).collect();
                slots[i].tokens.extend(moved);
            }
        }
    }
    slots
}

/// Substitute with a uniformly random *different* non-reserved token
/// (ids >= 3, so pad/eos/unk never enter drafts).
fn substitute<R: Rng>(rng: &mut R, orig: Token, vocab_size: usize) -> Token {
    let lo = 3u32;
    let hi = vocab_size as u32;
    debug_assert!(hi > lo + 1, "substitution needs at least two non-reserved tokens");
    let n_others = hi - lo - u32::from(orig.0 >= lo);
    let mut pick = lo + rng.gen_range(0..n_others);
    if orig.0 >= lo && pick >= orig.0 {
        pick += 1;
    }
    Token(pick)
}

fn corrupt<R: Rng>(rng: &mut R, truth: &[Token], noise: &NoiseSpec, vocab_size: usize) -> TokenSeq {
    let mut tokens: Vec<Token> = truth
        .iter()
        .map(|&t| if rng.gen::<f64>() < noise.sub_rate { substitute(rng, t, vocab_size) } else { t })
        .collect();
    let kept: Vec<Token> = tokens.iter().copied().filter(|_| rng.gen::<f64>() >= noise.del_rate).collect();
    if kept.is_empty() {
        // Keep drafts non-empty: deletion spares the first token.
        tokens.truncate(1);
    } else {
        tokens = kept;
    }
    tokens.into()
}

/// Run the draft pipeline once: jitter the layout, then corrupt each region
/// `drafts_per_region` times with independent draws.
pub fn run_pipeline(
    doc: &Document,
    noise: &NoiseSpec,
    drafts_per_region: usize,
    vocab_size: usize,
) -> Result<DraftSet> {
    noise.validate()?;
    if drafts_per_region == 0 {
        return Err(Error::Config("drafts_per_region must be at least 1".into()));
    }
    if vocab_size < 5 {
        return Err(Error::Config("vocabulary too small for substitution noise".into()));
    }

    let mut jitter_rng = substream(noise.seed, &format!("noise/jitter/{}", doc.doc_id));
    let slots = apply_jitter(&mut jitter_rng, &doc.regions, noise.jitter);

    let mut per_region = Vec::with_capacity(slots.len());
    for (i, slot) in slots.iter().enumerate() {
        let region_index = i + 1;
        let mut drafts = Vec::with_capacity(drafts_per_region);
        for k in 0..drafts_per_region {
            let mut rng =
                substream(noise.seed, &format!("noise/corrupt/{}/{}/{}", doc.doc_id, region_index, k));
            drafts.push(corrupt(&mut rng, &slot.tokens, noise, vocab_size));
        }
        per_region.push(RegionDrafts {
            region_ref: PipelineRegion { region_index, source: slot.source, kind: slot.kind },
            drafts,
        });
    }
    Ok(DraftSet { per_region })
}

// ---------------------------------------------------------------------------
// Page draft set
// ---------------------------------------------------------------------------

/// Unordered collection of page-level drafts. Internally canonicalised
/// (sorted), so equality and all downstream operations are invariant to the
/// order in which drafts arrive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageDraftSet {
    drafts: Vec<TokenSeq>,
}

impl PageDraftSet {
    pub fn new(mut drafts: Vec<TokenSeq>) -> Self {
        drafts.retain(|d| !d.is_empty());
        drafts.sort();
        PageDraftSet { drafts }
    }

    pub fn drafts(&self) -> &[TokenSeq] {
        &self.drafts
    }

    pub fn len(&self) -> usize {
        self.drafts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drafts.is_empty()
    }
}

/// Collect stage-1 outputs into the page draft set `Ỹ^pg`. Empty outputs are
/// dropped; an empty input yields the degenerate empty set.
pub fn aggregate_page_drafts(stage1_outputs: &[TokenSeq]) -> PageDraftSet {
    PageDraftSet::new(stage1_outputs.to_vec())
}

// ---------------------------------------------------------------------------
// Draft quality
// ---------------------------------------------------------------------------

fn levenshtein(a: &[Token], b: &[Token]) -> usize {
    let (n, m) = (a.len(), b.len());
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut cur = vec![0usize; m + 1];
    for i in 1..=n {
        cur[0] = i;
        for j in 1..=m {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// `1 - mean(normalised edit distance)` over reading-order-aligned regions,
/// using each region's primary draft. Regions left unmatched by a layout
/// change count as maximal distance.
pub fn draft_quality_score(doc: &Document, drafts: &DraftSet) -> f64 {
    let m = doc.regions.len().max(drafts.per_region.len());
    if m == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    for i in 0..m {
        let truth = doc.regions.get(i).map(|r| r.truth.as_slice());
        let draft = drafts.per_region.get(i).and_then(|r| r.drafts.first()).map(|d| d.as_slice());
        total += match (truth, draft) {
            (Some(t), Some(d)) => {
                let denom = t.len().max(d.len()).max(1);
                levenshtein(t, d) as f64 / denom as f64
            }
            _ => 1.0,
        };
    }
    1.0 - total / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::builtin_vocabulary;
    use crate::doc::{generate_document, KindMix};
    use crate::token::{EOS, PAD, UNK};

    fn doc(seed: u64) -> Document {
        let v = builtin_vocabulary();
        generate_document(&v, format!("d{seed}"), seed, 3, (6, 12), &KindMix::default()).unwrap()
    }

    fn vocab_size() -> usize {
        builtin_vocabulary().size()
    }

    #[test]
    fn zero_noise_reproduces_regions_exactly() {
        let d = doc(1);
        let out = run_pipeline(&d, &NoiseSpec::noiseless(9), 1, vocab_size()).unwrap();
        assert_eq!(out.n_regions(), d.regions.len());
        for (r, rd) in d.regions.iter().zip(&out.per_region) {
            assert_eq!(rd.drafts.len(), 1);
            assert_eq!(rd.drafts[0], r.truth);
            assert_eq!(rd.region_ref.source, r.region_index);
        }
        assert_eq!(draft_quality_score(&d, &out), 1.0);
    }

    #[test]
    fn pipeline_is_deterministic_in_the_noise_seed() {
        let d = doc(2);
        let noise = NoiseSpec { sub_rate: 0.2, del_rate: 0.1, jitter: 1.5, seed: 7 };
        let a = run_pipeline(&d, &noise, 2, vocab_size()).unwrap();
        let b = run_pipeline(&d, &noise, 2, vocab_size()).unwrap();
        assert_eq!(a, b);
        let c = run_pipeline(&d, &NoiseSpec { seed: 8, ..noise }, 2, vocab_size()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forced_substitution_shares_no_position_with_truth() {
        let d = doc(3);
        let noise = NoiseSpec { sub_rate: 1.0, del_rate: 0.0, jitter: 0.0, seed: 11 };
        let out = run_pipeline(&d, &noise, 1, vocab_size()).unwrap();
        for (r, rd) in d.regions.iter().zip(&out.per_region) {
            let draft = &rd.drafts[0];
            assert_eq!(draft.len(), r.truth.len());
            for (a, b) in r.truth.iter().zip(draft.iter()) {
                assert_ne!(a, b);
            }
            // Reserved tokens never enter drafts.
            assert!(draft.iter().all(|t| t != PAD && t != EOS && t != UNK));
        }
    }

    #[test]
    fn deletion_yields_a_subsequence() {
        let d = doc(4);
        let noise = NoiseSpec { sub_rate: 0.0, del_rate: 0.5, jitter: 0.0, seed: 13 };
        let out = run_pipeline(&d, &noise, 1, vocab_size()).unwrap();
        for (r, rd) in d.regions.iter().zip(&out.per_region) {
            let draft = &rd.drafts[0];
            assert!(!draft.is_empty());
            assert!(draft.len() <= r.truth.len());
            // Subsequence check.
            let mut it = r.truth.iter();
            for t in draft.iter() {
                assert!(it.any(|x| x == t), "deletion must preserve order");
            }
        }
    }

    #[test]
    fn jitter_preserves_the_token_stream_and_moves_boundaries() {
        let d = doc(5);
        let flat: Vec<Token> = d.regions.iter().flat_map(|r| r.truth.iter()).collect();
        let mut saw_boundary_move = false;
        for seed in 0..40u64 {
            let noise = NoiseSpec { sub_rate: 0.0, del_rate: 0.0, jitter: 2.0, seed };
            let out = run_pipeline(&d, &noise, 1, vocab_size()).unwrap();
            let got: Vec<Token> = out.per_region.iter().flat_map(|r| r.drafts[0].iter()).collect();
            assert_eq!(got, flat, "jitter only moves boundaries, never tokens");
            assert!(out.per_region.iter().all(|r| !r.drafts[0].is_empty()));
            if out.per_region.len() != d.regions.len()
                || out
                    .per_region
                    .iter()
                    .zip(&d.regions)
                    .any(|(rd, r)| rd.drafts[0].len() != r.truth.len())
            {
                saw_boundary_move = true;
            }
        }
        assert!(saw_boundary_move, "δ=2 should move at least one boundary in 40 seeds");
    }

    #[test]
    fn independent_alternatives_per_region() {
        let d = doc(6);
        let noise = NoiseSpec { sub_rate: 0.4, del_rate: 0.0, jitter: 0.0, seed: 17 };
        let out = run_pipeline(&d, &noise, 3, vocab_size()).unwrap();
        for rd in &out.per_region {
            assert_eq!(rd.drafts.len(), 3);
        }
        // At least one region should show differing alternatives.
        assert!(out.per_region.iter().any(|rd| rd.drafts[0] != rd.drafts[1]));
    }

    #[test]
    fn page_draft_set_is_order_invariant() {
        let a = TokenSeq::from_ids(&[5, 6]);
        let b = TokenSeq::from_ids(&[7]);
        let c = TokenSeq::from_ids(&[8, 9, 10]);
        let x = aggregate_page_drafts(&[a.clone(), b.clone(), c.clone()]);
        let y = aggregate_page_drafts(&[c, a, b]);
        assert_eq!(x, y);
        assert_eq!(x.len(), 3);
        assert!(aggregate_page_drafts(&[]).is_empty());
        assert_eq!(aggregate_page_drafts(&[TokenSeq::new()]).len(), 0, "empty outputs dropped");
    }

    #[test]
    fn quality_score_decreases_with_noise() {
        let d = doc(7);
        let score = |sub: f64| {
            let noise = NoiseSpec { sub_rate: sub, del_rate: 0.0, jitter: 0.0, seed: 23 };
            draft_quality_score(&d, &run_pipeline(&d, &noise, 1, vocab_size()).unwrap())
        };
        let (s0, s1, s3) = (score(0.0), score(0.1), score(0.3));
        assert_eq!(s0, 1.0);
        assert!(s1 > s3, "quality {s1} should exceed {s3}");
        assert!((0.0..=1.0).contains(&s3));
    }

    #[test]
    fn quality_counts_unmatched_regions_as_max_distance() {
        let d = doc(8);
        let out = run_pipeline(&d, &NoiseSpec::noiseless(1), 1, vocab_size()).unwrap();
        let mut truncated = out.clone();
        truncated.per_region.pop();
        let q = draft_quality_score(&d, &truncated);
        let m = d.regions.len() as f64;
        assert!((q - (m - 1.0) / m).abs() < 1e-12);
    }

    #[test]
    fn levenshtein_basics() {
        let t = |ids: &[u32]| TokenSeq::from_ids(ids);
        assert_eq!(levenshtein(t(&[1, 2, 3]).as_slice(), t(&[1, 2, 3]).as_slice()), 0);
        assert_eq!(levenshtein(t(&[1, 2, 3]).as_slice(), t(&[1, 3]).as_slice()), 1);
        assert_eq!(levenshtein(t(&[]).as_slice(), t(&[1, 2]).as_slice()), 2);
        assert_eq!(levenshtein(t(&[1, 2]).as_slice(), t(&[3, 4]).as_slice()), 2);
    }

    #[test]
    fn invalid_noise_is_rejected() {
        let d = doc(9);
        let bad = NoiseSpec { sub_rate: 1.5, del_rate: 0.0, jitter: 0.0, seed: 0 };
        assert!(run_pipeline(&d, &bad, 1, vocab_size()).is_err());
        let bad = NoiseSpec { sub_rate: 0.0, del_rate: 0.0, jitter: -1.0, seed: 0 };
        assert!(run_pipeline(&d, &bad, 1, vocab_size()).is_err());
        assert!(run_pipeline(&d, &NoiseSpec::noiseless(0), 0, vocab_size()).is_err());
    }
}

//! Target-model interface and the two toy models used by the benchmark.
//!
//! A target model maps a scoring context plus a token sequence to a next-token
//! distribution. Packed scoring evaluates a whole candidate tree in one call:
//! the distribution at packed node `v` conditions on `prefix ⊕ π(v)` exactly,
//! where `π(v)` is the token path from the root to `v` inclusive — the same
//! distribution an unbatched call on the flattened path would produce.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::doc::Document;
use crate::dsv::tree::PackedTree;
use crate::error::{Error, Result};
use crate::scalar::{ln_floored, Scalar};
use crate::token::{Token, TokenSeq, Vocabulary, EOS};

/// What part of the document the model is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum View {
    FullPage,
    /// 1-based region index.
    Region(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoringContext {
    pub doc_id: String,
    pub view: View,
}

impl ScoringContext {
    pub fn page(doc_id: impl Into<String>) -> Self {
        ScoringContext { doc_id: doc_id.into(), view: View::FullPage }
    }

    pub fn region(doc_id: impl Into<String>, region_index: usize) -> Self {
        ScoringContext { doc_id: doc_id.into(), view: View::Region(region_index) }
    }
}

// ---------------------------------------------------------------------------
// Next-token distribution
// ---------------------------------------------------------------------------

/// Log-probabilities over the full vocabulary. Probabilities are floored at
/// 1e-12 before logging, so entries are finite and non-positive.
#[derive(Debug, Clone, PartialEq)]
pub struct NextTokenDist<S: Scalar> {
    logprobs: Vec<S>,
}

impl<S: Scalar> NextTokenDist<S> {
    /// Build from probabilities; they must be non-negative and sum to one
    /// within 1e-6.
    pub fn from_probs(probs: Vec<S>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Config("empty distribution".into()));
        }
        let mut sum = S::zero();
        for &p in &probs {
            if p < S::zero() || !p.is_finite() {
                return Err(Error::Config("negative or non-finite probability".into()));
            }
            sum = sum + p;
        }
        let tol = S::from_f64_lossy(1e-6);
        if (sum - S::one()).abs() > tol {
            return Err(Error::Config(format!("distribution sums to {sum}, not 1")));
        }
        Ok(NextTokenDist {
            logprobs: probs.into_iter().map(|p| ln_floored(p.min(S::one()))).collect(),
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.logprobs.len()
    }

    pub fn logprob(&self, t: Token) -> S {
        self.logprobs[t.0 as usize]
    }

    pub fn prob(&self, t: Token) -> S {
        self.logprob(t).exp()
    }

    pub fn logprobs(&self) -> &[S] {
        &self.logprobs
    }

    /// Global argmax; ties break toward the lowest token id.
    pub fn argmax(&self) -> Token {
        let mut best = 0usize;
        for i in 1..self.logprobs.len() {
            if self.logprobs[i] > self.logprobs[best] {
                best = i;
            }
        }
        Token(best as u32)
    }

    /// Argmax restricted to `set`; ties break toward the lowest token id.
    /// `None` for an empty set.
    pub fn argmax_over(&self, set: &[Token]) -> Option<Token> {
        let mut best: Option<Token> = None;
        for &t in set {
            match best {
                None => best = Some(t),
                Some(b) => {
                    let lt = self.logprob(t);
                    let lb = self.logprob(b);
                    if lt > lb || (lt == lb && t < b) {
                        best = Some(t);
                    }
                }
            }
        }
        best
    }
}

/// Distributions from one packed forward pass: the root distribution
/// (conditioned on the prefix alone) plus one per packed position.
#[derive(Debug, Clone)]
pub struct PackedScores<S: Scalar> {
    pub root: NextTokenDist<S>,
    pub nodes: Vec<NextTokenDist<S>>,
}

// ---------------------------------------------------------------------------
// Model trait
// ---------------------------------------------------------------------------

pub trait TargetModel<S: Scalar>: Send + Sync {
    fn vocab_size(&self) -> usize;

    /// Next-token distribution conditioned on `ctx` and `context`.
    fn next_dist(&self, ctx: &ScoringContext, context: &TokenSeq) -> Result<NextTokenDist<S>>;

    /// Score the prefix plus a packed candidate tree in one pass. Node `v`'s
    /// distribution conditions on `prefix ⊕ π(v)`; with an empty tree only
    /// the root continuation is scored.
    fn score_packed(
        &self,
        ctx: &ScoringContext,
        prefix: &TokenSeq,
        packed: &PackedTree,
    ) -> Result<PackedScores<S>> {
        let root = self.next_dist(ctx, prefix)?;
        let mut nodes = Vec::with_capacity(packed.len());
        for pos in 0..packed.len() {
            let context = prefix.concat(&packed.path_tokens(pos));
            nodes.push(self.next_dist(ctx, &context)?);
        }
        Ok(PackedScores { root, nodes })
    }
}

/// Greedy decode from the empty prefix: append the argmax until EOS appears
/// or `max_len` tokens were emitted. EOS is never appended.
pub fn greedy_decode<S: Scalar, M: TargetModel<S> + ?Sized>(
    model: &M,
    ctx: &ScoringContext,
    max_len: usize,
) -> Result<TokenSeq> {
    let mut out = TokenSeq::new();
    while out.len() < max_len {
        let next = model.next_dist(ctx, &out)?.argmax();
        if next == EOS {
            break;
        }
        out.push(next);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Scripted model
// ---------------------------------------------------------------------------

/// Longest-suffix resynchronization: the largest `k >= min_len` such that the
/// length-`k` suffix of `context` occurs in `g` ending at some position `j`;
/// among equal-length matches the largest `j` wins. Returns that `j`
/// (1-based), or `None` when no suffix of admissible length occurs.
pub fn scripted_resync(g: &TokenSeq, context: &TokenSeq, min_len: usize) -> Option<usize> {
    let max_k = context.len().min(g.len());
    if min_len == 0 || max_k < min_len {
        return None;
    }
    let gs = g.as_slice();
    for k in (min_len..=max_k).rev() {
        let suffix = &context.as_slice()[context.len() - k..];
        for j in (k..=g.len()).rev() {
            if &gs[j - k..j] == suffix {
                return Some(j);
            }
        }
    }
    None
}

/// A model that knows the ground truth `g` for each scoring context and puts
/// `p_top` on the scripted continuation, spreading the rest uniformly.
///
/// On-script contexts (exact prefixes of `g`) continue the script; deviated
/// contexts resynchronize by longest suffix match into `g`, and emit EOS when
/// no admissible match exists or the script is exhausted.
#[derive(Debug, Clone)]
pub struct ScriptedModel<S: Scalar> {
    scripts: HashMap<(String, View), TokenSeq>,
    vocab_size: usize,
    p_top: S,
    resync_min: usize,
}

impl<S: Scalar> ScriptedModel<S> {
    pub fn new(vocab_size: usize, p_top: S, resync_min: usize) -> Result<Self> {
        if vocab_size < 2 {
            return Err(Error::Config("scripted model needs a vocabulary of at least 2".into()));
        }
        if p_top <= S::zero() || p_top >= S::one() {
            return Err(Error::Config("p_top must lie strictly between 0 and 1".into()));
        }
        // The scripted token must be the unique argmax.
        let v = S::from_f64_lossy(vocab_size as f64);
        if p_top <= S::one() / v {
            return Err(Error::Config("p_top must exceed 1/|vocab|".into()));
        }
        if resync_min == 0 {
            return Err(Error::Config("resync_min must be at least 1".into()));
        }
        Ok(ScriptedModel { scripts: HashMap::new(), vocab_size, p_top, resync_min })
    }

    pub fn insert_script(&mut self, doc_id: impl Into<String>, view: View, g: TokenSeq) {
        self.scripts.insert((doc_id.into(), view), g);
    }

    /// Scripts from a document: the page view scripts the page truth, each
    /// region view scripts its region truth (no separators).
    pub fn from_document(doc: &Document, vocab_size: usize, p_top: S, resync_min: usize) -> Result<Self> {
        Self::from_documents(std::slice::from_ref(doc), vocab_size, p_top, resync_min)
    }

    pub fn from_documents(docs: &[Document], vocab_size: usize, p_top: S, resync_min: usize) -> Result<Self> {
        let mut m = Self::new(vocab_size, p_top, resync_min)?;
        for doc in docs {
            m.insert_script(&doc.doc_id, View::FullPage, doc.page_truth.clone());
            for r in &doc.regions {
                m.insert_script(&doc.doc_id, View::Region(r.region_index), r.truth.clone());
            }
        }
        Ok(m)
    }

    pub fn script(&self, ctx: &ScoringContext) -> Option<&TokenSeq> {
        self.scripts.get(&(ctx.doc_id.clone(), ctx.view))
    }

    pub fn p_top(&self) -> S {
        self.p_top
    }

    pub fn resync_min(&self) -> usize {
        self.resync_min
    }

    /// The scripted continuation for `context` under script `g`.
    fn scripted_next(&self, g: &TokenSeq, context: &TokenSeq) -> Token {
        let t = context.len();
        if t <= g.len() && context.as_slice() == &g.as_slice()[..t] {
            return g.get1(t + 1).unwrap_or(EOS);
        }
        match scripted_resync(g, context, self.resync_min) {
            Some(j) => g.get1(j + 1).unwrap_or(EOS),
            None => EOS,
        }
    }
}

impl<S: Scalar> TargetModel<S> for ScriptedModel<S> {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn next_dist(&self, ctx: &ScoringContext, context: &TokenSeq) -> Result<NextTokenDist<S>> {
        let g = self
            .script(ctx)
            .ok_or_else(|| Error::Context(format!("{}/{:?} has no script", ctx.doc_id, ctx.view)))?;
        let top = self.scripted_next(g, context);
        let v = self.vocab_size;
        let rest = (S::one() - self.p_top) / S::from_f64_lossy((v - 1) as f64);
        let mut probs = vec![rest; v];
        probs[top.0 as usize] = self.p_top;
        NextTokenDist::from_probs(probs)
    }
}

// ---------------------------------------------------------------------------
// Scripted model file format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ScriptedRegionFile {
    region_index: usize,
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScriptedModelFile {
    doc_id: String,
    regions: Vec<ScriptedRegionFile>,
    page_text: String,
    p_top: f64,
    resync_min: usize,
}

impl<S: Scalar> ScriptedModel<S> {
    /// Parse the JSON scripted-model format:
    /// `{"doc_id", "regions": [{"region_index", "text"}], "page_text", "p_top", "resync_min"}`.
    pub fn from_json(json: &str, vocab: &Vocabulary) -> Result<Self> {
        let file: ScriptedModelFile =
            serde_json::from_str(json).map_err(|e| Error::parse("scripted model", e.to_string()))?;
        let mut m = Self::new(vocab.size(), S::from_f64_lossy(file.p_top), file.resync_min)?;
        let page = vocab.tokenize(&file.page_text);
        if page.is_empty() {
            return Err(Error::parse("page_text", "must tokenize to a non-empty sequence"));
        }
        m.insert_script(&file.doc_id, View::FullPage, page);
        for (i, r) in file.regions.iter().enumerate() {
            let g = vocab.tokenize(&r.text);
            if g.is_empty() {
                return Err(Error::parse(format!("regions[{i}].text"), "must tokenize to a non-empty sequence"));
            }
            m.insert_script(&file.doc_id, View::Region(r.region_index), g);
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// N-gram model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
struct CtxCounts {
    next: HashMap<u32, u64>,
    total: u64,
}

/// Additively smoothed n-gram model. Histories shorter than `order - 1` are
/// backed by dedicated tables so sequence starts are well-defined; an EOS is
/// appended to every training sequence. The scoring context view is ignored:
/// the model is a page-agnostic language model.
#[derive(Debug, Clone)]
pub struct NGramModel<S: Scalar> {
    order: usize,
    delta: S,
    vocab_size: usize,
    counts: HashMap<Vec<u32>, CtxCounts>,
}

impl<S: Scalar> NGramModel<S> {
    pub fn train(vocab_size: usize, sequences: &[TokenSeq], order: usize, delta: S) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("n-gram order must be at least 1".into()));
        }
        if delta <= S::zero() {
            return Err(Error::Config("smoothing delta must be positive".into()));
        }
        if vocab_size < 2 {
            return Err(Error::Config("n-gram model needs a vocabulary of at least 2".into()));
        }
        let mut counts: HashMap<Vec<u32>, CtxCounts> = HashMap::new();
        for seq in sequences {
            let mut toks: Vec<u32> = seq.iter().map(|t| t.0).collect();
            toks.push(EOS.0);
            for t in 0..toks.len() {
                for h in 0..order.min(t + 1) {
                    let key = toks[t - h..t].to_vec();
                    let e = counts.entry(key).or_default();
                    *e.next.entry(toks[t]).or_insert(0) += 1;
                    e.total += 1;
                }
            }
        }
        Ok(NGramModel { order, delta, vocab_size, counts })
    }

    /// Train on the built-in corpus.
    pub fn from_corpus(vocab: &Vocabulary, order: usize, delta: S) -> Result<Self> {
        Self::train(vocab.size(), &crate::corpus::training_sequences(vocab), order, delta)
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl<S: Scalar> TargetModel<S> for NGramModel<S> {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn next_dist(&self, _ctx: &ScoringContext, context: &TokenSeq) -> Result<NextTokenDist<S>> {
        let hist_len = (self.order - 1).min(context.len());
        let key: Vec<u32> =
            context.as_slice()[context.len() - hist_len..].iter().map(|t| t.0).collect();
        let v = S::from_f64_lossy(self.vocab_size as f64);
        let (counts, total) = match self.counts.get(&key) {
            Some(c) => (Some(&c.next), c.total),
            None => (None, 0),
        };
        let denom = S::from_f64_lossy(total as f64) + self.delta * v;
        let mut probs = Vec::with_capacity(self.vocab_size);
        for u in 0..self.vocab_size as u32 {
            let c = counts.and_then(|m| m.get(&u)).copied().unwrap_or(0);
            probs.push((S::from_f64_lossy(c as f64) + self.delta) / denom);
        }
        NextTokenDist::from_probs(probs)
    }
}

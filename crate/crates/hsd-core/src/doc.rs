//! Simulated documents: regions with token ground truth and a page-level
//! truth that joins regions, in reading order, with the `<sep>` token.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::token::{Token, TokenSeq, Vocabulary, EOS, PAD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Text,
    Table,
    Formula,
}

/// One layout region with its ground-truth token content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    /// 1-based reading-order index.
    pub region_index: usize,
    pub kind: RegionKind,
    pub truth: TokenSeq,
}

/// A page: regions in reading order plus the page-level ground truth
/// `r_1.truth ⊕ <sep> ⊕ r_2.truth ⊕ ... ⊕ r_M.truth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub regions: Vec<Region>,
    pub page_truth: TokenSeq,
}

/// Sampling weights for region kinds; non-negative, not all zero.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KindMix {
    pub text: f64,
    pub table: f64,
    pub formula: f64,
}

impl Default for KindMix {
    fn default() -> Self {
        KindMix { text: 0.6, table: 0.25, formula: 0.15 }
    }
}

impl KindMix {
    fn validate(&self) -> Result<()> {
        let ws = [self.text, self.table, self.formula];
        if ws.iter().any(|w| *w < 0.0 || !w.is_finite()) || ws.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config(format!("invalid kind mix {self:?}")));
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> RegionKind {
        let total = self.text + self.table + self.formula;
        let x = rng.gen::<f64>() * total;
        if x < self.text {
            RegionKind::Text
        } else if x < self.text + self.table {
            RegionKind::Table
        } else {
            RegionKind::Formula
        }
    }
}

impl Document {
    /// Validates region contents and derives `page_truth`.
    pub fn new(doc_id: impl Into<String>, regions: Vec<Region>, vocab: &Vocabulary) -> Result<Document> {
        let doc_id = doc_id.into();
        if doc_id.is_empty() {
            return Err(Error::parse("doc_id", "must be non-empty"));
        }
        if regions.is_empty() {
            return Err(Error::parse("regions", "document needs at least one region"));
        }
        let sep = vocab
            .sep()
            .ok_or_else(|| Error::parse("vocabulary", "no <sep> form defined"))?;
        let mut page_truth = TokenSeq::new();
        for (i, r) in regions.iter().enumerate() {
            if r.region_index != i + 1 {
                return Err(Error::parse(
                    format!("regions[{i}].region_index"),
                    format!("expected {} (1-based reading order), found {}", i + 1, r.region_index),
                ));
            }
            if r.truth.is_empty() {
                return Err(Error::parse(format!("regions[{i}].truth"), "must be non-empty"));
            }
            if r.truth.iter().any(|t| t == PAD || t == EOS || t == sep) {
                return Err(Error::parse(
                    format!("regions[{i}].truth"),
                    "reserved tokens (pad/eos/sep) are not allowed in region truth",
                ));
            }
            if i > 0 {
                page_truth.push(sep);
            }
            page_truth = page_truth.concat(&r.truth);
        }
        Ok(Document { doc_id, regions, page_truth })
    }

    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn region(&self, region_index: usize) -> Option<&Region> {
        // region_index is 1-based.
        self.regions.get(region_index.checked_sub(1)?)
    }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

fn sample_text<R: Rng>(rng: &mut R, stream: &TokenSeq, len: usize) -> TokenSeq {
    // Contiguous window of the corpus stream so text statistics match the
    // n-gram training data.
    let max_start = stream.len().saturating_sub(len);
    let start = rng.gen_range(0..=max_start);
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        // Wrap for the (unlikely) case len > |stream|.
        out.push(stream.as_slice()[(start + i) % stream.len()]);
    }
    out.into_iter().collect()
}

fn sample_motif<R: Rng>(rng: &mut R, pool: &[Token], len: usize) -> TokenSeq {
    // Short repeating motif with occasional variation: the hallmark of table
    // and formula regions.
    let motif_len = rng.gen_range(2..=4.min(pool.len()));
    let motif: Vec<Token> = (0..motif_len).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        if rng.gen::<f64>() < 0.08 {
            out.push(pool[rng.gen_range(0..pool.len())]);
        } else {
            out.push(motif[i % motif_len]);
        }
    }
    out.into_iter().collect()
}

/// Deterministically generate a document: same arguments, same document.
pub fn generate_document(
    vocab: &Vocabulary,
    doc_id: impl Into<String>,
    seed: u64,
    n_regions: usize,
    region_len_range: (usize, usize),
    kind_mix: &KindMix,
) -> Result<Document> {
    let (lo, hi) = region_len_range;
    if n_regions == 0 {
        return Err(Error::Config("n_regions must be positive".into()));
    }
    if lo == 0 || lo > hi {
        return Err(Error::Config(format!("invalid region_len_range ({lo}, {hi})")));
    }
    kind_mix.validate()?;

    let stream = corpus::corpus_stream(vocab);
    let table_pool: Vec<Token> = corpus::TABLE_POOL.iter().map(|w| vocab.encode(w)).collect();
    let formula_pool: Vec<Token> = corpus::FORMULA_POOL.iter().map(|w| vocab.encode(w)).collect();

    let mut regions = Vec::with_capacity(n_regions);
    for i in 1..=n_regions {
        let mut rng = substream(seed, &format!("doc/region/{i}"));
        let kind = kind_mix.sample(&mut rng);
        let len = rng.gen_range(lo..=hi);
        let truth = match kind {
            RegionKind::Text => sample_text(&mut rng, &stream, len),
            RegionKind::Table => sample_motif(&mut rng, &table_pool, len),
            RegionKind::Formula => sample_motif(&mut rng, &formula_pool, len),
        };
        regions.push(Region { region_index: i, kind, truth });
    }
    Document::new(doc_id, regions, vocab)
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct RegionFile {
    kind: RegionKind,
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocumentFile {
    doc_id: String,
    regions: Vec<RegionFile>,
}

/// Parse the JSON document format: `{"doc_id", "regions": [{"kind", "text"}]}`.
pub fn document_from_json(json: &str, vocab: &Vocabulary) -> Result<Document> {
    let file: DocumentFile =
        serde_json::from_str(json).map_err(|e| Error::parse("document", e.to_string()))?;
    if file.regions.is_empty() {
        return Err(Error::parse("regions", "document needs at least one region"));
    }
    let mut regions = Vec::with_capacity(file.regions.len());
    for (i, r) in file.regions.into_iter().enumerate() {
        let truth = vocab.tokenize(&r.text);
        if truth.is_empty() {
            return Err(Error::parse(format!("regions[{i}].text"), "must tokenize to a non-empty sequence"));
        }
        regions.push(Region { region_index: i + 1, kind: r.kind, truth });
    }
    Document::new(file.doc_id, regions, vocab)
}

/// Serialize to the JSON document format (texts decoded through `vocab`).
pub fn document_to_json(doc: &Document, vocab: &Vocabulary) -> String {
    let file = DocumentFile {
        doc_id: doc.doc_id.clone(),
        regions: doc
            .regions
            .iter()
            .map(|r| RegionFile { kind: r.kind, text: vocab.decode(&r.truth) })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("document serializes")
}

pub fn load_document(path: &std::path::Path, vocab: &Vocabulary) -> Result<Document> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse("document", format!("{}: {e}", path.display())))?;
    document_from_json(&text, vocab)
}

//! Built-in vocabulary and training corpus.
//!
//! The simulator needs a fixed token universe: text regions sample fragments
//! of the training sentences, table and formula regions draw motifs from the
//! pools below, and the n-gram toy model trains on the same sentences so its
//! statistics line up with generated text.

use crate::token::{TokenSeq, Vocabulary};

/// Plain-text training sentences (one sequence each for n-gram training).
pub const TRAINING_SENTENCES: &[&str] = &[
    "the parser reads the page and emits a token stream for every region",
    "each region holds a block of text , a table , or a formula",
    "the layout model predicts region boxes before the decoder runs",
    "a draft is cheap to produce and the verifier checks it in one pass",
    "tokens accepted by the verifier extend the output without extra cost",
    "when a draft diverges , the verifier emits a correction and moves on",
    "tables repeat the same cell pattern row after row after row",
    "formulas mix symbols and numbers in short repeating spans",
    "the page decoder stitches region outputs into one reading order",
    "a clean draft means long accepted runs and few correction steps",
    "noise in the draft breaks the window match and slows the decode",
    "the window holds the last accepted tokens and anchors the search",
    "every step scores a small tree of candidate continuations at once",
    "the decoder stops at the end marker and reports the token count",
    "region order matters because the page truth joins regions in sequence",
    "a table of totals lists the sum of every column in the last row",
];

/// Tokens favoured by table regions.
pub const TABLE_POOL: &[&str] = &[
    "|", "row", "col", "cell", "total", "sum", "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
];

/// Tokens favoured by formula regions.
pub const FORMULA_POOL: &[&str] = &[
    "alpha", "beta", "gamma", "lambda", "x", "y", "z", "n", "k", "(", ")", "+", "-", "=", "^", "/",
];

/// The project vocabulary: reserved forms, then every distinct corpus form in
/// first-appearance order, then the table/formula pools.
pub fn builtin_vocabulary() -> Vocabulary {
    let mut words: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let add = |w: &str, words: &mut Vec<String>, seen: &mut std::collections::HashSet<String>| {
        if seen.insert(w.to_string()) {
            words.push(w.to_string());
        }
    };
    for sentence in TRAINING_SENTENCES {
        for form in crate::token::split_forms(sentence) {
            add(&form, &mut words, &mut seen);
        }
    }
    for w in TABLE_POOL.iter().chain(FORMULA_POOL.iter()) {
        add(w, &mut words, &mut seen);
    }
    Vocabulary::from_words(words).expect("builtin corpus has no duplicates after dedup")
}

/// Training sentences tokenized under `vocab`.
pub fn training_sequences(vocab: &Vocabulary) -> Vec<TokenSeq> {
    TRAINING_SENTENCES.iter().map(|s| vocab.tokenize(s)).collect()
}

/// Flat token stream of the whole corpus (sentence boundaries dropped), used
/// for sampling text-region content.
pub fn corpus_stream(vocab: &Vocabulary) -> TokenSeq {
    let mut out = TokenSeq::new();
    for s in training_sequences(vocab) {
        out = out.concat(&s);
    }
    out
}

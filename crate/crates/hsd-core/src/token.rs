//! Token ids, 1-indexed token sequences and the vocabulary.
//!
//! Sequence positions are 1-indexed throughout the crate: `a.slice(p, q)`
//! denotes `a_{p:q}` with `1 <= p <= q+1` and `q <= |a|`, empty when
//! `q = p - 1`. Concatenation is written `a.concat(&b)`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved token ids; the vocabulary file pins them to its first three lines.
pub const PAD: Token = Token(0);
pub const EOS: Token = Token(1);
pub const UNK: Token = Token(2);

pub const PAD_FORM: &str = "<pad>";
pub const EOS_FORM: &str = "<eos>";
pub const UNK_FORM: &str = "<unk>";
/// Surface form of the region separator used in page-level ground truth.
pub const SEP_FORM: &str = "<sep>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(pub u32);

impl Token {
    pub fn id(self) -> u32 {
        self.0
    }

    pub fn is_special(self) -> bool {
        self == PAD || self == EOS || self == UNK
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// ---------------------------------------------------------------------------
// TokenSeq
// ---------------------------------------------------------------------------

/// An immutable-by-convention sequence of tokens with 1-indexed accessors.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq(Vec<Token>);

impl TokenSeq {
    pub fn new() -> Self {
        TokenSeq(Vec::new())
    }

    pub fn from_ids(ids: &[u32]) -> Self {
        TokenSeq(ids.iter().map(|&i| Token(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-indexed element access; `None` outside `1..=len`.
    pub fn get1(&self, i: usize) -> Option<Token> {
        if i == 0 {
            return None;
        }
        self.0.get(i - 1).copied()
    }

    /// `a_{p:q}`, 1-indexed inclusive. Requires `1 <= p <= q+1` and `q <= |a|`;
    /// the result has length `q - p + 1` and is empty when `q = p - 1`.
    pub fn slice(&self, p: usize, q: usize) -> Result<TokenSeq> {
        let len = self.0.len();
        if p < 1 || p > q + 1 || q > len {
            return Err(Error::Range { p, q, len });
        }
        if q < p {
            return Ok(TokenSeq::new());
        }
        Ok(TokenSeq(self.0[p - 1..q].to_vec()))
    }

    /// `self ⊕ other`.
    pub fn concat(&self, other: &TokenSeq) -> TokenSeq {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        TokenSeq(v)
    }

    pub fn push(&mut self, t: Token) {
        self.0.push(t);
    }

    /// The last `n` tokens, or the whole sequence if shorter.
    pub fn suffix(&self, n: usize) -> TokenSeq {
        let start = self.0.len().saturating_sub(n);
        TokenSeq(self.0[start..].to_vec())
    }

    /// First `n` tokens, or the whole sequence if shorter.
    pub fn truncated(&self, n: usize) -> TokenSeq {
        TokenSeq(self.0[..self.0.len().min(n)].to_vec())
    }

    pub fn as_slice(&self) -> &[Token] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Token> + '_ {
        self.0.iter().copied()
    }

    pub fn to_ids(&self) -> Vec<u32> {
        self.0.iter().map(|t| t.0).collect()
    }
}

impl From<Vec<Token>> for TokenSeq {
    fn from(v: Vec<Token>) -> Self {
        TokenSeq(v)
    }
}

impl FromIterator<Token> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        TokenSeq(iter.into_iter().collect())
    }
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

/// Bidirectional surface-form <-> token-id map.
///
/// Ids are dense; id == line number in the file representation, whose first
/// three lines are the reserved `<pad>`, `<eos>`, `<unk>` forms in that order.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    forms: Vec<String>,
    index: HashMap<String, Token>,
}

impl Vocabulary {
    /// Build from non-reserved words; reserved forms (and the `<sep>`
    /// separator) are inserted first. Duplicate words are an error.
    pub fn from_words<I, T>(words: I) -> Result<Vocabulary>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut v = Vocabulary { forms: Vec::new(), index: HashMap::new() };
        for form in [PAD_FORM, EOS_FORM, UNK_FORM, SEP_FORM] {
            v.insert(form)?;
        }
        for w in words {
            v.insert(w.as_ref())?;
        }
        Ok(v)
    }

    /// Parse the one-form-per-line file format.
    pub fn from_lines(lines: &str) -> Result<Vocabulary> {
        let mut v = Vocabulary { forms: Vec::new(), index: HashMap::new() };
        for (i, line) in lines.lines().enumerate() {
            let form = line.trim_end_matches(['\r']);
            if form.is_empty() {
                return Err(Error::parse("vocabulary", format!("empty form at line {i}")));
            }
            v.insert(form)?;
        }
        if v.forms.len() < 3 {
            return Err(Error::parse("vocabulary", "fewer than three lines"));
        }
        for (i, expect) in [PAD_FORM, EOS_FORM, UNK_FORM].into_iter().enumerate() {
            if v.forms[i] != expect {
                return Err(Error::parse(
                    "vocabulary",
                    format!("line {i} must be {expect:?}, found {:?}", v.forms[i]),
                ));
            }
        }
        Ok(v)
    }

    pub fn load(path: &Path) -> Result<Vocabulary> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::parse("vocabulary", format!("{}: {e}", path.display())))?;
        Vocabulary::from_lines(&text)
    }

    pub fn to_lines(&self) -> String {
        let mut s = self.forms.join("\n");
        s.push('\n');
        s
    }

    fn insert(&mut self, form: &str) -> Result<Token> {
        if self.index.contains_key(form) {
            return Err(Error::parse("vocabulary", format!("duplicate form {form:?}")));
        }
        let t = Token(self.forms.len() as u32);
        self.forms.push(form.to_string());
        self.index.insert(form.to_string(), t);
        Ok(t)
    }

    pub fn size(&self) -> usize {
        self.forms.len()
    }

    /// The region separator, when the vocabulary defines one.
    pub fn sep(&self) -> Option<Token> {
        self.index.get(SEP_FORM).copied()
    }

    /// Token for an exact surface form; `UNK` for out-of-vocabulary forms.
    pub fn encode(&self, form: &str) -> Token {
        self.index.get(form).copied().unwrap_or(UNK)
    }

    pub fn lookup(&self, form: &str) -> Option<Token> {
        self.index.get(form).copied()
    }

    pub fn form(&self, t: Token) -> Option<&str> {
        self.forms.get(t.0 as usize).map(|s| s.as_str())
    }

    /// Whitespace- and punctuation-boundary tokenizer. Alphanumeric runs form
    /// words; any other non-whitespace character is its own token; unknown
    /// forms map to `UNK`.
    pub fn tokenize(&self, text: &str) -> TokenSeq {
        split_forms(text).iter().map(|w| self.encode(w)).collect()
    }

    /// Space-joined surface forms; unknown ids render as `<unk>`.
    pub fn decode(&self, seq: &TokenSeq) -> String {
        seq.iter()
            .map(|t| self.form(t).unwrap_or(UNK_FORM))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Surface forms under the project tokenization rules: alphanumeric (or `_`)
/// runs are words, any other non-whitespace character stands alone.
pub fn split_forms(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_whitespace() {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
        } else if c.is_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            out.push(c.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

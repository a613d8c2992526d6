//! Prefix tree over draft candidates, its packed linearization and the
//! tree-ancestry attention mask.
//!
//! Candidates sharing a prefix share nodes, so one packed forward pass scores
//! every distinct continuation exactly once. Packing order is a deterministic
//! depth-first preorder with children visited in ascending token id, which
//! guarantees a parent always precedes its children.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::token::{Token, TokenSeq};

use super::align::CandidateSet;

#[derive(Debug, Clone)]
struct Node {
    token: Option<Token>, // None only for the root
    parent: Option<usize>,
    children: BTreeMap<Token, usize>,
}

/// Trie over candidate continuations; node 0 is the (tokenless) root.
#[derive(Debug, Clone)]
pub struct PrefixTree {
    nodes: Vec<Node>,
}

pub const ROOT: usize = 0;

impl PrefixTree {
    pub fn new() -> Self {
        PrefixTree { nodes: vec![Node { token: None, parent: None, children: BTreeMap::new() }] }
    }

    pub fn insert(&mut self, seq: &TokenSeq) {
        let mut at = ROOT;
        for t in seq.iter() {
            at = match self.nodes[at].children.get(&t) {
                Some(&c) => c,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(Node { token: Some(t), parent: Some(at), children: BTreeMap::new() });
                    self.nodes[at].children.insert(t, id);
                    id
                }
            };
        }
    }

    /// Total node count, root included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of token-bearing nodes (root excluded); the packed size.
    pub fn token_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Distinct admissible next tokens at `v`, ascending by token id.
    pub fn next_tokens(&self, v: usize) -> Vec<Token> {
        self.nodes[v].children.keys().copied().collect()
    }

    pub fn child(&self, v: usize, u: Token) -> Option<usize> {
        self.nodes[v].children.get(&u).copied()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.nodes[v].children.is_empty()
    }

    /// `π(v)`: tokens on the root path, `v` included; empty for the root.
    pub fn path(&self, v: usize) -> TokenSeq {
        let mut rev = Vec::new();
        let mut at = v;
        while let Some(t) = self.nodes[at].token {
            rev.push(t);
            at = self.nodes[at].parent.expect("non-root has a parent");
        }
        rev.reverse();
        rev.into_iter().collect()
    }
}

impl Default for PrefixTree {
    fn default() -> Self {
        Self::new()
    }
}

/// Merge all candidates into a prefix tree.
pub fn build_prefix_tree(cands: &CandidateSet) -> PrefixTree {
    let mut tree = PrefixTree::new();
    for c in cands.iter() {
        tree.insert(c);
    }
    tree
}

// ---------------------------------------------------------------------------
// Packed linearization
// ---------------------------------------------------------------------------

/// Linearized tree: one position per token-bearing node, parents referring to
/// earlier positions (`None` = attaches directly to the verified prefix).
#[derive(Debug, Clone, PartialEq)]
pub struct PackedTree {
    tokens: Vec<Token>,
    parents: Vec<Option<usize>>,
}

impl PackedTree {
    pub fn empty() -> Self {
        PackedTree { tokens: Vec::new(), parents: Vec::new() }
    }

    /// Build from raw parts; each parent index must precede its position.
    pub fn from_parts(tokens: Vec<Token>, parents: Vec<Option<usize>>) -> Result<Self> {
        if tokens.len() != parents.len() {
            return Err(Error::Config("packed tree: tokens/parents length mismatch".into()));
        }
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                if *p >= i {
                    return Err(Error::Config(format!(
                        "packed tree: parent {p} does not precede position {i}"
                    )));
                }
            }
        }
        Ok(PackedTree { tokens, parents })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, pos: usize) -> Token {
        self.tokens[pos]
    }

    pub fn parent(&self, pos: usize) -> Option<usize> {
        self.parents[pos]
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Tokens on the path from the prefix to `pos`, `pos` included.
    pub fn path_tokens(&self, pos: usize) -> TokenSeq {
        let mut rev = vec![self.tokens[pos]];
        let mut at = pos;
        while let Some(p) = self.parents[at] {
            rev.push(self.tokens[p]);
            at = p;
        }
        rev.reverse();
        rev.into_iter().collect()
    }

    /// Child positions per position, plus the root-attached positions.
    /// Within a parent, children appear in packed (ascending-token) order.
    pub fn child_lists(&self) -> (Vec<usize>, Vec<Vec<usize>>) {
        let mut root_children = Vec::new();
        let mut children = vec![Vec::new(); self.tokens.len()];
        for (i, p) in self.parents.iter().enumerate() {
            match p {
                None => root_children.push(i),
                Some(p) => children[*p].push(i),
            }
        }
        (root_children, children)
    }
}

/// Ancestry permission matrix over packed positions: position `i` may attend
/// to `j` iff `j` is `i` itself or one of its ancestors. The verified prefix
/// is always visible and is not part of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AncestryMask {
    n: usize,
    bits: Vec<bool>, // row-major n*n
}

impl AncestryMask {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }
}

/// Deterministic DFS linearization plus the ancestry mask. Trees with more
/// than `max_tokens` token-bearing nodes are rejected with a size error.
pub fn linearize_with_mask(tree: &PrefixTree, max_tokens: usize) -> Result<(PackedTree, AncestryMask)> {
    let count = tree.token_count();
    if count > max_tokens {
        return Err(Error::TreeSize { nodes: count, max: max_tokens });
    }

    let mut tokens = Vec::with_capacity(count);
    let mut parents = Vec::with_capacity(count);
    let mut pos_of = vec![usize::MAX; tree.node_count()];

    // Explicit preorder DFS; push children in reverse so the smallest token id
    // is visited first.
    let mut stack: Vec<usize> = tree.nodes[ROOT].children.values().rev().copied().collect();
    while let Some(v) = stack.pop() {
        let pos = tokens.len();
        pos_of[v] = pos;
        tokens.push(tree.nodes[v].token.expect("non-root node has a token"));
        parents.push(match tree.nodes[v].parent {
            Some(ROOT) | None => None,
            Some(p) => Some(pos_of[p]),
        });
        for &c in tree.nodes[v].children.values().rev() {
            stack.push(c);
        }
    }

    let n = tokens.len();
    let mut bits = vec![false; n * n];
    for i in 0..n {
        bits[i * n + i] = true;
        let mut at = i;
        while let Some(p) = parents[at] {
            bits[i * n + p] = true;
            at = p;
        }
    }

    Ok((PackedTree { tokens, parents }, AncestryMask { n, bits }))
}

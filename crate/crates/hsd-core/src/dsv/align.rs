//! Windowed draft alignment.
//!
//! The reference window `w` is the last `n` accepted tokens. Each draft is
//! scanned for occurrences of `w`; the tokens following a match form a
//! candidate continuation. Drafts are fixed per page: alignment re-anchors
//! the same drafts against the evolving prefix instead of re-drafting.

use std::collections::HashSet;

use crate::token::TokenSeq;

/// Last `n` tokens of the prefix; the whole prefix while `|prefix| < n`.
pub fn reference_window(prefix: &TokenSeq, n: usize) -> TokenSeq {
    prefix.suffix(n)
}

/// 1-based start positions of window matches within a single draft.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchSet(Vec<usize>);

impl MatchSet {
    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// All `j` with `draft_{j:j+n-1} = w` for `1 <= j <= L-n+1`, ascending.
/// Overlapping matches are all reported. Requires a non-empty window.
pub fn find_matches(draft: &TokenSeq, window: &TokenSeq) -> MatchSet {
    let n = window.len();
    debug_assert!(n >= 1, "empty windows are handled by the caller");
    let l = draft.len();
    let mut out = Vec::new();
    if n == 0 || l < n {
        return MatchSet(out);
    }
    let d = draft.as_slice();
    let w = window.as_slice();
    for j in 1..=(l - n + 1) {
        if &d[j - 1..j - 1 + n] == w {
            out.push(j);
        }
    }
    MatchSet(out)
}

/// Deduplicated, non-empty candidate continuations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateSet {
    candidates: Vec<TokenSeq>,
}

impl CandidateSet {
    pub fn empty() -> Self {
        CandidateSet { candidates: Vec::new() }
    }

    /// Deduplicates and drops empty sequences, keeping first-seen order.
    pub fn from_sequences<I: IntoIterator<Item = TokenSeq>>(seqs: I) -> Self {
        let mut seen = HashSet::new();
        let mut candidates = Vec::new();
        for s in seqs {
            if !s.is_empty() && seen.insert(s.clone()) {
                candidates.push(s);
            }
        }
        CandidateSet { candidates }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TokenSeq> {
        self.candidates.iter()
    }

    /// Re-truncate every candidate to `depth` tokens (re-deduplicating).
    pub fn truncated(&self, depth: usize) -> CandidateSet {
        CandidateSet::from_sequences(self.candidates.iter().map(|c| c.truncated(depth)))
    }

    pub fn max_len(&self) -> usize {
        self.candidates.iter().map(|c| c.len()).max().unwrap_or(0)
    }
}

/// Candidate continuations after window matches across all drafts.
///
/// For a match at `j` in a draft of length `L`, the candidate is
/// `draft_{j+n : min(L, j+n-1+depth_cap)}`; matches ending flush with the
/// draft (`j+n > L`) contribute nothing.
pub fn extract_candidates(drafts: &[TokenSeq], window: &TokenSeq, depth_cap: usize) -> CandidateSet {
    let n = window.len();
    let mut seqs = Vec::new();
    for draft in drafts {
        let l = draft.len();
        for &j in find_matches(draft, window).positions() {
            if j + n <= l {
                let hi = l.min(j + n - 1 + depth_cap);
                seqs.push(draft.slice(j + n, hi).expect("candidate bounds are valid"));
            }
        }
    }
    CandidateSet::from_sequences(seqs)
}

/// Startup candidates for the empty prefix: every draft's body, depth-capped,
/// anchored at its start.
pub fn anchored_candidates(drafts: &[TokenSeq], depth_cap: usize) -> CandidateSet {
    CandidateSet::from_sequences(drafts.iter().map(|d| d.truncated(depth_cap)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(ids: &[u32]) -> TokenSeq {
        TokenSeq::from_ids(ids)
    }

    #[test]
    fn window_is_suffix_or_whole_prefix() {
        assert_eq!(reference_window(&seq(&[1, 2, 3, 4]), 3), seq(&[2, 3, 4]));
        assert_eq!(reference_window(&seq(&[1, 2]), 3), seq(&[1, 2]));
        assert_eq!(reference_window(&seq(&[]), 3), seq(&[]));
    }

    #[test]
    fn matches_in_running_example() {
        let m = find_matches(&seq(&[5, 6, 7, 8, 9, 6, 7, 10]), &seq(&[6, 7]));
        assert_eq!(m.positions(), &[2, 6]);
    }

    #[test]
    fn absent_window_matches_nowhere() {
        assert!(find_matches(&seq(&[5, 6, 7]), &seq(&[7, 6])).is_empty());
        assert!(find_matches(&seq(&[5]), &seq(&[5, 6])).is_empty());
    }

    #[test]
    fn overlapping_matches_are_all_reported() {
        let m = find_matches(&seq(&[1, 1, 1, 1]), &seq(&[1, 1]));
        assert_eq!(m.positions(), &[1, 2, 3]);
    }

    #[test]
    fn candidates_in_running_example() {
        let drafts = vec![seq(&[5, 6, 7, 8, 9, 6, 7, 10])];
        let c = extract_candidates(&drafts, &seq(&[6, 7]), 8);
        let want: Vec<TokenSeq> = vec![seq(&[8, 9, 6, 7, 10]), seq(&[10])];
        assert_eq!(c.iter().cloned().collect::<Vec<_>>(), want);
    }

    #[test]
    fn match_flush_with_draft_end_is_excluded() {
        // Draft equals the window: the only match has no continuation.
        let drafts = vec![seq(&[6, 7])];
        assert!(extract_candidates(&drafts, &seq(&[6, 7]), 8).is_empty());
    }

    #[test]
    fn depth_cap_truncates_candidates() {
        let drafts = vec![seq(&[5, 6, 7, 8, 9, 6, 7, 10])];
        let c = extract_candidates(&drafts, &seq(&[6, 7]), 2);
        let got: Vec<TokenSeq> = c.iter().cloned().collect();
        assert_eq!(got, vec![seq(&[8, 9]), seq(&[10])]);
    }

    #[test]
    fn duplicate_candidates_collapse() {
        // Periodic drafts produce identical suffixes from different matches.
        let drafts = vec![seq(&[1, 2, 1, 2, 1, 2, 1, 2])];
        let c = extract_candidates(&drafts, &seq(&[1, 2]), 2);
        // Matches at j=1,3,5,7; j=7 flush; suffixes [1,2] (x2), [1,2]->dedup, [2? no].
        // j=1 -> d_{3:4}=[1,2]; j=3 -> d_{5:6}=[1,2]; j=5 -> d_{7:8}=[1,2].
        assert_eq!(c.len(), 1);
        assert_eq!(c.iter().next().unwrap(), &seq(&[1, 2]));
    }

    #[test]
    fn anchored_candidates_cover_draft_heads() {
        let drafts = vec![seq(&[1, 2, 3, 4]), seq(&[9]), seq(&[])];
        let c = anchored_candidates(&drafts, 3);
        let got: Vec<TokenSeq> = c.iter().cloned().collect();
        assert_eq!(got, vec![seq(&[1, 2, 3]), seq(&[9])]);
    }
}

//! Token acceptance and the packed verification step.
//!
//! One step scores the prefix plus the whole candidate tree in a single
//! packed call, then walks the tree greedily: at each node the in-tree argmax
//! `u*` is accepted outright when it is the global argmax `û`, or when the
//! log-probability ratio `log p(û) / log p(u*)` clears the threshold `τ`.
//! A rejection (or running off a leaf) appends `û` itself, so every step
//! contributes at least one verified token — except when `û` is EOS, which is
//! never appended.

use serde::Serialize;

use crate::error::Result;
use crate::model::{NextTokenDist, ScoringContext, TargetModel};
use crate::scalar::{ln_capped, Scalar};
use crate::token::{Token, TokenSeq, EOS};

use super::align::CandidateSet;
use super::tree::{build_prefix_tree, linearize_with_mask};
use super::{AlignParams, StepRecord};

/// Outcome of the accept/reject rule at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceptance<S: Scalar> {
    pub u_star: Token,
    pub u_hat: Token,
    /// `log p(û) / log p(u*)`; `None` when `û = u*`.
    pub ratio: Option<S>,
    pub accepted: bool,
}

/// Apply the acceptance rule to a non-empty admissible set.
///
/// `τ = 1` behaves as the exact-match ablation: only `û = u*` is accepted,
/// so every accepted token is the greedy token even under probability ties.
pub fn accept_token<S: Scalar>(
    dist: &NextTokenDist<S>,
    next_set: &[Token],
    tau: S,
) -> Acceptance<S> {
    debug_assert!(!next_set.is_empty(), "accept_token needs candidates");
    let u_star = dist.argmax_over(next_set).expect("non-empty next set");
    let u_hat = dist.argmax();
    if u_hat == u_star {
        return Acceptance { u_star, u_hat, ratio: None, accepted: true };
    }
    // logprob() is already floored at 1e-12; cap the numerator's probability
    // strictly below one so the ratio stays well-defined.
    let lp_hat = dist.logprob(u_hat).min(ln_capped(S::one()));
    let lp_star = dist.logprob(u_star);
    debug_assert!(lp_star < S::zero(), "p(u*)=1 implies û=u*");
    let ratio = lp_hat / lp_star;
    let accepted = tau < S::one() && ratio >= tau;
    Acceptance { u_star, u_hat, ratio: Some(ratio), accepted }
}

/// How the walk left a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WalkOutcome {
    /// `u*` accepted; the walk descends.
    Accepted,
    /// `u*` rejected; `û` is the correction token.
    Rejected,
    /// Leaf: no admissible next token, `û` is the continuation token.
    Leaf,
}

/// One consulted node during the tree walk (depth 0 = the prefix itself).
#[derive(Debug, Clone, Serialize)]
pub struct WalkEvent<S: Scalar> {
    pub depth: usize,
    pub u_star: Option<Token>,
    pub u_hat: Token,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<S>,
    pub outcome: WalkOutcome,
}

/// Result of one verification step.
#[derive(Debug, Clone)]
pub struct StepOutcome<S: Scalar> {
    pub prefix: TokenSeq,
    pub record: StepRecord,
    pub eos_reached: bool,
    pub walk: Vec<WalkEvent<S>>,
    /// Packed tree size actually scored (after any depth-halving retry).
    pub tree_tokens: usize,
}

/// One decoupled verification step: build the candidate tree, score it packed,
/// walk it, and extend the prefix by `π(s) ⊕ û` (omitting a terminal EOS).
///
/// An oversize tree triggers one retry with candidates truncated to half the
/// depth cap; a second failure propagates the size error.
pub fn verify_step<S: Scalar, M: TargetModel<S> + ?Sized>(
    model: &M,
    ctx: &ScoringContext,
    prefix: &TokenSeq,
    cands: &CandidateSet,
    params: &AlignParams<S>,
) -> Result<StepOutcome<S>> {
    params.validate()?;
    let candidates_found = cands.len();

    // Degenerate step: no candidates, take one plain greedy token.
    if cands.is_empty() {
        let dist = model.next_dist(ctx, prefix)?;
        let u_hat = dist.argmax();
        let eos = u_hat == EOS;
        let mut new_prefix = prefix.clone();
        if !eos {
            new_prefix.push(u_hat);
        }
        return Ok(StepOutcome {
            prefix: new_prefix,
            record: StepRecord {
                step: 0,
                a_i: 0,
                bonus: usize::from(!eos),
                packed_size: 1,
                candidates_found,
            },
            eos_reached: eos,
            walk: vec![WalkEvent { depth: 0, u_star: None, u_hat, ratio: None, outcome: WalkOutcome::Leaf }],
            tree_tokens: 0,
        });
    }

    let (packed, _mask) = match linearize_with_mask(&build_prefix_tree(cands), params.max_tree_tokens)
    {
        Ok(x) => x,
        Err(crate::error::Error::TreeSize { .. }) => {
            let halved = cands.truncated((params.depth_cap / 2).max(1));
            linearize_with_mask(&build_prefix_tree(&halved), params.max_tree_tokens)?
        }
        Err(e) => return Err(e),
    };

    let scores = model.score_packed(ctx, prefix, &packed)?;
    let (root_children, children) = packed.child_lists();

    let mut walk = Vec::new();
    let mut accepted = TokenSeq::new();
    let mut at: Option<usize> = None; // None = the virtual root
    let u_hat_final;
    loop {
        let (dist, kids) = match at {
            None => (&scores.root, &root_children),
            Some(p) => (&scores.nodes[p], &children[p]),
        };
        let next_set: Vec<Token> = kids.iter().map(|&c| packed.token(c)).collect();
        if next_set.is_empty() {
            let u_hat = dist.argmax();
            walk.push(WalkEvent {
                depth: accepted.len(),
                u_star: None,
                u_hat,
                ratio: None,
                outcome: WalkOutcome::Leaf,
            });
            u_hat_final = u_hat;
            break;
        }
        let acc = accept_token(dist, &next_set, params.tau);
        walk.push(WalkEvent {
            depth: accepted.len(),
            u_star: Some(acc.u_star),
            u_hat: acc.u_hat,
            ratio: acc.ratio,
            outcome: if acc.accepted { WalkOutcome::Accepted } else { WalkOutcome::Rejected },
        });
        if acc.accepted {
            accepted.push(acc.u_star);
            let pos = kids
                .iter()
                .copied()
                .find(|&c| packed.token(c) == acc.u_star)
                .expect("accepted token is a child");
            at = Some(pos);
        } else {
            u_hat_final = acc.u_hat;
            break;
        }
    }

    let eos = u_hat_final == EOS;
    let mut new_prefix = prefix.concat(&accepted);
    if !eos {
        new_prefix.push(u_hat_final);
    }
    let a_i = accepted.len();
    Ok(StepOutcome {
        prefix: new_prefix,
        record: StepRecord {
            step: 0,
            a_i,
            bonus: usize::from(!eos),
            packed_size: packed.len() + 1,
            candidates_found,
        },
        eos_reached: eos,
        walk,
        tree_tokens: packed.len(),
    })
}

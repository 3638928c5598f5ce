//! Weighted majority voting over the judge ensemble.
//!
//! Abstentions map to False before tallying, an unweighted Unknown majority
//! or a weight tie flags the claim for review, and ties resolve to False so
//! ambiguous cases land on the review queue as potential misinformation.

use thiserror::Error;

use crate::model::{JudgeWeights, Verdict};

/// Two tallies within this absolute distance count as a tie; weights are
/// user-supplied reals, so exact equality is too strict.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FuseError {
    #[error("no verdicts to fuse")]
    Empty,
    #[error("got {verdicts} verdicts but {weights} weights")]
    LengthMismatch { verdicts: usize, weights: usize },
}

/// Accumulated weight per candidate label.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tally {
    #[serde(rename = "True")]
    pub true_weight: f64,
    #[serde(rename = "False")]
    pub false_weight: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FusionOutcome {
    /// Never `Unknown`.
    pub final_verdict: Verdict,
    pub needs_review: bool,
    pub tally: Tally,
    pub unknown_majority: bool,
    pub tie: bool,
}

/// Fuse per-judge verdicts into the final decision.
///
/// Steps: count raw Unknowns (unweighted) for the majority flag, map every
/// Unknown to False, accumulate weights per label, take the argmax, and
/// resolve near-ties (within [`TIE_TOLERANCE`]) to False with review.
pub fn fuse(verdicts: &[Verdict], weights: &JudgeWeights) -> Result<FusionOutcome, FuseError> {
    if verdicts.is_empty() {
        return Err(FuseError::Empty);
    }
    if verdicts.len() != weights.len() {
        return Err(FuseError::LengthMismatch {
            verdicts: verdicts.len(),
            weights: weights.len(),
        });
    }

    let unknown_count = verdicts
        .iter()
        .filter(|v| matches!(v, Verdict::Unknown))
        .count();
    let unknown_majority = unknown_count * 2 > verdicts.len();

    let mut tally = Tally {
        true_weight: 0.0,
        false_weight: 0.0,
    };
    for (verdict, weight) in verdicts.iter().zip(weights.values()) {
        match verdict {
            Verdict::True => tally.true_weight += weight,
            Verdict::False | Verdict::Unknown => tally.false_weight += weight,
        }
    }

    let tie = (tally.true_weight - tally.false_weight).abs() <= TIE_TOLERANCE;
    let final_verdict = if !tie && tally.true_weight > tally.false_weight {
        Verdict::True
    } else {
        Verdict::False
    };

    Ok(FusionOutcome {
        final_verdict,
        needs_review: tie || unknown_majority,
        tally,
        unknown_majority,
        tie,
    })
}

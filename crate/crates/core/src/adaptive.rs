//! Adaptive reweighting for signals made of two equal blocks.
//!
//! When the two halves of a signal are not equally sparse, the right
//! generous weight for the second block depends on how lopsided they are,
//! and nothing tells the decoder that in advance. This module estimates the
//! imbalance from data the decoder already has: the least-norm solution,
//! computed once up front, and the iterate of the greedy loop. A quasi-norm
//! sparsity score per block feeds a cross ratio, the ratio feeds a fixed
//! weight schedule, and the second block's base weight is updated every
//! round from the result.

use crate::decode::{run_greedy, DecodeOutcome, GreedyParams};
use crate::error::{Error, Result};
use crate::model::SensingMatrix;
use crate::solver::{least_norm_solution, SolverParams};
use ndarray::{s, ArrayView1};
use serde::Serialize;

/// Sparsity score `(Σ√|xᵢ|)² / ‖x‖₂`.
///
/// Scale invariant. Equals 1 exactly for 1-sparse vectors, `m^{3/2}` when
/// all `m` nonzero magnitudes are equal, and sits strictly between the two
/// otherwise. Returns 0 for the zero vector by convention.
pub fn sparsity_measure(x: &ArrayView1<f64>) -> f64 {
    let norm = x.dot(x).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let root_sum: f64 = x.iter().map(|v| v.abs().sqrt()).sum();
    root_sum * root_sum / norm
}

/// Cross-block imbalance of `current` relative to `baseline`, both split
/// into `[..split]` and `[split..]`:
/// `s(cur¹)·s(base²) / (s(cur²)·s(base¹))`.
///
/// Values above 1 mean the second block of `current` has sharpened more
/// than the first, relative to the baseline. If any of the four scores is
/// zero the statistic is 1, so a zero block never destabilizes the weights.
pub fn adaptation_statistic(
    current: &ArrayView1<f64>,
    baseline: &ArrayView1<f64>,
    split: usize,
) -> Result<f64> {
    if current.len() != baseline.len() {
        return Err(Error::dim(format!(
            "statistic inputs have lengths {} and {}",
            current.len(),
            baseline.len()
        )));
    }
    if split == 0 || split >= current.len() {
        return Err(Error::dim(format!(
            "split {split} does not divide a length-{} vector into two blocks",
            current.len()
        )));
    }
    Ok(statistic_from_scores(
        sparsity_measure(&current.slice(s![..split])),
        sparsity_measure(&current.slice(s![split..])),
        sparsity_measure(&baseline.slice(s![..split])),
        sparsity_measure(&baseline.slice(s![split..])),
    ))
}

/// Zero-score rule lives here so the decode loop and the public statistic
/// can never disagree on the degenerate branch.
fn statistic_from_scores(cur1: f64, cur2: f64, base1: f64, base2: f64) -> f64 {
    if cur1 == 0.0 || cur2 == 0.0 || base1 == 0.0 || base2 == 0.0 {
        1.0
    } else {
        cur1 * base2 / (cur2 * base1)
    }
}

/// Weight schedule for the second block:
/// `0.65·√S + 0.35·S^¼` for `S ≥ 1`, the reciprocal of the same expression
/// for `S < 1`. Both branches meet at `W₂(1) = 1`, and the result is ≥ 1 on
/// either side, growing as the statistic moves away from 1.
pub fn generous_weight(statistic: f64) -> Result<f64> {
    if !(statistic > 0.0) {
        return Err(Error::domain(format!(
            "weight schedule needs a positive statistic, got {statistic}"
        )));
    }
    let raw = 0.65 * statistic.sqrt() + 0.35 * statistic.powf(0.25);
    Ok(if statistic >= 1.0 { raw } else { raw.recip() })
}

/// Snapshot of one adaptation round: the frozen least-norm block scores,
/// the iterate's block scores, and what they produced. Serialized as one
/// JSON line per round for diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct AdaptiveState {
    pub round: usize,
    pub least_norm_block1: f64,
    pub least_norm_block2: f64,
    pub current_block1: f64,
    pub current_block2: f64,
    pub statistic: f64,
    pub block2_weight: f64,
}

/// Result of an adaptive decode: the plain decode outcome plus one
/// [`AdaptiveState`] per reweighted round.
#[derive(Debug, Clone, Serialize)]
pub struct AdaptiveOutcome {
    pub decode: DecodeOutcome,
    pub states: Vec<AdaptiveState>,
}

/// Greedy decode over two equal blocks with a self-tuned second-block
/// weight.
///
/// The least-norm solution and its block scores are computed once. Round 0
/// solves with uniform weights; every later round rescores the iterate's
/// blocks, recomputes the statistic and the second-block weight, and
/// applies them as base weights underneath the usual selection discount.
pub fn algga_decode(
    matrix: &SensingMatrix,
    y: &ArrayView1<f64>,
    greedy: &GreedyParams,
    solver: &SolverParams,
) -> Result<AdaptiveOutcome> {
    algga_decode_inner(matrix, y, greedy, solver, None)
}

fn algga_decode_inner(
    matrix: &SensingMatrix,
    y: &ArrayView1<f64>,
    greedy: &GreedyParams,
    solver: &SolverParams,
    statistic_override: Option<f64>,
) -> Result<AdaptiveOutcome> {
    let cols = matrix.cols();
    if cols == 0 || cols % 2 != 0 {
        return Err(Error::dim(format!(
            "adaptive decode needs an even number of columns, got {cols}"
        )));
    }
    let split = cols / 2;
    let baseline = least_norm_solution(matrix, y)?;
    let base1 = sparsity_measure(&baseline.slice(s![..split]));
    let base2 = sparsity_measure(&baseline.slice(s![split..]));

    let mut states = Vec::new();
    let decode = run_greedy(matrix, y, None, greedy, solver, |round, estimate, base| {
        if round == 0 {
            base.fill(1.0);
            return Ok(());
        }
        let cur1 = sparsity_measure(&estimate.slice(s![..split]));
        let cur2 = sparsity_measure(&estimate.slice(s![split..]));
        let statistic =
            statistic_override.unwrap_or_else(|| statistic_from_scores(cur1, cur2, base1, base2));
        let weight = generous_weight(statistic)?;
        base.slice_mut(s![..split]).fill(1.0);
        base.slice_mut(s![split..]).fill(weight);
        states.push(AdaptiveState {
            round,
            least_norm_block1: base1,
            least_norm_block2: base2,
            current_block1: cur1,
            current_block2: cur2,
            statistic,
            block2_weight: weight,
        });
        Ok(())
    })?;
    Ok(AdaptiveOutcome { decode, states })
}

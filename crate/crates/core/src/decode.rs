//! Greedy reweighted decoders built on the weighted l1 solver.
//!
//! Every decoder here runs the same loop. An initial solve under the base
//! weights produces a first estimate; each following round shrinks a
//! magnitude threshold geometrically, selects the coordinates of the current
//! estimate that clear it, and re-solves with a near-zero weight on the
//! selection. Selected coordinates become almost free, so mass concentrates
//! on them, and once the selection matches the true support the next solve
//! reproduces the signal exactly.
//!
//! Flavors differ only in the base weights and the selection test:
//! - [`lga_decode`]: unit weight everywhere off the selection;
//! - [`lgga_decode`]: one weight per coordinate block, e.g. a dedicated
//!   weight for the error identity appended by [`correct_errors`];
//! - [`lgga_decode_compound`]: two concatenated bases with the second one
//!   rescaled, whose selection threshold compensates for the rescaling.

use ndarray::{s, Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{extend_with_identity, BlockPartition, BlockRole, MatrixKind, SensingMatrix};
use crate::solver::{SolverParams, SubproblemSolver, WeightVector};

/// Knobs of the greedy reweighting loop.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyParams {
    /// Multiplicative threshold decay per round, in (0, 1).
    pub decay: f64,
    /// Weight of selected coordinates; near zero makes them almost free.
    pub selected_weight: f64,
    /// Reweighted rounds after the initial solve.
    pub max_rounds: usize,
    /// Stop once the selection reaches this size. Defaults to the row count:
    /// from there the solve could fit the measurements on the selection
    /// alone, and the loop has nothing left to steer.
    pub selection_cap: Option<usize>,
    /// Keep per-round selections and solver effort in the outcome.
    pub record_trace: bool,
}

impl Default for GreedyParams {
    fn default() -> Self {
        GreedyParams {
            decay: 0.85,
            selected_weight: 1e-3,
            max_rounds: 30,
            selection_cap: None,
            record_trace: false,
        }
    }
}

impl GreedyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::config(format!(
                "threshold decay {} outside (0, 1)",
                self.decay
            )));
        }
        if !(self.selected_weight > 0.0 && self.selected_weight.is_finite()) {
            return Err(Error::config(format!(
                "selected weight {} must be positive and finite",
                self.selected_weight
            )));
        }
        if self.max_rounds == 0 {
            return Err(Error::config("at least one reweighted round is required"));
        }
        if self.selection_cap == Some(0) {
            return Err(Error::config(
                "selection cap of zero would stop before solving",
            ));
        }
        Ok(())
    }
}

/// Why the greedy loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Ran the full round budget.
    MaxRounds,
    /// The selection reached the cap before its round solved; the estimate
    /// is the previous round's.
    SelectionCap,
    /// An inner solve failed; the estimate is the last successful one.
    SolverFailure,
}

/// Per-round record kept when tracing is enabled.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRound {
    /// 1-based reweighted round index.
    pub round: usize,
    pub threshold: f64,
    /// Coordinates that received the selected weight this round.
    pub selection: Vec<usize>,
    pub solver_iterations: usize,
}

/// Full decode trace; one entry per completed round.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DecodeTrace {
    pub rounds: Vec<TraceRound>,
}

/// Result of a greedy decode.
#[derive(Clone, Debug, Serialize)]
pub struct DecodeOutcome {
    pub estimate: Array1<f64>,
    /// Reweighted rounds that completed a solve (initial solve not counted).
    pub rounds_completed: usize,
    /// Largest magnitude of the initial estimate; every round threshold is a
    /// geometric fraction of it.
    pub initial_peak: f64,
    /// Threshold of each completed round.
    pub thresholds: Vec<f64>,
    /// Selection size of each completed round.
    pub selection_sizes: Vec<usize>,
    /// Size of the last selection formed, including one that hit the cap or
    /// whose solve failed.
    pub final_selection_size: usize,
    pub termination: Termination,
    pub trace: Option<DecodeTrace>,
}

/// Decodes with unit base weights: the plain greedy reweighting loop.
pub fn lga_decode(
    matrix: &SensingMatrix,
    y: &ArrayView1<f64>,
    greedy: &GreedyParams,
    solver: &SolverParams,
) -> Result<DecodeOutcome> {
    run_greedy(
        matrix,
        y,
        None,
        greedy,
        solver,
        |_, _, base: &mut Array1<f64>| {
            base.fill(1.0);
            Ok(())
        },
    )
}

/// Decodes with one base weight per block of the partition. Blocks whose
/// weight is below 1 are generous: their coordinates are cheaper than the
/// rest even before being selected.
pub fn lgga_decode(
    matrix: &SensingMatrix,
    y: &ArrayView1<f64>,
    partition: &BlockPartition,
    block_weights: &[f64],
    greedy: &GreedyParams,
    solver: &SolverParams,
) -> Result<DecodeOutcome> {
    if partition.total_len() != matrix.cols() {
        return Err(Error::dim(format!(
            "partition covers {} coordinates, matrix has {} columns",
            partition.total_len(),
            matrix.cols()
        )));
    }
    check_block_weights(block_weights)?;
    let base = partition.expand_per_coordinate(block_weights)?;
    run_greedy(
        matrix,
        y,
        None,
        greedy,
        solver,
        move |_, _, out: &mut Array1<f64>| {
            out.assign(&base);
            Ok(())
        },
    )
}

/// Decodes against a compound matrix `(B1 | delta B2)`. Coordinates of the
/// rescaled block carry values `1/delta` times larger than the signal they
/// represent, so their selection threshold is raised by the same factor.
pub fn lgga_decode_compound(
    matrix: &SensingMatrix,
    y: &ArrayView1<f64>,
    block_weights: &[f64],
    greedy: &GreedyParams,
    solver: &SolverParams,
) -> Result<DecodeOutcome> {
    let MatrixKind::Compound { split, delta } = matrix.kind() else {
        return Err(Error::domain("compound decode needs a compound matrix"));
    };
    let cols = matrix.cols();
    let partition = BlockPartition::from_lens(&[
        (split, BlockRole::Source(1)),
        (cols - split, BlockRole::Source(2)),
    ])?;
    check_block_weights(block_weights)?;
    let base = partition.expand_per_coordinate(block_weights)?;
    let mut scale = Array1::ones(cols);
    scale.slice_mut(s![split..]).fill(1.0 / delta);
    run_greedy(
        matrix,
        y,
        Some(&scale),
        greedy,
        solver,
        move |_, _, out: &mut Array1<f64>| {
            out.assign(&base);
            Ok(())
        },
    )
}

/// Outcome of [`correct_errors`]: the decoded signal, the measurement error
/// the decoder attributed, and the underlying decode.
#[derive(Clone, Debug, Serialize)]
pub struct CorrectionOutcome {
    pub signal: Array1<f64>,
    pub error: Array1<f64>,
    pub decode: DecodeOutcome,
}

/// Decodes measurements `y = B x + e` with a sparse error `e` by extending
/// the matrix with the identity and giving the error block its own weight.
pub fn correct_errors(
    phi: &SensingMatrix,
    y: &ArrayView1<f64>,
    error_weight: f64,
    greedy: &GreedyParams,
    solver: &SolverParams,
) -> Result<CorrectionOutcome> {
    let (extended, partition) = extend_with_identity(phi)?;
    let decode = lgga_decode(
        &extended,
        y,
        &partition,
        &[1.0, error_weight],
        greedy,
        solver,
    )?;
    let data_len = phi.cols();
    let signal = decode.estimate.slice(s![..data_len]).to_owned();
    let error = decode.estimate.slice(s![data_len..]).to_owned();
    Ok(CorrectionOutcome {
        signal,
        error,
        decode,
    })
}

/// Base weight for an appended error block, stepped by how many corrupted
/// measurements the decoder should expect: light corruption keeps error
/// columns expensive, heavy corruption makes them cheap.
pub fn error_block_weight(expected_errors: usize) -> f64 {
    match expected_errors {
        0..=4 => 2.0,
        5..=14 => 1.7,
        15..=44 => 1.5,
        45..=89 => 0.7,
        _ => 0.55,
    }
}

fn check_block_weights(block_weights: &[f64]) -> Result<()> {
    if let Some(bad) = block_weights.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::domain(format!(
            "block weight {bad} must be positive and finite"
        )));
    }
    Ok(())
}

/// The shared loop. `threshold_scale` raises the selection threshold per
/// coordinate (None means 1 everywhere); `base_weights` fills the weights of
/// unselected coordinates for a given round from the previous estimate,
/// which lets the adaptive decoder re-derive block weights every round.
pub(crate) fn run_greedy(
    matrix: &SensingMatrix,
    y: &ArrayView1<f64>,
    threshold_scale: Option<&Array1<f64>>,
    greedy: &GreedyParams,
    solver_params: &SolverParams,
    mut base_weights: impl FnMut(usize, &Array1<f64>, &mut Array1<f64>) -> Result<()>,
) -> Result<DecodeOutcome> {
    greedy.validate()?;
    let cols = matrix.cols();
    if let Some(scale) = threshold_scale {
        debug_assert_eq!(scale.len(), cols);
    }
    let cap = greedy.selection_cap.unwrap_or(matrix.rows());
    let solver = SubproblemSolver::new(matrix, y.view(), solver_params.clone())?;

    let mut base = Array1::<f64>::zeros(cols);
    base_weights(0, &Array1::zeros(cols), &mut base)?;
    let report = solver.solve(&WeightVector::new(base.clone())?, None)?;
    let mut estimate = report.solution;
    let initial_peak = estimate.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let mut threshold = initial_peak;
    let mut thresholds = Vec::new();
    let mut selection_sizes = Vec::new();
    let mut trace = greedy.record_trace.then(DecodeTrace::default);
    let mut selection: Vec<usize> = Vec::new();
    let mut termination = Termination::MaxRounds;
    let mut final_selection_size = 0;
    let mut rounds_completed = 0;

    for round in 1..=greedy.max_rounds {
        threshold *= greedy.decay;
        selection.clear();
        match threshold_scale {
            None => selection.extend(
                estimate
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| (v.abs() > threshold).then_some(i)),
            ),
            Some(scale) => selection.extend(
                estimate
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| (v.abs() > threshold * scale[i]).then_some(i)),
            ),
        }
        final_selection_size = selection.len();
        // cap check precedes the solve: an at-cap selection already spans
        // enough columns to fit y outright, so steering is over
        if selection.len() >= cap {
            termination = Termination::SelectionCap;
            break;
        }

        base_weights(round, &estimate, &mut base)?;
        let mut weights = base.clone();
        for &i in &selection {
            weights[i] = greedy.selected_weight;
        }
        let report = match solver.solve(&WeightVector::new(weights)?, Some(&estimate)) {
            Ok(r) => r,
            Err(err) => {
                log::warn!("greedy round {round}: inner solve failed: {err}");
                termination = Termination::SolverFailure;
                break;
            }
        };
        estimate = report.solution;
        rounds_completed += 1;
        thresholds.push(threshold);
        selection_sizes.push(selection.len());
        if let Some(trace) = trace.as_mut() {
            trace.rounds.push(TraceRound {
                round,
                threshold,
                selection: selection.clone(),
                solver_iterations: report.iterations,
            });
        }
    }

    Ok(DecodeOutcome {
        estimate,
        rounds_completed,
        initial_peak,
        thresholds,
        selection_sizes,
        final_selection_size,
        termination,
        trace,
    })
}

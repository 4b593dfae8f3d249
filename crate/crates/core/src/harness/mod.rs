//! Monte-Carlo experiment engine.
//!
//! A trial draws a fresh matrix, signal and corruption from a seed, decodes,
//! and judges the result; a sweep runs many trials per grid point and
//! aggregates success curves. Seeds are derived functionally from
//! (base, point, trial index), so a sweep's output is identical no matter
//! how its trials are scheduled across workers, and any single trial can be
//! replayed from its recorded seed.

pub mod config;
pub mod figures;
pub mod selftest;

use crate::adaptive::algga_decode;
use crate::decode::{lga_decode, lgga_decode, lgga_decode_compound, DecodeOutcome, GreedyParams};
use crate::error::{Error, Result};
use crate::model::{
    extend_with_identity, make_compound, make_gaussian_matrix, sample_sparse_signal,
    BlockPartition, BlockRole, SensingMatrix,
};
use crate::rng::{mix_seed, RngSpec};
use crate::solver::SolverParams;
use ndarray::{Array1, ArrayView1};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Relative recovery tolerance of the noiseless success rule. Used as an
/// absolute tolerance when the true signal is zero.
pub const NOISELESS_TOLERANCE: f64 = 1e-4;

/// Safety factor on the information-theoretic noise threshold.
pub const NOISY_THRESHOLD_FACTOR: f64 = 1.5;

// Sub-stream tags for the per-trial seed.
const TAG_MATRIX: u64 = 0;
const TAG_MATRIX_RIGHT: u64 = 1;
const TAG_SIGNAL: u64 = 2;
const TAG_ERRORS: u64 = 3;
const TAG_NOISE: u64 = 4;

/// `H(p) = -p log2 p - (1-p) log2 (1-p)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "entropy argument {p} outside [0, 1]"
        )));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Success threshold for noisy recovery of a `k`-sparse length-`signal_len`
/// vector from `rows` measurements with per-entry noise level `sigma`:
/// `1.5 · 2^{signal_len·H(k/signal_len)/rows} · √rows · sigma`.
///
/// The exponent prices the index information the measurements must carry on
/// top of the coefficient values; no decoder can beat it, so success is
/// judged against a fixed multiple.
pub fn noisy_success_threshold(
    rows: usize,
    signal_len: usize,
    k: usize,
    sigma: f64,
) -> Result<f64> {
    if rows == 0 {
        return Err(Error::domain(
            "threshold needs at least one measurement row",
        ));
    }
    if k == 0 || k >= signal_len {
        return Err(Error::domain(format!(
            "sparsity {k} outside (0, {signal_len}) has no index-entropy rate"
        )));
    }
    if !(sigma >= 0.0) {
        return Err(Error::domain(format!(
            "noise level {sigma} must be nonnegative"
        )));
    }
    let entropy = binary_entropy(k as f64 / signal_len as f64)?;
    let bits_per_row = signal_len as f64 * entropy / rows as f64;
    Ok(NOISY_THRESHOLD_FACTOR * bits_per_row.exp2() * (rows as f64).sqrt() * sigma)
}

/// Absolute-error success rule for noisy measurements.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoisySuccessRule {
    pub sigma: f64,
    pub threshold: f64,
}

impl NoisySuccessRule {
    pub fn from_dimensions(rows: usize, signal_len: usize, k: usize, sigma: f64) -> Result<Self> {
        let threshold = noisy_success_threshold(rows, signal_len, k, sigma)?;
        Ok(NoisySuccessRule { sigma, threshold })
    }
}

/// How a trial's estimate is compared against the truth.
#[derive(Debug, Clone, Copy)]
pub enum SuccessRule {
    /// Relative l2 error within `tolerance`; absolute when the truth is zero.
    Noiseless { tolerance: f64 },
    /// Absolute l2 error strictly below the entropy threshold.
    Noisy(NoisySuccessRule),
}

impl SuccessRule {
    pub fn noiseless() -> Self {
        SuccessRule::Noiseless {
            tolerance: NOISELESS_TOLERANCE,
        }
    }
}

/// Judges an estimate against the truth; returns the success flag and the
/// judged error (relative for the noiseless rule on a nonzero truth,
/// absolute otherwise).
pub fn judge_success(
    estimate: &ArrayView1<f64>,
    truth: &ArrayView1<f64>,
    rule: &SuccessRule,
) -> Result<(bool, f64)> {
    if estimate.len() != truth.len() {
        return Err(Error::dim(format!(
            "estimate length {} vs truth length {}",
            estimate.len(),
            truth.len()
        )));
    }
    let diff_norm = estimate
        .iter()
        .zip(truth.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    match rule {
        SuccessRule::Noiseless { tolerance } => {
            let truth_norm = truth.dot(truth).sqrt();
            if truth_norm == 0.0 {
                Ok((diff_norm <= *tolerance, diff_norm))
            } else {
                let relative = diff_norm / truth_norm;
                Ok((relative <= *tolerance, relative))
            }
        }
        SuccessRule::Noisy(noisy) => Ok((diff_norm < noisy.threshold, diff_norm)),
    }
}

/// Shape and scaling of the sensing matrix drawn each trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixRecipe {
    pub rows: usize,
    #[serde(flatten)]
    pub kind: RecipeKind,
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecipeKind {
    /// Rows x cols standard-normal matrix.
    Gaussian { cols: usize },
    /// Gaussian data columns extended by the identity, so sparse
    /// measurement corruptions become ordinary coordinates.
    Extended { data_cols: usize },
    /// Two Gaussian blocks side by side, the second scaled by `delta`.
    Compound { block_cols: usize, delta: f64 },
}

impl MatrixRecipe {
    /// Number of data columns (the identity extension is not data).
    pub fn data_cols(&self) -> usize {
        match self.kind {
            RecipeKind::Gaussian { cols } => cols,
            RecipeKind::Extended { data_cols } => data_cols,
            RecipeKind::Compound { block_cols, .. } => 2 * block_cols,
        }
    }

    pub fn total_cols(&self) -> usize {
        match self.kind {
            RecipeKind::Extended { data_cols } => data_cols + self.rows,
            _ => self.data_cols(),
        }
    }
}

/// How many nonzeros a swept quantity contributes at a given axis value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KRule {
    /// The axis value itself.
    Axis,
    /// A constant, independent of the axis.
    Fixed(usize),
    /// `axis - c`; lets the axis stand for a total that includes fixed
    /// blocks.
    AxisMinus(usize),
    /// `c - axis`; ties this count to the axis so their sum stays constant.
    ConstMinusAxis(usize),
}

impl KRule {
    pub fn resolve(&self, axis: usize) -> Result<usize> {
        match *self {
            KRule::Axis => Ok(axis),
            KRule::Fixed(c) => Ok(c),
            KRule::AxisMinus(c) => axis
                .checked_sub(c)
                .ok_or_else(|| Error::config(format!("axis {axis} is below the fixed offset {c}"))),
            KRule::ConstMinusAxis(c) => c
                .checked_sub(axis)
                .ok_or_else(|| Error::config(format!("axis {axis} exceeds the tied total {c}"))),
        }
    }
}

// Serde surface for KRule: a bare integer, the string "axis", or a one-key
// table naming the arithmetic form.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum KRuleRepr {
    Fixed(usize),
    Keyword(String),
    AxisMinus { axis_minus: usize },
    ConstMinusAxis { const_minus_axis: usize },
}

impl TryFrom<KRuleRepr> for KRule {
    type Error = Error;
    fn try_from(repr: KRuleRepr) -> Result<Self> {
        match repr {
            KRuleRepr::Fixed(c) => Ok(KRule::Fixed(c)),
            KRuleRepr::Keyword(word) if word == "axis" => Ok(KRule::Axis),
            KRuleRepr::Keyword(word) => Err(Error::config(format!(
                "unknown sparsity rule {word:?}, expected \"axis\""
            ))),
            KRuleRepr::AxisMinus { axis_minus } => Ok(KRule::AxisMinus(axis_minus)),
            KRuleRepr::ConstMinusAxis { const_minus_axis } => {
                Ok(KRule::ConstMinusAxis(const_minus_axis))
            }
        }
    }
}

impl From<KRule> for KRuleRepr {
    fn from(rule: KRule) -> Self {
        match rule {
            KRule::Axis => KRuleRepr::Keyword("axis".to_string()),
            KRule::Fixed(c) => KRuleRepr::Fixed(c),
            KRule::AxisMinus(c) => KRuleRepr::AxisMinus { axis_minus: c },
            KRule::ConstMinusAxis(c) => KRuleRepr::ConstMinusAxis {
                const_minus_axis: c,
            },
        }
    }
}

impl Serialize for KRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KRuleRepr::from(*self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for KRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        KRule::try_from(KRuleRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

fn default_scale() -> f64 {
    1.0
}

/// Sparsity layout of the signal, before the sweep axis is plugged in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalTemplate {
    /// Data block lengths. Empty means one block spanning all data columns
    /// (compound recipes always use their two built-in blocks).
    #[serde(default)]
    pub block_lens: Vec<usize>,
    /// Nonzero count per data block; a single entry with `pooled` draws one
    /// support across all data columns.
    pub block_sparsity: Vec<KRule>,
    #[serde(default)]
    pub pooled: bool,
    /// Corrupted measurement count; extended recipes only.
    #[serde(default = "KRule::default_error")]
    pub error_sparsity: KRule,
    #[serde(default = "default_scale")]
    pub signal_scale: f64,
    #[serde(default = "default_scale")]
    pub error_scale: f64,
}

impl KRule {
    fn default_error() -> KRule {
        KRule::Fixed(0)
    }
}

impl SignalTemplate {
    pub fn resolve(&self, axis: usize) -> Result<SignalPlan> {
        Ok(SignalPlan {
            block_lens: self.block_lens.clone(),
            block_sparsity: self
                .block_sparsity
                .iter()
                .map(|rule| rule.resolve(axis))
                .collect::<Result<_>>()?,
            pooled: self.pooled,
            error_sparsity: self.error_sparsity.resolve(axis)?,
            signal_scale: self.signal_scale,
            error_scale: self.error_scale,
        })
    }
}

/// Fully resolved signal layout of one trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalPlan {
    #[serde(default)]
    pub block_lens: Vec<usize>,
    pub block_sparsity: Vec<usize>,
    #[serde(default)]
    pub pooled: bool,
    #[serde(default)]
    pub error_sparsity: usize,
    #[serde(default = "default_scale")]
    pub signal_scale: f64,
    #[serde(default = "default_scale")]
    pub error_scale: f64,
}

impl SignalPlan {
    pub fn total_k(&self) -> usize {
        self.block_sparsity.iter().sum()
    }
}

/// Decoder run on each trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum DecoderSpec {
    Lga,
    Lgga { block_weights: Vec<f64> },
    LggaCompound { block_weights: Vec<f64> },
    Algga,
}

/// Everything one trial needs: geometry, sparsities, noise, decoder and the
/// point seed trials are derived from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialSpec {
    pub matrix: MatrixRecipe,
    pub signal: SignalPlan,
    #[serde(default)]
    pub sigma: f64,
    pub decoder: DecoderSpec,
    #[serde(default)]
    pub greedy: GreedyParams,
    #[serde(default)]
    pub solver: SolverParams,
    pub trials: usize,
    pub seed: u64,
}

impl TrialSpec {
    /// Lengths of the data blocks after defaulting.
    fn effective_block_lens(&self) -> Result<Vec<usize>> {
        let data_cols = self.matrix.data_cols();
        match self.matrix.kind {
            RecipeKind::Compound { block_cols, .. } => {
                if !self.signal.block_lens.is_empty()
                    && self.signal.block_lens != [block_cols, block_cols]
                {
                    return Err(Error::config(
                        "compound recipes fix the two block lengths; leave block_lens empty",
                    ));
                }
                Ok(vec![block_cols, block_cols])
            }
            _ => {
                if self.signal.block_lens.is_empty() {
                    Ok(vec![data_cols])
                } else {
                    let sum: usize = self.signal.block_lens.iter().sum();
                    if sum != data_cols {
                        return Err(Error::config(format!(
                            "block lengths sum to {sum}, matrix has {data_cols} data columns"
                        )));
                    }
                    Ok(self.signal.block_lens.clone())
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrix.rows == 0 || self.matrix.data_cols() == 0 {
            return Err(Error::config("matrix must have positive dimensions"));
        }
        if self.trials == 0 {
            return Err(Error::config("at least one trial is required"));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::config(format!(
                "noise level {} must be nonnegative",
                self.sigma
            )));
        }
        for (name, v) in [
            ("signal_scale", self.signal.signal_scale),
            ("error_scale", self.signal.error_scale),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let lens = self.effective_block_lens()?;
        if self.signal.pooled {
            if self.signal.block_sparsity.len() != 1 {
                return Err(Error::config(
                    "pooled sampling takes exactly one sparsity: the total nonzero count",
                ));
            }
            let total: usize = lens.iter().sum();
            if self.signal.block_sparsity[0] > total {
                return Err(Error::config(format!(
                    "pooled sparsity {} exceeds the {total} data columns",
                    self.signal.block_sparsity[0]
                )));
            }
        } else {
            if self.signal.block_sparsity.len() != lens.len() {
                return Err(Error::config(format!(
                    "{} sparsities for {} blocks",
                    self.signal.block_sparsity.len(),
                    lens.len()
                )));
            }
            for (k, len) in self.signal.block_sparsity.iter().zip(&lens) {
                if k > len {
                    return Err(Error::config(format!(
                        "sparsity {k} exceeds block length {len}"
                    )));
                }
            }
        }
        match self.matrix.kind {
            RecipeKind::Extended { .. } => {
                if self.signal.error_sparsity > self.matrix.rows {
                    return Err(Error::config(format!(
                        "{} corrupted rows exceed the {} measurements",
                        self.signal.error_sparsity, self.matrix.rows
                    )));
                }
                if self.signal.pooled {
                    return Err(Error::config(
                        "pooled sampling is not defined with an error block",
                    ));
                }
            }
            _ => {
                if self.signal.error_sparsity != 0 {
                    return Err(Error::config(
                        "corrupted measurements need an extended recipe with an identity block",
                    ));
                }
            }
        }
        match &self.decoder {
            DecoderSpec::Lga => {}
            DecoderSpec::Lgga { block_weights } => {
                let blocks = lens.len()
                    + usize::from(matches!(self.matrix.kind, RecipeKind::Extended { .. }));
                if block_weights.len() != blocks {
                    return Err(Error::config(format!(
                        "{} block weights for {} blocks",
                        block_weights.len(),
                        blocks
                    )));
                }
            }
            DecoderSpec::LggaCompound { block_weights } => {
                if !matches!(self.matrix.kind, RecipeKind::Compound { .. }) {
                    return Err(Error::config(
                        "the compound decoder needs a compound recipe",
                    ));
                }
                if block_weights.len() != 2 {
                    return Err(Error::config(
                        "the compound decoder takes exactly two weights",
                    ));
                }
            }
            DecoderSpec::Algga => {
                if self.matrix.total_cols() % 2 != 0 {
                    return Err(Error::config(
                        "the adaptive decoder needs an even column count",
                    ));
                }
            }
        }
        if self.sigma > 0.0 {
            let k = self.signal.total_k();
            let len = self.matrix.data_cols();
            if k == 0 || k >= len {
                return Err(Error::config(format!(
                    "noisy success needs 0 < total sparsity < {len}, got {k}"
                )));
            }
        }
        self.greedy.validate()?;
        self.solver.validate()?;
        Ok(())
    }
}

/// Outcome of a single decoded trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    /// Seed this trial was generated from; rerunning with it reproduces the
    /// result exactly.
    pub seed: u64,
    pub success: bool,
    /// Error the success rule judged: relative for the noiseless rule on a
    /// nonzero truth, absolute l2 otherwise.
    pub recovery_error: f64,
    pub runtime_seconds: f64,
    pub rounds_completed: usize,
    /// Present when the trial aborted instead of decoding.
    pub failure: Option<String>,
}

/// Runs one Monte-Carlo trial of `spec`, seeded by `trial_index`.
pub fn run_trial(spec: &TrialSpec, trial_index: usize) -> TrialResult {
    run_trial_with_seed(spec, mix_seed(spec.seed, trial_index as u64))
}

/// Runs one trial from an explicit seed (the replay entry point). Errors are
/// recorded in the result, never raised: a failing trial is a data point.
pub fn run_trial_with_seed(spec: &TrialSpec, seed: u64) -> TrialResult {
    trial_inner(spec, seed).unwrap_or_else(|err| TrialResult {
        seed,
        success: false,
        recovery_error: f64::INFINITY,
        runtime_seconds: 0.0,
        rounds_completed: 0,
        failure: Some(err.to_string()),
    })
}

fn trial_inner(spec: &TrialSpec, seed: u64) -> Result<TrialResult> {
    let rng = RngSpec::new(seed);
    let (matrix, partition) = build_matrix(spec, &rng)?;
    let truth = sample_truth(spec, &partition, &rng)?;
    let mut y = matrix.apply(&truth.view())?;
    if spec.sigma > 0.0 {
        let noise = Normal::new(0.0, spec.sigma)
            .map_err(|e| Error::domain(format!("noise distribution: {e}")))?;
        let mut stream = rng.derive(TAG_NOISE).stream();
        y.mapv_inplace(|v| v + noise.sample(&mut stream));
    }

    let started = Instant::now();
    let outcome = decode(spec, &matrix, &partition, &y.view())?;
    let runtime_seconds = started.elapsed().as_secs_f64();

    let judged: Vec<usize> = partition
        .blocks()
        .iter()
        .filter(|b| b.role.is_data())
        .flat_map(|b| b.range())
        .collect();
    let pick = |v: &Array1<f64>| Array1::from_iter(judged.iter().map(|&i| v[i]));
    let estimate = pick(&outcome.estimate);
    let expected = pick(&truth);
    let rule = if spec.sigma > 0.0 {
        SuccessRule::Noisy(NoisySuccessRule::from_dimensions(
            spec.matrix.rows,
            judged.len(),
            spec.signal.total_k(),
            spec.sigma,
        )?)
    } else {
        SuccessRule::noiseless()
    };
    let (success, recovery_error) = judge_success(&estimate.view(), &expected.view(), &rule)?;
    Ok(TrialResult {
        seed,
        success,
        recovery_error,
        runtime_seconds,
        rounds_completed: outcome.rounds_completed,
        failure: None,
    })
}

fn build_matrix(spec: &TrialSpec, rng: &RngSpec) -> Result<(SensingMatrix, BlockPartition)> {
    let rows = spec.matrix.rows;
    let normalize = spec.matrix.normalize;
    match spec.matrix.kind {
        RecipeKind::Gaussian { cols } => {
            let matrix = make_gaussian_matrix(rows, cols, normalize, &rng.derive(TAG_MATRIX))?;
            let lens = spec.effective_block_lens()?;
            let partition = if lens.len() == 1 {
                BlockPartition::single(cols)?
            } else {
                BlockPartition::from_lens(
                    &lens
                        .iter()
                        .enumerate()
                        .map(|(i, &len)| (len, BlockRole::Source(i as u32 + 1)))
                        .collect::<Vec<_>>(),
                )?
            };
            Ok((matrix, partition))
        }
        RecipeKind::Extended { data_cols } => {
            let phi = make_gaussian_matrix(rows, data_cols, normalize, &rng.derive(TAG_MATRIX))?;
            extend_with_identity(&phi)
        }
        RecipeKind::Compound { block_cols, delta } => {
            let left = make_gaussian_matrix(rows, block_cols, normalize, &rng.derive(TAG_MATRIX))?;
            let right =
                make_gaussian_matrix(rows, block_cols, normalize, &rng.derive(TAG_MATRIX_RIGHT))?;
            make_compound(&left, &right, delta)
        }
    }
}

/// Truth vector over all matrix columns: data blocks carry the signal,
/// the identity block (if any) carries the corruption values.
fn sample_truth(
    spec: &TrialSpec,
    partition: &BlockPartition,
    rng: &RngSpec,
) -> Result<Array1<f64>> {
    let mut truth = Array1::zeros(partition.total_len());
    let data_blocks: Vec<_> = partition
        .blocks()
        .iter()
        .filter(|b| b.role.is_data())
        .collect();
    if spec.signal.pooled {
        let total: usize = data_blocks.iter().map(|b| b.len).sum();
        let pooled = sample_sparse_signal(
            total,
            spec.signal.block_sparsity[0],
            spec.signal.signal_scale,
            &rng.derive(TAG_SIGNAL),
        )?;
        // Data blocks are contiguous from zero in every recipe, so pooled
        // coordinates map straight onto the truth vector.
        for (offset, value) in pooled.support().iter().zip(pooled.values()) {
            truth[*offset] = *value;
        }
    } else {
        let signal_rng = rng.derive(TAG_SIGNAL);
        for (idx, (block, &k)) in data_blocks
            .iter()
            .zip(&spec.signal.block_sparsity)
            .enumerate()
        {
            let part = sample_sparse_signal(
                block.len,
                k,
                spec.signal.signal_scale,
                &signal_rng.derive(idx as u64),
            )?;
            for (i, value) in part.support().iter().zip(part.values()) {
                truth[block.start + i] = *value;
            }
        }
    }
    if spec.signal.error_sparsity > 0 {
        let error_block = partition
            .blocks()
            .iter()
            .find(|b| b.role == BlockRole::Error)
            .ok_or_else(|| Error::config("corrupted rows need an identity block"))?;
        let errors = sample_sparse_signal(
            error_block.len,
            spec.signal.error_sparsity,
            spec.signal.error_scale,
            &rng.derive(TAG_ERRORS),
        )?;
        for (i, value) in errors.support().iter().zip(errors.values()) {
            truth[error_block.start + i] = *value;
        }
    }
    Ok(truth)
}

fn decode(
    spec: &TrialSpec,
    matrix: &SensingMatrix,
    partition: &BlockPartition,
    y: &ArrayView1<f64>,
) -> Result<DecodeOutcome> {
    match &spec.decoder {
        DecoderSpec::Lga => lga_decode(matrix, y, &spec.greedy, &spec.solver),
        DecoderSpec::Lgga { block_weights } => lgga_decode(
            matrix,
            y,
            partition,
            block_weights,
            &spec.greedy,
            &spec.solver,
        ),
        DecoderSpec::LggaCompound { block_weights } => {
            lgga_decode_compound(matrix, y, block_weights, &spec.greedy, &spec.solver)
        }
        DecoderSpec::Algga => {
            algga_decode(matrix, y, &spec.greedy, &spec.solver).map(|out| out.decode)
        }
    }
}

/// One aggregated grid point of a success curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    /// Mean judged error among successful trials; 0 when none succeeded.
    pub mean_relative_error: f64,
    /// Mean decode time over all trials. Informational: the one column that
    /// varies between reruns.
    pub mean_runtime_seconds: f64,
}

/// A trial spec parameterized by the sweep axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTemplate {
    pub matrix: MatrixRecipe,
    pub signal: SignalTemplate,
    #[serde(default)]
    pub sigma: f64,
    pub decoder: DecoderSpec,
    #[serde(default)]
    pub greedy: GreedyParams,
    #[serde(default)]
    pub solver: SolverParams,
    pub trials: usize,
    pub seed: u64,
}

impl SweepTemplate {
    /// Concrete spec at one axis value; its seed is derived from
    /// (base seed, axis), so points are independent of sweep order.
    pub fn resolve(&self, axis: usize) -> Result<TrialSpec> {
        let spec = TrialSpec {
            matrix: self.matrix.clone(),
            signal: self.signal.resolve(axis)?,
            sigma: self.sigma,
            decoder: self.decoder.clone(),
            greedy: self.greedy.clone(),
            solver: self.solver,
            trials: self.trials,
            seed: mix_seed(self.seed, axis as u64),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Sweeps the axis, running `trials` per point across the worker pool.
/// Results are reduced in trial order, so the curve is identical for any
/// worker count.
pub fn sweep_curve(template: &SweepTemplate, axis: &[usize]) -> Result<Vec<CurvePoint>> {
    if axis.is_empty() {
        return Err(Error::config("sweep axis is empty"));
    }
    axis.iter()
        .map(|&k| {
            let point = template.resolve(k)?;
            let results: Vec<TrialResult> = (0..point.trials)
                .into_par_iter()
                .map(|t| run_trial(&point, t))
                .collect();
            Ok(aggregate(k, &results))
        })
        .collect()
}

fn aggregate(k: usize, results: &[TrialResult]) -> CurvePoint {
    let successes = results.iter().filter(|r| r.success).count();
    let mean_relative_error = if successes > 0 {
        results
            .iter()
            .filter(|r| r.success)
            .map(|r| r.recovery_error)
            .sum::<f64>()
            / successes as f64
    } else {
        0.0
    };
    let mean_runtime_seconds =
        results.iter().map(|r| r.runtime_seconds).sum::<f64>() / results.len() as f64;
    CurvePoint {
        k,
        trials: results.len(),
        successes,
        rate: successes as f64 / results.len() as f64,
        mean_relative_error,
        mean_runtime_seconds,
    }
}

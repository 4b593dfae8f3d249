//! Problem model: sensing matrices, block partitions, sparse signals.
//!
//! Matrices come in three kinds:
//! - `Gaussian`: i.i.d. standard normal entries, optionally column-normalized;
//! - `Extended`: a Gaussian block with an identity block appended on the
//!   right, so sparse corruptions of the measurements become ordinary unknowns;
//! - `Compound`: two generator blocks side by side, the second scaled by a
//!   factor `delta`, for sensing two sources with one measurement vector.
//!
//! All constructors are pure functions of their arguments plus an [`RngSpec`],
//! so any object can be re-created from its seed.

use ndarray::{s, Array1, Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSpec;

/// Structural kind of a sensing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Gaussian,
    /// Gaussian block of `data_cols` columns followed by an identity block.
    Extended {
        data_cols: usize,
    },
    /// Two generator blocks; columns at and past `split` are scaled by `delta`.
    Compound {
        split: usize,
        delta: f64,
    },
}

/// Dense real sensing matrix with fewer rows than columns.
#[derive(Debug, Clone)]
pub struct SensingMatrix {
    entries: Array2<f64>,
    kind: MatrixKind,
    /// Per-column divisors applied during normalization, when requested.
    column_scale: Option<Vec<f64>>,
}

impl SensingMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn column_scale(&self) -> Option<&[f64]> {
        self.column_scale.as_deref()
    }

    /// Measurement of a dense signal: `y = A x`.
    pub fn apply(&self, x: &ArrayView1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.cols() {
            return Err(Error::dim(format!(
                "signal length {} vs matrix width {}",
                x.len(),
                self.cols()
            )));
        }
        Ok(self.entries.dot(x))
    }

    /// Wraps an externally supplied dense matrix (CLI path). Kind is treated
    /// as plain Gaussian: no structural claims are made about the entries.
    pub fn from_dense(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::dim("matrix must be non-empty".to_string()));
        }
        Ok(SensingMatrix {
            entries,
            kind: MatrixKind::Gaussian,
            column_scale: None,
        })
    }

    /// Same matrix tagged as compound; used when a dense matrix loaded from
    /// disk is known to carry a scaled second block.
    pub fn into_compound(mut self, split: usize, delta: f64) -> Result<Self> {
        if split == 0 || split >= self.cols() {
            return Err(Error::dim(format!(
                "split {split} outside 1..{}",
                self.cols()
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::domain(format!(
                "delta must be positive, got {delta}"
            )));
        }
        self.kind = MatrixKind::Compound { split, delta };
        Ok(self)
    }
}

/// Role a contiguous block of signal coordinates plays in decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRole {
    Data,
    /// Coordinates standing for sparse measurement corruptions.
    Error,
    /// One of several jointly sensed sources.
    Source(u32),
}

impl BlockRole {
    /// Error coordinates are excluded when judging recovery of the data.
    pub fn is_data(&self) -> bool {
        !matches!(self, BlockRole::Error)
    }
}

/// Contiguous block of coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub len: usize,
    pub role: BlockRole,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Ordered disjoint blocks covering `0..total_len` exactly.
///
/// Block order pairs with per-block weight lists: the i-th weight slot refers
/// to the i-th block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    blocks: Vec<Block>,
    total: usize,
}

impl BlockPartition {
    /// Builds a partition from (length, role) pairs laid out back to back.
    pub fn from_lens(parts: &[(usize, BlockRole)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::dim("partition needs at least one block".to_string()));
        }
        let mut blocks = Vec::with_capacity(parts.len());
        let mut start = 0usize;
        for &(len, role) in parts {
            if len == 0 {
                return Err(Error::dim("zero-length block".to_string()));
            }
            blocks.push(Block { start, len, role });
            start += len;
        }
        Ok(BlockPartition {
            blocks,
            total: start,
        })
    }

    /// Single data block spanning everything.
    pub fn single(total: usize) -> Result<Self> {
        Self::from_lens(&[(total, BlockRole::Data)])
    }

    /// `count` equal source blocks.
    pub fn equal_sources(total: usize, count: usize) -> Result<Self> {
        if count == 0 || total % count != 0 {
            return Err(Error::dim(format!(
                "cannot split {total} into {count} equal blocks"
            )));
        }
        let len = total / count;
        let parts: Vec<(usize, BlockRole)> = (0..count)
            .map(|i| (len, BlockRole::Source(i as u32 + 1)))
            .collect();
        Self::from_lens(&parts)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn total_len(&self) -> usize {
        self.total
    }

    /// Combined length of the non-error blocks (always a leading prefix in
    /// the partitions built by this crate).
    pub fn data_len(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| b.role.is_data())
            .map(|b| b.len)
            .sum()
    }

    /// Index of the block containing coordinate `i`.
    pub fn block_of(&self, i: usize) -> usize {
        debug_assert!(i < self.total);
        self.blocks
            .iter()
            .position(|b| b.range().contains(&i))
            .expect("coordinate inside total")
    }

    /// Checks that a per-block list lines up with this partition.
    pub fn check_slots(&self, n: usize, what: &str) -> Result<()> {
        if n != self.blocks.len() {
            return Err(Error::dim(format!(
                "{what}: {n} entries for {} blocks",
                self.blocks.len()
            )));
        }
        Ok(())
    }

    /// Expands per-block values into a per-coordinate vector.
    pub fn expand_per_coordinate(&self, per_block: &[f64]) -> Result<Array1<f64>> {
        self.check_slots(per_block.len(), "per-block values")?;
        let mut out = Array1::zeros(self.total);
        for (b, &v) in self.blocks.iter().zip(per_block) {
            out.slice_mut(s![b.range()]).fill(v);
        }
        Ok(out)
    }
}

/// How a signal's nonzero values were drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalDistribution {
    /// Standard normal values times a fixed magnitude scale.
    ScaledNormal { scale: f64 },
}

/// Sparse vector stored as sorted (index, value) pairs; off-support
/// coordinates are exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    length: usize,
    support: Vec<usize>,
    values: Vec<f64>,
    distribution: SignalDistribution,
}

impl SparseSignal {
    pub fn zero(length: usize) -> Self {
        SparseSignal {
            length,
            support: Vec::new(),
            values: Vec::new(),
            distribution: SignalDistribution::ScaledNormal { scale: 1.0 },
        }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn distribution(&self) -> SignalDistribution {
        self.distribution
    }

    pub fn dense(&self) -> Array1<f64> {
        let mut x = Array1::zeros(self.length);
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }
}

/// Gaussian matrix with i.i.d. N(0,1) entries drawn in row-major order.
///
/// With `normalize` set, each column is divided by its Euclidean norm and the
/// divisors are recorded in `column_scale`.
pub fn make_gaussian_matrix(
    rows: usize,
    cols: usize,
    normalize: bool,
    rng_spec: &RngSpec,
) -> Result<SensingMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::dim("matrix must be non-empty".to_string()));
    }
    if cols < rows {
        return Err(Error::dim(format!("need cols >= rows, got {rows}x{cols}")));
    }
    let mut rng = rng_spec.stream();
    let mut entries = Array2::<f64>::zeros((rows, cols));
    for v in entries.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    let column_scale = if normalize {
        let mut scales = Vec::with_capacity(cols);
        for mut col in entries.columns_mut() {
            let norm = col.dot(&col).sqrt();
            if norm <= f64::MIN_POSITIVE {
                return Err(Error::domain(
                    "zero column cannot be normalized".to_string(),
                ));
            }
            col.mapv_inplace(|x| x / norm);
            scales.push(norm);
        }
        Some(scales)
    } else {
        None
    };
    Ok(SensingMatrix {
        entries,
        kind: MatrixKind::Gaussian,
        column_scale,
    })
}

/// Appends an identity block: `(A | I)`, turning sparse corruptions of the
/// measurements into ordinary unknowns. Returns the extended matrix and the
/// partition `[data block | error block]`.
pub fn extend_with_identity(phi: &SensingMatrix) -> Result<(SensingMatrix, BlockPartition)> {
    if phi.kind() != MatrixKind::Gaussian {
        return Err(Error::domain(
            "only a plain generator matrix can be extended".to_string(),
        ));
    }
    let (n, cols) = (phi.rows(), phi.cols());
    let mut entries = Array2::<f64>::zeros((n, cols + n));
    entries.slice_mut(s![.., ..cols]).assign(&phi.entries);
    for i in 0..n {
        entries[[i, cols + i]] = 1.0;
    }
    let column_scale = phi.column_scale.as_ref().map(|s| {
        let mut ext = s.clone();
        ext.extend(std::iter::repeat(1.0).take(n));
        ext
    });
    let partition = BlockPartition::from_lens(&[(cols, BlockRole::Data), (n, BlockRole::Error)])?;
    Ok((
        SensingMatrix {
            entries,
            kind: MatrixKind::Extended { data_cols: cols },
            column_scale,
        },
        partition,
    ))
}

/// Places two generator blocks side by side with the second scaled by
/// `delta`: `(A | delta B)`. Returns the compound matrix and the partition
/// `[source 1 | source 2]`.
pub fn make_compound(
    phi1: &SensingMatrix,
    phi2: &SensingMatrix,
    delta: f64,
) -> Result<(SensingMatrix, BlockPartition)> {
    if phi1.rows() != phi2.rows() {
        return Err(Error::dim(format!(
            "row counts differ: {} vs {}",
            phi1.rows(),
            phi2.rows()
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let n = phi1.rows();
    let (c1, c2) = (phi1.cols(), phi2.cols());
    let mut entries = Array2::<f64>::zeros((n, c1 + c2));
    entries.slice_mut(s![.., ..c1]).assign(&phi1.entries);
    let mut right = entries.slice_mut(s![.., c1..]);
    right.assign(&phi2.entries);
    right.mapv_inplace(|x| x * delta);
    let partition =
        BlockPartition::from_lens(&[(c1, BlockRole::Source(1)), (c2, BlockRole::Source(2))])?;
    Ok((
        SensingMatrix {
            entries,
            kind: MatrixKind::Compound { split: c1, delta },
            column_scale: None,
        },
        partition,
    ))
}

/// k-sparse signal of a given length: support drawn uniformly without
/// replacement (partial Fisher-Yates), values i.i.d. N(0,1) times
/// `magnitude_scale`, assigned in index order.
pub fn sample_sparse_signal(
    length: usize,
    k: usize,
    magnitude_scale: f64,
    rng_spec: &RngSpec,
) -> Result<SparseSignal> {
    if k > length {
        return Err(Error::domain(format!(
            "sparsity {k} exceeds length {length}"
        )));
    }
    if !(magnitude_scale > 0.0) {
        return Err(Error::domain(format!(
            "magnitude scale must be positive, got {magnitude_scale}"
        )));
    }
    let mut rng = rng_spec.stream();
    let mut pool: Vec<usize> = (0..length).collect();
    for i in 0..k {
        let j = rng.gen_range(i..length);
        pool.swap(i, j);
    }
    let mut support: Vec<usize> = pool[..k].to_vec();
    support.sort_unstable();
    let values: Vec<f64> = support
        .iter()
        .map(|_| rng.sample::<f64, _>(StandardNormal) * magnitude_scale)
        .collect();
    Ok(SparseSignal {
        length,
        support,
        values,
        distribution: SignalDistribution::ScaledNormal {
            scale: magnitude_scale,
        },
    })
}

/// Concatenates per-block signals into one signal over the partition's full
/// coordinate range.
pub fn embed_signals(signals: &[SparseSignal], partition: &BlockPartition) -> Result<SparseSignal> {
    partition.check_slots(signals.len(), "signals")?;
    for (sig, block) in signals.iter().zip(partition.blocks()) {
        if sig.length() != block.len {
            return Err(Error::dim(format!(
                "signal length {} vs block length {}",
                sig.length(),
                block.len
            )));
        }
    }
    let mut support = Vec::new();
    let mut values = Vec::new();
    for (sig, block) in signals.iter().zip(partition.blocks()) {
        for (&i, &v) in sig.support.iter().zip(&sig.values) {
            support.push(block.start + i);
            values.push(v);
        }
    }
    let distribution = signals
        .first()
        .map(|s| s.distribution)
        .unwrap_or(SignalDistribution::ScaledNormal { scale: 1.0 });
    Ok(SparseSignal {
        length: partition.total_len(),
        support,
        values,
        distribution,
    })
}

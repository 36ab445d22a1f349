//! Random hyperplane ensembles and one-bit measurements.
//!
//! An ensemble holds `m` Gaussian hyperplane normals through the origin and,
//! for every level `l`, a list of distinct `l`-subsets of the hyperplane
//! indices. Binarizing a point records on which side of each hyperplane it
//! lies; a tuple then selects an `l`-bit sign pattern out of that record.
//!
//! All indices are zero-based. Sign `+1` is stored as bit `1`, `-1` as bit
//! `0`, and a point lying exactly on a hyperplane is assigned `+1`.

use std::collections::HashSet;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported tuple size; pattern keys are packed into a `u32`.
pub const MAX_LEVEL: usize = 24;

/// An `l`-bit sign pattern. Bit `k` holds the sign on the `k`-th index of the
/// tuple (indices ascending), `1` for `+1`.
pub type PatternKey = u32;

/// A set of hyperplane indices, stored in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple(Vec<u32>);

impl Tuple {
    /// Builds a tuple from distinct indices in any order.
    ///
    /// Panics if an index is repeated.
    pub fn new(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]),
            "tuple indices must be distinct"
        );
        Tuple(indices)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    /// Number of hyperplanes in the tuple.
    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn max_index(&self) -> Option<u32> {
        self.0.last().copied()
    }
}

/// `min(m, C(m, l))`, the number of tuples kept at level `l`.
pub fn tuple_count(hyperplanes: usize, level: usize) -> usize {
    // C(m, l) >= m whenever 1 <= l < m; only l = m (a single subset) caps.
    match level {
        0 => 1,
        l if l >= hyperplanes => usize::from(l == hyperplanes),
        _ => hyperplanes,
    }
}

/// The random hyperplanes `A` together with the tuple index sets for every
/// level `1..=L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementEnsemble {
    ambient_dim: usize,
    num_hyperplanes: usize,
    seed: u64,
    /// `m × n`, one hyperplane normal per row.
    normals: Array2<f64>,
    /// `tuples[l - 1]` holds the level-`l` tuples in sampling order.
    tuples: Vec<Vec<Tuple>>,
}

impl MeasurementEnsemble {
    /// Draws `m` standard Gaussian normals in `R^n` and `min(m, C(m, l))`
    /// distinct `l`-tuples for each level `l` in `1..=levels`.
    ///
    /// The normals come from one seeded ChaCha stream and each level's
    /// tuples from their own stream, so the first `k` normals and the tuples
    /// of any level do not depend on `m` beyond `k`, or on `levels`.
    pub fn generate(ambient_dim: usize, hyperplanes: usize, levels: usize, seed: u64) -> Result<Self> {
        if ambient_dim == 0 || hyperplanes == 0 {
            return Err(Error::InvalidDimensions(format!(
                "ambient dimension {ambient_dim} and hyperplane count {hyperplanes} must be positive"
            )));
        }
        let max = hyperplanes.min(MAX_LEVEL);
        if levels == 0 || levels > max {
            return Err(Error::InvalidLevels {
                levels,
                hyperplanes,
                max,
            });
        }
        if hyperplanes > u32::MAX as usize {
            return Err(Error::InvalidDimensions(format!("{hyperplanes} hyperplanes")));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normals = Array2::from_shape_simple_fn((hyperplanes, ambient_dim), || {
            StandardNormal.sample(&mut rng)
        });

        let tuples = (1..=levels)
            .map(|level| sample_tuples(hyperplanes, level, seed))
            .collect();

        Ok(MeasurementEnsemble {
            ambient_dim,
            num_hyperplanes: hyperplanes,
            seed,
            normals,
            tuples,
        })
    }

    /// The ensemble that `generate` would produce with only the first
    /// `hyperplanes` normals, at most `levels` levels and the same seed.
    pub fn restricted(&self, hyperplanes: usize, levels: usize) -> Result<Self> {
        if hyperplanes > self.num_hyperplanes {
            return Err(Error::InvalidDimensions(format!(
                "cannot restrict {} hyperplanes to {hyperplanes}",
                self.num_hyperplanes
            )));
        }
        let mut sub = Self::generate(self.ambient_dim, hyperplanes, levels, self.seed)?;
        sub.normals = self.normals.slice(ndarray::s![..hyperplanes, ..]).to_owned();
        Ok(sub)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn num_hyperplanes(&self) -> usize {
        self.num_hyperplanes
    }

    pub fn num_levels(&self) -> usize {
        self.tuples.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn normals(&self) -> ArrayView2<'_, f64> {
        self.normals.view()
    }

    /// Tuples at `level` (1-based). Panics if `level` is out of range.
    pub fn tuples(&self, level: usize) -> &[Tuple] {
        &self.tuples[level - 1]
    }

    /// Signs of every row of `points` (`p × n`, one point per row).
    pub fn binarize(&self, points: ArrayView2<'_, f64>) -> Result<SignMatrix> {
        if points.ncols() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: points.ncols(),
            });
        }
        let words = words_for(self.num_hyperplanes);
        let mut bits = vec![0u64; words * points.nrows()];
        bits.par_chunks_mut(words.max(1))
            .enumerate()
            .for_each(|(j, out)| self.fill_signs(points.row(j), out));
        Ok(SignMatrix {
            rows: self.num_hyperplanes,
            cols: points.nrows(),
            words,
            bits,
        })
    }

    /// Signs of a single point.
    pub fn binarize_point(&self, point: ArrayView1<'_, f64>) -> Result<SignVector> {
        if point.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: point.len(),
            });
        }
        let mut words = vec![0u64; words_for(self.num_hyperplanes)];
        self.fill_signs(point, &mut words);
        Ok(SignVector {
            len: self.num_hyperplanes,
            words,
        })
    }

    fn fill_signs(&self, x: ArrayView1<'_, f64>, out: &mut [u64]) {
        for (i, normal) in self.normals.axis_iter(Axis(0)).enumerate() {
            if normal.dot(&x) >= 0.0 {
                out[i / 64] |= 1 << (i % 64);
            }
        }
    }
}

fn sample_tuples(hyperplanes: usize, level: usize, seed: u64) -> Vec<Tuple> {
    let target = tuple_count(hyperplanes, level);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    let mut seen = HashSet::with_capacity(target);
    let mut tuples = Vec::with_capacity(target);
    while tuples.len() < target {
        let tuple = Tuple::new(
            sample(&mut rng, hyperplanes, level)
                .into_iter()
                .map(|i| i as u32)
                .collect(),
        );
        if seen.insert(tuple.clone()) {
            tuples.push(tuple);
        }
    }
    tuples
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Borrowed sign record of one point.
#[derive(Clone, Copy, Debug)]
pub struct SignSlice<'a> {
    len: usize,
    words: &'a [u64],
}

impl<'a> SignSlice<'a> {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `true` for sign `+1`.
    #[inline]
    pub fn bit(&self, index: usize) -> bool {
        debug_assert!(index < self.len);
        self.words[index / 64] >> (index % 64) & 1 == 1
    }

    /// The sign pattern of this point on `tuple`.
    #[inline]
    pub fn pattern(&self, tuple: &Tuple) -> PatternKey {
        extract_subpattern(*self, tuple)
    }

    pub fn to_vector(&self) -> SignVector {
        SignVector {
            len: self.len,
            words: self.words.to_vec(),
        }
    }
}

/// Packs the signs of `q` at the tuple's indices into a key, lowest index in
/// bit 0.
#[inline]
pub fn extract_subpattern(q: SignSlice<'_>, tuple: &Tuple) -> PatternKey {
    tuple
        .indices()
        .iter()
        .enumerate()
        .fold(0, |key, (k, &i)| key | (q.bit(i as usize) as PatternKey) << k)
}

/// Sign record `q = sign(Ax)` of a single point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignVector {
    len: usize,
    words: Vec<u64>,
}

impl SignVector {
    pub fn from_signs(signs: &[bool]) -> Self {
        let mut words = vec![0u64; words_for(signs.len())];
        for (i, &s) in signs.iter().enumerate() {
            if s {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        SignVector {
            len: signs.len(),
            words,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn view(&self) -> SignSlice<'_> {
        SignSlice {
            len: self.len,
            words: &self.words,
        }
    }

    pub fn bit(&self, index: usize) -> bool {
        self.view().bit(index)
    }
}

/// Signs `Q = sign(AX)` for a batch of points, stored point by point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl SignMatrix {
    /// Builds a matrix from per-point sign vectors of equal length.
    pub fn from_columns(columns: &[SignVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, SignVector::len);
        if let Some(bad) = columns.iter().find(|c| c.len != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: bad.len,
            });
        }
        let words = words_for(rows);
        Ok(SignMatrix {
            rows,
            cols: columns.len(),
            words,
            bits: columns.iter().flat_map(|c| c.words.iter().copied()).collect(),
        })
    }

    /// Number of measurements per point, `m`.
    pub fn num_measurements(&self) -> usize {
        self.rows
    }

    /// Number of points, `p`.
    pub fn num_points(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> SignSlice<'_> {
        SignSlice {
            len: self.rows,
            words: &self.bits[j * self.words..(j + 1) * self.words],
        }
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = SignSlice<'_>> + '_ {
        (0..self.cols).map(move |j| self.column(j))
    }

    /// `Q[i, j]` as a boolean, `true` for `+1`.
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.column(j).bit(i)
    }

    /// The signs on the first `rows` hyperplanes only.
    pub fn truncate_rows(&self, rows: usize) -> SignMatrix {
        assert!(rows <= self.rows);
        let words = words_for(rows);
        let mut bits = Vec::with_capacity(words * self.cols);
        for j in 0..self.cols {
            let col = &self.bits[j * self.words..j * self.words + words];
            bits.extend_from_slice(col);
            if !rows.is_multiple_of(64) {
                let last = bits.len() - 1;
                bits[last] &= (1u64 << (rows % 64)) - 1;
            }
        }
        SignMatrix {
            rows,
            cols: self.cols,
            words,
            bits,
        }
    }

    /// A new matrix holding the given columns in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> SignMatrix {
        let mut bits = Vec::with_capacity(columns.len() * self.words);
        for &j in columns {
            bits.extend_from_slice(&self.bits[j * self.words..(j + 1) * self.words]);
        }
        SignMatrix {
            rows: self.rows,
            cols: columns.len(),
            words: self.words,
            bits,
        }
    }
}

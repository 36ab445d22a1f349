//! Flat multiclass classification from sign patterns.
//!
//! Training counts, for every tuple of every level, how many points of each
//! class show each observed sign pattern, and turns the counts into
//! membership indices. Classification looks up the test point's pattern in
//! every table, sums the memberships per class, scales by the number of
//! tuples and returns the argmax.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops::{FlopCategory, FlopLedger};
use crate::measurement::{MeasurementEnsemble, PatternKey, SignMatrix, SignSlice, Tuple};

/// Membership index of class `g` for a pattern observed with per-class
/// `counts`:
///
/// ```text
/// r(g) = P_g / ΣP_j · Σ_j |P_g − P_j| / ΣP_j
/// ```
///
/// The first factor is the share of the pattern's points that belong to `g`;
/// the second rewards patterns dominated by few classes. The result lies in
/// `[0, G − 1]`.
pub fn membership_index(counts: &[u32], g: usize) -> Result<f64> {
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    if g >= counts.len() {
        return Err(Error::LabelOutOfRange {
            label: g,
            classes: counts.len(),
        });
    }
    Ok(membership_unchecked(counts, g, total as f64))
}

fn membership_unchecked(counts: &[u32], g: usize, total: f64) -> f64 {
    let pg = counts[g] as i64;
    let spread: i64 = counts.iter().map(|&pj| (pg - pj as i64).abs()).sum();
    (pg as f64 / total) * (spread as f64 / total)
}

/// Training statistics of one sign pattern of one tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternEntry {
    counts: Vec<u32>,
    memberships: Vec<f64>,
}

impl PatternEntry {
    fn from_counts(counts: Vec<u32>) -> Self {
        let total = counts.iter().map(|&c| c as u64).sum::<u64>() as f64;
        let memberships = (0..counts.len())
            .map(|g| membership_unchecked(&counts, g, total))
            .collect();
        PatternEntry {
            counts,
            memberships,
        }
    }

    /// `P_{g|t}` for every class `g`.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// `r(l, i, t, g)` for every class `g`.
    pub fn memberships(&self) -> &[f64] {
        &self.memberships
    }
}

/// The patterns observed on one tuple during training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternTable {
    tuple: Tuple,
    #[serde(with = "sorted_patterns")]
    patterns: HashMap<PatternKey, PatternEntry>,
}

impl PatternTable {
    pub fn tuple(&self) -> &Tuple {
        &self.tuple
    }

    /// Number of distinct patterns, `T_{l,i}`.
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, key: PatternKey) -> Option<&PatternEntry> {
        self.patterns.get(&key)
    }

    /// Entries ordered by pattern key.
    pub fn entries(&self) -> Vec<(PatternKey, &PatternEntry)> {
        let mut v: Vec<_> = self.patterns.iter().map(|(&k, e)| (k, e)).collect();
        v.sort_unstable_by_key(|(k, _)| *k);
        v
    }
}

// Patterns are written in key order so snapshots do not depend on hash
// iteration order.
mod sorted_patterns {
    use std::collections::HashMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::PatternEntry;
    use crate::measurement::PatternKey;

    pub fn serialize<S: Serializer>(
        map: &HashMap<PatternKey, PatternEntry>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let mut entries: Vec<_> = map.iter().collect();
        entries.sort_unstable_by_key(|(k, _)| **k);
        entries.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<HashMap<PatternKey, PatternEntry>, D::Error> {
        let entries: Vec<(PatternKey, PatternEntry)> = Vec::deserialize(deserializer)?;
        Ok(entries.into_iter().collect())
    }
}

/// Aggregated, scaled membership scores `r̃(g)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector(pub Vec<f64>);

impl ScoreVector {
    /// Index of the largest score, ties going to the smallest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (g, &s) in self.0.iter().enumerate().skip(1) {
            if s > self.0[best] {
                best = g;
            }
        }
        best
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub scores: ScoreVector,
}

/// Pattern tables for levels `1..=L` and a `G`-class problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatModel {
    num_classes: usize,
    num_hyperplanes: usize,
    /// `levels[l - 1][i]` is the table of tuple `Λ_{l,i}`.
    levels: Vec<Vec<PatternTable>>,
}

// Tables up to this level are counted in a dense array of 2^l slots.
const DENSE_LEVEL: usize = 12;

impl FlatModel {
    /// Trains on the columns of `signs` with zero-based `labels` in
    /// `0..num_classes`, using the ensemble's tuples for levels
    /// `1..=levels`.
    pub fn train(
        signs: &SignMatrix,
        labels: &[usize],
        num_classes: usize,
        levels: usize,
        ensemble: &MeasurementEnsemble,
    ) -> Result<Self> {
        if signs.num_points() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if labels.len() != signs.num_points() {
            return Err(Error::DimensionMismatch {
                expected: signs.num_points(),
                found: labels.len(),
            });
        }
        if signs.num_measurements() != ensemble.num_hyperplanes() {
            return Err(Error::DimensionMismatch {
                expected: ensemble.num_hyperplanes(),
                found: signs.num_measurements(),
            });
        }
        if levels == 0 || levels > ensemble.num_levels() {
            return Err(Error::InvalidLevels {
                levels,
                hyperplanes: ensemble.num_hyperplanes(),
                max: ensemble.num_levels(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&b| b >= num_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: num_classes,
            });
        }

        let levels = (1..=levels)
            .map(|l| {
                ensemble
                    .tuples(l)
                    .par_iter()
                    .map(|tuple| count_patterns(signs, labels, num_classes, tuple))
                    .collect()
            })
            .collect();

        Ok(FlatModel {
            num_classes,
            num_hyperplanes: ensemble.num_hyperplanes(),
            levels,
        })
    }

    /// Predicts the class of one sign record and charges the work to
    /// `ledger`.
    ///
    /// A pattern never seen in training contributes nothing, but its lookup
    /// and update are still charged.
    pub fn classify(&self, q: SignSlice<'_>, ledger: &mut FlopLedger) -> Prediction {
        debug_assert!(q.len() >= self.num_hyperplanes);
        let g = self.num_classes as u64;

        ledger.measure(FlopCategory::Initialize, g);
        let mut scores = vec![0.0f64; self.num_classes];

        for (l, tables) in self.levels.iter().enumerate() {
            let level = l as u64 + 1;
            for table in tables {
                ledger.measure(FlopCategory::Identify, table.len() as u64 * level);
                if let Some(entry) = table.get(q.pattern(&table.tuple)) {
                    for (s, r) in scores.iter_mut().zip(&entry.memberships) {
                        *s += r;
                    }
                }
                ledger.measure(FlopCategory::Update, g);
            }
        }

        let divisor = self.num_tuples() as f64;
        for s in &mut scores {
            *s /= divisor;
        }
        ledger.measure(FlopCategory::Scale, g + 1);

        let scores = ScoreVector(scores);
        let class = scores.argmax();
        ledger.measure(FlopCategory::Argmax, g);
        Prediction { class, scores }
    }

    /// The model restricted to levels `1..=levels`, identical to training
    /// with that many levels on the same data and ensemble.
    pub fn truncated(&self, levels: usize) -> Result<Self> {
        if levels == 0 || levels > self.num_levels() {
            return Err(Error::InvalidLevels {
                levels,
                hyperplanes: self.num_hyperplanes,
                max: self.num_levels(),
            });
        }
        Ok(FlatModel {
            num_classes: self.num_classes,
            num_hyperplanes: self.num_hyperplanes,
            levels: self.levels[..levels].to_vec(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn num_hyperplanes(&self) -> usize {
        self.num_hyperplanes
    }

    /// Total number of tuples across all levels.
    pub fn num_tuples(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Tables of `level` (1-based).
    pub fn tables(&self, level: usize) -> &[PatternTable] {
        &self.levels[level - 1]
    }

    /// `T_{l,i}` for every tuple of `level`.
    pub fn table_sizes(&self, level: usize) -> impl Iterator<Item = usize> + '_ {
        self.tables(level).iter().map(PatternTable::len)
    }
}

fn count_patterns(
    signs: &SignMatrix,
    labels: &[usize],
    num_classes: usize,
    tuple: &Tuple,
) -> PatternTable {
    let keys = signs.columns().map(|q| q.pattern(tuple));
    let patterns = if tuple.level() <= DENSE_LEVEL {
        let mut dense = vec![0u32; (1usize << tuple.level()) * num_classes];
        for (key, &b) in keys.zip(labels) {
            dense[key as usize * num_classes + b] += 1;
        }
        dense
            .chunks_exact(num_classes)
            .enumerate()
            .filter(|(_, c)| c.iter().any(|&n| n > 0))
            .map(|(key, c)| (key as PatternKey, PatternEntry::from_counts(c.to_vec())))
            .collect()
    } else {
        let mut sparse: HashMap<PatternKey, Vec<u32>> = HashMap::new();
        for (key, &b) in keys.zip(labels) {
            sparse.entry(key).or_insert_with(|| vec![0; num_classes])[b] += 1;
        }
        sparse
            .into_iter()
            .map(|(key, c)| (key, PatternEntry::from_counts(c)))
            .collect()
    };
    PatternTable {
        tuple: tuple.clone(),
        patterns,
    }
}

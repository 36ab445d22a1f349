//! Test-time flop accounting.
//!
//! Classification charges its work into a [`FlopLedger`] under five
//! categories: initializing the score vector (`G`), identifying the sign
//! pattern of each tuple (`T·l`, charged as a worst-case linear scan of the
//! tuple's table), updating the scores (`G` per tuple), scaling (`G + 1`) and
//! the final argmax (`G`). The closed forms in this module predict the same
//! totals from a trained model's table sizes alone. Computing the signs
//! themselves is not charged.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::flat::FlatModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlopCategory {
    Initialize,
    Identify,
    Update,
    Scale,
    Argmax,
}

impl FlopCategory {
    pub const ALL: [FlopCategory; 5] = [
        FlopCategory::Initialize,
        FlopCategory::Identify,
        FlopCategory::Update,
        FlopCategory::Scale,
        FlopCategory::Argmax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlopCategory::Initialize => "initialize",
            FlopCategory::Identify => "identify",
            FlopCategory::Update => "update",
            FlopCategory::Scale => "scale",
            FlopCategory::Argmax => "argmax",
        }
    }
}

/// Per-category flop counters. The total is always the sum of the
/// categories.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopLedger {
    pub initialize: u64,
    pub identify: u64,
    pub update: u64,
    pub scale: u64,
    pub argmax: u64,
}

impl FlopLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn measure(&mut self, category: FlopCategory, amount: u64) {
        *self.slot(category) += amount;
    }

    pub fn get(&self, category: FlopCategory) -> u64 {
        match category {
            FlopCategory::Initialize => self.initialize,
            FlopCategory::Identify => self.identify,
            FlopCategory::Update => self.update,
            FlopCategory::Scale => self.scale,
            FlopCategory::Argmax => self.argmax,
        }
    }

    pub fn total(&self) -> u64 {
        FlopCategory::ALL.iter().map(|&c| self.get(c)).sum()
    }

    pub fn merge(&mut self, other: &FlopLedger) {
        for c in FlopCategory::ALL {
            self.measure(c, other.get(c));
        }
    }

    fn slot(&mut self, category: FlopCategory) -> &mut u64 {
        match category {
            FlopCategory::Initialize => &mut self.initialize,
            FlopCategory::Identify => &mut self.identify,
            FlopCategory::Update => &mut self.update,
            FlopCategory::Scale => &mut self.scale,
            FlopCategory::Argmax => &mut self.argmax,
        }
    }
}

impl AddAssign<&FlopLedger> for FlopLedger {
    fn add_assign(&mut self, rhs: &FlopLedger) {
        self.merge(rhs);
    }
}

impl AddAssign for FlopLedger {
    fn add_assign(&mut self, rhs: FlopLedger) {
        self.merge(&rhs);
    }
}

impl Add for FlopLedger {
    type Output = FlopLedger;

    fn add(mut self, rhs: FlopLedger) -> FlopLedger {
        self.merge(&rhs);
        self
    }
}

impl Sum for FlopLedger {
    fn sum<I: Iterator<Item = FlopLedger>>(iter: I) -> Self {
        iter.fold(FlopLedger::new(), Add::add)
    }
}

impl fmt::Display for FlopLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} flops (", self.total())?;
        for (k, c) in FlopCategory::ALL.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} {}", c.name(), self.get(*c))?;
        }
        write!(f, ")")
    }
}

/// The quantities the closed-form cost depends on, read off a trained model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostModel {
    pub num_classes: u64,
    /// `table_sizes[l - 1][i]` is `T_{l,i}`.
    pub table_sizes: Vec<Vec<u64>>,
}

impl CostModel {
    pub fn from_model(model: &FlatModel) -> Self {
        CostModel {
            num_classes: model.num_classes() as u64,
            table_sizes: (1..=model.num_levels())
                .map(|l| model.table_sizes(l).map(|t| t as u64).collect())
                .collect(),
        }
    }

    /// The predicted charge per category for one classification.
    pub fn breakdown(&self) -> FlopLedger {
        let g = self.num_classes;
        let identify = self
            .table_sizes
            .iter()
            .zip(1u64..)
            .map(|(sizes, l)| l * sizes.iter().sum::<u64>())
            .sum();
        let tuples: u64 = self.table_sizes.iter().map(|s| s.len() as u64).sum();
        FlopLedger {
            initialize: g,
            identify,
            update: tuples * g,
            scale: g + 1,
            argmax: g,
        }
    }

    /// `Σ_{l,i} T_{l,i}·l + (tuple count)·G + 3G + 1`.
    pub fn predicted(&self) -> u64 {
        self.breakdown().total()
    }
}

/// Closed-form flops for one flat classification with `model`.
pub fn predicted_flops_flat(model: &FlatModel) -> u64 {
    CostModel::from_model(model).predicted()
}

/// Closed-form flops for classifying through a sequence of node models, as
/// when a point descends a classification tree: each visited node adds its
/// own pattern-identification, update and `3G_c + 1` terms.
pub fn predicted_flops_path<'a>(models: impl IntoIterator<Item = &'a FlatModel>) -> u64 {
    models.into_iter().map(predicted_flops_flat).sum()
}

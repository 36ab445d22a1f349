//! Multiclass and hierarchical classification from one-bit measurements.
//!
//! Points are reduced to the signs they take against random hyperplanes
//! through the origin ([`measurement`]). A [`flat::FlatModel`] learns, for
//! many small tuples of hyperplanes, which classes occupy each cone the
//! tuple carves out, and classifies by summing that evidence. Larger tuples
//! ("levels") separate harder classes at a cost that grows with the number
//! of cones. A [`hierarchy::ClassificationTree`] spends few levels on easy
//! class groups and reserves deep budgets for the hard ones. Every
//! classification charges its work to a [`flops::FlopLedger`], which matches
//! the closed-form cost exactly.
//!
//! ```
//! use signtree::prelude::*;
//!
//! let (train, test) = gen_synthetic_2d(7);
//! let ensemble = MeasurementEnsemble::generate(2, 50, 3, 7).unwrap();
//! let q_train = ensemble.binarize(train.points.view()).unwrap();
//! let model = FlatModel::train(&q_train, &train.labels, 6, 3, &ensemble).unwrap();
//!
//! let q = ensemble.binarize_point(test.points.row(0)).unwrap();
//! let mut ledger = FlopLedger::new();
//! let prediction = model.classify(q.view(), &mut ledger);
//! assert!(prediction.class < 6);
//! assert_eq!(ledger.total(), predicted_flops_flat(&model));
//! ```

pub mod datasets;
mod error;
pub mod experiment;
pub mod flat;
pub mod flops;
pub mod hierarchy;
pub mod measurement;
mod seed;
pub mod snapshot;

pub use error::{Error, Result};
pub use seed::derive_seed;

pub mod prelude {
    pub use crate::datasets::{
        downsample_balanced, gen_synthetic_2d, gen_synthetic_3d, load_mnist, LabeledDataset,
        MnistSpec, Split,
    };
    pub use crate::flat::{membership_index, FlatModel, Prediction, ScoreVector};
    pub use crate::flops::{predicted_flops_flat, predicted_flops_path, FlopCategory, FlopLedger};
    pub use crate::hierarchy::{ClassGroup, ClassificationTree, NodeSpec, TreeSkeleton, TreeViolation};
    pub use crate::measurement::{extract_subpattern, MeasurementEnsemble, SignMatrix, SignVector, Tuple};
    pub use crate::{Error, Result};
}

//! Versioned JSON snapshots of trained models.
//!
//! A snapshot carries everything needed to classify raw points: the
//! hyperplanes and tuples, the pattern tables and the class names. Floats
//! are written in shortest round-trip form, so loading a snapshot restores
//! every value bit for bit.

use std::fs;
use std::path::Path;

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat::FlatModel;
use crate::flops::FlopLedger;
use crate::hierarchy::ClassificationTree;
use crate::measurement::MeasurementEnsemble;

pub const SNAPSHOT_FORMAT: &str = "signtree-model";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SnapshotModel {
    Flat {
        ensemble: MeasurementEnsemble,
        model: FlatModel,
    },
    Tree {
        tree: ClassificationTree,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format: String,
    pub version: u32,
    pub class_names: Vec<String>,
    pub model: SnapshotModel,
}

impl Snapshot {
    pub fn flat(ensemble: MeasurementEnsemble, model: FlatModel, class_names: Vec<String>) -> Self {
        Self::wrap(class_names, SnapshotModel::Flat { ensemble, model })
    }

    pub fn tree(tree: ClassificationTree, class_names: Vec<String>) -> Self {
        Self::wrap(class_names, SnapshotModel::Tree { tree })
    }

    fn wrap(class_names: Vec<String>, model: SnapshotModel) -> Self {
        Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            class_names,
            model,
        }
    }

    pub fn num_classes(&self) -> usize {
        match &self.model {
            SnapshotModel::Flat { model, .. } => model.num_classes(),
            SnapshotModel::Tree { tree } => tree.num_classes(),
        }
    }

    pub fn ensemble(&self) -> &MeasurementEnsemble {
        match &self.model {
            SnapshotModel::Flat { ensemble, .. } => ensemble,
            SnapshotModel::Tree { tree } => tree.ensemble(),
        }
    }

    /// Binarizes and classifies one raw point, returning the zero-based
    /// class.
    pub fn classify_point(&self, point: ArrayView1<'_, f64>, ledger: &mut FlopLedger) -> Result<usize> {
        let q = self.ensemble().binarize_point(point)?;
        Ok(match &self.model {
            SnapshotModel::Flat { model, .. } => model.classify(q.view(), ledger).class,
            SnapshotModel::Tree { tree } => tree.classify(q.view(), ledger).class,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Snapshot(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snapshot: Snapshot =
            serde_json::from_str(text).map_err(|e| Error::Snapshot(e.to_string()))?;
        if snapshot.format != SNAPSHOT_FORMAT {
            return Err(Error::Snapshot(format!("unknown format {:?}", snapshot.format)));
        }
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported version {} (expected {SNAPSHOT_VERSION})",
                snapshot.version
            )));
        }
        Ok(snapshot)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

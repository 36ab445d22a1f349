use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasets::{gen_synthetic_2d, gen_synthetic_3d, load_mnist, LabeledDataset, MnistSpec};
use crate::error::{Error, Result};
use crate::hierarchy::{NodeSpec, TreeSkeleton};
use crate::measurement::MAX_LEVEL;

/// An experiment as read from TOML. See `configs/` for complete examples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    /// Base seed; trial `t` uses `seed + t`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub dataset: DatasetSpec,
    pub measurement: MeasurementSpec,
    #[serde(default)]
    pub flat: Option<FlatSpec>,
    #[serde(default)]
    pub hierarchy: Option<HierarchySpec>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSpec {
    #[serde(rename = "synthetic-2d")]
    Synthetic2d,
    #[serde(rename = "synthetic-3d")]
    Synthetic3d,
    Mnist(MnistSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSpec {
    /// Hyperplane counts to sweep.
    pub m: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatSpec {
    pub levels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySpec {
    /// Node whose level budget is swept; its `levels` entry is ignored.
    pub sweep_node: String,
    pub sweep_levels: Vec<usize>,
    pub nodes: Vec<NodeSpec>,
}

impl HierarchySpec {
    /// The tree with the swept node at its largest budget, and that node's
    /// index.
    pub fn skeleton(&self, num_classes: usize) -> Result<(TreeSkeleton, usize)> {
        let mut skeleton = TreeSkeleton::from_specs(num_classes, &self.nodes)?;
        let node = skeleton.node_by_name(&self.sweep_node).ok_or_else(|| {
            Error::Config(format!("sweep node {:?} is not in the tree", self.sweep_node))
        })?;
        skeleton.nodes[node].levels = self.sweep_levels.iter().copied().max().unwrap_or(0);
        skeleton.validate()?;
        Ok((skeleton, node))
    }
}

const PRESET_2D: &str = include_str!("../../configs/synthetic_2d.toml");
const PRESET_3D: &str = include_str!("../../configs/synthetic_3d.toml");
const PRESET_MNIST: &str = include_str!("../../configs/mnist.toml");

/// Directory searched for MNIST files by the `mnist` preset.
pub const MNIST_DIR_ENV: &str = "SIGNTREE_MNIST_DIR";

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. Relative MNIST paths are resolved against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if let DatasetSpec::Mnist(spec) = &mut config.dataset {
            let base = path.parent().unwrap_or(Path::new("."));
            for p in [&mut spec.images, &mut spec.labels] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(config)
    }

    /// A built-in config (`2d`, `3d` or `mnist`) or a path to a TOML file.
    ///
    /// The `mnist` preset reads its files from `$SIGNTREE_MNIST_DIR`, or
    /// `data/mnist` relative to the working directory.
    pub fn load(name_or_path: &str) -> Result<Self> {
        let preset = match name_or_path {
            "2d" | "synthetic-2d" => Some(PRESET_2D),
            "3d" | "synthetic-3d" => Some(PRESET_3D),
            "mnist" => Some(PRESET_MNIST),
            _ => None,
        };
        match preset {
            Some(text) => {
                let mut config = Self::from_toml(text)?;
                if let DatasetSpec::Mnist(spec) = &mut config.dataset {
                    let dir = std::env::var_os(MNIST_DIR_ENV)
                        .map(PathBuf::from)
                        .unwrap_or_else(|| PathBuf::from("data/mnist"));
                    spec.images = dir.join(&spec.images);
                    spec.labels = dir.join(&spec.labels);
                }
                Ok(config)
            }
            None => Self::from_file(Path::new(name_or_path)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.measurement.m.is_empty() || self.measurement.m.contains(&0) {
            return fail("measurement.m must list positive hyperplane counts".into());
        }
        if self.flat.is_none() && self.hierarchy.is_none() {
            return fail("enable at least one of [flat] and [hierarchy]".into());
        }
        let min_m = self.measurement.m.iter().copied().min().unwrap_or(0);
        let check_levels = |what: &str, levels: &[usize]| -> Result<()> {
            if levels.is_empty() {
                return fail(format!("{what} must not be empty"));
            }
            if let Some(&l) = levels.iter().find(|&&l| l == 0 || l > MAX_LEVEL.min(min_m)) {
                return fail(format!(
                    "{what} contains {l}, outside 1..={}",
                    MAX_LEVEL.min(min_m)
                ));
            }
            Ok(())
        };
        if let Some(flat) = &self.flat {
            check_levels("flat.levels", &flat.levels)?;
        }
        if let Some(hier) = &self.hierarchy {
            check_levels("hierarchy.sweep_levels", &hier.sweep_levels)?;
            let nodes: Vec<usize> = hier.nodes.iter().map(|n| n.levels).collect();
            check_levels("hierarchy node levels", &nodes)?;
        }
        Ok(())
    }

    /// The train and test splits for `seed`: freshly generated for
    /// synthetic data, a seeded per-digit selection for MNIST.
    pub fn load_data(&self, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
        Ok(match &self.dataset {
            DatasetSpec::Synthetic2d => gen_synthetic_2d(seed),
            DatasetSpec::Synthetic3d => gen_synthetic_3d(seed),
            DatasetSpec::Mnist(spec) => load_mnist(spec, seed)?,
        })
    }

    pub fn num_classes(&self) -> usize {
        match &self.dataset {
            DatasetSpec::Synthetic2d | DatasetSpec::Synthetic3d => 6,
            DatasetSpec::Mnist(spec) => spec.digits.len(),
        }
    }
}

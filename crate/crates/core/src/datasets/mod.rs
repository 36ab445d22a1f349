//! Labeled datasets: the synthetic generators, the MNIST reader, balanced
//! downsampling and a plain delimited text format.

mod balance;
pub mod mnist;
pub mod synthetic;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use balance::{balanced_indices, downsample_balanced};
pub use mnist::{load_mnist, MnistSpec};
pub use synthetic::{gen_synthetic_2d, gen_synthetic_3d};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Points with zero-based class labels. `points` holds one point per row.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub points: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub split: Split,
}

impl LabeledDataset {
    pub fn new(
        points: Array2<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        split: Split,
    ) -> Result<Self> {
        if points.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: points.nrows(),
                found: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&b| b >= class_names.len()) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: class_names.len(),
            });
        }
        Ok(LabeledDataset {
            points,
            labels,
            class_names,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &b in &self.labels {
            counts[b] += 1;
        }
        counts
    }

    /// The rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            points: self.points.select(Axis(0), indices),
            labels: indices.iter().map(|&j| self.labels[j]).collect(),
            class_names: self.class_names.clone(),
            split: self.split,
        }
    }

    /// Every point multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> LabeledDataset {
        LabeledDataset {
            points: &self.points * factor,
            ..self.clone()
        }
    }

    /// One line per point: the one-based label, then the coordinates, comma
    /// separated. Lines starting with `#` are comments.
    pub fn to_delimited(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# split={:?} classes={}", self.split, self.class_names.join(";"));
        for (row, &label) in self.points.axis_iter(Axis(0)).zip(&self.labels) {
            let _ = write!(out, "{}", label + 1);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_delimited(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_delimited()).map_err(|e| Error::io(path, e))
    }
}

/// Points read from a delimited file. Label `0` marks an unlabeled point.
#[derive(Clone, Debug, PartialEq)]
pub struct DelimitedPoints {
    pub points: Array2<f64>,
    /// One-based labels as written in the file, `0` when unknown.
    pub labels: Vec<usize>,
}

impl DelimitedPoints {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut labels = Vec::new();
        let mut values = Vec::new();
        let mut dim = None;
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: k + 1,
                message,
            };
            let mut fields = line.split(',').map(str::trim);
            let label = fields
                .next()
                .unwrap_or_default()
                .parse::<usize>()
                .map_err(|e| err(format!("bad label: {e}")))?;
            let start = values.len();
            for f in fields {
                values.push(f.parse::<f64>().map_err(|e| err(format!("bad coordinate {f:?}: {e}")))?);
            }
            let n = values.len() - start;
            match dim {
                None if n == 0 => return Err(err("no coordinates".into())),
                None => dim = Some(n),
                Some(d) if d != n => return Err(err(format!("expected {d} coordinates, found {n}"))),
                Some(_) => {}
            }
            labels.push(label);
        }
        let dim = dim.unwrap_or(0);
        let points = Array2::from_shape_vec((labels.len(), dim), values)
            .expect("row lengths were checked");
        Ok(DelimitedPoints { points, labels })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

//! MNIST in IDX format.
//!
//! IDX files are big-endian: a magic number (2051 for images, 2049 for
//! labels), the item count, for images the row and column counts, then one
//! unsigned byte per pixel or label.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, Split};
use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels of all images back to back.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, k: usize) -> &[u8] {
        let size = self.rows * self.cols;
        &self.pixels[k * size..(k + 1) * size]
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Idx(format!("truncated header: {} bytes", bytes.len())))
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Idx(format!(
            "image file magic is {magic:#010x}, expected {IMAGE_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let need = 16 + count * rows * cols;
    if bytes.len() < need {
        return Err(Error::Idx(format!(
            "image file truncated: {} bytes, header promises {need}",
            bytes.len()
        )));
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: bytes[16..need].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::Idx(format!(
            "label file magic is {magic:#010x}, expected {LABEL_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let need = 8 + count;
    if bytes.len() < need {
        return Err(Error::Idx(format!(
            "label file truncated: {} bytes, header promises {need}",
            bytes.len()
        )));
    }
    Ok(bytes[8..need].to_vec())
}

/// Which digits to draw from an IDX image/label pair, and how many.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MnistSpec {
    pub images: PathBuf,
    pub labels: PathBuf,
    #[serde(default = "default_digits")]
    pub digits: Vec<u8>,
    #[serde(default = "default_train")]
    pub train_per_class: usize,
    #[serde(default = "default_test")]
    pub test_per_class: usize,
}

fn default_digits() -> Vec<u8> {
    vec![1, 2, 3, 4, 5]
}

fn default_train() -> usize {
    1000
}

fn default_test() -> usize {
    200
}

impl MnistSpec {
    /// The training files under `dir`, with the default digit selection.
    pub fn in_dir(dir: &Path) -> Self {
        MnistSpec {
            images: dir.join("train-images-idx3-ubyte"),
            labels: dir.join("train-labels-idx1-ubyte"),
            digits: default_digits(),
            train_per_class: default_train(),
            test_per_class: default_test(),
        }
    }
}

/// Draws disjoint train and test subsets per digit from one IDX pair.
///
/// For every digit, `train_per_class + test_per_class` images are sampled
/// without replacement under `seed`; the first `train_per_class` go to the
/// training split. Class `k` is `digits[k]`. Pixels stay raw in `[0, 255]`.
pub fn load_mnist(spec: &MnistSpec, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    let image_bytes = fs::read(&spec.images).map_err(|e| Error::io(&spec.images, e))?;
    let label_bytes = fs::read(&spec.labels).map_err(|e| Error::io(&spec.labels, e))?;
    let images = parse_idx_images(&image_bytes)?;
    let labels = parse_idx_labels(&label_bytes)?;
    select_digits(&images, &labels, spec, seed)
}

pub(crate) fn select_digits(
    images: &IdxImages,
    labels: &[u8],
    spec: &MnistSpec,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if images.count != labels.len() {
        return Err(Error::Idx(format!(
            "{} images but {} labels",
            images.count,
            labels.len()
        )));
    }
    let per_class = spec.train_per_class + spec.test_per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train_idx, mut test_idx) = (Vec::new(), Vec::new());
    let (mut train_lab, mut test_lab) = (Vec::new(), Vec::new());
    for (class, &digit) in spec.digits.iter().enumerate() {
        let pool: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] == digit).collect();
        if pool.len() < per_class {
            return Err(Error::NotEnoughSamples {
                class: digit.to_string(),
                requested: per_class,
                available: pool.len(),
            });
        }
        let picked = sample(&mut rng, pool.len(), per_class).into_vec();
        for (k, &p) in picked.iter().enumerate() {
            if k < spec.train_per_class {
                train_idx.push(pool[p]);
                train_lab.push(class);
            } else {
                test_idx.push(pool[p]);
                test_lab.push(class);
            }
        }
    }
    let names: Vec<String> = spec.digits.iter().map(u8::to_string).collect();
    let to_points = |idx: &[usize]| {
        let dim = images.rows * images.cols;
        Array2::from_shape_fn((idx.len(), dim), |(j, d)| images.image(idx[j])[d] as f64)
    };
    Ok((
        LabeledDataset::new(to_points(&train_idx), train_lab, names.clone(), Split::Train)?,
        LabeledDataset::new(to_points(&test_idx), test_lab, names, Split::Test)?,
    ))
}

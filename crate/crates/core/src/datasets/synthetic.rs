//! Seeded synthetic datasets with one easy and one hard group of classes.
//!
//! Hyperplanes pass through the origin, so only the direction of a point
//! matters to its signs. Both generators therefore arrange classes by
//! direction: easy classes sit in well separated directions, hard classes
//! interleave within a narrow cone where a single hyperplane says little and
//! intersections of several hyperplanes are needed to tell them apart.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{LabeledDataset, Split};
use crate::seed::derive_seed;

pub const NAMES_2D: [&str; 6] = ["red", "yellow", "green", "black", "blue", "cyan"];
pub const COUNTS_2D: [usize; 6] = [200, 200, 100, 100, 100, 100];

pub const NAMES_3D: [&str; 6] = ["arc-a", "arc-b", "cluster-1", "cluster-2", "cluster-3", "cluster-4"];
pub const COUNTS_3D: [usize; 6] = [100, 100, 200, 200, 200, 200];

// 2D geometry, angles in degrees.
const EASY_2D: [(f64, f64); 2] = [(110.0, 4.0), (200.0, 4.0)];
const EASY_2D_STD: f64 = 0.5;
const HARD_2D_START: f64 = -50.0;
const HARD_2D_STRIPE: f64 = 10.0;
const HARD_2D_STRIPES_PER_CLASS: usize = 2;
const HARD_2D_ANGLE_STD: f64 = 2.5;
const HARD_2D_RADIUS: (f64, f64) = (3.0, 0.3);

// 3D geometry.
const CLUSTERS_3D: [[f64; 3]; 4] = [[3.0, 0.0, 3.0], [-3.0, 0.0, 3.0], [0.0, 3.0, 3.0], [0.0, -3.0, 3.0]];
const CLUSTER_3D_STD: f64 = 0.12;
const ARC_3D_OFFSET: [f64; 3] = [0.0, 0.0, -6.0];
const ARC_3D_RADIUS: f64 = 1.5;
const ARC_3D_SPAN: f64 = 1.6 * PI;
const ARC_3D_NOISE: f64 = 0.15;

/// Six classes in the plane: `red` and `yellow` are isotropic Gaussian
/// clusters (200 train and 200 test points each); `green`, `black`, `blue`
/// and `cyan` are interleaved angular arcs (100 and 100 each).
pub fn gen_synthetic_2d(seed: u64) -> (LabeledDataset, LabeledDataset) {
    generate(seed, 2, &NAMES_2D, &COUNTS_2D, sample_2d)
}

/// Six classes in space: two interlocking circular arcs (100 train and 100
/// test points each) and four isotropic Gaussian clusters (200 and 200
/// each), the arcs being classes 0 and 1.
pub fn gen_synthetic_3d(seed: u64) -> (LabeledDataset, LabeledDataset) {
    generate(seed, 3, &NAMES_3D, &COUNTS_3D, sample_3d)
}

fn generate(
    seed: u64,
    dim: usize,
    names: &[&str],
    counts: &[usize],
    draw: fn(usize, &mut ChaCha8Rng) -> Vec<f64>,
) -> (LabeledDataset, LabeledDataset) {
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let split = |split: Split, stream: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream));
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (class, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                values.extend(draw(class, &mut rng));
                labels.push(class);
            }
        }
        let points = Array2::from_shape_vec((labels.len(), dim), values).expect("fixed dimension");
        LabeledDataset::new(points, labels, names.clone(), split).expect("labels in range")
    };
    (split(Split::Train, 0), split(Split::Test, 1))
}

fn sample_2d(class: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let unit = Normal::new(0.0, 1.0).unwrap();
    if let Some(&(angle, radius)) = EASY_2D.get(class) {
        let (s, c) = angle.to_radians().sin_cos();
        return vec![
            radius * c + EASY_2D_STD * unit.sample(rng),
            radius * s + EASY_2D_STD * unit.sample(rng),
        ];
    }
    let k = class - EASY_2D.len();
    let stripe = k + 4 * rng.random_range(0..HARD_2D_STRIPES_PER_CLASS);
    let center = HARD_2D_START + HARD_2D_STRIPE * (stripe as f64 + 0.5);
    let angle = (center + HARD_2D_ANGLE_STD * unit.sample(rng)).to_radians();
    let radius = HARD_2D_RADIUS.0 + HARD_2D_RADIUS.1 * unit.sample(rng);
    vec![radius * angle.cos(), radius * angle.sin()]
}

fn sample_3d(class: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut noise = |std: f64| std * unit.sample(rng);
    if class >= 2 {
        let c = CLUSTERS_3D[class - 2];
        return c.iter().map(|&v| v + noise(CLUSTER_3D_STD)).collect();
    }
    let phi = -ARC_3D_SPAN / 2.0 + ARC_3D_SPAN * rng.random::<f64>();
    let (s, c) = phi.sin_cos();
    // Arc A lies in the xy-plane around the offset; arc B in the xz-plane,
    // shifted by one radius along x so the two rings link.
    let local = if class == 0 {
        [ARC_3D_RADIUS * c, ARC_3D_RADIUS * s, 0.0]
    } else {
        [ARC_3D_RADIUS * (1.0 - c), 0.0, ARC_3D_RADIUS * s]
    };
    let mut noise = |std: f64| std * unit.sample(rng);
    (0..3)
        .map(|d| ARC_3D_OFFSET[d] + local[d] + noise(ARC_3D_NOISE))
        .collect()
}

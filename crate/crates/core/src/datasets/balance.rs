use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Chooses points so that every group (a list of zero-based classes) keeps
/// as many points as the smallest group.
///
/// Groups already at that size are kept whole. A larger group is sampled
/// uniformly without replacement, spreading its quota as evenly as possible
/// over its classes. Points whose class is in no group are dropped. Returns
/// ascending indices into `labels`.
pub fn balanced_indices<R: Rng + ?Sized>(
    labels: &[usize],
    groups: &[Vec<usize>],
    rng: &mut R,
) -> Result<Vec<usize>> {
    let per_class = |class: usize| -> Vec<usize> {
        (0..labels.len()).filter(|&j| labels[j] == class).collect()
    };
    let members: Vec<Vec<Vec<usize>>> = groups
        .iter()
        .map(|g| g.iter().map(|&c| per_class(c)).collect())
        .collect();
    let totals: Vec<usize> = members
        .iter()
        .map(|g| g.iter().map(Vec::len).sum())
        .collect();
    if let Some(k) = totals.iter().position(|&t| t == 0) {
        return Err(Error::Config(format!("group {} has no points", k + 1)));
    }
    let target = totals.iter().copied().min().unwrap_or(0);

    let mut keep = Vec::with_capacity(target * groups.len());
    for (classes, &total) in members.iter().zip(&totals) {
        if total == target {
            keep.extend(classes.iter().flatten().copied());
            continue;
        }
        let mut quota = vec![0usize; classes.len()];
        let mut left = target;
        while left > 0 {
            for (q, pool) in quota.iter_mut().zip(classes) {
                if left > 0 && *q < pool.len() {
                    *q += 1;
                    left -= 1;
                }
            }
        }
        for (pool, &q) in classes.iter().zip(&quota) {
            keep.extend(sample(rng, pool.len(), q).into_iter().map(|k| pool[k]));
        }
    }
    keep.sort_unstable();
    Ok(keep)
}

/// Downsamples `dataset` so the given class groups have equal totals.
pub fn downsample_balanced(
    dataset: &LabeledDataset,
    groups: &[Vec<usize>],
    seed: u64,
) -> Result<LabeledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = balanced_indices(&dataset.labels, groups, &mut rng)?;
    Ok(dataset.subset(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Split;
    use ndarray::Array2;

    fn dataset(counts: &[usize]) -> LabeledDataset {
        let labels: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect();
        let points = Array2::from_shape_fn((labels.len(), 1), |(j, _)| j as f64);
        LabeledDataset::new(
            points,
            labels,
            (0..counts.len()).map(|c| c.to_string()).collect(),
            Split::Train,
        )
        .unwrap()
    }

    #[test]
    fn one_versus_rest_is_stratified() {
        let ds = dataset(&[1000, 1000, 1000, 1000, 1000]);
        let out = downsample_balanced(&ds, &[vec![0], vec![1, 2, 3, 4]], 3).unwrap();
        assert_eq!(out.class_counts(), vec![1000, 250, 250, 250, 250]);
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let ds = dataset(&[40, 20, 20]);
        let out = downsample_balanced(&ds, &[vec![0], vec![1, 2]], 9).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn min_rule() {
        let ds = dataset(&[10, 7]);
        let out = downsample_balanced(&ds, &[vec![0], vec![1]], 1).unwrap();
        assert_eq!(out.class_counts(), vec![7, 7]);
    }

    #[test]
    fn uneven_classes_fill_from_the_others() {
        let ds = dataset(&[9, 1, 30]);
        let out = downsample_balanced(&ds, &[vec![0], vec![1, 2]], 1).unwrap();
        assert_eq!(out.class_counts(), vec![9, 1, 8]);
    }

    #[test]
    fn seeded_and_empty_group() {
        let ds = dataset(&[50, 200]);
        let a = downsample_balanced(&ds, &[vec![0], vec![1]], 4).unwrap();
        let b = downsample_balanced(&ds, &[vec![0], vec![1]], 4).unwrap();
        assert_eq!(a, b);
        let c = downsample_balanced(&ds, &[vec![0], vec![1]], 5).unwrap();
        assert_ne!(a, c);
        assert!(downsample_balanced(&ds, &[vec![0], vec![2]], 4).is_err());
    }
}

use signtree::datasets::{gen_synthetic_2d, gen_synthetic_3d, LabeledDataset};
use signtree::experiment::evaluate_flat;
use signtree::flat::FlatModel;
use signtree::measurement::MeasurementEnsemble;

/// Accuracy of a one-level flat classifier with 50 hyperplanes, after
/// mapping every label through `relabel`.
fn one_level_accuracy(
    train: &LabeledDataset,
    test: &LabeledDataset,
    relabel: impl Fn(usize) -> usize,
    classes: usize,
    seed: u64,
) -> f64 {
    let ensemble = MeasurementEnsemble::generate(train.dim(), 50, 1, seed).unwrap();
    let train_labels: Vec<usize> = train.labels.iter().map(|&b| relabel(b)).collect();
    let test_labels: Vec<usize> = test.labels.iter().map(|&b| relabel(b)).collect();
    let q_train = ensemble.binarize(train.points.view()).unwrap();
    let q_test = ensemble.binarize(test.points.view()).unwrap();
    let model = FlatModel::train(&q_train, &train_labels, classes, 1, &ensemble).unwrap();
    evaluate_flat(&model, &q_test).accuracy(&test_labels)
}

#[test]
fn two_dim_easy_group_separates_at_one_level() {
    for seed in 1..=5 {
        let (train, test) = gen_synthetic_2d(seed);
        let binary = one_level_accuracy(&train, &test, |b| usize::from(b >= 2), 2, seed);
        let six = one_level_accuracy(&train, &test, |b| b, 6, seed);
        assert!(binary >= 0.95, "seed {seed}: binary accuracy {binary}");
        assert!(six < 0.90, "seed {seed}: six-class accuracy {six}");
    }
}

#[test]
fn three_dim_arcs_separate_from_clusters_at_one_level() {
    for seed in 1..=5 {
        let (train, test) = gen_synthetic_3d(seed);
        assert_eq!(train.dim(), 3);
        let binary = one_level_accuracy(&train, &test, |b| usize::from(b >= 2), 2, seed);
        assert!(binary >= 0.95, "seed {seed}: binary accuracy {binary}");
    }
}

fn class_moments(data: &LabeledDataset, class: usize, dim: usize) -> (f64, f64, f64) {
    let values: Vec<f64> = data
        .labels
        .iter()
        .zip(data.points.rows())
        .filter(|(&b, _)| b == class)
        .map(|(_, x)| x[dim])
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var, n)
}

fn assert_same_distribution(train: &LabeledDataset, test: &LabeledDataset) {
    for class in 0..train.num_classes() {
        for dim in 0..train.dim() {
            let (m1, v1, n1) = class_moments(train, class, dim);
            let (m2, v2, n2) = class_moments(test, class, dim);
            let se = (v1 / n1 + v2 / n2).sqrt();
            assert!(
                (m1 - m2).abs() <= 3.0 * se,
                "class {class} coordinate {dim}: train mean {m1}, test mean {m2}, se {se}"
            );
        }
    }
}

#[test]
fn train_and_test_share_per_class_means() {
    let (train, test) = gen_synthetic_2d(1);
    assert_same_distribution(&train, &test);
    let (train, test) = gen_synthetic_3d(1);
    assert_same_distribution(&train, &test);
}

//! Flat classification of MNIST digits 1-5 at m = 500 and 10 levels.
//!
//! Usage: cargo run --release --example mnist_baseline [MNIST_DIR]
//! The directory must hold train-images-idx3-ubyte and
//! train-labels-idx1-ubyte (default: data/mnist).

use std::path::PathBuf;

use signtree::datasets::{load_mnist, MnistSpec};
use signtree::experiment::evaluate_flat;
use signtree::flat::FlatModel;
use signtree::measurement::MeasurementEnsemble;

fn main() -> signtree::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "data/mnist".into());
    let seed = 1;
    let (train, test) = load_mnist(&MnistSpec::in_dir(&dir), seed)?;
    println!("{} train / {} test images of dimension {}", train.len(), test.len(), train.dim());

    let ensemble = MeasurementEnsemble::generate(train.dim(), 500, 10, seed)?;
    let q_train = ensemble.binarize(train.points.view())?;
    let q_test = ensemble.binarize(test.points.view())?;
    let model = FlatModel::train(&q_train, &train.labels, train.num_classes(), 10, &ensemble)?;
    let eval = evaluate_flat(&model, &q_test);

    println!("overall accuracy {:.4}", eval.accuracy(&test.labels));
    for (name, acc) in test.class_names.iter().zip(eval.per_class_accuracy(&test.labels, 5)) {
        println!("  digit {name}: {acc:.3}");
    }
    println!("{:.0} flops per test point", eval.mean_measured());
    Ok(())
}

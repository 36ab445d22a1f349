//! Train a flat classifier on the 2D synthetic data and watch accuracy grow
//! with the number of levels.

use signtree::datasets::gen_synthetic_2d;
use signtree::experiment::evaluate_flat;
use signtree::flat::FlatModel;
use signtree::measurement::MeasurementEnsemble;

fn main() -> signtree::Result<()> {
    let seed = 7;
    let (train, test) = gen_synthetic_2d(seed);
    let ensemble = MeasurementEnsemble::generate(train.dim(), 50, 6, seed)?;
    let q_train = ensemble.binarize(train.points.view())?;
    let q_test = ensemble.binarize(test.points.view())?;

    // Train once at the deepest level; shallower models are prefixes.
    let full = FlatModel::train(&q_train, &train.labels, train.num_classes(), 6, &ensemble)?;
    println!("levels  accuracy  flops/point  per-class");
    for levels in 1..=6 {
        let model = full.truncated(levels)?;
        let eval = evaluate_flat(&model, &q_test);
        let per_class: Vec<String> = eval
            .per_class_accuracy(&test.labels, test.num_classes())
            .iter()
            .map(|a| format!("{a:.2}"))
            .collect();
        println!(
            "{levels:>6}  {:>8.3}  {:>11.0}  {}",
            eval.accuracy(&test.labels),
            eval.mean_measured(),
            per_class.join(" ")
        );
    }

    let q = ensemble.binarize_point(test.points.row(0))?;
    let prediction = full.classify(q.view(), &mut Default::default());
    println!(
        "first test point: true {}, predicted {}, scores {:.3?}",
        test.class_names[test.labels[0]],
        test.class_names[prediction.class],
        prediction.scores.as_slice()
    );
    Ok(())
}

//! Save a trained tree, load it back and classify raw points with it.

use signtree::datasets::gen_synthetic_2d;
use signtree::experiment::ExperimentConfig;
use signtree::flops::FlopLedger;
use signtree::hierarchy::ClassificationTree;
use signtree::measurement::MeasurementEnsemble;
use signtree::snapshot::Snapshot;

fn main() -> signtree::Result<()> {
    let config = ExperimentConfig::load("2d")?;
    let (skeleton, _) = config.hierarchy.as_ref().expect("preset has a tree").skeleton(6)?;
    let (train, test) = gen_synthetic_2d(config.seed);
    let ensemble = MeasurementEnsemble::generate(2, 50, skeleton.max_levels(), config.seed)?;
    let q = ensemble.binarize(train.points.view())?;
    let tree = ClassificationTree::train(&q, &train.labels, skeleton, &ensemble, config.seed)?;

    let path = std::env::temp_dir().join("signtree-tree.json");
    Snapshot::tree(tree, train.class_names.clone()).save(&path)?;
    let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("wrote {} ({size} bytes)", path.display());

    let snapshot = Snapshot::load(&path)?;
    let mut ledger = FlopLedger::new();
    let mut correct = 0;
    for (point, &label) in test.points.rows().into_iter().zip(&test.labels) {
        correct += usize::from(snapshot.classify_point(point, &mut ledger)? == label);
    }
    println!(
        "reloaded tree: {correct}/{} correct, {:.1} flops per point",
        test.len(),
        ledger.total() as f64 / test.len() as f64
    );
    Ok(())
}

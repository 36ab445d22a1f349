//! Per-category flop counts for one classification, next to the closed
//! form.

use signtree::datasets::gen_synthetic_3d;
use signtree::flat::FlatModel;
use signtree::flops::{CostModel, FlopCategory, FlopLedger};
use signtree::measurement::MeasurementEnsemble;

fn main() -> signtree::Result<()> {
    let (train, test) = gen_synthetic_3d(1);
    let ensemble = MeasurementEnsemble::generate(3, 20, 4, 1)?;
    let q_train = ensemble.binarize(train.points.view())?;
    let model = FlatModel::train(&q_train, &train.labels, 6, 4, &ensemble)?;

    let mut ledger = FlopLedger::new();
    let q = ensemble.binarize_point(test.points.row(0))?;
    model.classify(q.view(), &mut ledger);

    let predicted = CostModel::from_model(&model).breakdown();
    println!("{:<10} {:>9} {:>9}", "category", "measured", "predicted");
    for category in FlopCategory::ALL {
        println!("{:<10} {:>9} {:>9}", category.name(), ledger.get(category), predicted.get(category));
    }
    println!("{ledger}");

    for level in 1..=model.num_levels() {
        let sizes: Vec<usize> = model.table_sizes(level).collect();
        println!("level {level}: patterns per tuple {sizes:?} (at most {})", 1 << level);
    }
    Ok(())
}

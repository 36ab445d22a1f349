//! Sign measurements, hyperplane tuples and the pattern keys they produce.

use ndarray::array;
use signtree::measurement::{extract_subpattern, MeasurementEnsemble};

fn main() -> signtree::Result<()> {
    let ensemble = MeasurementEnsemble::generate(2, 6, 3, 42)?;
    let points = array![[1.0, 0.5], [-2.0, 0.1], [10.0, 5.0]];
    let q = ensemble.binarize(points.view())?;

    for (j, column) in q.columns().enumerate() {
        let signs: String = (0..column.len()).map(|i| if column.bit(i) { '+' } else { '-' }).collect();
        println!("point {j}: {signs}");
    }
    // The first and last points differ only by a positive factor.
    assert_eq!(q.column(0).to_vector(), q.column(2).to_vector());

    for level in 1..=ensemble.num_levels() {
        println!("level {level}:");
        for tuple in ensemble.tuples(level) {
            let keys: Vec<String> = q
                .columns()
                .map(|col| format!("{:0width$b}", extract_subpattern(col, tuple), width = level))
                .collect();
            println!("  hyperplanes {:?} -> patterns {}", tuple.indices(), keys.join(" "));
        }
    }
    Ok(())
}

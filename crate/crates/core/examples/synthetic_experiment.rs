//! Flat vs. hierarchical on the 3D preset with three trials, written to CSV.
//!
//! Usage: cargo run --release --example synthetic_experiment [2d|3d|PATH]

use signtree::experiment::{emit_csv, run_experiment, ExperimentConfig, Method};

fn main() -> signtree::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "3d".into());
    let mut config = ExperimentConfig::load(&name)?;
    config.trials = 3;
    let result = run_experiment(&config)?;

    let out = std::env::temp_dir().join(format!("signtree-{}.csv", config.name));
    emit_csv(&result.rows, &out)?;
    println!("{} rows in {}", result.rows.len(), out.display());

    let sweep = config.hierarchy.as_ref().map(|h| h.sweep_levels.clone()).unwrap_or_default();
    for &m in &config.measurement.m {
        println!("m = {m}");
        for &levels in &sweep {
            let (Some(flat), Some(hier)) =
                (result.summary_for(Method::Flat, m, levels), result.summary_for(Method::Hier, m, levels))
            else {
                continue;
            };
            println!(
                "  L={levels}: flat {:.3} @ {:>8.0}   hier {:.3} @ {:>8.0}",
                flat.accuracy_mean, flat.flops_mean, hier.accuracy_mean, hier.flops_mean
            );
        }
    }
    Ok(())
}

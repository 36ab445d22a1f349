use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use signtree::datasets::DelimitedPoints;
use signtree::experiment::{emit_csv, emit_summary_csv, run_experiment, DatasetSpec, ExperimentConfig};
use signtree::flat::FlatModel;
use signtree::flops::FlopLedger;
use signtree::hierarchy::ClassificationTree;
use signtree::measurement::MeasurementEnsemble;
use signtree::snapshot::Snapshot;

#[derive(Parser)]
#[command(name = "signtree", version, about = "Classification from one-bit random hyperplane measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a flat model or a tree and save it as a snapshot.
    Train(TrainArgs),
    /// Label the points of a delimited file with a saved snapshot.
    Classify(ClassifyArgs),
    /// Run a flat vs. hierarchical comparison and write its CSV.
    Experiment(ExperimentArgs),
    /// Write the train and test splits of a synthetic dataset.
    GenData(GenDataArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Flat,
    Hier,
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Preset name (2d, 3d, mnist) or path to an experiment TOML file.
    #[arg(long)]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Snapshot file to write.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "flat")]
    method: MethodArg,
    /// Hyperplane count; defaults to the largest in the config.
    #[arg(long)]
    m: Option<usize>,
    /// Flat level count, or the swept node's level budget for a tree;
    /// defaults to the largest in the config's sweep.
    #[arg(long)]
    levels: Option<usize>,
    /// Train on a delimited file (one-based labels) instead of the config's
    /// dataset.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Delimited points; label 0 marks an unlabeled point.
    #[arg(long)]
    input: PathBuf,
    /// Predictions CSV; printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Per-trial CSV; defaults to the config's `output`, then
    /// `results/<name>.csv`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the per-setting means and standard deviations here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(clap::Args)]
struct GenDataArgs {
    /// A synthetic preset (2d, 3d) or a config using a synthetic dataset.
    #[arg(long)]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving train.csv and test.csv.
    #[arg(long, default_value = ".")]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => train(args),
        Command::Classify(args) => classify(args),
        Command::Experiment(args) => experiment(args),
        Command::GenData(args) => gen_data(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(name: &str, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(name).with_context(|| format!("loading config {name:?}"))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn train(args: TrainArgs) -> Result<()> {
    let config = load_config(&args.config, args.seed)?;
    let num_classes = config.num_classes();
    let (points, labels, class_names) = match &args.input {
        Some(path) => {
            let data = DelimitedPoints::read(path)?;
            let mut labels = Vec::with_capacity(data.labels.len());
            for (k, &label) in data.labels.iter().enumerate() {
                if label == 0 || label > num_classes {
                    bail!("point {} has label {label}; training needs labels 1..={num_classes}", k + 1);
                }
                labels.push(label - 1);
            }
            let names = (1..=num_classes).map(|c| c.to_string()).collect();
            (data.points, labels, names)
        }
        None => {
            let (train, _) = config.load_data(config.seed)?;
            (train.points, train.labels, train.class_names)
        }
    };
    let m = args
        .m
        .or_else(|| config.measurement.m.iter().copied().max())
        .context("config lists no hyperplane counts")?;

    let snapshot = match args.method {
        MethodArg::Flat => {
            let levels = args
                .levels
                .or_else(|| config.flat.as_ref().and_then(|f| f.levels.iter().copied().max()))
                .context("pass --levels or give the config a [flat] section")?;
            let ensemble = MeasurementEnsemble::generate(points.ncols(), m, levels, config.seed)?;
            let q = ensemble.binarize(points.view())?;
            let model = FlatModel::train(&q, &labels, num_classes, levels, &ensemble)?;
            Snapshot::flat(ensemble, model, class_names)
        }
        MethodArg::Hier => {
            let hier = config.hierarchy.as_ref().context("config has no [hierarchy] section")?;
            let (mut skeleton, node) = hier.skeleton(num_classes)?;
            if let Some(levels) = args.levels {
                skeleton.nodes[node].levels = levels;
                skeleton.validate()?;
            }
            let ensemble =
                MeasurementEnsemble::generate(points.ncols(), m, skeleton.max_levels(), config.seed)?;
            let q = ensemble.binarize(points.view())?;
            let tree = ClassificationTree::train(&q, &labels, skeleton, &ensemble, config.seed)?;
            Snapshot::tree(tree, class_names)
        }
    };
    snapshot.save(&args.output)?;
    eprintln!(
        "trained on {} points (m = {m}); snapshot written to {}",
        labels.len(),
        args.output.display()
    );
    Ok(())
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let snapshot = Snapshot::load(&args.model)?;
    let data = DelimitedPoints::read(&args.input)?;
    let num_classes = snapshot.num_classes();
    if let Some((k, &label)) = data.labels.iter().enumerate().find(|(_, &l)| l > num_classes) {
        bail!(
            "{}: point {} has label {label}, but the model knows classes 1..={num_classes}",
            args.input.display(),
            k + 1
        );
    }

    let mut out = String::from("index,label,predicted,flops\n");
    let mut total = FlopLedger::new();
    let (mut labeled, mut correct) = (0usize, 0usize);
    for (k, point) in data.points.outer_iter().enumerate() {
        let mut ledger = FlopLedger::new();
        let predicted = snapshot.classify_point(point, &mut ledger)? + 1;
        let label = data.labels[k];
        if label > 0 {
            labeled += 1;
            correct += usize::from(label == predicted);
        }
        let _ = writeln!(out, "{},{label},{predicted},{}", k + 1, ledger.total());
        total += ledger;
    }

    match &args.output {
        Some(path) => fs::write(path, &out).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{out}"),
    }
    let points = data.labels.len().max(1) as f64;
    eprintln!("{} points, {:.1} flops per point", data.labels.len(), total.total() as f64 / points);
    if labeled > 0 {
        eprintln!("accuracy {:.4} on {labeled} labeled points", correct as f64 / labeled as f64);
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let mut config = load_config(&args.config, args.seed)?;
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    let output = args
        .output
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| default_output(&config));
    let result = run_experiment(&config)?;
    emit_csv(&result.rows, &output)?;
    if let Some(path) = &args.summary {
        emit_summary_csv(&result.summary, path)?;
    }

    println!(
        "{:<6} {:>5} {:>6} {:>18} {:>14}",
        "method", "m", "levels", "accuracy", "flops/point"
    );
    for s in &result.summary {
        println!(
            "{:<6} {:>5} {:>6} {:>9.4} ± {:<6.4} {:>14.1}",
            s.method.to_string(),
            s.m,
            s.levels,
            s.accuracy_mean,
            s.accuracy_std,
            s.flops_mean
        );
    }
    eprintln!("{} rows written to {}", result.rows.len(), output.display());
    Ok(())
}

fn default_output(config: &ExperimentConfig) -> PathBuf {
    let name = if config.name.is_empty() { "experiment" } else { &config.name };
    Path::new("results").join(format!("{name}.csv"))
}

fn gen_data(args: GenDataArgs) -> Result<()> {
    let config = load_config(&args.config, args.seed)?;
    if matches!(config.dataset, DatasetSpec::Mnist(_)) {
        bail!("gen-data only writes synthetic datasets");
    }
    let (train, test) = config.load_data(config.seed)?;
    fs::create_dir_all(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    for (name, data) in [("train.csv", &train), ("test.csv", &test)] {
        let path = args.output.join(name);
        data.write_delimited(&path)?;
        eprintln!("{} points written to {}", data.len(), path.display());
    }
    Ok(())
}

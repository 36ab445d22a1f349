//! Acceptance checks, one line per criterion. Exits nonzero if any fails.
//!
//! The MNIST criteria read the IDX training files from `$SIGNTREE_MNIST_DIR`
//! or `data/mnist` at the workspace root; the README says where to get them.

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use signtree::datasets::{gen_synthetic_2d, gen_synthetic_3d, MnistSpec};
use signtree::experiment::{
    rows_to_csv, run_experiment, DatasetSpec, ExperimentConfig, ExperimentResult, Method,
    MNIST_DIR_ENV,
};
use signtree::flat::{membership_index, FlatModel};
use signtree::flops::{predicted_flops_flat, FlopLedger};
use signtree::hierarchy::{ClassificationTree, TreeSkeleton};
use signtree::measurement::{MeasurementEnsemble, SignMatrix};

const EXACT: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: &[String], ok: String) -> Self {
        if failures.is_empty() {
            Outcome { pass: true, detail: ok }
        } else {
            let shown: Vec<&str> = failures.iter().take(8).map(String::as_str).collect();
            let more = failures.len().saturating_sub(shown.len());
            let mut detail = shown.join("; ");
            if more > 0 {
                detail.push_str(&format!("; and {more} more"));
            }
            Outcome { pass: false, detail }
        }
    }

    fn fail(detail: String) -> Self {
        Outcome { pass: false, detail }
    }
}

struct Report {
    failed: usize,
}

impl Report {
    fn run(&mut self, id: &str, title: &str, budget: Duration, check: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if elapsed > budget {
            outcome.pass = false;
            outcome.detail = format!("took {elapsed:.1?}, budget {budget:?}; {}", outcome.detail);
        }
        self.record(id, title, elapsed, outcome);
    }

    fn record(&mut self, id: &str, title: &str, elapsed: Duration, outcome: Outcome) {
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            self.failed += 1;
        }
        println!("{status} {id} {title} [{:.2}s]: {}", elapsed.as_secs_f64(), outcome.detail);
    }
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    let secs = Duration::from_secs;

    report.run("C1", "membership index suite", secs(1), c1_membership);
    let mut flop_failures = Vec::new();
    let mut flop_checked = 0usize;
    report.run("C2", "brute-force oracle equivalence", secs(30), || {
        c2_oracle(&mut flop_failures, &mut flop_checked)
    });
    report.run("C3", "degenerate tree equals flat", secs(60), || {
        c3_degenerate(&mut flop_failures, &mut flop_checked)
    });
    report.run("C4", "flop model exactness", secs(60), || {
        c4_flops(&mut flop_failures, &mut flop_checked)
    });
    report.run("C5", "2D experiment", secs(120), || c5_c6_synthetic("2d"));
    report.run("C6", "3D experiment", secs(120), || c5_c6_synthetic("3d"));
    report.run("C9", "determinism and scale invariance", secs(120), c9_determinism);

    match mnist_config() {
        Ok(config) => {
            let start = Instant::now();
            let result = run_experiment(&config);
            let elapsed = start.elapsed();
            match result {
                Ok(result) => {
                    let mut c7 = c7_mnist_flat(&result);
                    if elapsed > secs(20 * 60) {
                        c7.pass = false;
                        c7.detail = format!("took {elapsed:.1?}; {}", c7.detail);
                    }
                    report.record("C7", "MNIST flat baseline", elapsed, c7);
                    report.record("C8", "MNIST hierarchical savings", elapsed, c8_mnist_hier(&result));
                }
                Err(e) => {
                    report.record("C7", "MNIST flat baseline", elapsed, Outcome::fail(e.to_string()));
                    report.record("C8", "MNIST hierarchical savings", elapsed, Outcome::fail(e.to_string()));
                }
            }
        }
        Err(message) => {
            report.record("C7", "MNIST flat baseline", Duration::ZERO, Outcome::fail(message.clone()));
            report.record("C8", "MNIST hierarchical savings", Duration::ZERO, Outcome::fail(message));
        }
    }

    if report.failed == 0 {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", report.failed);
        ExitCode::FAILURE
    }
}

// ---- C1 -------------------------------------------------------------------

fn c1_membership() -> Outcome {
    let mut failures = Vec::new();
    let mut expect = |counts: &[u32], g: usize, want: f64| {
        let got = membership_index(counts, g).unwrap();
        if (got - want).abs() > EXACT {
            failures.push(format!("r({counts:?}, {}) = {got}, expected {want}", g + 1));
        }
    };
    for classes in 1..=8u32 {
        for g in 0..classes as usize {
            let mut pure = vec![0; classes as usize];
            pure[g] = 17;
            expect(&pure, g, f64::from(classes - 1));
            expect(&vec![9; classes as usize], g, 0.0);
        }
    }
    expect(&[3, 1, 0], 0, 0.9375);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases = 0;
    while cases < 10_000 {
        let classes = rng.random_range(1..=10);
        let counts: Vec<u32> = (0..classes).map(|_| rng.random_range(0..50)).collect();
        if counts.iter().all(|&c| c == 0) {
            continue;
        }
        cases += 1;
        for g in 0..classes {
            let r = membership_index(&counts, g).unwrap();
            let upper = (classes - 1) as f64;
            if !(r >= -EXACT && r <= upper + EXACT) {
                failures.push(format!("r({counts:?}, {}) = {r} outside [0, {upper}]", g + 1));
            }
        }
    }
    Outcome::new(
        &failures,
        format!("fixed cases exact, {cases} random count vectors within [0, G-1]"),
    )
}

// ---- C2 -------------------------------------------------------------------

/// Signs by explicit dot products, +1 for a zero product.
fn naive_signs(normals: ArrayView2<'_, f64>, x: &[f64]) -> Vec<bool> {
    (0..normals.nrows())
        .map(|i| {
            let mut dot = 0.0;
            for (k, &v) in x.iter().enumerate() {
                dot += normals[[i, k]] * v;
            }
            dot >= 0.0
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

struct Oracle<'a> {
    ensemble: &'a MeasurementEnsemble,
    levels: usize,
    classes: usize,
    train_signs: Vec<Vec<bool>>,
    labels: Vec<usize>,
}

impl Oracle<'_> {
    fn restrict(signs: &[bool], indices: &[u32]) -> Vec<bool> {
        indices.iter().map(|&i| signs[i as usize]).collect()
    }

    /// Aggregated scores and predicted class, scanning the training set for
    /// every tuple.
    fn classify(&self, signs: &[bool]) -> (Vec<f64>, usize) {
        let g = self.classes;
        let mut scores = vec![0.0; g];
        let mut tuples = 0usize;
        for level in 1..=self.levels {
            for tuple in self.ensemble.tuples(level) {
                tuples += 1;
                let target = Self::restrict(signs, tuple.indices());
                let mut counts = vec![0.0f64; g];
                for (train, &label) in self.train_signs.iter().zip(&self.labels) {
                    if Self::restrict(train, tuple.indices()) == target {
                        counts[label] += 1.0;
                    }
                }
                let total: f64 = counts.iter().sum();
                if total == 0.0 {
                    continue;
                }
                for c in 0..g {
                    let spread: f64 = counts.iter().map(|&p| (counts[c] - p).abs()).sum();
                    scores[c] += counts[c] / total * spread / total;
                }
            }
        }
        for s in &mut scores {
            *s /= tuples as f64;
        }
        let mut best = 0;
        for c in 1..g {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        (scores, best)
    }

    /// Closed-form flops: distinct training patterns per tuple times the
    /// level, G per tuple, and 3G + 1.
    fn flops(&self) -> u64 {
        let g = self.classes as u64;
        let mut total = 3 * g + 1;
        for level in 1..=self.levels {
            for tuple in self.ensemble.tuples(level) {
                let distinct: HashSet<Vec<bool>> = self
                    .train_signs
                    .iter()
                    .map(|s| Self::restrict(s, tuple.indices()))
                    .collect();
                total += distinct.len() as u64 * level as u64 + g;
            }
        }
        total
    }
}

fn random_points(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Array2<f64> {
    Array2::from_shape_fn((count, dim), |_| rng.sample(StandardNormal))
}

fn c2_oracle(flop_failures: &mut Vec<String>, flop_checked: &mut usize) -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut points_checked = 0;
    for instance in 0..100 {
        let n = rng.random_range(1..=5);
        let m = rng.random_range(1..=8);
        let p = rng.random_range(1..=50);
        let g = rng.random_range(1..=4);
        let levels = rng.random_range(1..=m.min(3));
        let train = random_points(&mut rng, p, n);
        let test = random_points(&mut rng, 20, n);
        let labels: Vec<usize> = (0..p).map(|_| rng.random_range(0..g)).collect();
        let ensemble = MeasurementEnsemble::generate(n, m, levels, 100 + instance).unwrap();

        for level in 1..=levels {
            let found = ensemble.tuples(level).len();
            let want = m.min(binomial(m, level));
            if found != want {
                failures.push(format!("instance {instance}: {found} tuples at level {level}, expected {want}"));
            }
        }

        let oracle = Oracle {
            ensemble: &ensemble,
            levels,
            classes: g,
            train_signs: train.rows().into_iter().map(|x| naive_signs(ensemble.normals(), x.as_slice().unwrap())).collect(),
            labels: labels.clone(),
        };
        let q_train = ensemble.binarize(train.view()).unwrap();
        let model = FlatModel::train(&q_train, &labels, g, levels, &ensemble).unwrap();
        let expected_flops = oracle.flops();
        if predicted_flops_flat(&model) != expected_flops {
            flop_failures.push(format!(
                "instance {instance}: predicted {} flops, oracle {expected_flops}",
                predicted_flops_flat(&model)
            ));
        }

        let q_test = ensemble.binarize(test.view()).unwrap();
        for (which, points, q) in [("train", &train, &q_train), ("test", &test, &q_test)] {
            for (j, x) in points.rows().into_iter().enumerate() {
                points_checked += 1;
                let signs = naive_signs(ensemble.normals(), x.as_slice().unwrap());
                let lib_signs: Vec<bool> = (0..m).map(|i| q.get(i, j)).collect();
                if signs != lib_signs {
                    failures.push(format!("instance {instance}: {which} point {j} signs differ"));
                    continue;
                }
                let (scores, class) = oracle.classify(&signs);
                let mut ledger = FlopLedger::new();
                let prediction = model.classify(q.column(j), &mut ledger);
                if prediction.class != class {
                    failures.push(format!(
                        "instance {instance}: {which} point {j} predicted {}, oracle {class}",
                        prediction.class
                    ));
                }
                let worst = scores
                    .iter()
                    .zip(prediction.scores.as_slice())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if worst > EXACT {
                    failures.push(format!("instance {instance}: {which} point {j} scores differ by {worst:e}"));
                }
                *flop_checked += 1;
                if ledger.total() != expected_flops {
                    flop_failures.push(format!(
                        "instance {instance}: measured {} flops, closed form {expected_flops}",
                        ledger.total()
                    ));
                }
            }
        }
    }
    Outcome::new(
        &failures,
        format!("100 instances, {points_checked} classifications identical to the oracle"),
    )
}

// ---- C3 -------------------------------------------------------------------

fn c3_degenerate(flop_failures: &mut Vec<String>, flop_checked: &mut usize) -> Outcome {
    let mut failures = Vec::new();
    let seed = 1;
    let (train, test) = gen_synthetic_2d(seed);
    let mut compared = 0;
    for m in [20, 50, 100] {
        for levels in 1..=6 {
            let ensemble = MeasurementEnsemble::generate(2, m, levels, seed).unwrap();
            let q_train = ensemble.binarize(train.points.view()).unwrap();
            let q_test = ensemble.binarize(test.points.view()).unwrap();
            let flat = FlatModel::train(&q_train, &train.labels, 6, levels, &ensemble).unwrap();
            let tree = ClassificationTree::train(
                &q_train,
                &train.labels,
                TreeSkeleton::flat(6, levels),
                &ensemble,
                seed,
            )
            .unwrap();
            let closed_form = predicted_flops_flat(&flat);
            for (j, q) in q_test.columns().enumerate() {
                compared += 1;
                let mut flat_ledger = FlopLedger::new();
                let mut tree_ledger = FlopLedger::new();
                let a = flat.classify(q, &mut flat_ledger);
                let b = tree.classify(q, &mut tree_ledger);
                if a.class != b.class {
                    failures.push(format!("m={m} L={levels} point {j}: flat {} tree {}", a.class, b.class));
                }
                *flop_checked += 2;
                for (what, ledger) in [("flat", flat_ledger), ("tree", tree_ledger)] {
                    if ledger.total() != closed_form {
                        flop_failures.push(format!(
                            "m={m} L={levels} point {j}: {what} measured {} flops, closed form {closed_form}",
                            ledger.total()
                        ));
                    }
                }
            }
        }
    }
    Outcome::new(&failures, format!("{compared} test points over m in {{20,50,100}}, L in 1..=6 all match"))
}

// ---- C4 -------------------------------------------------------------------

/// Cost of visiting `path` as one combined expression: pattern
/// identification over every node's tables, plus m * sum(G_c L_c) updates,
/// plus sum(3 G_c + 1).
fn path_formula(tree: &ClassificationTree, path: &[usize]) -> u64 {
    let m = tree.ensemble().num_hyperplanes() as u64;
    let mut identify = 0u64;
    let mut updates = 0u64;
    let mut constants = 0u64;
    for &id in path {
        let model = tree.model(id);
        let g = model.num_classes() as u64;
        for level in 1..=model.num_levels() {
            identify += model.table_sizes(level).map(|t| t as u64 * level as u64).sum::<u64>();
        }
        updates += g * model.num_levels() as u64;
        constants += 3 * g + 1;
    }
    identify + m * updates + constants
}

fn c4_flops(flop_failures: &mut Vec<String>, flop_checked: &mut usize) -> Outcome {
    let mut failures = std::mem::take(flop_failures);
    let config = ExperimentConfig::load("2d").unwrap();
    let hier = config.hierarchy.as_ref().unwrap();
    let (skeleton, sweep) = hier.skeleton(6).unwrap();
    let (train, test) = gen_synthetic_2d(config.seed);
    let mut two_node = 0usize;
    for &m in &config.measurement.m {
        let ensemble = MeasurementEnsemble::generate(2, m, skeleton.max_levels(), config.seed).unwrap();
        let q_train = ensemble.binarize(train.points.view()).unwrap();
        let q_test = ensemble.binarize(test.points.view()).unwrap();
        let trained =
            ClassificationTree::train(&q_train, &train.labels, skeleton.clone(), &ensemble, config.seed).unwrap();
        for &levels in &hier.sweep_levels {
            let tree = trained.with_node_levels(sweep, levels).unwrap();
            for (j, q) in q_test.columns().enumerate() {
                let mut ledger = FlopLedger::new();
                let prediction = tree.classify(q, &mut ledger);
                *flop_checked += 1;
                let path_sum: u64 = prediction.path.iter().map(|&id| predicted_flops_flat(tree.model(id))).sum();
                let formula = path_formula(&tree, &prediction.path);
                if prediction.path.len() == 2 {
                    two_node += 1;
                }
                if ledger.total() != tree.predicted_flops(&prediction.path)
                    || ledger.total() != path_sum
                    || formula != path_sum
                {
                    failures.push(format!(
                        "m={m} L={levels} point {j}: measured {}, path {}, node sum {path_sum}, combined formula {formula}",
                        ledger.total(),
                        tree.predicted_flops(&prediction.path)
                    ));
                }
            }
        }
    }
    Outcome::new(
        &failures,
        format!(
            "{} classifications measured = closed form; {two_node} two-node paths match the combined formula",
            *flop_checked
        ),
    )
}

// ---- C5, C6 ---------------------------------------------------------------

fn summary(result: &ExperimentResult, method: Method, m: usize, levels: usize) -> (f64, f64) {
    let s = result
        .summary_for(method, m, levels)
        .unwrap_or_else(|| panic!("no {method} row for m={m}, L={levels}"));
    (s.accuracy_mean, s.flops_mean)
}

/// Accuracy within 2 points at the deepest matched level, and strictly fewer
/// hierarchical flops at every swept level from `min_level` up.
fn compare(result: &ExperimentResult, config: &ExperimentConfig, min_level: usize) -> (Vec<String>, Vec<String>) {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let sweep = &config.hierarchy.as_ref().unwrap().sweep_levels;
    let deepest = *sweep.iter().max().unwrap();
    for &m in &config.measurement.m {
        let (flat_acc, _) = summary(result, Method::Flat, m, deepest);
        let (hier_acc, _) = summary(result, Method::Hier, m, deepest);
        let gap = hier_acc - flat_acc;
        if gap.abs() > 0.02 {
            failures.push(format!("m={m} L={deepest}: accuracy hier {hier_acc:.4} vs flat {flat_acc:.4}"));
        }
        let mut ratios = Vec::new();
        for &levels in sweep.iter().filter(|&&l| l >= min_level) {
            let (_, flat_flops) = summary(result, Method::Flat, m, levels);
            let (_, hier_flops) = summary(result, Method::Hier, m, levels);
            if hier_flops >= flat_flops {
                failures.push(format!("m={m} L={levels}: flops hier {hier_flops:.1} >= flat {flat_flops:.1}"));
            }
            ratios.push(format!("{:.2}", hier_flops / flat_flops));
        }
        notes.push(format!("m={m}: acc gap {:+.2}pp, flops ratio [{}]", gap * 100.0, ratios.join(" ")));
    }
    (failures, notes)
}

fn c5_c6_synthetic(preset: &str) -> Outcome {
    let config = ExperimentConfig::load(preset).unwrap();
    let result = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(e.to_string()),
    };
    let (failures, notes) = compare(&result, &config, 2);
    Outcome::new(&failures, notes.join("; "))
}

// ---- C7, C8 ---------------------------------------------------------------

fn mnist_config() -> Result<ExperimentConfig, String> {
    let dir = std::env::var_os(MNIST_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist")));
    let mut config = ExperimentConfig::load("mnist").map_err(|e| e.to_string())?;
    let DatasetSpec::Mnist(spec) = &mut config.dataset else {
        return Err("mnist preset has a non-MNIST dataset".into());
    };
    let located = MnistSpec::in_dir(&dir);
    if !located.images.is_file() || !located.labels.is_file() {
        return Err(format!(
            "MNIST training files not found in {} (see the README, or set {MNIST_DIR_ENV})",
            dir.display()
        ));
    }
    spec.images = located.images;
    spec.labels = located.labels;
    Ok(config)
}

fn c7_mnist_flat(result: &ExperimentResult) -> Outcome {
    let Some(s) = result.summary_for(Method::Flat, 500, 10) else {
        return Outcome::fail("no flat row for m=500, L=10".into());
    };
    let per_class = &s.acc_per_class_mean;
    let ones = per_class[0];
    let rest = per_class[1..].iter().sum::<f64>() / (per_class.len() - 1) as f64;
    let mut failures = Vec::new();
    if ones < 0.95 {
        failures.push(format!("ones {ones:.4} < 0.95"));
    }
    if s.accuracy_mean < 0.85 {
        failures.push(format!("overall {:.4} < 0.85", s.accuracy_mean));
    }
    if rest < 0.82 {
        failures.push(format!("digits 2-5 {rest:.4} < 0.82"));
    }
    let summary = format!(
        "over {} trials: ones {ones:.4}, overall {:.4}, digits 2-5 {rest:.4}",
        s.trials, s.accuracy_mean
    );
    let mut outcome = Outcome::new(&failures, summary.clone());
    if !outcome.pass {
        outcome.detail = format!("{}; {summary}", outcome.detail);
    }
    outcome
}

fn c8_mnist_hier(result: &ExperimentResult) -> Outcome {
    let config = mnist_config().expect("checked before the run");
    let (failures, notes) = compare(result, &config, 5);
    let mut outcome = Outcome::new(&failures, notes.join("; "));
    if !outcome.pass {
        outcome.detail = format!("{} | {}", outcome.detail, notes.join("; "));
    }
    outcome
}

// ---- C9 -------------------------------------------------------------------

fn without_wallclock(csv: &str) -> String {
    csv.lines()
        .map(|line| line.rsplit_once(',').map_or(line, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn c9_determinism() -> Outcome {
    let mut failures = Vec::new();
    for preset in ["2d", "3d"] {
        let config = ExperimentConfig::load(preset).unwrap();
        let first = rows_to_csv(&run_experiment(&config).unwrap().rows);
        let second = rows_to_csv(&run_experiment(&config).unwrap().rows);
        if without_wallclock(&first) != without_wallclock(&second) {
            failures.push(format!("{preset}: CSV differs between runs"));
        }
    }

    let mut scaled_points = 0;
    for (name, (train, test)) in [("2d", gen_synthetic_2d(9)), ("3d", gen_synthetic_3d(9))] {
        let ensemble = MeasurementEnsemble::generate(train.dim(), 50, 6, 9).unwrap();
        let q_train = ensemble.binarize(train.points.view()).unwrap();
        let flat = FlatModel::train(&q_train, &train.labels, 6, 6, &ensemble).unwrap();
        let config = ExperimentConfig::load(name).unwrap();
        let (skeleton, _) = config.hierarchy.as_ref().unwrap().skeleton(6).unwrap();
        let tree = ClassificationTree::train(&q_train, &train.labels, skeleton, &ensemble, 9).unwrap();
        let q: SignMatrix = ensemble.binarize(test.points.view()).unwrap();
        let q10 = ensemble.binarize(test.scaled(10.0).points.view()).unwrap();
        if q != q10 {
            failures.push(format!("{name}: signs change under x10"));
        }
        for j in 0..test.len() {
            scaled_points += 1;
            let mut ledger = FlopLedger::new();
            let a = flat.classify(q.column(j), &mut ledger);
            let b = flat.classify(q10.column(j), &mut ledger);
            if a != b {
                failures.push(format!("{name}: flat prediction for point {j} changes under x10"));
            }
            let a = tree.classify(q.column(j), &mut ledger);
            let b = tree.classify(q10.column(j), &mut ledger);
            if a != b {
                failures.push(format!("{name}: tree prediction for point {j} changes under x10"));
            }
        }
    }
    Outcome::new(
        &failures,
        format!("2d and 3d CSVs identical across runs; {scaled_points} points invariant under x10"),
    )
}

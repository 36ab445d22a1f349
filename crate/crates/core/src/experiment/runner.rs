use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DatasetSpec, ExperimentConfig};
use crate::datasets::{load_mnist, LabeledDataset};
use crate::error::Result;
use crate::flat::FlatModel;
use crate::flops::{predicted_flops_flat, FlopLedger};
use crate::hierarchy::ClassificationTree;
use crate::measurement::{MeasurementEnsemble, SignMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Flat,
    Hier,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Flat => "flat",
            Method::Hier => "hier",
        })
    }
}

/// One evaluated setting of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub trial: usize,
    pub method: Method,
    pub m: usize,
    /// The flat level count, or the swept node's budget.
    pub levels: usize,
    pub accuracy: f64,
    pub acc_per_class: Vec<f64>,
    /// Mean measured flops per test point.
    pub flops_measured: f64,
    /// Mean closed-form flops per test point.
    pub flops_predicted: f64,
    pub wallclock_ms: f64,
}

impl ResultRow {
    fn sort_key(&self) -> (usize, Method, usize, usize) {
        (self.trial, self.method, self.m, self.levels)
    }
}

/// Per-point outcome of classifying a test set.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<usize>,
    pub measured_flops: Vec<u64>,
    pub predicted_flops: Vec<u64>,
    pub ledger: FlopLedger,
}

impl Evaluation {
    pub fn accuracy(&self, labels: &[usize]) -> f64 {
        let hits = self.predictions.iter().zip(labels).filter(|(p, b)| p == b).count();
        hits as f64 / labels.len().max(1) as f64
    }

    /// Accuracy restricted to each true class; `NaN` for absent classes.
    pub fn per_class_accuracy(&self, labels: &[usize], num_classes: usize) -> Vec<f64> {
        let mut hits = vec![0usize; num_classes];
        let mut totals = vec![0usize; num_classes];
        for (&p, &b) in self.predictions.iter().zip(labels) {
            totals[b] += 1;
            hits[b] += usize::from(p == b);
        }
        hits.iter()
            .zip(&totals)
            .map(|(&h, &t)| h as f64 / t as f64)
            .collect()
    }

    fn mean(values: &[u64]) -> f64 {
        values.iter().sum::<u64>() as f64 / values.len().max(1) as f64
    }

    pub fn mean_measured(&self) -> f64 {
        Self::mean(&self.measured_flops)
    }

    pub fn mean_predicted(&self) -> f64 {
        Self::mean(&self.predicted_flops)
    }
}

/// Classifies every column of `signs` with a flat model.
pub fn evaluate_flat(model: &FlatModel, signs: &SignMatrix) -> Evaluation {
    let predicted = predicted_flops_flat(model);
    let outcomes: Vec<_> = (0..signs.num_points())
        .into_par_iter()
        .map(|j| {
            let mut ledger = FlopLedger::new();
            let class = model.classify(signs.column(j), &mut ledger).class;
            (class, ledger)
        })
        .collect();
    collect(outcomes.into_iter().map(|(c, l)| (c, l, predicted)))
}

/// Classifies every column of `signs` by routing through a tree.
pub fn evaluate_tree(tree: &ClassificationTree, signs: &SignMatrix) -> Evaluation {
    let outcomes: Vec<_> = (0..signs.num_points())
        .into_par_iter()
        .map(|j| {
            let mut ledger = FlopLedger::new();
            let pred = tree.classify(signs.column(j), &mut ledger);
            (pred.class, ledger, tree.predicted_flops(&pred.path))
        })
        .collect();
    collect(outcomes.into_iter())
}

fn collect(outcomes: impl Iterator<Item = (usize, FlopLedger, u64)>) -> Evaluation {
    let mut eval = Evaluation {
        predictions: Vec::new(),
        measured_flops: Vec::new(),
        predicted_flops: Vec::new(),
        ledger: FlopLedger::new(),
    };
    for (class, ledger, predicted) in outcomes {
        eval.predictions.push(class);
        eval.measured_flops.push(ledger.total());
        eval.predicted_flops.push(predicted);
        eval.ledger += ledger;
    }
    eval
}

/// Mean and sample standard deviation over trials of one setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub m: usize,
    pub levels: usize,
    pub trials: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub acc_per_class_mean: Vec<f64>,
    pub flops_mean: f64,
    pub flops_std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    pub fn summary_for(&self, method: Method, m: usize, levels: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.method == method && s.m == m && s.levels == levels)
    }
}

/// The datasets for one trial. MNIST is drawn once under the base seed;
/// synthetic data is regenerated from the trial seed.
fn trial_data(
    config: &ExperimentConfig,
    trial_seed: u64,
    fixed: Option<&(LabeledDataset, LabeledDataset)>,
) -> Result<(LabeledDataset, LabeledDataset)> {
    match fixed {
        Some(data) => Ok(data.clone()),
        None => config.load_data(trial_seed),
    }
}

/// Runs every trial, hyperplane count and level setting of `config`.
///
/// Trial `t` draws a fresh ensemble (and, for synthetic data, a fresh
/// dataset) from seed `config.seed + t`; every method and level in a trial
/// sees the same data and hyperplanes. Rows come back ordered by trial,
/// method, `m` and level.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let num_classes = config.num_classes();
    let tree = config
        .hierarchy
        .as_ref()
        .map(|h| h.skeleton(num_classes))
        .transpose()?;

    let fixed = match &config.dataset {
        DatasetSpec::Mnist(spec) => Some(load_mnist(spec, config.seed)?),
        _ => None,
    };

    let trials: Vec<Vec<ResultRow>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = config.seed.wrapping_add(trial as u64);
            let (train, test) = trial_data(config, seed, fixed.as_ref())?;
            let mut rows = Vec::new();
            for &m in &config.measurement.m {
                let flat_max = config.flat.as_ref().map_or(0, |f| max(&f.levels));
                let tree_max = tree.as_ref().map_or(0, |(s, _)| s.max_levels());
                let ensemble =
                    MeasurementEnsemble::generate(train.dim(), m, flat_max.max(tree_max), seed)?;
                let q_train = ensemble.binarize(train.points.view())?;
                let q_test = ensemble.binarize(test.points.view())?;

                if let Some(flat) = &config.flat {
                    let model = FlatModel::train(&q_train, &train.labels, num_classes, flat_max, &ensemble)?;
                    for &levels in &flat.levels {
                        let model = model.truncated(levels)?;
                        let start = Instant::now();
                        let eval = evaluate_flat(&model, &q_test);
                        rows.push(row(trial, Method::Flat, m, levels, &eval, &test, start));
                    }
                }
                if let (Some(hier), Some((skeleton, node))) = (&config.hierarchy, &tree) {
                    let trained =
                        ClassificationTree::train(&q_train, &train.labels, skeleton.clone(), &ensemble, seed)?;
                    for &levels in &hier.sweep_levels {
                        let tree = trained.with_node_levels(*node, levels)?;
                        let start = Instant::now();
                        let eval = evaluate_tree(&tree, &q_test);
                        rows.push(row(trial, Method::Hier, m, levels, &eval, &test, start));
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<ResultRow> = trials.into_iter().flatten().collect();
    rows.sort_by_key(ResultRow::sort_key);
    let summary = summarize(&rows);
    Ok(ExperimentResult { rows, summary })
}

fn max(levels: &[usize]) -> usize {
    levels.iter().copied().max().unwrap_or(0)
}

fn row(
    trial: usize,
    method: Method,
    m: usize,
    levels: usize,
    eval: &Evaluation,
    test: &LabeledDataset,
    start: Instant,
) -> ResultRow {
    ResultRow {
        trial,
        method,
        m,
        levels,
        accuracy: eval.accuracy(&test.labels),
        acc_per_class: eval.per_class_accuracy(&test.labels, test.num_classes()),
        flops_measured: eval.mean_measured(),
        flops_predicted: eval.mean_predicted(),
        wallclock_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Groups rows by (method, m, levels) and averages over trials.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Method, usize, usize), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.method, r.m, r.levels)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((method, m, levels), rs)| {
            let acc: Vec<f64> = rs.iter().map(|r| r.accuracy).collect();
            let flops: Vec<f64> = rs.iter().map(|r| r.flops_measured).collect();
            let classes = rs[0].acc_per_class.len();
            let acc_per_class_mean = (0..classes)
                .map(|c| rs.iter().map(|r| r.acc_per_class[c]).sum::<f64>() / rs.len() as f64)
                .collect();
            SummaryRow {
                method,
                m,
                levels,
                trials: rs.len(),
                accuracy_mean: mean(&acc),
                accuracy_std: std_dev(&acc),
                acc_per_class_mean,
                flops_mean: mean(&flops),
                flops_std: std_dev(&flops),
            }
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

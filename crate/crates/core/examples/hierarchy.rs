//! Build a classification tree in code, train it, and follow a few points
//! down their paths.

use signtree::datasets::gen_synthetic_2d;
use signtree::experiment::{evaluate_flat, evaluate_tree};
use signtree::flat::FlatModel;
use signtree::flops::FlopLedger;
use signtree::hierarchy::{ClassificationTree, NodeSpec, ParentRef, TreeSkeleton};
use signtree::measurement::MeasurementEnsemble;

fn node(id: &str, parent: Option<(&str, usize)>, groups: Vec<Vec<usize>>, levels: usize) -> NodeSpec {
    NodeSpec {
        id: id.to_string(),
        parent: parent.map(|(node, group)| ParentRef { node: node.to_string(), group }),
        groups,
        levels,
        balance: false,
        hyperplanes: None,
    }
}

fn main() -> signtree::Result<()> {
    let seed = 3;
    let (train, test) = gen_synthetic_2d(seed);

    // Classes are one-based here, as in config files.
    let skeleton = TreeSkeleton::from_specs(
        6,
        &[
            node("split", None, vec![vec![1, 2], vec![3, 4, 5, 6]], 1),
            node("easy", Some(("split", 1)), vec![vec![1], vec![2]], 1),
            node("hard", Some(("split", 2)), vec![vec![3], vec![4], vec![5], vec![6]], 5),
        ],
    )?;

    let ensemble = MeasurementEnsemble::generate(2, 50, skeleton.max_levels(), seed)?;
    let q_train = ensemble.binarize(train.points.view())?;
    let q_test = ensemble.binarize(test.points.view())?;
    let tree = ClassificationTree::train(&q_train, &train.labels, skeleton, &ensemble, seed)?;
    let flat = FlatModel::train(&q_train, &train.labels, 6, 5, &ensemble)?;

    for j in [0, 250, 500, 700] {
        let mut ledger = FlopLedger::new();
        let p = tree.classify(q_test.column(j), &mut ledger);
        let names: Vec<&str> = p.path.iter().map(|&id| tree.skeleton().nodes[id].name.as_str()).collect();
        println!(
            "point {j:>3} ({:>6}) -> {:>6} via {:<12} {} flops",
            test.class_names[test.labels[j]],
            test.class_names[p.class],
            names.join(" > "),
            ledger.total()
        );
    }

    let hier = evaluate_tree(&tree, &q_test);
    let base = evaluate_flat(&flat, &q_test);
    println!(
        "tree: accuracy {:.3}, {:.0} flops/point; flat at 5 levels: accuracy {:.3}, {:.0} flops/point",
        hier.accuracy(&test.labels),
        hier.mean_measured(),
        base.accuracy(&test.labels),
        base.mean_measured()
    );
    Ok(())
}

//! Classification trees.
//!
//! Each node classifies among a list of class groups using its own level
//! budget. A group holding a single class is terminal; every other group is
//! handed to exactly one child node, which splits it further. All nodes share
//! one measurement ensemble, so a test point is binarized once and then
//! routed from the root until a singleton group is predicted.

use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::balanced_indices;
use crate::error::{Error, Result};
use crate::flat::FlatModel;
use crate::flops::{predicted_flops_path, FlopLedger};
use crate::measurement::{MeasurementEnsemble, SignMatrix, SignSlice};
use crate::seed::derive_seed;

pub type NodeId = usize;

/// A nonempty set of zero-based class ids, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassGroup(Vec<usize>);

impl ClassGroup {
    pub fn new(classes: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<_> = classes.into_iter().collect();
        ClassGroup(set.into_iter().collect())
    }

    pub fn singleton(class: usize) -> Self {
        ClassGroup(vec![class])
    }

    pub fn classes(&self) -> &[usize] {
        &self.0
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    pub fn contains(&self, class: usize) -> bool {
        self.0.binary_search(&class).is_ok()
    }
}

/// One node of an untrained tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSkeleton {
    pub name: String,
    pub groups: Vec<ClassGroup>,
    /// Level budget `L_c`.
    pub levels: usize,
    /// `children[k]` refines `groups[k]`; `None` for singleton groups.
    pub children: Vec<Option<NodeId>>,
    /// Downsample the node's training data to equal group totals.
    #[serde(default)]
    pub balance: bool,
    /// Use only the first `k` hyperplanes of the shared ensemble.
    #[serde(default)]
    pub hyperplanes: Option<usize>,
}

impl NodeSkeleton {
    pub fn new(name: impl Into<String>, groups: Vec<ClassGroup>, levels: usize) -> Self {
        let children = vec![None; groups.len()];
        NodeSkeleton {
            name: name.into(),
            groups,
            levels,
            children,
            balance: false,
            hyperplanes: None,
        }
    }

    /// Union of the classes in all groups.
    pub fn classes(&self) -> BTreeSet<usize> {
        self.groups.iter().flat_map(|g| g.classes().iter().copied()).collect()
    }
}

/// A node as written in a config file: one-based class ids and a named
/// parent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    /// Absent for the root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<ParentRef>,
    /// One-based class ids, one list per group.
    pub groups: Vec<Vec<usize>>,
    pub levels: usize,
    #[serde(default)]
    pub balance: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperplanes: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParentRef {
    pub node: String,
    /// One-based position of the refined group in the parent's list.
    pub group: usize,
}

/// The first rule a tree breaks. Group positions are one-based.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TreeViolation {
    #[error("the tree has no nodes or no root")]
    NoRoot,
    #[error("nodes {first} and {second} both lack a parent")]
    MultipleRoots { first: String, second: String },
    #[error("node {node} names unknown parent {parent}")]
    UnknownParent { node: String, parent: String },
    #[error("node {node} refers to group {group} which its parent does not have")]
    ParentGroupOutOfRange { node: String, group: usize },
    #[error("group {group} of node {node} has more than one child")]
    DuplicateChild { node: String, group: usize },
    #[error("node {node} has no groups")]
    NoGroups { node: String },
    #[error("group {group} of node {node} is empty")]
    EmptyGroup { node: String, group: usize },
    #[error("node {node} mentions class {class} outside 1..={classes}")]
    ClassOutOfRange {
        node: String,
        class: usize,
        classes: usize,
    },
    #[error("class {class} appears in more than one group of node {node}")]
    OverlappingGroups { node: String, class: usize },
    #[error("node {node} has a level budget of zero")]
    ZeroLevels { node: String },
    #[error("group {group} of node {node} is a single class but has a child")]
    ChildOfSingleton { node: String, group: usize },
    #[error("group {group} of node {node} has several classes but no child")]
    MissingChild { node: String, group: usize },
    #[error("child {child} of node {node} does not cover exactly group {group}")]
    ChildMismatch {
        node: String,
        group: usize,
        child: String,
    },
    #[error("the root does not cover class {class}")]
    RootIncomplete { class: usize },
    #[error("node {node} is reachable along more than one path")]
    MultipleParents { node: String },
    #[error("node {node} lies on a cycle")]
    Cycle { node: String },
    #[error("node {node} is not reachable from the root")]
    Unreachable { node: String },
    #[error("node {node} asks for {requested} hyperplanes, more than available")]
    TooManyHyperplanes { node: String, requested: usize },
}

/// An untrained classification tree over classes `0..num_classes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSkeleton {
    pub num_classes: usize,
    pub root: NodeId,
    pub nodes: Vec<NodeSkeleton>,
}

impl TreeSkeleton {
    /// A single node splitting all classes into singletons: training and
    /// classifying with it is exactly flat classification.
    pub fn flat(num_classes: usize, levels: usize) -> Self {
        TreeSkeleton {
            num_classes,
            root: 0,
            nodes: vec![NodeSkeleton::new(
                "root",
                (0..num_classes).map(ClassGroup::singleton).collect(),
                levels,
            )],
        }
    }

    /// Resolves config nodes into a validated tree.
    pub fn from_specs(num_classes: usize, specs: &[NodeSpec]) -> Result<Self, TreeViolation> {
        let index: HashMap<&str, NodeId> = specs
            .iter()
            .enumerate()
            .map(|(k, s)| (s.id.as_str(), k))
            .collect();

        let mut nodes = Vec::with_capacity(specs.len());
        for spec in specs {
            let mut groups = Vec::with_capacity(spec.groups.len());
            for group in &spec.groups {
                if let Some(&class) = group.iter().find(|&&c| c == 0 || c > num_classes) {
                    return Err(TreeViolation::ClassOutOfRange {
                        node: spec.id.clone(),
                        class,
                        classes: num_classes,
                    });
                }
                groups.push(ClassGroup::new(group.iter().map(|c| c - 1)));
            }
            let mut node = NodeSkeleton::new(spec.id.clone(), groups, spec.levels);
            node.balance = spec.balance;
            node.hyperplanes = spec.hyperplanes;
            nodes.push(node);
        }

        let mut root: Option<NodeId> = None;
        for (k, spec) in specs.iter().enumerate() {
            match &spec.parent {
                None => {
                    if let Some(first) = root {
                        return Err(TreeViolation::MultipleRoots {
                            first: specs[first].id.clone(),
                            second: spec.id.clone(),
                        });
                    }
                    root = Some(k);
                }
                Some(parent) => {
                    let &p = index.get(parent.node.as_str()).ok_or_else(|| {
                        TreeViolation::UnknownParent {
                            node: spec.id.clone(),
                            parent: parent.node.clone(),
                        }
                    })?;
                    let slot = parent
                        .group
                        .checked_sub(1)
                        .and_then(|g| nodes[p].children.get_mut(g))
                        .ok_or_else(|| TreeViolation::ParentGroupOutOfRange {
                            node: spec.id.clone(),
                            group: parent.group,
                        })?;
                    if slot.is_some() {
                        return Err(TreeViolation::DuplicateChild {
                            node: parent.node.clone(),
                            group: parent.group,
                        });
                    }
                    *slot = Some(k);
                }
            }
        }

        let tree = TreeSkeleton {
            num_classes,
            root: root.ok_or(TreeViolation::NoRoot)?,
            nodes,
        };
        tree.validate()?;
        Ok(tree)
    }

    /// Checks every structural rule, depth first from the root, and reports
    /// the first violation.
    pub fn validate(&self) -> Result<(), TreeViolation> {
        if self.root >= self.nodes.len() {
            return Err(TreeViolation::NoRoot);
        }
        let root_classes = self.nodes[self.root].classes();
        self.check_node(self.root)?;
        if let Some(class) = (0..self.num_classes).find(|c| !root_classes.contains(c)) {
            return Err(TreeViolation::RootIncomplete { class: class + 1 });
        }

        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Unseen,
            OnPath,
            Done,
        }
        let mut marks = vec![Mark::Unseen; self.nodes.len()];
        // (node, next child slot to inspect)
        let mut stack = vec![(self.root, 0usize)];
        marks[self.root] = Mark::OnPath;
        while let Some((id, slot)) = stack.pop() {
            let node = &self.nodes[id];
            if slot == node.groups.len() {
                marks[id] = Mark::Done;
                continue;
            }
            stack.push((id, slot + 1));
            let Some(child) = node.children.get(slot).copied().flatten() else {
                continue;
            };
            if child >= self.nodes.len() {
                return Err(TreeViolation::ChildMismatch {
                    node: node.name.clone(),
                    group: slot + 1,
                    child: format!("#{child}"),
                });
            }
            match marks[child] {
                Mark::OnPath => {
                    return Err(TreeViolation::Cycle {
                        node: self.nodes[child].name.clone(),
                    })
                }
                Mark::Done => {
                    return Err(TreeViolation::MultipleParents {
                        node: self.nodes[child].name.clone(),
                    })
                }
                Mark::Unseen => {}
            }
            let group: BTreeSet<_> = node.groups[slot].classes().iter().copied().collect();
            if self.nodes[child].classes() != group {
                return Err(TreeViolation::ChildMismatch {
                    node: node.name.clone(),
                    group: slot + 1,
                    child: self.nodes[child].name.clone(),
                });
            }
            self.check_node(child)?;
            marks[child] = Mark::OnPath;
            stack.push((child, 0));
        }

        if let Some(k) = marks.iter().position(|&m| m == Mark::Unseen) {
            return Err(TreeViolation::Unreachable {
                node: self.nodes[k].name.clone(),
            });
        }
        Ok(())
    }

    fn check_node(&self, id: NodeId) -> Result<(), TreeViolation> {
        let node = &self.nodes[id];
        let name = || node.name.clone();
        if node.groups.is_empty() {
            return Err(TreeViolation::NoGroups { node: name() });
        }
        if node.levels == 0 {
            return Err(TreeViolation::ZeroLevels { node: name() });
        }
        let mut seen = BTreeSet::new();
        for (k, group) in node.groups.iter().enumerate() {
            if group.classes().is_empty() {
                return Err(TreeViolation::EmptyGroup {
                    node: name(),
                    group: k + 1,
                });
            }
            for &class in group.classes() {
                if class >= self.num_classes {
                    return Err(TreeViolation::ClassOutOfRange {
                        node: name(),
                        class: class + 1,
                        classes: self.num_classes,
                    });
                }
                if !seen.insert(class) {
                    return Err(TreeViolation::OverlappingGroups {
                        node: name(),
                        class: class + 1,
                    });
                }
            }
        }
        for (k, group) in node.groups.iter().enumerate() {
            match (group.is_singleton(), node.children.get(k).copied().flatten()) {
                (true, Some(_)) => {
                    return Err(TreeViolation::ChildOfSingleton {
                        node: name(),
                        group: k + 1,
                    })
                }
                (false, None) => {
                    return Err(TreeViolation::MissingChild {
                        node: name(),
                        group: k + 1,
                    })
                }
                _ => {}
            }
        }
        if node.children.len() > node.groups.len() {
            return Err(TreeViolation::ChildOfSingleton {
                node: name(),
                group: node.groups.len() + 1,
            });
        }
        Ok(())
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Maximum number of nodes on any root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(tree: &TreeSkeleton, id: NodeId) -> usize {
            1 + tree.nodes[id]
                .children
                .iter()
                .flatten()
                .map(|&c| go(tree, c))
                .max()
                .unwrap_or(0)
        }
        go(self, self.root)
    }

    /// Largest level budget over all nodes.
    pub fn max_levels(&self) -> usize {
        self.nodes.iter().map(|n| n.levels).max().unwrap_or(0)
    }
}

/// Outcome of routing one point through a trained tree.
#[derive(Clone, Debug, PartialEq)]
pub struct HierPrediction {
    pub class: usize,
    /// Nodes visited, root first.
    pub path: Vec<NodeId>,
    /// Measured flops spent at each node of `path`.
    pub node_flops: Vec<u64>,
}

/// A tree with one trained flat model per node and the ensemble they share.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationTree {
    skeleton: TreeSkeleton,
    ensemble: MeasurementEnsemble,
    models: Vec<FlatModel>,
}

impl ClassificationTree {
    /// Trains every node on the training columns whose class belongs to one
    /// of the node's groups, relabeled by group position.
    ///
    /// `seed` drives the optional per-node balancing.
    pub fn train(
        signs: &SignMatrix,
        labels: &[usize],
        skeleton: TreeSkeleton,
        ensemble: &MeasurementEnsemble,
        seed: u64,
    ) -> Result<Self> {
        skeleton.validate()?;
        if labels.len() != signs.num_points() {
            return Err(Error::DimensionMismatch {
                expected: signs.num_points(),
                found: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&b| b >= skeleton.num_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: skeleton.num_classes,
            });
        }
        for node in &skeleton.nodes {
            if node.hyperplanes.is_some_and(|k| k > ensemble.num_hyperplanes()) {
                return Err(TreeViolation::TooManyHyperplanes {
                    node: node.name.clone(),
                    requested: node.hyperplanes.unwrap_or_default(),
                }
                .into());
            }
        }

        let models = skeleton
            .nodes
            .par_iter()
            .enumerate()
            .map(|(id, node)| train_node(signs, labels, node, ensemble, derive_seed(seed, id as u64)))
            .collect::<Result<Vec<_>>>()?;

        Ok(ClassificationTree {
            skeleton,
            ensemble: ensemble.clone(),
            models,
        })
    }

    /// Routes `q` from the root until a singleton group is predicted,
    /// charging every visited node's work to `ledger`.
    pub fn classify(&self, q: SignSlice<'_>, ledger: &mut FlopLedger) -> HierPrediction {
        let mut id = self.skeleton.root;
        let mut path = Vec::new();
        let mut node_flops = Vec::new();
        loop {
            let node = &self.skeleton.nodes[id];
            let mut local = FlopLedger::new();
            let group = self.models[id].classify(q, &mut local).class;
            *ledger += local;
            path.push(id);
            node_flops.push(local.total());
            match node.children[group] {
                Some(child) if path.len() < self.skeleton.nodes.len() => id = child,
                _ => {
                    return HierPrediction {
                        class: node.groups[group].classes()[0],
                        path,
                        node_flops,
                    }
                }
            }
        }
    }

    /// Closed-form flops for a point that visits `path`.
    pub fn predicted_flops(&self, path: &[NodeId]) -> u64 {
        predicted_flops_path(path.iter().map(|&id| &self.models[id]))
    }

    /// The same tree with `node`'s model cut down to `levels` levels.
    pub fn with_node_levels(&self, node: NodeId, levels: usize) -> Result<Self> {
        let mut tree = self.clone();
        tree.models[node] = self.models[node].truncated(levels)?;
        tree.skeleton.nodes[node].levels = levels;
        Ok(tree)
    }

    pub fn skeleton(&self) -> &TreeSkeleton {
        &self.skeleton
    }

    pub fn ensemble(&self) -> &MeasurementEnsemble {
        &self.ensemble
    }

    pub fn model(&self, node: NodeId) -> &FlatModel {
        &self.models[node]
    }

    pub fn num_classes(&self) -> usize {
        self.skeleton.num_classes
    }
}

fn train_node(
    signs: &SignMatrix,
    labels: &[usize],
    node: &NodeSkeleton,
    ensemble: &MeasurementEnsemble,
    seed: u64,
) -> Result<FlatModel> {
    let mut group_of = vec![None; labels.iter().max().map_or(0, |&b| b + 1)];
    for (k, group) in node.groups.iter().enumerate() {
        for &class in group.classes() {
            if class < group_of.len() {
                group_of[class] = Some(k);
            }
        }
    }

    let mut columns: Vec<usize> = (0..labels.len())
        .filter(|&j| group_of[labels[j]].is_some())
        .collect();
    if node.balance {
        let groups: Vec<Vec<usize>> = node.groups.iter().map(|g| g.classes().to_vec()).collect();
        let sub_labels: Vec<usize> = columns.iter().map(|&j| labels[j]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keep = balanced_indices(&sub_labels, &groups, &mut rng).map_err(|_| {
            Error::EmptyGroup {
                node: node.name.clone(),
                group: first_empty_group(&sub_labels, node).unwrap_or(1),
            }
        })?;
        columns = keep.into_iter().map(|k| columns[k]).collect();
    }
    let relabeled: Vec<usize> = columns
        .iter()
        .map(|&j| group_of[labels[j]].expect("selected columns belong to a group"))
        .collect();

    let mut present = vec![false; node.groups.len()];
    for &k in &relabeled {
        present[k] = true;
    }
    if let Some(k) = present.iter().position(|&p| !p) {
        return Err(Error::EmptyGroup {
            node: node.name.clone(),
            group: k + 1,
        });
    }

    let node_signs = signs.select_columns(&columns);
    match node.hyperplanes {
        Some(k) if k < ensemble.num_hyperplanes() => {
            let sub = ensemble.restricted(k, node.levels.min(k))?;
            FlatModel::train(
                &node_signs.truncate_rows(k),
                &relabeled,
                node.groups.len(),
                node.levels,
                &sub,
            )
        }
        _ => FlatModel::train(&node_signs, &relabeled, node.groups.len(), node.levels, ensemble),
    }
}

fn first_empty_group(labels: &[usize], node: &NodeSkeleton) -> Option<usize> {
    node.groups
        .iter()
        .position(|g| !labels.iter().any(|&b| g.contains(b)))
        .map(|k| k + 1)
}

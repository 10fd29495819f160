//! Stopping times on the event tree and their exhaustive enumeration.

use super::tree::{FiltrationTree, NodeId};
use crate::error::{Error, Result};
use num::{BigUint, One};

/// Stopping time as a set of marked nodes: along every root-to-leaf path
/// exactly one node is marked, and the stop decision is a property of the
/// node alone, so `{τ ≤ t_k}` is automatically a union of full subtrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingTime {
    marks: Vec<bool>,
}

impl StoppingTime {
    pub fn new(tree: &FiltrationTree, marks: Vec<bool>) -> Result<Self> {
        let st = StoppingTime { marks };
        st.validate(tree)?;
        Ok(st)
    }

    /// τ ≡ t_level.
    pub fn at_level(tree: &FiltrationTree, level: usize) -> Result<Self> {
        tree.check_level(level)?;
        let mut marks = vec![false; tree.node_count()];
        for &n in tree.level_nodes(level) {
            marks[n] = true;
        }
        Ok(StoppingTime { marks })
    }

    /// First node along each path where `hit` is true; paths that never hit
    /// are stopped at their leaf.
    pub fn hitting(tree: &FiltrationTree, mut hit: impl FnMut(NodeId) -> bool) -> Self {
        let mut marks = vec![false; tree.node_count()];
        let mut stopped = vec![false; tree.node_count()];
        for node in tree.nodes() {
            let already = tree.parent(node).map(|p| stopped[p]).unwrap_or(false);
            if already {
                stopped[node] = true;
            } else if hit(node) || tree.is_leaf(node) {
                marks[node] = true;
                stopped[node] = true;
            }
        }
        StoppingTime { marks }
    }

    pub fn is_marked(&self, node: NodeId) -> bool {
        self.marks[node]
    }

    pub fn marks(&self) -> &[bool] {
        &self.marks
    }

    pub fn validate(&self, tree: &FiltrationTree) -> Result<()> {
        if self.marks.len() != tree.node_count() {
            return Err(Error::InvalidStoppingTime("mark vector length".into()));
        }
        for &leaf in tree.leaves() {
            let mut count = 0usize;
            let mut node = leaf;
            loop {
                if self.marks[node] {
                    count += 1;
                }
                match tree.parent(node) {
                    Some(p) => node = p,
                    None => break,
                }
            }
            if count != 1 {
                return Err(Error::InvalidStoppingTime(format!(
                    "path to leaf {leaf} carries {count} marks, expected exactly 1"
                )));
            }
        }
        Ok(())
    }

    /// Node (and level) at which the path through `leaf` stops.
    pub fn stop_node(&self, tree: &FiltrationTree, leaf: NodeId) -> NodeId {
        let mut node = leaf;
        loop {
            if self.marks[node] {
                return node;
            }
            node = tree.parent(node).expect("validated stopping time");
        }
    }

    pub fn stop_level(&self, tree: &FiltrationTree, leaf: NodeId) -> usize {
        tree.level_of(self.stop_node(tree, leaf))
    }

    /// Smallest marked level; `steps()` for τ ≡ T.
    pub fn min_level(&self, tree: &FiltrationTree) -> usize {
        tree.nodes()
            .filter(|&n| self.marks[n])
            .map(|n| tree.level_of(n))
            .min()
            .unwrap_or(tree.steps())
    }

    /// Canonical serialization used for duplicate detection: the sorted list
    /// of marked node ids.
    pub fn canonical_key(&self) -> Vec<NodeId> {
        self.marks
            .iter()
            .enumerate()
            .filter_map(|(n, &m)| if m { Some(n) } else { None })
            .collect()
    }
}

/// Number of stopping times with τ ≥ t_{from_level}, without enumerating.
pub fn count_stopping_times(tree: &FiltrationTree, from_level: usize) -> Result<BigUint> {
    tree.check_level(from_level)?;
    // counts[n] = number of stopping rules on the subtree rooted at n.
    let mut counts: Vec<BigUint> = vec![BigUint::one(); tree.node_count()];
    for level in (0..=tree.steps()).rev() {
        for &n in tree.level_nodes(level) {
            if tree.is_leaf(n) {
                counts[n] = BigUint::one();
            } else {
                let continue_ways: BigUint = tree
                    .children(n)
                    .iter()
                    .map(|&c| counts[c].clone())
                    .product();
                counts[n] = if level >= from_level {
                    continue_ways + BigUint::one()
                } else {
                    continue_ways
                };
            }
        }
    }
    Ok(counts[tree.root()].clone())
}

/// Produces every stopping time with τ ≥ t_{from_level} exactly once.
///
/// Guarded: errors out when the count exceeds `guard` instead of exhausting
/// memory; sweeps over all stopping times should then go through the
/// dynamic-programming evaluators.
pub fn enumerate_stopping_times(
    tree: &FiltrationTree,
    from_level: usize,
    guard: usize,
) -> Result<Vec<StoppingTime>> {
    let count = count_stopping_times(tree, from_level)?;
    if count > BigUint::from(guard) {
        return Err(Error::EnumerationGuard {
            count: count.to_string(),
            guard,
        });
    }
    let mut out = Vec::new();
    let mut marks = vec![false; tree.node_count()];
    let frontier = vec![tree.root()];
    expand(tree, from_level, frontier, &mut marks, &mut out);
    Ok(out)
}

fn expand(
    tree: &FiltrationTree,
    from_level: usize,
    mut frontier: Vec<NodeId>,
    marks: &mut Vec<bool>,
    out: &mut Vec<StoppingTime>,
) {
    // Frontier = nodes still awaiting a stop/continue decision.
    let node = match frontier.pop() {
        None => {
            out.push(StoppingTime {
                marks: marks.clone(),
            });
            return;
        }
        Some(n) => n,
    };
    let may_stop = tree.level_of(node) >= from_level;
    if may_stop {
        marks[node] = true;
        expand(tree, from_level, frontier.clone(), marks, out);
        marks[node] = false;
    }
    if !tree.is_leaf(node) {
        let mut extended = frontier;
        extended.extend_from_slice(tree.children(node));
        expand(tree, from_level, extended, marks, out);
    }
}

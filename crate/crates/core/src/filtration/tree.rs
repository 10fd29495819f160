//! Finite filtered probability space represented as a rooted event tree.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num::{BigRational, One, Zero};

pub type NodeId = usize;

/// Event tree with a time grid `t_0 = 0 < t_1 < … < t_N = T`.
///
/// Level-`k` nodes are the atoms of `F_{t_k}`. Transition probabilities are
/// exact rationals, strictly positive, and sum to one at every non-terminal
/// node, so the reference measure has full support. The tree is immutable
/// after construction.
#[derive(Debug, Clone)]
pub struct FiltrationTree {
    levels: Vec<Vec<NodeId>>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    level_of: Vec<usize>,
    edge_prob: Vec<BigRational>,
    path_prob: Vec<BigRational>,
    times: Vec<f64>,
}

impl FiltrationTree {
    /// Number of time steps N (levels are `0..=N`).
    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, level: usize) -> f64 {
        self.times[level]
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn level_nodes(&self, level: usize) -> &[NodeId] {
        &self.levels[level]
    }

    pub fn leaves(&self) -> &[NodeId] {
        self.levels.last().unwrap()
    }

    pub fn root(&self) -> NodeId {
        self.levels[0][0]
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent[node]
    }

    pub fn children(&self, node: NodeId) -> &[NodeId] {
        &self.children[node]
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.children[node].is_empty()
    }

    pub fn level_of(&self, node: NodeId) -> usize {
        self.level_of[node]
    }

    /// Probability of the edge from the parent; 1 at the root.
    pub fn edge_prob(&self, node: NodeId) -> &BigRational {
        &self.edge_prob[node]
    }

    /// Unconditional probability of the atom at `node`.
    pub fn path_prob(&self, node: NodeId) -> &BigRational {
        &self.path_prob[node]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        0..self.node_count()
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.steps() {
            return Err(Error::LevelOutOfRange {
                level,
                max: self.steps(),
            });
        }
        Ok(())
    }

    /// Expectation of a terminal (leaf-indexed by node id) assignment.
    pub fn expect_terminal<T: Scalar>(&self, leaf_values: &[T]) -> T {
        let mut acc = T::zero();
        for (i, &leaf) in self.leaves().iter().enumerate() {
            acc = acc + leaf_values[i].clone() * T::from_rational(self.path_prob(leaf));
        }
        acc
    }

    /// One-step conditional expectation at `node` of values given on its
    /// children (full node-indexed slice).
    pub fn step_expectation<T: Scalar>(&self, node: NodeId, values: &[T]) -> T {
        let mut acc = T::zero();
        for &c in self.children(node) {
            acc = acc + values[c].clone() * T::from_rational(self.edge_prob(c));
        }
        acc
    }

    fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels[0].len() != 1 {
            return Err(Error::InvalidTree("level 0 must be a single root".into()));
        }
        if self.times.len() != self.levels.len() {
            return Err(Error::InvalidTree("time grid does not match levels".into()));
        }
        for w in self.times.windows(2) {
            // Rejects NaN as well as non-increasing grids.
            if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvalidTree("time grid must be increasing".into()));
            }
        }
        let last = self.levels.len() - 1;
        for (k, nodes) in self.levels.iter().enumerate() {
            if nodes.is_empty() {
                return Err(Error::InvalidTree(format!("level {k} is empty")));
            }
            for &n in nodes {
                if self.level_of[n] != k {
                    return Err(Error::InvalidTree("level index mismatch".into()));
                }
                if k == 0 {
                    if self.parent[n].is_some() {
                        return Err(Error::InvalidTree("root has a parent".into()));
                    }
                } else if self.parent[n].is_none() {
                    return Err(Error::InvalidTree(format!("node {n} has no parent")));
                }
                if self.edge_prob[n] <= BigRational::zero() {
                    return Err(Error::InvalidTree(format!(
                        "transition probability at node {n} is not strictly positive"
                    )));
                }
                if k < last {
                    if self.children[n].is_empty() {
                        return Err(Error::InvalidTree(format!(
                            "non-terminal node {n} has no children"
                        )));
                    }
                    let total: BigRational = self
                        .children[n]
                        .iter()
                        .map(|&c| self.edge_prob[c].clone())
                        .sum();
                    if total != BigRational::one() {
                        return Err(Error::InvalidTree(format!(
                            "child probabilities at node {n} sum to {total}, not 1"
                        )));
                    }
                } else if !self.children[n].is_empty() {
                    return Err(Error::InvalidTree("leaf with children".into()));
                }
            }
        }
        Ok(())
    }
}

/// Imperative builder; all leaves must end up on the same level.
pub struct TreeBuilder {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    level_of: Vec<usize>,
    edge_prob: Vec<BigRational>,
    horizon: f64,
}

impl TreeBuilder {
    pub fn new(horizon: f64) -> Self {
        TreeBuilder {
            parent: vec![None],
            children: vec![Vec::new()],
            level_of: vec![0],
            edge_prob: vec![BigRational::one()],
            horizon,
        }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    /// Appends children of `node` with the given transition probabilities.
    pub fn add_children(&mut self, node: NodeId, probs: &[BigRational]) -> Vec<NodeId> {
        let mut ids = Vec::with_capacity(probs.len());
        for p in probs {
            let id = self.parent.len();
            self.parent.push(Some(node));
            self.children.push(Vec::new());
            self.level_of.push(self.level_of[node] + 1);
            self.edge_prob.push(p.clone());
            self.children[node].push(id);
            ids.push(id);
        }
        ids
    }

    /// Finishes with a uniform grid over `[0, horizon]`.
    pub fn finish(self) -> Result<FiltrationTree> {
        let depth = self.level_of.iter().copied().max().unwrap_or(0);
        let times = (0..=depth)
            .map(|k| self.horizon * k as f64 / depth.max(1) as f64)
            .collect();
        self.finish_with_times(times)
    }

    pub fn finish_with_times(self, times: Vec<f64>) -> Result<FiltrationTree> {
        let depth = self.level_of.iter().copied().max().unwrap_or(0);
        for (n, &lvl) in self.level_of.iter().enumerate() {
            if self.children[n].is_empty() && lvl != depth {
                return Err(Error::InvalidTree(format!(
                    "leaf {n} at level {lvl}, expected all leaves at level {depth}"
                )));
            }
        }
        let mut levels = vec![Vec::new(); depth + 1];
        for (n, &lvl) in self.level_of.iter().enumerate() {
            levels[lvl].push(n);
        }
        let mut path_prob = vec![BigRational::one(); self.parent.len()];
        for n in 0..self.parent.len() {
            if let Some(p) = self.parent[n] {
                path_prob[n] = path_prob[p].clone() * self.edge_prob[n].clone();
            }
        }
        let tree = FiltrationTree {
            levels,
            parent: self.parent,
            children: self.children,
            level_of: self.level_of,
            edge_prob: self.edge_prob,
            path_prob,
            times,
        };
        tree.validate()?;
        Ok(tree)
    }
}

impl FiltrationTree {
    /// Single-path tree: one node per level.
    pub fn deterministic(steps: usize, horizon: f64) -> FiltrationTree {
        let mut b = TreeBuilder::new(horizon);
        let mut node = b.root();
        for _ in 0..steps {
            node = b.add_children(node, &[BigRational::one()])[0];
        }
        b.finish().expect("deterministic tree is valid")
    }

    /// Non-recombining binary tree with probability 1/2 on every edge.
    pub fn binary(steps: usize, horizon: f64) -> FiltrationTree {
        let half = BigRational::new(1.into(), 2.into());
        let mut b = TreeBuilder::new(horizon);
        let mut frontier = vec![b.root()];
        for _ in 0..steps {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for node in frontier {
                next.extend(b.add_children(node, &[half.clone(), half.clone()]));
            }
            frontier = next;
        }
        b.finish().expect("binary tree is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn binary_tree_shape_and_probabilities() {
        let t = FiltrationTree::binary(3, 1.0);
        assert_eq!(t.steps(), 3);
        assert_eq!(t.leaves().len(), 8);
        assert_eq!(t.node_count(), 15);
        for &leaf in t.leaves() {
            assert_eq!(*t.path_prob(leaf), rat(1, 8));
        }
        let total: BigRational = t.leaves().iter().map(|&l| t.path_prob(l).clone()).sum();
        assert_eq!(total, rat(1, 1));
    }

    #[test]
    fn unbalanced_probabilities_rejected() {
        let mut b = TreeBuilder::new(1.0);
        let root = b.root();
        b.add_children(root, &[rat(1, 3), rat(1, 3)]);
        assert!(b.finish().is_err());
    }

    #[test]
    fn zero_probability_rejected() {
        let mut b = TreeBuilder::new(1.0);
        let root = b.root();
        b.add_children(root, &[rat(0, 1), rat(1, 1)]);
        assert!(b.finish().is_err());
    }

    #[test]
    fn ragged_depth_rejected() {
        let mut b = TreeBuilder::new(1.0);
        let root = b.root();
        let kids = b.add_children(root, &[rat(1, 2), rat(1, 2)]);
        b.add_children(kids[0], &[rat(1, 1)]);
        assert!(b.finish().is_err());
    }

    #[test]
    fn deterministic_tree_times() {
        let t = FiltrationTree::deterministic(4, 2.0);
        assert_eq!(t.times(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}

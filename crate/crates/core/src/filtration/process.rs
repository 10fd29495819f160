//! Adapted processes, random variables, projections, and the sup norm.

use super::tree::{FiltrationTree, NodeId};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Adapted process: one value per node, plus an optional value at `0-`.
///
/// The pre-time-zero slot carries the `X_{0-}` conventions (`a_{0-} = 0` for
/// measures, `D_{0-} = 1` for discount processes); it does not enter the sup
/// norm.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedProcess<T> {
    values: Vec<T>,
    pre_time_zero: Option<T>,
}

impl<T: Scalar> AdaptedProcess<T> {
    pub fn new(tree: &FiltrationTree, values: Vec<T>) -> Result<Self> {
        if values.len() != tree.node_count() {
            return Err(Error::InvalidProcess(format!(
                "{} values for {} nodes",
                values.len(),
                tree.node_count()
            )));
        }
        Ok(AdaptedProcess {
            values,
            pre_time_zero: None,
        })
    }

    pub fn constant(tree: &FiltrationTree, value: T) -> Self {
        AdaptedProcess {
            values: vec![value; tree.node_count()],
            pre_time_zero: None,
        }
    }

    pub fn zero(tree: &FiltrationTree) -> Self {
        Self::constant(tree, T::zero())
    }

    pub fn from_fn(tree: &FiltrationTree, mut f: impl FnMut(NodeId) -> T) -> Self {
        AdaptedProcess {
            values: (0..tree.node_count()).map(&mut f).collect(),
            pre_time_zero: None,
        }
    }

    /// Single payment `m · 1_{[t_level, T]}`.
    pub fn single_payment(tree: &FiltrationTree, m: T, level: usize) -> Self {
        Self::from_fn(tree, |n| {
            if tree.level_of(n) >= level {
                m.clone()
            } else {
                T::zero()
            }
        })
    }

    /// Terminal payoff `v · 1_{[T]}` from a leaf-indexed slice.
    pub fn terminal(tree: &FiltrationTree, leaf_values: &[T]) -> Self {
        let mut values = vec![T::zero(); tree.node_count()];
        for (i, &leaf) in tree.leaves().iter().enumerate() {
            values[leaf] = leaf_values[i].clone();
        }
        AdaptedProcess {
            values,
            pre_time_zero: None,
        }
    }

    pub fn with_pre_time_zero(mut self, v: T) -> Self {
        self.pre_time_zero = Some(v);
        self
    }

    pub fn pre_time_zero(&self) -> Option<&T> {
        self.pre_time_zero.as_ref()
    }

    pub fn value(&self, node: NodeId) -> &T {
        &self.values[node]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn set(&mut self, node: NodeId, v: T) {
        self.values[node] = v;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Increment over the previous grid point; at the root this is the jump
    /// from `pre_time_zero` (default zero).
    pub fn increment(&self, tree: &FiltrationTree, node: NodeId) -> T {
        match tree.parent(node) {
            Some(p) => self.values[node].clone() - self.values[p].clone(),
            None => {
                let pre = self.pre_time_zero.clone().unwrap_or_else(T::zero);
                self.values[node].clone() - pre
            }
        }
    }

    /// Value at the previous grid point (the discrete left limit); at the
    /// root, `pre_time_zero` or zero.
    pub fn left_value(&self, tree: &FiltrationTree, node: NodeId) -> T {
        match tree.parent(node) {
            Some(p) => self.values[p].clone(),
            None => self.pre_time_zero.clone().unwrap_or_else(T::zero),
        }
    }

    /// F_{k-1}-measurability of each level-k slice: every node carries the
    /// same value as all of its siblings.
    pub fn is_predictable(&self, tree: &FiltrationTree) -> bool {
        for node in tree.nodes() {
            if tree.is_leaf(node) {
                continue;
            }
            let kids = tree.children(node);
            for &c in &kids[1..] {
                if self.values[c] != self.values[kids[0]] {
                    return false;
                }
            }
        }
        true
    }

    pub fn map(&self, mut f: impl FnMut(&T) -> T) -> Self {
        AdaptedProcess {
            values: self.values.iter().map(&mut f).collect(),
            pre_time_zero: self.pre_time_zero.as_ref().map(&mut f),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|v| T::zero() - v.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        AdaptedProcess {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
            pre_time_zero: None,
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    /// `X + m · 1_{[t_level, T]}`.
    pub fn shift_from(&self, tree: &FiltrationTree, m: &T, level: usize) -> Self {
        let mut out = self.clone();
        for node in tree.nodes() {
            if tree.level_of(node) >= level {
                out.values[node] = out.values[node].clone() + m.clone();
            }
        }
        out
    }
}

/// F_T-measurable payoff: one value per leaf, in leaf order.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> RandomVariable<T> {
    pub fn new(tree: &FiltrationTree, values: Vec<T>) -> Result<Self> {
        if values.len() != tree.leaves().len() {
            return Err(Error::InvalidProcess(format!(
                "{} values for {} leaves",
                values.len(),
                tree.leaves().len()
            )));
        }
        Ok(RandomVariable { values })
    }

    pub fn constant(tree: &FiltrationTree, v: T) -> Self {
        RandomVariable {
            values: vec![v; tree.leaves().len()],
        }
    }
}

/// Slice of an adapted process at a single level, parallel to
/// `tree.level_nodes(level)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSlice<T> {
    pub level: usize,
    pub values: Vec<T>,
}

/// Conditional expectation `E[slice | F_{target}]`, exact for rational input.
///
/// The slice may live at any level `j >= target`; intermediate levels are
/// integrated out by the tower property.
pub fn conditional_expectation<T: Scalar>(
    tree: &FiltrationTree,
    slice: &LevelSlice<T>,
    target: usize,
) -> Result<LevelSlice<T>> {
    tree.check_level(slice.level)?;
    tree.check_level(target)?;
    if target > slice.level {
        return Err(Error::LevelOutOfRange {
            level: target,
            max: slice.level,
        });
    }
    if slice.values.len() != tree.level_nodes(slice.level).len() {
        return Err(Error::InvalidProcess("slice width mismatch".into()));
    }
    // Node-indexed scratch so each one-step expectation reads its children.
    let mut scratch: Vec<T> = vec![T::zero(); tree.node_count()];
    for (i, &n) in tree.level_nodes(slice.level).iter().enumerate() {
        scratch[n] = slice.values[i].clone();
    }
    let mut level = slice.level;
    while level > target {
        level -= 1;
        for &n in tree.level_nodes(level) {
            scratch[n] = tree.step_expectation(n, &scratch);
        }
    }
    Ok(LevelSlice {
        level: target,
        values: tree
            .level_nodes(target)
            .iter()
            .map(|&n| scratch[n].clone())
            .collect(),
    })
}

/// Conditional expectation of a terminal payoff at every level at once:
/// the closing martingale `E[v | F_k]` as an adapted process.
pub fn closing_martingale<T: Scalar>(tree: &FiltrationTree, rv: &RandomVariable<T>) -> AdaptedProcess<T> {
    let mut values = vec![T::zero(); tree.node_count()];
    for (i, &leaf) in tree.leaves().iter().enumerate() {
        values[leaf] = rv.values[i].clone();
    }
    for level in (0..tree.steps()).rev() {
        for &n in tree.level_nodes(level) {
            values[n] = tree.step_expectation(n, &values);
        }
    }
    AdaptedProcess {
        values,
        pre_time_zero: None,
    }
}

/// Predictable projection: the level-k slice becomes `E[X_k | F_{k-1}]`,
/// constant across siblings; the level-0 value is already deterministic.
pub fn predictable_projection<T: Scalar>(
    tree: &FiltrationTree,
    x: &AdaptedProcess<T>,
) -> AdaptedProcess<T> {
    let mut values = vec![T::zero(); tree.node_count()];
    values[tree.root()] = x.value(tree.root()).clone();
    for node in tree.nodes() {
        if !tree.is_leaf(node) {
            let e = tree.step_expectation(node, x.values());
            for &c in tree.children(node) {
                values[c] = e.clone();
            }
        }
    }
    AdaptedProcess {
        values,
        pre_time_zero: x.pre_time_zero.clone(),
    }
}

/// `‖X‖_{R∞}`: on a finite tree the running-sup essential bound is the
/// maximum of `|X|` over all nodes.
pub fn sup_norm<T: Scalar>(x: &AdaptedProcess<T>) -> T {
    let mut best = T::zero();
    for v in &x.values {
        let a = v.abs();
        if a > best {
            best = a;
        }
    }
    best
}

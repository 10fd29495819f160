//! Independent oracles used by the acceptance suite and module tests.
//!
//! Everything here deliberately avoids the library's production code paths:
//! path enumeration instead of node-weight sums, an independently written
//! dynamic program for optimal stopping, and direct maxima over extreme
//! points. Keep it that way — these are the cross-checks.

use crate::filtration::{AdaptedProcess, FiltrationTree, NodeId};
use crate::scalar::Scalar;
use num::BigRational;

/// Root-to-leaf paths of the tree, each as the list of node ids.
pub fn all_paths(tree: &FiltrationTree) -> Vec<Vec<NodeId>> {
    tree.leaves()
        .iter()
        .map(|&leaf| {
            let mut path = vec![leaf];
            let mut n = leaf;
            while let Some(p) = tree.parent(n) {
                path.push(p);
                n = p;
            }
            path.reverse();
            path
        })
        .collect()
}

/// Brute-force evaluation of `E[Σ X_k Δa_k]` by summing along every path.
pub fn linear_form_pathwise<T: Scalar>(
    tree: &FiltrationTree,
    a: &AdaptedProcess<T>,
    x: &AdaptedProcess<T>,
) -> T {
    let mut acc = T::zero();
    for path in all_paths(tree) {
        let leaf = *path.last().unwrap();
        let mut along = T::zero();
        let mut prev = T::zero();
        for &n in &path {
            let da = a.value(n).clone() - prev.clone();
            along = along + x.value(n).clone() * da;
            prev = a.value(n).clone();
        }
        acc = acc + T::from_rational(tree.path_prob(leaf)) * along;
    }
    acc
}

/// Brute-force conditional expectation of leaf values at a node: direct
/// weighted sum over the leaves below it, normalized by the subtree mass.
pub fn conditional_expectation_bruteforce(
    tree: &FiltrationTree,
    leaf_values: &[BigRational],
    node: NodeId,
) -> BigRational {
    use num::Zero;
    let mut mass = BigRational::zero();
    let mut acc = BigRational::zero();
    for (i, &leaf) in tree.leaves().iter().enumerate() {
        let mut cur = leaf;
        let mut below = false;
        loop {
            if cur == node {
                below = true;
                break;
            }
            match tree.parent(cur) {
                Some(p) => cur = p,
                None => break,
            }
        }
        if below {
            mass += tree.path_prob(leaf);
            acc += tree.path_prob(leaf) * leaf_values[i].clone();
        }
    }
    acc / mass
}

/// Snell envelope of the reward process `r` by backward dynamic programming,
/// written independently of the reflected solver:
/// `V_N = r_N`, `V_k = max(r_k, E[V_{k+1} | F_k])`.
pub fn snell_envelope_f64(tree: &FiltrationTree, reward: &AdaptedProcess<f64>) -> AdaptedProcess<f64> {
    let mut values = vec![0.0f64; tree.node_count()];
    for &leaf in tree.leaves() {
        values[leaf] = *reward.value(leaf);
    }
    for level in (0..tree.steps()).rev() {
        for &n in tree.level_nodes(level) {
            let mut cont = 0.0f64;
            for &c in tree.children(n) {
                cont += f64::from_rational(tree.edge_prob(c)) * values[c];
            }
            let stop = *reward.value(n);
            values[n] = if stop > cont { stop } else { cont };
        }
    }
    AdaptedProcess::new(tree, values).unwrap()
}

/// Exact rational Snell envelope, for cross-checking optimal-stopping values
/// produced by measure enumeration.
pub fn snell_envelope_rational(
    tree: &FiltrationTree,
    reward: &AdaptedProcess<BigRational>,
) -> AdaptedProcess<BigRational> {
    use num::Zero;
    let mut values = vec![BigRational::zero(); tree.node_count()];
    for &leaf in tree.leaves() {
        values[leaf] = reward.value(leaf).clone();
    }
    for level in (0..tree.steps()).rev() {
        for &n in tree.level_nodes(level) {
            let mut cont = BigRational::zero();
            for &c in tree.children(n) {
                cont += tree.edge_prob(c) * values[c].clone();
            }
            let stop = reward.value(n).clone();
            values[n] = if stop > cont { stop } else { cont };
        }
    }
    AdaptedProcess::new(tree, values).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn paths_cover_all_leaves() {
        let tree = FiltrationTree::binary(3, 1.0);
        let paths = all_paths(&tree);
        assert_eq!(paths.len(), 8);
        for p in &paths {
            assert_eq!(p.len(), 4);
            assert_eq!(p[0], tree.root());
        }
    }

    #[test]
    fn bruteforce_conditional_expectation_matches_fast_path() {
        let tree = FiltrationTree::binary(3, 1.0);
        let leaf_values: Vec<BigRational> = (0..8).map(|i| rat(3 * i - 5, 4)).collect();
        let rv = crate::filtration::RandomVariable::new(&tree, leaf_values.clone()).unwrap();
        let m = crate::filtration::closing_martingale(&tree, &rv);
        for n in tree.nodes() {
            assert_eq!(
                conditional_expectation_bruteforce(&tree, &leaf_values, n),
                *m.value(n)
            );
        }
    }
}

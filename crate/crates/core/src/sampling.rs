//! Seeded generators for random trees, measures, and processes.
//!
//! Everything here is deterministic given the `Rng` state, which keeps
//! reports byte-reproducible across runs with the same seed.

use crate::filtration::{AdaptedProcess, FiltrationTree, TreeBuilder};
use crate::scalar::rat;
use num::{BigRational, One, Zero};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random tree of exactly `depth` steps with per-node branching in
/// `1..=max_branching` and small-denominator rational transition
/// probabilities. Node growth is capped so deep trees stay tractable.
pub fn random_tree(
    rng: &mut impl Rng,
    depth: usize,
    max_branching: usize,
    horizon: f64,
) -> FiltrationTree {
    let mut b = TreeBuilder::new(horizon);
    let mut frontier = vec![b.root()];
    for _ in 0..depth {
        let mut next = Vec::new();
        let wide = frontier.len() > 120;
        for node in frontier {
            let fanout = if wide {
                1
            } else {
                rng.gen_range(1..=max_branching.max(1))
            };
            let weights: Vec<u32> = (0..fanout).map(|_| rng.gen_range(1..=6)).collect();
            let total: u32 = weights.iter().sum();
            let probs: Vec<BigRational> = weights
                .iter()
                .map(|&w| rat(w as i64, total as i64))
                .collect();
            next.extend(b.add_children(node, &probs));
        }
        frontier = next;
    }
    b.finish().expect("generated tree is valid")
}

/// Random rational in `[-bound, bound]` with denominator up to 8.
pub fn random_rational(rng: &mut impl Rng, bound: i64) -> BigRational {
    let den = rng.gen_range(1..=8i64);
    let num = rng.gen_range(-bound * den..=bound * den);
    rat(num, den)
}

/// Random bounded adapted process.
pub fn random_process(
    rng: &mut impl Rng,
    tree: &FiltrationTree,
    bound: i64,
) -> AdaptedProcess<BigRational> {
    let values = (0..tree.node_count())
        .map(|_| random_rational(rng, bound))
        .collect();
    AdaptedProcess::new(tree, values).unwrap()
}

/// Random non-decreasing process with `a_{0-} = 0` and `E[a_T] = 1`, i.e. a
/// normalized optional measure. Increments are sparse so that exhaustion
/// before the horizon actually occurs.
pub fn random_normalized_measure(
    rng: &mut impl Rng,
    tree: &FiltrationTree,
) -> AdaptedProcess<BigRational> {
    loop {
        let raw: Vec<i64> = (0..tree.node_count())
            .map(|_| {
                if rng.gen_bool(0.35) {
                    rng.gen_range(1..=4)
                } else {
                    0
                }
            })
            .collect();
        let mut mass = BigRational::zero();
        for n in tree.nodes() {
            mass += tree.path_prob(n) * BigRational::from_integer(raw[n].into());
        }
        if mass.is_zero() {
            continue;
        }
        let mut values = vec![BigRational::zero(); tree.node_count()];
        for n in tree.nodes() {
            let inc = BigRational::from_integer(raw[n].into()) / mass.clone();
            values[n] = match tree.parent(n) {
                Some(p) => values[p].clone() + inc,
                None => inc,
            };
        }
        return AdaptedProcess::new(tree, values).unwrap();
    }
}

/// Random predictable normalized measure: increments at level k are chosen
/// per parent node (hence F_{k-1}-measurable). With `deterministic` the
/// increments depend on the level only.
pub fn random_predictable_measure(
    rng: &mut impl Rng,
    tree: &FiltrationTree,
    deterministic: bool,
) -> AdaptedProcess<BigRational> {
    loop {
        // Raw increment attached to every node of a sibling group; level 0
        // gets a deterministic (possibly zero) jump.
        let mut raw = vec![0i64; tree.node_count()];
        let root_jump = if rng.gen_bool(0.25) { rng.gen_range(1..=2) } else { 0 };
        raw[tree.root()] = root_jump;
        let mut per_level: Vec<i64> = Vec::new();
        for level in 1..=tree.steps() {
            per_level.push(if rng.gen_bool(0.5) {
                rng.gen_range(1..=4)
            } else {
                0
            });
            let _ = level;
        }
        for node in tree.nodes() {
            if tree.is_leaf(node) {
                continue;
            }
            let level = tree.level_of(node) + 1;
            let group = if deterministic {
                per_level[level - 1]
            } else if rng.gen_bool(0.5) {
                rng.gen_range(0..=4)
            } else {
                0
            };
            for &c in tree.children(node) {
                raw[c] = group;
            }
        }
        let mut mass = BigRational::zero();
        for n in tree.nodes() {
            mass += tree.path_prob(n) * BigRational::from_integer(raw[n].into());
        }
        if mass.is_zero() {
            continue;
        }
        let mut values = vec![BigRational::zero(); tree.node_count()];
        for n in tree.nodes() {
            let inc = BigRational::from_integer(raw[n].into()) / mass.clone();
            values[n] = match tree.parent(n) {
                Some(p) => values[p].clone() + inc,
                None => inc,
            };
        }
        let a = AdaptedProcess::new(tree, values).unwrap();
        debug_assert!(a.is_predictable(tree));
        return a;
    }
}

/// Random nonnegative uniformly integrable martingale with `L_0 = 1`,
/// obtained by closing a random nonnegative terminal variable; with
/// probability ~1/3 the terminal variable vanishes on a subtree so that the
/// martingale absorbs at zero.
pub fn random_unit_martingale(
    rng: &mut impl Rng,
    tree: &FiltrationTree,
) -> AdaptedProcess<BigRational> {
    loop {
        let kill_zone: Option<usize> = if rng.gen_bool(0.33) {
            Some(rng.gen_range(0..tree.node_count()))
        } else {
            None
        };
        let is_killed = |mut n: usize| -> bool {
            loop {
                if Some(n) == kill_zone {
                    return true;
                }
                match tree.parent(n) {
                    Some(p) => n = p,
                    None => return false,
                }
            }
        };
        let raw: Vec<i64> = tree
            .leaves()
            .iter()
            .map(|&l| if is_killed(l) { 0 } else { rng.gen_range(0..=5) })
            .collect();
        let mut mean = BigRational::zero();
        for (i, &leaf) in tree.leaves().iter().enumerate() {
            mean += tree.path_prob(leaf) * BigRational::from_integer(raw[i].into());
        }
        if mean.is_zero() {
            continue;
        }
        let terminal: Vec<BigRational> = raw
            .iter()
            .map(|&v| BigRational::from_integer(v.into()) / mean.clone())
            .collect();
        let rv = crate::filtration::RandomVariable::new(tree, terminal).unwrap();
        return crate::filtration::closing_martingale(tree, &rv);
    }
}

/// Random non-increasing process from `D_{0-} = 1`, with exact flat spells
/// and occasional hits of zero.
pub fn random_discount(rng: &mut impl Rng, tree: &FiltrationTree) -> AdaptedProcess<BigRational> {
    let mut values = vec![BigRational::one(); tree.node_count()];
    for n in tree.nodes() {
        let prev = match tree.parent(n) {
            Some(p) => values[p].clone(),
            None => BigRational::one(),
        };
        let factor = match rng.gen_range(0..6) {
            0 => BigRational::zero(),
            1 | 2 => BigRational::one(),
            _ => rat(rng.gen_range(1..=7), 8),
        };
        values[n] = prev * factor;
    }
    AdaptedProcess::new(tree, values)
        .unwrap()
        .with_pre_time_zero(BigRational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::sup_norm;

    #[test]
    fn generators_produce_valid_instances() {
        let mut rng = seeded_rng(7);
        for _ in 0..20 {
            let depth = rng.gen_range(1..=5);
            let tree = random_tree(&mut rng, depth, 3, 1.0);
            assert_eq!(tree.steps(), depth);

            let a = random_normalized_measure(&mut rng, &tree);
            let mut mass = BigRational::zero();
            for (i, &leaf) in tree.leaves().iter().enumerate() {
                let _ = i;
                mass += tree.path_prob(leaf) * a.value(leaf);
            }
            assert_eq!(mass, BigRational::one());

            let l = random_unit_martingale(&mut rng, &tree);
            assert_eq!(*l.value(tree.root()), BigRational::one());
            for n in tree.nodes() {
                assert!(*l.value(n) >= BigRational::zero());
                if !tree.is_leaf(n) {
                    assert_eq!(tree.step_expectation(n, l.values()), *l.value(n));
                }
            }

            let d = random_discount(&mut rng, &tree);
            for n in tree.nodes() {
                let prev = d.left_value(&tree, n);
                assert!(*d.value(n) <= prev);
                assert!(*d.value(n) >= BigRational::zero());
            }

            let x = random_process(&mut rng, &tree, 3);
            assert!(sup_norm(&x) <= rat(3, 1));
        }
    }

    #[test]
    fn same_seed_same_instances() {
        let mut a = seeded_rng(99);
        let mut b = seeded_rng(99);
        let ta = random_tree(&mut a, 4, 3, 1.0);
        let tb = random_tree(&mut b, 4, 3, 1.0);
        assert_eq!(ta.node_count(), tb.node_count());
        assert_eq!(
            random_normalized_measure(&mut a, &ta),
            random_normalized_measure(&mut b, &tb)
        );
    }
}

//! Constructive deflator/discount decomposition of an optional measure.
//!
//! For a non-decreasing `a` with closing martingale `M = E[a_T | F_·]` and
//! potential `U = M − a`, the decomposition produces a nonnegative martingale
//! `L` (the model component) and a non-increasing `D` with `D_{0-} = 1` (the
//! discounting component) with `U = L·D` at every node and `a` recovered from
//! `(L, D)` by exact summation. Two conventions are exposed: the optional one
//! pairs `L` with the measure (`Δa = −L ΔD`), the predictable one pairs the
//! left limit (`Δa = −L_- ΔD`) and yields a predictable `D`.

use super::measure::OptionalMeasure;
use crate::error::{Error, Result};
use crate::filtration::{
    closing_martingale, predictable_projection, AdaptedProcess, FiltrationTree, RandomVariable,
    StoppingTime,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionMode {
    Optional,
    Predictable,
}

/// The pair `(L, D)` together with the derived objects it factorizes.
#[derive(Debug, Clone)]
pub struct Decomposition<T> {
    pub mode: DecompositionMode,
    /// Nonnegative martingale, `L_0 = total mass`.
    pub deflator: AdaptedProcess<T>,
    /// Non-increasing, `D_{0-} = 1`; predictable in predictable mode.
    pub discount: AdaptedProcess<T>,
    /// First time the measure has exhausted its path mass (`U` hits zero).
    pub exhaustion: StoppingTime,
    /// Closing martingale `M`.
    pub closing: AdaptedProcess<T>,
    /// Potential `U = M − a`.
    pub potential: AdaptedProcess<T>,
    pub total_mass: T,
}

/// Closing martingale, potential, and exhaustion time of a measure.
///
/// The potential is nonnegative and vanishes from the exhaustion time on;
/// both facts are consequences of monotonicity and are re-checked by the
/// verification report rather than here.
pub fn potential<T: Scalar>(
    tree: &FiltrationTree,
    a: &OptionalMeasure<T>,
) -> (AdaptedProcess<T>, AdaptedProcess<T>, StoppingTime) {
    let terminal: Vec<T> = tree
        .leaves()
        .iter()
        .map(|&l| a.process().value(l).clone())
        .collect();
    let closing = closing_martingale(tree, &RandomVariable { values: terminal });
    let potential = AdaptedProcess::from_fn(tree, |n| {
        closing.value(n).clone() - a.process().value(n).clone()
    });
    let exhaustion = StoppingTime::hitting(tree, |n| potential.value(n).is_zero());
    (closing, potential, exhaustion)
}

/// Decomposition of Doléans measures: `Δa = −L ΔD` with the convention
/// `a_0 = −L_0 ΔD_0`. Requires a normalized measure; use
/// [`decompose_optional_any_mass`] for general positive mass.
pub fn decompose_optional<T: Scalar>(
    tree: &FiltrationTree,
    a: &OptionalMeasure<T>,
) -> Result<Decomposition<T>> {
    a.require_normalized()?;
    decompose_optional_any_mass(tree, a)
}

pub fn decompose_optional_any_mass<T: Scalar>(
    tree: &FiltrationTree,
    a: &OptionalMeasure<T>,
) -> Result<Decomposition<T>> {
    if a.total_mass() <= &T::zero() {
        return Err(Error::InvalidMeasure(
            "decomposition requires positive total mass".into(),
        ));
    }
    let (closing, pot, exhaustion) = potential(tree, a);
    let mut deflator = vec![T::zero(); tree.node_count()];
    let mut discount = vec![T::zero(); tree.node_count()];
    for n in tree.nodes() {
        let u = pot.value(n).clone();
        let da = a.process().increment(tree, n);
        let (l_prev, d_prev, u_prev) = match tree.parent(n) {
            Some(p) => (
                deflator[p].clone(),
                discount[p].clone(),
                pot.value(p).clone(),
            ),
            // At the root: L_{0-} = mass M_0, D_{0-} = 1, and the potential
            // "before time zero" is the full mass.
            None => (a.total_mass().clone(), T::one(), a.total_mass().clone()),
        };
        // Martingale part: jump factor 1 + ΔM/U_- while the potential is
        // alive, frozen afterwards. The root carries no jump factor.
        deflator[n] = if tree.parent(n).is_none() {
            a.total_mass().clone()
        } else if u_prev > T::zero() {
            let dm = closing.increment(tree, n);
            l_prev.clone() * (T::one() + dm / u_prev.clone())
        } else {
            l_prev.clone()
        };
        // Discount part: jump factor U/(U + Δa) at every mass arrival,
        // unchanged elsewhere (the factor is vacuous when Δa = 0).
        discount[n] = if da > T::zero() {
            d_prev * u.clone() / (u + da)
        } else {
            d_prev
        };
    }
    Ok(Decomposition {
        mode: DecompositionMode::Optional,
        deflator: AdaptedProcess::new(tree, deflator)?,
        discount: AdaptedProcess::new(tree, discount)?.with_pre_time_zero(T::one()),
        exhaustion,
        closing,
        potential: pot,
        total_mass: a.total_mass().clone(),
    })
}

/// Decomposition with predictable discount: `Δa = −L_- ΔD` with
/// `L_{0-} = L_0`. Requires the input measure to be predictable.
pub fn decompose_predictable<T: Scalar>(
    tree: &FiltrationTree,
    a: &OptionalMeasure<T>,
) -> Result<Decomposition<T>> {
    a.require_normalized()?;
    if !a.process().is_predictable(tree) {
        return Err(Error::NotPredictable(
            "predictable decomposition needs sibling-constant increments".into(),
        ));
    }
    let (closing, pot, exhaustion) = potential(tree, a);
    // Projected potential ᵖU; at the root E[U_0 | F_{0-}] = U_0 since the
    // time-zero jump of a predictable measure is deterministic.
    let proj = predictable_projection(tree, &pot);
    let mut deflator = vec![T::zero(); tree.node_count()];
    let mut discount = vec![T::zero(); tree.node_count()];
    for n in tree.nodes() {
        let u = pot.value(n).clone();
        let pu = proj.value(n).clone();
        let da = a.process().increment(tree, n);
        let (l_prev, d_prev, u_prev) = match tree.parent(n) {
            Some(p) => (
                deflator[p].clone(),
                discount[p].clone(),
                pot.value(p).clone(),
            ),
            None => (a.total_mass().clone(), T::one(), a.total_mass().clone()),
        };
        deflator[n] = if tree.parent(n).is_none() {
            a.total_mass().clone()
        } else if pu > T::zero() {
            l_prev.clone() * u.clone() / pu.clone()
        } else {
            l_prev.clone()
        };
        discount[n] = if da > T::zero() {
            d_prev * pu / u_prev
        } else {
            d_prev
        };
    }
    Ok(Decomposition {
        mode: DecompositionMode::Predictable,
        deflator: AdaptedProcess::new(tree, deflator)?,
        discount: AdaptedProcess::new(tree, discount)?.with_pre_time_zero(T::one()),
        exhaustion,
        closing,
        potential: pot,
        total_mass: a.total_mass().clone(),
    })
}

/// Rebuilds the measure from a pair `(L, D)`:
/// optional mode `a_k = −Σ_{j≤k} L_j ΔD_j`, predictable mode
/// `a_k = −Σ_{j≤k} L_{j-1} ΔD_j`, exact.
pub fn recompose<T: Scalar>(
    tree: &FiltrationTree,
    deflator: &AdaptedProcess<T>,
    discount: &AdaptedProcess<T>,
    mode: DecompositionMode,
) -> Result<OptionalMeasure<T>> {
    let mut values = vec![T::zero(); tree.node_count()];
    for n in tree.nodes() {
        let d_prev = match tree.parent(n) {
            Some(p) => discount.value(p).clone(),
            None => discount.pre_time_zero().cloned().unwrap_or_else(T::one),
        };
        let dd = discount.value(n).clone() - d_prev;
        let weight = match mode {
            DecompositionMode::Optional => deflator.value(n).clone(),
            DecompositionMode::Predictable => match tree.parent(n) {
                Some(p) => deflator.value(p).clone(),
                None => deflator.value(n).clone(),
            },
        };
        let inc = T::zero() - weight * dd;
        values[n] = match tree.parent(n) {
            Some(p) => values[p].clone() + inc,
            None => inc,
        };
    }
    OptionalMeasure::new(tree, AdaptedProcess::new(tree, values)?, T::zero())
}

impl<T: Scalar> Decomposition<T> {
    pub fn recompose(&self, tree: &FiltrationTree) -> Result<OptionalMeasure<T>> {
        recompose(tree, &self.deflator, &self.discount, self.mode)
    }
}

/// Same recursions coded through the subtractive SDE/additive forms instead
/// of jump products; agreement with the product construction is the
/// uniqueness check of the verification report.
pub fn decompose_alternative<T: Scalar>(
    tree: &FiltrationTree,
    a: &OptionalMeasure<T>,
    mode: DecompositionMode,
) -> Result<(AdaptedProcess<T>, AdaptedProcess<T>)> {
    let (closing, pot, _) = potential(tree, a);
    let proj = predictable_projection(tree, &pot);
    let mut deflator = vec![T::zero(); tree.node_count()];
    let mut discount = vec![T::zero(); tree.node_count()];
    for n in tree.nodes() {
        let u = pot.value(n).clone();
        let pu = proj.value(n).clone();
        let da = a.process().increment(tree, n);
        let (l_prev, d_prev, u_prev) = match tree.parent(n) {
            Some(p) => (
                deflator[p].clone(),
                discount[p].clone(),
                pot.value(p).clone(),
            ),
            None => (a.total_mass().clone(), T::one(), a.total_mass().clone()),
        };
        deflator[n] = match mode {
            DecompositionMode::Optional => {
                if tree.parent(n).is_none() {
                    a.total_mass().clone()
                } else if u_prev > T::zero() {
                    let dm = closing.increment(tree, n);
                    l_prev.clone() + l_prev.clone() * dm / u_prev.clone()
                } else {
                    l_prev.clone()
                }
            }
            DecompositionMode::Predictable => {
                if tree.parent(n).is_none() {
                    a.total_mass().clone()
                } else if pu > T::zero() {
                    let dm = closing.increment(tree, n);
                    l_prev.clone() + l_prev.clone() * dm / pu.clone()
                } else {
                    l_prev.clone()
                }
            }
        };
        discount[n] = match mode {
            DecompositionMode::Optional => {
                if da > T::zero() {
                    d_prev.clone() - d_prev * da.clone() / (u + da)
                } else {
                    d_prev
                }
            }
            DecompositionMode::Predictable => {
                if da > T::zero() {
                    d_prev.clone() - d_prev * da / u_prev
                } else {
                    d_prev
                }
            }
        };
    }
    Ok((
        AdaptedProcess::new(tree, deflator)?,
        AdaptedProcess::new(tree, discount)?.with_pre_time_zero(T::one()),
    ))
}

/// Pathwise bracket `Σ_k ΔM_k Δa_k`: zero at every node exactly when the
/// optional and predictable decompositions coincide.
pub fn closing_bracket_vanishes<T: Scalar>(tree: &FiltrationTree, a: &OptionalMeasure<T>) -> bool {
    let (closing, _, _) = potential(tree, a);
    for n in tree.nodes() {
        if tree.parent(n).is_none() {
            continue;
        }
        let dm = closing.increment(tree, n);
        let da = a.process().increment(tree, n);
        if !(dm * da).is_zero() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num::{BigRational, One, Zero};

    fn deterministic_measure(values: &[(i64, i64)]) -> (FiltrationTree, OptionalMeasure<BigRational>) {
        let tree = FiltrationTree::deterministic(values.len() - 1, 1.0);
        let vals: Vec<BigRational> = values.iter().map(|&(n, d)| rat(n, d)).collect();
        let a = AdaptedProcess::new(&tree, vals).unwrap();
        let m = OptionalMeasure::exact(&tree, a).unwrap();
        (tree, m)
    }

    #[test]
    fn potential_of_deterministic_staircase() {
        let (tree, a) = deterministic_measure(&[(1, 4), (1, 2), (1, 1)]);
        let (_, u, tau) = potential(&tree, &a);
        assert_eq!(u.values(), &[rat(3, 4), rat(1, 2), rat(0, 1)]);
        assert_eq!(tau.stop_level(&tree, tree.leaves()[0]), 2);
    }

    #[test]
    fn potential_of_terminal_mass() {
        let tree = FiltrationTree::binary(2, 1.0);
        let a = OptionalMeasure::exact(&tree, AdaptedProcess::single_payment(&tree, rat(1, 1), 2))
            .unwrap();
        let (_, u, tau) = potential(&tree, &a);
        for n in tree.nodes() {
            let expected = if tree.level_of(n) < 2 { rat(1, 1) } else { rat(0, 1) };
            assert_eq!(*u.value(n), expected);
        }
        for &leaf in tree.leaves() {
            assert_eq!(tau.stop_level(&tree, leaf), 2);
        }
    }

    #[test]
    fn potential_of_immediate_mass() {
        let (tree, a) = deterministic_measure(&[(1, 1), (1, 1), (1, 1)]);
        let (_, u, tau) = potential(&tree, &a);
        for n in tree.nodes() {
            assert!(u.value(n).is_zero());
        }
        assert_eq!(tau.stop_level(&tree, tree.leaves()[0]), 0);
    }

    #[test]
    fn deterministic_staircase_decomposes_to_one_minus_a() {
        let (tree, a) = deterministic_measure(&[(1, 4), (1, 2), (1, 1)]);
        let dec = decompose_optional(&tree, &a).unwrap();
        assert_eq!(dec.deflator.values(), &[rat(1, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(dec.discount.values(), &[rat(3, 4), rat(1, 2), rat(0, 1)]);
        assert_eq!(dec.recompose(&tree).unwrap(), a);
    }

    #[test]
    fn terminal_mass_decomposes_to_closing_martingale() {
        let tree = FiltrationTree::binary(2, 1.0);
        // Random-ish positive terminal mass with expectation one.
        let leaf_vals = vec![rat(1, 2), rat(3, 2), rat(1, 1), rat(1, 1)];
        let mut values = vec![BigRational::zero(); tree.node_count()];
        for (i, &l) in tree.leaves().iter().enumerate() {
            values[l] = leaf_vals[i].clone();
        }
        let a = OptionalMeasure::exact(&tree, AdaptedProcess::new(&tree, values).unwrap()).unwrap();
        let dec = decompose_optional(&tree, &a).unwrap();
        for n in tree.nodes() {
            assert_eq!(dec.deflator.value(n), dec.closing.value(n));
            let expected_d = if tree.level_of(n) < 2 { rat(1, 1) } else { rat(0, 1) };
            assert_eq!(*dec.discount.value(n), expected_d);
        }
        assert_eq!(dec.recompose(&tree).unwrap(), a);
    }

    #[test]
    fn immediate_exhaustion() {
        let (tree, a) = deterministic_measure(&[(1, 1), (1, 1)]);
        let dec = decompose_optional(&tree, &a).unwrap();
        assert_eq!(*dec.discount.value(tree.root()), rat(0, 1));
        assert_eq!(dec.deflator.values(), &[rat(1, 1), rat(1, 1)]);
        assert_eq!(dec.exhaustion.stop_level(&tree, tree.leaves()[0]), 0);
        assert_eq!(dec.recompose(&tree).unwrap(), a);
    }

    #[test]
    fn single_deterministic_jump_predictable() {
        let (tree, a) = deterministic_measure(&[(0, 1), (1, 1), (1, 1)]);
        let dec = decompose_predictable(&tree, &a).unwrap();
        assert_eq!(dec.discount.values(), &[rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(dec.deflator.values(), &[rat(1, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(dec.recompose(&tree).unwrap(), a);
        assert!(dec.discount.is_predictable(&tree));
    }

    #[test]
    fn deterministic_measures_have_coinciding_decompositions() {
        let (tree, a) = deterministic_measure(&[(1, 4), (1, 2), (1, 1)]);
        assert!(closing_bracket_vanishes(&tree, &a));
        let opt = decompose_optional(&tree, &a).unwrap();
        let pre = decompose_predictable(&tree, &a).unwrap();
        assert_eq!(opt.deflator, pre.deflator);
        assert_eq!(opt.discount, pre.discount);
    }

    /// Predictable measure whose closing martingale jumps at the same step as
    /// the measure: the two decompositions must differ yet both round-trip.
    #[test]
    fn bracket_instance_separates_the_conventions() {
        let tree = FiltrationTree::binary(2, 1.0);
        let mut values = vec![BigRational::zero(); tree.node_count()];
        // Deterministic jump 1/2 at level 1; level-2 jump depends on the
        // level-1 node (3/4 up, 1/4 down) and is still predictable.
        let l1 = tree.level_nodes(1).to_vec();
        for &n in &l1 {
            values[n] = rat(1, 2);
        }
        for &n in tree.level_nodes(2) {
            let parent = tree.parent(n).unwrap();
            let extra = if parent == l1[0] { rat(3, 4) } else { rat(1, 4) };
            values[n] = rat(1, 2) + extra;
        }
        let a = OptionalMeasure::exact(&tree, AdaptedProcess::new(&tree, values).unwrap()).unwrap();
        assert!(a.is_normalized());
        assert!(a.process().is_predictable(&tree));
        assert!(!closing_bracket_vanishes(&tree, &a));

        let opt = decompose_optional(&tree, &a).unwrap();
        let pre = decompose_predictable(&tree, &a).unwrap();
        assert!(opt.discount != pre.discount || opt.deflator != pre.deflator);
        assert_eq!(opt.recompose(&tree).unwrap(), a);
        assert_eq!(pre.recompose(&tree).unwrap(), a);
        assert!(pre.discount.is_predictable(&tree));
    }

    #[test]
    fn recompose_of_trivial_pair() {
        let (tree, a) = deterministic_measure(&[(1, 4), (1, 2), (1, 1)]);
        let one = AdaptedProcess::constant(&tree, BigRational::one());
        let d = AdaptedProcess::from_fn(&tree, |n| BigRational::one() - a.process().value(n).clone())
            .with_pre_time_zero(BigRational::one());
        let rebuilt = recompose(&tree, &one, &d, DecompositionMode::Optional).unwrap();
        assert_eq!(rebuilt, a);
    }

    #[test]
    fn non_normalized_requires_explicit_mass_entry_point() {
        let (tree, _) = deterministic_measure(&[(1, 4), (1, 2), (1, 1)]);
        let a2 = OptionalMeasure::exact(
            &tree,
            AdaptedProcess::new(&tree, vec![rat(1, 2), rat(1, 1), rat(2, 1)]).unwrap(),
        )
        .unwrap();
        assert!(decompose_optional(&tree, &a2).is_err());
        let dec = decompose_optional_any_mass(&tree, &a2).unwrap();
        assert_eq!(*dec.deflator.value(tree.root()), rat(2, 1));
        assert_eq!(dec.recompose(&tree).unwrap(), a2);
    }
}

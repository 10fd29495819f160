//! Measures on the optional σ-field and their linear forms.
//!
//! Through the Doléans correspondence a measure is carried by a
//! non-decreasing adapted process `a` with `a_{0-} = 0`; the pairing with a
//! bounded process is `E[Σ_k X_k Δa_k]`, jump at time zero included.

use crate::error::{Error, Result};
use crate::filtration::{predictable_projection, AdaptedProcess, FiltrationTree};
use crate::scalar::Scalar;

/// Non-decreasing adapted process with `a_{0-} = 0`; carries one optional
/// measure. Normalized (total mass one) instances form the dual unit set.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionalMeasure<T> {
    a: AdaptedProcess<T>,
    total_mass: T,
}

impl<T: Scalar> OptionalMeasure<T> {
    /// Validates monotonicity and positivity; `tol` relaxes the checks for
    /// floating-point instances (pass zero for exact input).
    pub fn new(tree: &FiltrationTree, a: AdaptedProcess<T>, tol: T) -> Result<Self> {
        if a.len() != tree.node_count() {
            return Err(Error::InvalidMeasure("value count mismatch".into()));
        }
        if let Some(pre) = a.pre_time_zero() {
            if pre.abs() > tol {
                return Err(Error::InvalidMeasure("a_{0-} must be 0".into()));
            }
        }
        for n in tree.nodes() {
            let inc = a.increment(tree, n);
            if inc < T::zero() - tol.clone() {
                return Err(Error::InvalidMeasure(format!(
                    "negative increment {inc} at node {n}"
                )));
            }
        }
        let total_mass = tree.expect_terminal(
            &tree
                .leaves()
                .iter()
                .map(|&l| a.value(l).clone())
                .collect::<Vec<_>>(),
        );
        Ok(OptionalMeasure { a, total_mass })
    }

    pub fn exact(tree: &FiltrationTree, a: AdaptedProcess<T>) -> Result<Self> {
        Self::new(tree, a, T::zero())
    }

    pub fn process(&self) -> &AdaptedProcess<T> {
        &self.a
    }

    pub fn total_mass(&self) -> &T {
        &self.total_mass
    }

    pub fn is_normalized(&self) -> bool {
        self.total_mass == T::one()
    }

    pub fn require_normalized(&self) -> Result<()> {
        if !self.is_normalized() {
            return Err(Error::NotNormalized {
                mass: self.total_mass.to_string(),
            });
        }
        Ok(())
    }

    /// Unit mass concentrated at a single node: the jump is `1 / P(node)`
    /// there, making this an extreme point of the normalized measures.
    pub fn dirac(tree: &FiltrationTree, node: usize) -> Self {
        let weight = T::one() / T::from_rational(tree.path_prob(node));
        let mut values = vec![T::zero(); tree.node_count()];
        for n in tree.nodes() {
            if is_descendant(tree, n, node) {
                values[n] = weight.clone();
            }
        }
        let a = AdaptedProcess::new(tree, values).unwrap();
        OptionalMeasure::new(tree, a, T::zero()).expect("dirac measure is valid")
    }
}

fn is_descendant(tree: &FiltrationTree, mut node: usize, ancestor: usize) -> bool {
    loop {
        if node == ancestor {
            return true;
        }
        match tree.parent(node) {
            Some(p) => node = p,
            None => return false,
        }
    }
}

/// `E[Σ_k X_k Δa_k]` — expectation of X under the measure carried by `a`.
pub fn linear_form<T: Scalar>(
    tree: &FiltrationTree,
    a: &OptionalMeasure<T>,
    x: &AdaptedProcess<T>,
) -> T {
    let mut acc = T::zero();
    for n in tree.nodes() {
        let inc = a.a.increment(tree, n);
        if !inc.is_zero() {
            acc = acc + T::from_rational(tree.path_prob(n)) * x.value(n).clone() * inc;
        }
    }
    acc
}

/// Pair (predictable part, optional part) of non-decreasing processes; the
/// predictable part carries no jump at zero. In discrete time every process
/// is purely discontinuous, so no further condition is placed on the
/// optional part.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedMeasure<T> {
    pub predictable_part: AdaptedProcess<T>,
    pub optional_part: AdaptedProcess<T>,
}

impl<T: Scalar> PairedMeasure<T> {
    pub fn new(
        tree: &FiltrationTree,
        predictable_part: AdaptedProcess<T>,
        optional_part: AdaptedProcess<T>,
        tol: T,
    ) -> Result<Self> {
        if !predictable_part.is_predictable(tree) {
            return Err(Error::NotPredictable(
                "predictable component fails the sibling-constant check".into(),
            ));
        }
        if predictable_part.value(tree.root()).abs() > tol {
            return Err(Error::InvalidMeasure(
                "predictable component must vanish at time 0".into(),
            ));
        }
        for n in tree.nodes() {
            for (part, name) in [
                (&predictable_part, "predictable"),
                (&optional_part, "optional"),
            ] {
                let inc = part.increment(tree, n);
                if inc < T::zero() - tol.clone() {
                    return Err(Error::InvalidMeasure(format!(
                        "negative {name} increment at node {n}"
                    )));
                }
            }
        }
        Ok(PairedMeasure {
            predictable_part,
            optional_part,
        })
    }

    /// `E[Var(a_pr) + Var(a_op)]`; for non-decreasing components this is the
    /// expected terminal value of their sum.
    pub fn norm(&self, tree: &FiltrationTree) -> T {
        let leaves: Vec<T> = tree
            .leaves()
            .iter()
            .map(|&l| {
                self.predictable_part.value(l).clone() + self.optional_part.value(l).clone()
            })
            .collect();
        tree.expect_terminal(&leaves)
    }

    /// Embeds a plain optional measure as a pair with empty predictable slot.
    pub fn from_optional(tree: &FiltrationTree, a: &OptionalMeasure<T>) -> Self {
        PairedMeasure {
            predictable_part: AdaptedProcess::zero(tree),
            optional_part: a.process().clone(),
        }
    }
}

/// Linear form of a paired measure:
/// `E[Σ_{k≥1} X_{k-1} Δa_pr_k + Σ_{k≥0} X_k Δa_op_k]`.
pub fn paired_linear_form<T: Scalar>(
    tree: &FiltrationTree,
    pair: &PairedMeasure<T>,
    x: &AdaptedProcess<T>,
) -> T {
    let mut acc = T::zero();
    for n in tree.nodes() {
        let w = T::from_rational(tree.path_prob(n));
        let inc_op = pair.optional_part.increment(tree, n);
        if !inc_op.is_zero() {
            acc = acc + w.clone() * x.value(n).clone() * inc_op;
        }
        if tree.parent(n).is_some() {
            let inc_pr = pair.predictable_part.increment(tree, n);
            if !inc_pr.is_zero() {
                acc = acc + w * x.left_value(tree, n) * inc_pr;
            }
        }
    }
    acc
}

/// Alternative evaluator of the same form, rewriting the predictable-part
/// pairing through the merged measure and the predictable projection of the
/// jumps of X: `E[Σ X_k Δ(a_pr + a_op)_k − Σ_{k≥1} ᵖ(ΔX)_k Δa_pr_k]`.
/// Agrees with [`paired_linear_form`] exactly; the pair of evaluators is the
/// cross-check for the rewriting.
pub fn paired_linear_form_projected<T: Scalar>(
    tree: &FiltrationTree,
    pair: &PairedMeasure<T>,
    x: &AdaptedProcess<T>,
) -> T {
    let jumps = AdaptedProcess::from_fn(tree, |n| x.increment(tree, n));
    let proj = predictable_projection(tree, &jumps);
    let mut acc = T::zero();
    for n in tree.nodes() {
        let w = T::from_rational(tree.path_prob(n));
        let inc_total =
            pair.optional_part.increment(tree, n) + pair.predictable_part.increment(tree, n);
        if !inc_total.is_zero() {
            acc = acc + w.clone() * x.value(n).clone() * inc_total;
        }
        if tree.parent(n).is_some() {
            let inc_pr = pair.predictable_part.increment(tree, n);
            if !inc_pr.is_zero() {
                acc = acc - w * proj.value(n).clone() * inc_pr;
            }
        }
    }
    acc
}

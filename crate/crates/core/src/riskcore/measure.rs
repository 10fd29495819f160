//! The risk-measure interface and the built-in primal measures.

use crate::filtration::{AdaptedProcess, FiltrationTree, LevelSlice};
use crate::scalar::Scalar;

/// Monetary convex risk measure for processes.
///
/// `evaluate` must be total on bounded adapted processes. The axioms (cash
/// invariance for time-zero payments, inverse monotonicity, convexity,
/// normalization) are not enforced by the trait; the harness in
/// [`crate::riskcore::axiom_check`] checks them on samples.
pub trait RiskMeasure<T: Scalar>: Sync {
    fn evaluate(&self, tree: &FiltrationTree, x: &AdaptedProcess<T>) -> T;

    /// Conditional evaluation at a level: one value per level node, when the
    /// measure supports dynamic evaluation.
    fn conditional(
        &self,
        _tree: &FiltrationTree,
        _level: usize,
        _x: &AdaptedProcess<T>,
    ) -> Option<LevelSlice<T>> {
        None
    }

    /// True when the measure promises cash additivity at the given level,
    /// letting the subadditivity harness assert the stronger equality.
    fn declares_cash_additive_at(&self, _level: usize) -> bool {
        false
    }

    /// Piecewise-linear measures admit exact conjugation by finite search.
    fn is_piecewise_linear(&self) -> bool {
        false
    }
}

/// `ρ(X) = E[−X_T]`: the risk of the terminal value only.
pub struct TerminalExpectation;

impl<T: Scalar> RiskMeasure<T> for TerminalExpectation {
    fn evaluate(&self, tree: &FiltrationTree, x: &AdaptedProcess<T>) -> T {
        let terminal: Vec<T> = tree
            .leaves()
            .iter()
            .map(|&l| T::zero() - x.value(l).clone())
            .collect();
        tree.expect_terminal(&terminal)
    }

    fn conditional(
        &self,
        tree: &FiltrationTree,
        level: usize,
        x: &AdaptedProcess<T>,
    ) -> Option<LevelSlice<T>> {
        let terminal = LevelSlice {
            level: tree.steps(),
            values: tree
                .leaves()
                .iter()
                .map(|&l| T::zero() - x.value(l).clone())
                .collect(),
        };
        crate::filtration::conditional_expectation(tree, &terminal, level).ok()
    }

    fn declares_cash_additive_at(&self, _level: usize) -> bool {
        true
    }

    fn is_piecewise_linear(&self) -> bool {
        true
    }
}

/// Worst case over scenarios and dates: `ρ(X) = max over nodes of (−X)`.
/// This is the coherent measure dual to the whole normalized-measure set.
pub struct WorstCase;

impl<T: Scalar> RiskMeasure<T> for WorstCase {
    fn evaluate(&self, tree: &FiltrationTree, x: &AdaptedProcess<T>) -> T {
        let mut best: Option<T> = None;
        for n in tree.nodes() {
            let v = T::zero() - x.value(n).clone();
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
        best.expect("non-empty tree")
    }

    fn is_piecewise_linear(&self) -> bool {
        true
    }
}

/// Evaluation closure of an ad-hoc measure.
pub type EvalFn<T> = Box<dyn Fn(&FiltrationTree, &AdaptedProcess<T>) -> T + Sync>;

/// Ad-hoc measure from a closure; the test harnesses use it for constructed
/// failures.
pub struct FnRiskMeasure<T: Scalar> {
    pub f: EvalFn<T>,
}

impl<T: Scalar> RiskMeasure<T> for FnRiskMeasure<T> {
    fn evaluate(&self, tree: &FiltrationTree, x: &AdaptedProcess<T>) -> T {
        (self.f)(tree, x)
    }
}

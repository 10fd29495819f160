//! Dual controls, penalty functions, and the robust evaluator
//! `ρ(X) = max over controls of a(−X) − γ(a)`.

use crate::decomposition::{linear_form, paired_linear_form, OptionalMeasure, PairedMeasure};
use crate::error::{Error, Result};
use crate::filtration::{AdaptedProcess, FiltrationTree};
use crate::riskcore::measure::RiskMeasure;
use crate::scalar::Scalar;
use rayon::prelude::*;

/// Which linear-form pairing the evaluator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualForm {
    /// Plain optional measures.
    Z1,
    /// Pairs (predictable part, optional part).
    Z1d,
    /// Quadruples (L, D, L', D') evaluated through their deflator/discount
    /// presentation.
    S1,
}

/// Deflator/discount presentation of an optional measure (optional pairing
/// `Δa = −L ΔD`).
#[derive(Debug, Clone)]
pub struct DeflatorDiscount<T> {
    pub deflator: AdaptedProcess<T>,
    pub discount: AdaptedProcess<T>,
}

/// Quadruple splitting a paired measure into a predictable-discount part and
/// an optional-discount part; `a_pr = −Σ L_- ΔD`, `a_op = −Σ L' ΔD'`.
#[derive(Debug, Clone)]
pub struct QuadControl<T> {
    pub deflator_pr: AdaptedProcess<T>,
    pub discount_pr: AdaptedProcess<T>,
    pub deflator_op: AdaptedProcess<T>,
    pub discount_op: AdaptedProcess<T>,
}

#[derive(Debug, Clone)]
pub enum DualControl<T> {
    Measure(OptionalMeasure<T>),
    Pair(DeflatorDiscount<T>),
    Quad(QuadControl<T>),
}

impl<T: Scalar> DualControl<T> {
    /// Membership checks for the respective dual sets; `tol` relaxes the
    /// equalities for floating-point controls.
    pub fn validate(&self, tree: &FiltrationTree, tol: T) -> Result<()> {
        match self {
            DualControl::Measure(a) => {
                if (a.total_mass().clone() - T::one()).abs() > tol {
                    return Err(Error::NotNormalized {
                        mass: a.total_mass().to_string(),
                    });
                }
                Ok(())
            }
            DualControl::Pair(pair) => {
                validate_deflator(tree, &pair.deflator, &tol, "deflator")?;
                if (pair.deflator.value(tree.root()).clone() - T::one()).abs() > tol {
                    return Err(Error::InvalidControl("deflator must start at 1".into()));
                }
                validate_discount(tree, &pair.discount, &pair.deflator, &tol, false)?;
                Ok(())
            }
            DualControl::Quad(q) => {
                validate_deflator(tree, &q.deflator_pr, &tol, "predictable-slot deflator")?;
                validate_deflator(tree, &q.deflator_op, &tol, "optional-slot deflator")?;
                let mass = q.deflator_pr.value(tree.root()).clone()
                    + q.deflator_op.value(tree.root()).clone();
                if (mass - T::one()).abs() > tol {
                    return Err(Error::InvalidControl(
                        "deflator initial values must sum to 1".into(),
                    ));
                }
                validate_discount(tree, &q.discount_pr, &q.deflator_pr, &tol, true)?;
                validate_discount(tree, &q.discount_op, &q.deflator_op, &tol, false)?;
                Ok(())
            }
        }
    }

    /// The linear form `a(x)` of the control under the given dual form.
    pub fn pairing(&self, tree: &FiltrationTree, x: &AdaptedProcess<T>, form: DualForm) -> Result<T> {
        match (form, self) {
            (DualForm::Z1, DualControl::Measure(a)) => Ok(linear_form(tree, a, x)),
            (DualForm::Z1, DualControl::Pair(p)) => Ok(pair_linear_form(tree, p, x)),
            (DualForm::Z1d, DualControl::Measure(a)) => {
                // Optional measures embed with empty predictable slot.
                let pair = PairedMeasure::from_optional(tree, a);
                Ok(paired_linear_form(tree, &pair, x))
            }
            (DualForm::Z1d, DualControl::Quad(q)) => {
                let pair = q.to_paired_measure(tree)?;
                Ok(paired_linear_form(tree, &pair, x))
            }
            (DualForm::S1, DualControl::Quad(q)) => Ok(quad_linear_form(tree, q, x)),
            _ => Err(Error::FormMismatch(format!(
                "{form:?} cannot evaluate this control kind"
            ))),
        }
    }
}

fn validate_deflator<T: Scalar>(
    tree: &FiltrationTree,
    l: &AdaptedProcess<T>,
    tol: &T,
    what: &str,
) -> Result<()> {
    for n in tree.nodes() {
        if *l.value(n) < T::zero() - tol.clone() {
            return Err(Error::InvalidControl(format!("{what} negative at node {n}")));
        }
        if !tree.is_leaf(n) {
            let step = tree.step_expectation(n, l.values()) - l.value(n).clone();
            if step.abs() > *tol {
                return Err(Error::InvalidControl(format!(
                    "{what} fails the martingale property at node {n}"
                )));
            }
        }
    }
    Ok(())
}

fn validate_discount<T: Scalar>(
    tree: &FiltrationTree,
    d: &AdaptedProcess<T>,
    l: &AdaptedProcess<T>,
    tol: &T,
    predictable: bool,
) -> Result<()> {
    if let Some(pre) = d.pre_time_zero() {
        if (pre.clone() - T::one()).abs() > *tol {
            return Err(Error::InvalidControl("discount must start from 1".into()));
        }
    }
    for n in tree.nodes() {
        let prev = match tree.parent(n) {
            Some(p) => d.value(p).clone(),
            None => T::one(),
        };
        if *d.value(n) > prev + tol.clone() {
            return Err(Error::InvalidControl(format!("discount increases at node {n}")));
        }
        if *d.value(n) < T::zero() - tol.clone() {
            return Err(Error::InvalidControl(format!("discount negative at node {n}")));
        }
    }
    if predictable {
        if !d.is_predictable(tree) {
            return Err(Error::NotPredictable("predictable-slot discount".into()));
        }
        if (d.value(tree.root()).clone() - T::one()).abs() > *tol {
            return Err(Error::InvalidControl(
                "predictable-slot discount must carry no jump at time zero".into(),
            ));
        }
    }
    for &leaf in tree.leaves() {
        if *d.value(leaf) > *tol && l.value(leaf).abs() > *tol {
            return Err(Error::InvalidControl(format!(
                "terminal support condition fails at leaf {leaf}"
            )));
        }
    }
    Ok(())
}

/// `E[Σ_k X_k · (−L_k ΔD_k)]` — the optional pairing of a deflator/discount
/// pair, jump at zero included.
fn pair_linear_form<T: Scalar>(
    tree: &FiltrationTree,
    p: &DeflatorDiscount<T>,
    x: &AdaptedProcess<T>,
) -> T {
    let mut acc = T::zero();
    for n in tree.nodes() {
        let d_prev = match tree.parent(n) {
            Some(par) => p.discount.value(par).clone(),
            None => p.discount.pre_time_zero().cloned().unwrap_or_else(T::one),
        };
        let dd = p.discount.value(n).clone() - d_prev;
        if !dd.is_zero() {
            acc = acc
                - T::from_rational(tree.path_prob(n))
                    * x.value(n).clone()
                    * p.deflator.value(n).clone()
                    * dd;
        }
    }
    acc
}

/// `E[−Σ_{k≥1} X_{k-1} L_{k-1} ΔD_k − Σ_k X_k L'_k ΔD'_k]` — the direct
/// evaluation of a quadruple.
fn quad_linear_form<T: Scalar>(tree: &FiltrationTree, q: &QuadControl<T>, x: &AdaptedProcess<T>) -> T {
    let mut acc = T::zero();
    for n in tree.nodes() {
        let w = T::from_rational(tree.path_prob(n));
        if tree.parent(n).is_some() {
            let dd = q.discount_pr.value(n).clone() - q.discount_pr.left_value(tree, n);
            if !dd.is_zero() {
                acc = acc
                    - w.clone()
                        * x.left_value(tree, n)
                        * q.deflator_pr.left_value(tree, n)
                        * dd;
            }
        }
        let d_prev = match tree.parent(n) {
            Some(par) => q.discount_op.value(par).clone(),
            None => q.discount_op.pre_time_zero().cloned().unwrap_or_else(T::one),
        };
        let dd = q.discount_op.value(n).clone() - d_prev;
        if !dd.is_zero() {
            acc = acc - w * x.value(n).clone() * q.deflator_op.value(n).clone() * dd;
        }
    }
    acc
}

impl<T: Scalar> QuadControl<T> {
    /// Recomposes the quadruple into the paired measure it represents.
    pub fn to_paired_measure(&self, tree: &FiltrationTree) -> Result<PairedMeasure<T>> {
        let mut pr = vec![T::zero(); tree.node_count()];
        let mut op = vec![T::zero(); tree.node_count()];
        for n in tree.nodes() {
            let (pr_prev, op_prev) = match tree.parent(n) {
                Some(p) => (pr[p].clone(), op[p].clone()),
                None => (T::zero(), T::zero()),
            };
            let dd_pr = self.discount_pr.value(n).clone()
                - match tree.parent(n) {
                    Some(p) => self.discount_pr.value(p).clone(),
                    None => T::one(),
                };
            let dd_op = self.discount_op.value(n).clone()
                - match tree.parent(n) {
                    Some(p) => self.discount_op.value(p).clone(),
                    None => T::one(),
                };
            let l_left = match tree.parent(n) {
                Some(p) => self.deflator_pr.value(p).clone(),
                None => self.deflator_pr.value(n).clone(),
            };
            pr[n] = pr_prev - l_left * dd_pr;
            op[n] = op_prev - self.deflator_op.value(n).clone() * dd_op;
        }
        PairedMeasure::new(
            tree,
            AdaptedProcess::new(tree, pr)?,
            AdaptedProcess::new(tree, op)?,
            T::from_f64(1e-9),
        )
    }
}

/// Penalty weight of a single control.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyValue<T> {
    Finite(T),
    Infinite,
}

/// Penalty function over an enumerated control support.
#[derive(Debug, Clone)]
pub struct PenaltyFunction<T> {
    values: Vec<PenaltyValue<T>>,
}

impl<T: Scalar> PenaltyFunction<T> {
    /// Validates the normalization `inf γ = 0` over the support.
    pub fn new(values: Vec<PenaltyValue<T>>) -> Result<Self> {
        let mut min: Option<T> = None;
        for v in &values {
            if let PenaltyValue::Finite(f) = v {
                if *f < T::zero() {
                    return Err(Error::InvalidControl("negative penalty".into()));
                }
                if min.as_ref().is_none_or(|m| f < m) {
                    min = Some(f.clone());
                }
            }
        }
        match min {
            Some(m) if m.is_zero() => Ok(PenaltyFunction { values }),
            Some(m) => Err(Error::InvalidControl(format!(
                "penalty not normalized: inf = {m}"
            ))),
            None => Err(Error::InvalidControl("penalty is identically infinite".into())),
        }
    }

    pub fn zero(len: usize) -> Self {
        PenaltyFunction {
            values: vec![PenaltyValue::Finite(T::zero()); len],
        }
    }

    pub fn value(&self, i: usize) -> &PenaltyValue<T> {
        &self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RobustValue<T> {
    pub value: T,
    pub argmax: usize,
}

/// `max over controls of a(−X) − γ(a)`; ties resolve to the smallest index
/// so the reduction is order-independent. Controls are evaluated in parallel
/// when the set is large.
pub fn robust_evaluate<T: Scalar + Send + Sync>(
    tree: &FiltrationTree,
    x: &AdaptedProcess<T>,
    controls: &[DualControl<T>],
    penalty: &PenaltyFunction<T>,
    form: DualForm,
) -> Result<RobustValue<T>> {
    if controls.is_empty() {
        return Err(Error::EmptyControlSet);
    }
    if penalty.len() != controls.len() {
        return Err(Error::InvalidControl(
            "penalty support does not match control set".into(),
        ));
    }
    let neg = x.neg();
    let eval_one = |(i, c): (usize, &DualControl<T>)| -> Result<Option<(usize, T)>> {
        match penalty.value(i) {
            PenaltyValue::Infinite => Ok(None),
            PenaltyValue::Finite(g) => {
                let v = c.pairing(tree, &neg, form)? - g.clone();
                Ok(Some((i, v)))
            }
        }
    };
    let evaluated: Result<Vec<Option<(usize, T)>>> = if controls.len() >= 16 {
        controls.par_iter().enumerate().map(eval_one).collect()
    } else {
        controls.iter().enumerate().map(eval_one).collect()
    };
    let mut best: Option<(usize, T)> = None;
    for item in evaluated?.into_iter().flatten() {
        match &best {
            None => best = Some(item),
            Some((_, b)) if item.1 > *b => best = Some(item),
            _ => {}
        }
    }
    let (argmax, value) = best.ok_or(Error::EmptyControlSet)?;
    Ok(RobustValue { value, argmax })
}

/// Risk measure defined by a finite penalized control set.
pub struct RobustRiskMeasure<T> {
    pub controls: Vec<DualControl<T>>,
    pub penalty: PenaltyFunction<T>,
    pub form: DualForm,
}

impl<T: Scalar + Send + Sync> RobustRiskMeasure<T> {
    pub fn coherent(controls: Vec<DualControl<T>>, form: DualForm) -> Self {
        let penalty = PenaltyFunction::zero(controls.len());
        RobustRiskMeasure {
            controls,
            penalty,
            form,
        }
    }
}

impl<T: Scalar + Send + Sync> RiskMeasure<T> for RobustRiskMeasure<T> {
    fn evaluate(&self, tree: &FiltrationTree, x: &AdaptedProcess<T>) -> T {
        robust_evaluate(tree, x, &self.controls, &self.penalty, self.form)
            .expect("valid robust measure")
            .value
    }

    fn declares_cash_additive_at(&self, _level: usize) -> bool {
        false
    }

    fn is_piecewise_linear(&self) -> bool {
        true
    }
}

/// Extreme points of the normalized optional measures on a finite tree: unit
/// masses at single nodes (stopping the whole mass at one scenario/date).
pub fn extreme_point_controls<T: Scalar>(tree: &FiltrationTree) -> Vec<DualControl<T>> {
    tree.nodes()
        .map(|n| DualControl::Measure(OptionalMeasure::dirac(tree, n)))
        .collect()
}

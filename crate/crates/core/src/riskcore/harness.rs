//! Sample-based axiom harness, the cash-subadditivity check, and the
//! acceptance-set capital requirement.

use crate::error::{Error, Result};
use crate::filtration::{sup_norm, AdaptedProcess, FiltrationTree};
use crate::riskcore::measure::RiskMeasure;
use crate::sampling::{random_process, random_rational, seeded_rng};
use crate::scalar::Scalar;
use num::BigRational;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub samples: usize,
    pub seed: u64,
    /// Comparison tolerance; zero demands exact equality.
    pub tolerance: f64,
    /// Bound for sampled process values.
    pub bound: i64,
}

impl HarnessConfig {
    pub fn exact(seed: u64) -> Self {
        HarnessConfig {
            samples: 16,
            seed,
            tolerance: 0.0,
            bound: 3,
        }
    }

    pub fn float(seed: u64) -> Self {
        HarnessConfig {
            samples: 16,
            seed,
            tolerance: 1e-9,
            bound: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub passed: bool,
    pub violations: usize,
    pub witness: Option<String>,
}

impl CheckResult {
    fn clean() -> Self {
        CheckResult {
            passed: true,
            violations: 0,
            witness: None,
        }
    }

    fn fail(&mut self, witness: String) {
        self.passed = false;
        self.violations += 1;
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
    }
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub cash_invariance: CheckResult,
    pub monotonicity: CheckResult,
    pub convexity: CheckResult,
    pub normalization: CheckResult,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.cash_invariance.passed
            && self.monotonicity.passed
            && self.convexity.passed
            && self.normalization.passed
    }
}

fn sample_process<T: Scalar>(
    rng: &mut impl Rng,
    tree: &FiltrationTree,
    bound: i64,
) -> AdaptedProcess<T> {
    let rational = random_process(rng, tree, bound);
    AdaptedProcess::from_fn(tree, |n| T::from_rational(rational.value(n)))
}

fn sample_scalar<T: Scalar>(rng: &mut impl Rng, bound: i64) -> T {
    T::from_rational(&random_rational(rng, bound))
}

/// Checks the four axioms of a monetary convex risk measure for processes on
/// seeded samples: cash invariance for time-zero payments, inverse
/// monotonicity, convexity, and normalization.
pub fn axiom_check<T: Scalar>(
    rm: &dyn RiskMeasure<T>,
    tree: &FiltrationTree,
    cfg: &HarnessConfig,
) -> AxiomReport {
    let mut rng = seeded_rng(cfg.seed);
    let tol = T::from_f64(cfg.tolerance);

    let mut cash_invariance = CheckResult::clean();
    let mut monotonicity = CheckResult::clean();
    let mut convexity = CheckResult::clean();
    let mut normalization = CheckResult::clean();

    let zero = AdaptedProcess::zero(tree);
    let rho_zero = rm.evaluate(tree, &zero);
    if rho_zero.abs() > tol {
        normalization.fail(format!("rho(0) = {rho_zero}"));
    }

    for i in 0..cfg.samples {
        let x = sample_process::<T>(&mut rng, tree, cfg.bound);
        let rho_x = rm.evaluate(tree, &x);

        // Cash invariance: rho(X + m·1_[0,T]) = rho(X) - m.
        let m: T = sample_scalar(&mut rng, cfg.bound);
        let shifted = x.shift_from(tree, &m, 0);
        let gap = rm.evaluate(tree, &shifted) - (rho_x.clone() - m.clone());
        if gap.abs() > tol {
            cash_invariance.fail(format!("sample {i}: m = {m}, residual = {gap}"));
        }

        // Inverse monotonicity on a dominated pair: X <= X + H, H >= 0.
        let lift = sample_process::<T>(&mut rng, tree, cfg.bound).map(|v| v.abs());
        let larger = x.add(&lift);
        let rho_larger = rm.evaluate(tree, &larger);
        if rho_larger > rho_x.clone() + tol.clone() {
            monotonicity.fail(format!(
                "sample {i}: rho increased under domination by {}",
                rho_larger.clone() - rho_x.clone()
            ));
        }

        // Convexity on a random pair and weight.
        let y = sample_process::<T>(&mut rng, tree, cfg.bound);
        let lambda: T = T::from_rational(&BigRational::new(
            rng.gen_range(0..=8).into(),
            8.into(),
        ));
        let one_minus = T::one() - lambda.clone();
        let mix = x.scale(&lambda).add(&y.scale(&one_minus));
        let lhs = rm.evaluate(tree, &mix);
        let rhs = lambda.clone() * rho_x.clone() + one_minus * rm.evaluate(tree, &y);
        if lhs > rhs.clone() + tol.clone() {
            convexity.fail(format!(
                "sample {i}: lambda = {lambda}, excess = {}",
                lhs - rhs
            ));
        }
    }

    AxiomReport {
        cash_invariance,
        monotonicity,
        convexity,
        normalization,
    }
}

#[derive(Debug, Clone)]
pub struct CashSubadditivityReport {
    /// `rho(X + m·1_[t,T]) >= rho(X) − m` for m >= 0 (and `<=` for m <= 0).
    pub subadditive: CheckResult,
    /// Equality at the levels the measure declares cash additive.
    pub declared_additivity: CheckResult,
}

impl CashSubadditivityReport {
    pub fn passed(&self) -> bool {
        self.subadditive.passed && self.declared_additivity.passed
    }
}

pub fn cash_subadditivity_check<T: Scalar>(
    rm: &dyn RiskMeasure<T>,
    tree: &FiltrationTree,
    cfg: &HarnessConfig,
) -> CashSubadditivityReport {
    let mut rng = seeded_rng(cfg.seed.wrapping_add(1));
    let tol = T::from_f64(cfg.tolerance);
    let mut subadditive = CheckResult::clean();
    let mut declared_additivity = CheckResult::clean();

    for i in 0..cfg.samples {
        let x = sample_process::<T>(&mut rng, tree, cfg.bound);
        let rho_x = rm.evaluate(tree, &x);
        let level = rng.gen_range(1..=tree.steps());
        let m: T = sample_scalar(&mut rng, cfg.bound);
        let shifted = x.shift_from(tree, &m, level);
        let rho_shifted = rm.evaluate(tree, &shifted);
        let floor = rho_x.clone() - m.clone();
        let ok = if m >= T::zero() {
            rho_shifted.clone() >= floor.clone() - tol.clone()
        } else {
            rho_shifted.clone() <= floor.clone() + tol.clone()
        };
        if !ok {
            subadditive.fail(format!(
                "sample {i}: level {level}, m = {m}, rho moved past face value by {}",
                (rho_shifted.clone() - floor.clone()).abs()
            ));
        }
        if rm.declares_cash_additive_at(level) && (rho_shifted.clone() - floor.clone()).abs() > tol
        {
            declared_additivity.fail(format!(
                "sample {i}: declared additive at level {level} but residual = {}",
                (rho_shifted - floor).abs()
            ));
        }
    }

    CashSubadditivityReport {
        subadditive,
        declared_additivity,
    }
}

/// Acceptance set `{X | rho(X) <= 0}` of a monetary measure.
pub struct AcceptanceSet<'a, T: Scalar> {
    rm: &'a dyn RiskMeasure<T>,
}

impl<'a, T: Scalar> AcceptanceSet<'a, T> {
    pub fn from_measure(rm: &'a dyn RiskMeasure<T>) -> Self {
        AcceptanceSet { rm }
    }

    pub fn contains(&self, tree: &FiltrationTree, x: &AdaptedProcess<T>) -> bool {
        self.rm.evaluate(tree, x) <= T::zero()
    }
}

/// Minimal capital requirement `inf { m | X + m·1_[0,T] acceptable }` by
/// bisection; requires monotone membership, which is verified on the
/// bracket endpoints.
pub fn capital_requirement<T: Scalar>(
    acc: &AcceptanceSet<'_, T>,
    tree: &FiltrationTree,
    x: &AdaptedProcess<T>,
    tolerance: f64,
) -> Result<f64> {
    let norm = sup_norm(x).to_f64();
    let mut lo = -norm - 1.0;
    let mut hi = norm + 1.0;
    let member = |m: f64| -> bool {
        let shifted = x.shift_from(tree, &T::from_f64(m), 0);
        acc.contains(tree, &shifted)
    };
    if !member(hi) {
        return Err(Error::BracketFailure(format!(
            "X + {hi}·1 is not acceptable although it dominates the norm bound"
        )));
    }
    if member(lo) {
        return Err(Error::BracketFailure(format!(
            "X {lo}·1 is already acceptable below the norm bound"
        )));
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (hi + lo);
        if member(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (hi + lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riskcore::measure::{FnRiskMeasure, TerminalExpectation, WorstCase};
    use crate::sampling::random_tree;
    use num::{BigRational, Signed};

    #[test]
    fn terminal_expectation_passes_all_axioms() {
        let mut rng = seeded_rng(2);
        let tree = random_tree(&mut rng, 3, 3, 1.0);
        let report = axiom_check::<BigRational>(&TerminalExpectation, &tree, &HarnessConfig::exact(5));
        assert!(report.passed(), "{report:?}");
        let sub = cash_subadditivity_check::<BigRational>(
            &TerminalExpectation,
            &tree,
            &HarnessConfig::exact(5),
        );
        assert!(sub.passed(), "{sub:?}");
    }

    #[test]
    fn worst_case_passes_all_axioms() {
        let mut rng = seeded_rng(3);
        let tree = random_tree(&mut rng, 3, 3, 1.0);
        let report = axiom_check::<BigRational>(&WorstCase, &tree, &HarnessConfig::exact(6));
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn shifted_measure_fails_normalization_only() {
        let tree = FiltrationTree::binary(2, 1.0);
        let rm = FnRiskMeasure::<BigRational> {
            f: Box::new(|tree, x| {
                TerminalExpectation.evaluate(tree, x) + BigRational::from_integer(1.into())
            }),
        };
        let report = axiom_check(&rm, &tree, &HarnessConfig::exact(7));
        assert!(!report.normalization.passed);
        assert!(report.cash_invariance.passed);
        assert!(report.monotonicity.passed);
        assert!(report.convexity.passed);
    }

    #[test]
    fn capital_requirement_matches_direct_evaluation() {
        let mut rng = seeded_rng(8);
        for _ in 0..5 {
            let tree = random_tree(&mut rng, 3, 3, 1.0);
            let x = crate::sampling::random_process(&mut rng, &tree, 3);
            let rm = WorstCase;
            let acc = AcceptanceSet::from_measure(&rm as &dyn RiskMeasure<BigRational>);
            let cr = capital_requirement(&acc, &tree, &x, 1e-12).unwrap();
            let direct = rm.evaluate(&tree, &x).to_f64();
            assert!((cr - direct).abs() < 1e-9, "cr {cr} vs direct {direct}");
        }
    }

    #[test]
    fn capital_requirement_of_cash_is_its_face_value() {
        let tree = FiltrationTree::binary(2, 1.0);
        let m = BigRational::from_integer(2.into());
        let x = AdaptedProcess::constant(&tree, BigRational::from_integer((-2).into()));
        let rm = TerminalExpectation;
        let acc = AcceptanceSet::from_measure(&rm as &dyn RiskMeasure<BigRational>);
        let cr = capital_requirement(&acc, &tree, &x, 1e-12).unwrap();
        assert!((cr - m.to_f64()).abs() < 1e-9);

        let zero = AdaptedProcess::<BigRational>::zero(&tree);
        let cr0 = capital_requirement(&acc, &tree, &zero, 1e-12).unwrap();
        assert!(cr0.abs() < 1e-9);
    }

    #[test]
    fn acceptance_set_is_convex_and_solid_on_samples() {
        let mut rng = seeded_rng(31);
        let tree = random_tree(&mut rng, 3, 3, 1.0);
        let rm = WorstCase;
        let acc = AcceptanceSet::from_measure(&rm as &dyn RiskMeasure<BigRational>);
        // Members by construction: cash invariance puts X + rho(X)·1 on the
        // boundary of the acceptance set.
        let members: Vec<_> = (0..6)
            .map(|_| {
                let x = crate::sampling::random_process(&mut rng, &tree, 2);
                let rho = rm.evaluate(&tree, &x);
                x.shift_from(&tree, &rho, 0)
            })
            .collect();
        for m in &members {
            assert!(acc.contains(&tree, m));
        }
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let lambda = crate::scalar::rat(rng.gen_range(0..=4), 4);
                let mix = members[i].scale(&lambda).add(
                    &members[j].scale(&(BigRational::from_integer(1.into()) - lambda.clone())),
                );
                assert!(acc.contains(&tree, &mix), "mixture left the set");
            }
            // Solidity: dominating processes stay acceptable.
            let lift = crate::sampling::random_process(&mut rng, &tree, 2).map(|v| v.abs());
            assert!(acc.contains(&tree, &members[i].add(&lift)));
        }
    }

    #[test]
    fn non_monotone_membership_detected() {
        let tree = FiltrationTree::binary(1, 1.0);
        // Not monotone and never acceptable near the bracket top.
        let rm = FnRiskMeasure::<BigRational> {
            f: Box::new(|_tree, x| x.value(0).abs() + BigRational::from_integer(1.into())),
        };
        let acc = AcceptanceSet::from_measure(&rm as &dyn RiskMeasure<BigRational>);
        let x = AdaptedProcess::<BigRational>::zero(&tree);
        assert!(capital_requirement(&acc, &tree, &x, 1e-12).is_err());
    }

    use crate::filtration::FiltrationTree;
}

//! Monetary convex risk measures for processes: axiom harness, acceptance
//! sets and capital requirements, penalty functions, and robust dual
//! evaluation over penalized control sets.

mod cash;
mod harness;
mod measure;
mod penalty;
mod robust;

pub use cash::{additivity_gap, cash_additivity_characterization, CashAdditivityVerdict};
pub use harness::{
    axiom_check, capital_requirement, cash_subadditivity_check, AcceptanceSet, AxiomReport,
    CashSubadditivityReport, CheckResult, HarnessConfig,
};
pub use measure::{FnRiskMeasure, RiskMeasure, TerminalExpectation, WorstCase};
pub use penalty::{minimal_penalty, MinimalPenalty, PenaltySearchConfig};
pub use robust::{
    extreme_point_controls, robust_evaluate, DeflatorDiscount, DualControl, DualForm,
    PenaltyFunction, PenaltyValue, QuadControl, RobustRiskMeasure, RobustValue,
};

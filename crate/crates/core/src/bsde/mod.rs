//! Discrete backward solvers for the path-dependent BSDE and its reflected
//! variant on a binomial Brownian discretization, driver conjugation, dual
//! (tilt, rate, stop) controls, and runtime diagnostics.

mod brownian;
mod diagnostics;
mod driver;
mod dual;
mod risk;
mod solver;

pub use brownian::{binomial_weight, BrownianLattice, BrownianTree, LatticeProcess};
pub use diagnostics::bmo_diagnostic;
pub use driver::{
    optimal_control_grid, ConjugateConfig, Driver, DriverKind, GridDriver, GrowthClass,
};
pub use dual::{
    dual_evaluate_reflected, dual_evaluate_unreflected, epsilon_optimal_stop, optimal_control,
    reflected_dual_best_stop, DualControlBsde,
};
pub use risk::{
    conditional_cash_invariance_residual, hump_process, negative_example_check,
    time_consistency_residual, BsdeRiskMeasure, NegativeExampleReport,
};
pub use solver::{
    solve_bsde, solve_bsde_lattice, solve_rbsde, solve_rbsde_classical, BsdeSolution,
    DriverInput, LatticeSolution, SolverConfig,
};

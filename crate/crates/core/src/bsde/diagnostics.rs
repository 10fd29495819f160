//! Hedge-integrability diagnostic: the worst conditional remaining quadratic
//! variation of the control `Z` over all node-starts,
//! `max_n E[Σ_{j≥level(n)} |Z_j|²Δt | F_n]`, by backward accumulation.

use super::brownian::BrownianTree;
use super::solver::BsdeSolution;
use crate::scalar::Scalar;

pub fn bmo_diagnostic(bt: &BrownianTree, sol: &BsdeSolution) -> f64 {
    let tree = &bt.tree;
    let mut remaining = vec![0.0f64; tree.node_count()];
    let mut worst = 0.0f64;
    for level in (0..tree.steps()).rev() {
        for &n in tree.level_nodes(level) {
            let mut expected = 0.0;
            for &c in tree.children(n) {
                expected += f64::from_rational(tree.edge_prob(c)) * remaining[c];
            }
            let z = sol.z[n][0];
            remaining[n] = z * z * bt.dt + expected;
            if remaining[n] > worst {
                worst = remaining[n];
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsde::driver::Driver;
    use crate::bsde::solver::{solve_bsde, SolverConfig};
    use crate::filtration::AdaptedProcess;

    #[test]
    fn deterministic_payoffs_need_no_hedge() {
        let bt = BrownianTree::new(5, 1.0, 1).unwrap();
        for x in [
            AdaptedProcess::zero(&bt.tree),
            bt.path_process(|k, _| 0.3 * k as f64),
        ] {
            let sol = solve_bsde(&bt, &x, &Driver::linear(0.2, 0.3), &SolverConfig::default())
                .unwrap();
            assert_eq!(bmo_diagnostic(&bt, &sol), 0.0);
        }
    }

    #[test]
    fn sign_payoff_matches_direct_backward_sum() {
        let bt = BrownianTree::new(6, 1.0, 1).unwrap();
        let x = bt.terminal_payoff(|w| if w > 0.0 { 1.0 } else if w < 0.0 { -1.0 } else { 0.0 });
        let sol = solve_bsde(&bt, &x, &Driver::zero(), &SolverConfig::default()).unwrap();
        // Direct oracle: accumulate |Z|^2 dt along every path from each node.
        let tree = &bt.tree;
        let mut direct = vec![0.0f64; tree.node_count()];
        for level in (0..tree.steps()).rev() {
            for &n in tree.level_nodes(level) {
                let mut e = 0.0;
                for &c in tree.children(n) {
                    e += 0.5 * direct[c];
                }
                direct[n] = sol.z[n][0].powi(2) * bt.dt + e;
            }
        }
        let expected = direct.iter().cloned().fold(0.0f64, f64::max);
        assert_eq!(bmo_diagnostic(&bt, &sol), expected);
        assert!(expected > 0.0);
    }

    #[test]
    fn diagnostic_shrinks_with_the_payoff_on_homogeneous_drivers() {
        let bt = BrownianTree::new(5, 1.0, 1).unwrap();
        let x = bt.path_process(|k, w| (w + 0.1 * k as f64).sin());
        for g in [Driver::zero(), Driver::linear(0.3, 0.4)] {
            let mut previous = f64::INFINITY;
            for scale in [1.0f64, 0.5, 0.25] {
                let scaled = x.scale(&scale);
                let sol = solve_bsde(&bt, &scaled, &g, &SolverConfig::default()).unwrap();
                let v = bmo_diagnostic(&bt, &sol);
                assert!(v.is_finite());
                assert!(v <= previous + 1e-12);
                previous = v;
            }
        }
    }
}

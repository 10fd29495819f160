//! Batch front door: scenario ingestion, subcommand dispatch, deterministic
//! seeding, and machine-readable reports on stdout.
//!
//! Exit status: 0 all checks passed, 1 a check failed, 2 invalid input or
//! schema, 3 a resource guard tripped.

mod report;
mod scenario;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num::BigRational;
use procrisk::bsde::{
    bmo_diagnostic, dual_evaluate_reflected, dual_evaluate_unreflected, epsilon_optimal_stop,
    negative_example_check, optimal_control, reflected_dual_best_stop, solve_bsde, solve_rbsde,
    ConjugateConfig, DualControlBsde, SolverConfig,
};
use procrisk::decomposition::{
    decompose_optional, decompose_predictable, verify_decomposition, DecompositionMode,
};
use procrisk::riskcore::{
    axiom_check, capital_requirement, cash_subadditivity_check, extreme_point_controls,
    minimal_penalty, robust_evaluate, AcceptanceSet, DualControl, DualForm, HarnessConfig,
    MinimalPenalty, PenaltyFunction, PenaltySearchConfig, PenaltyValue, RiskMeasure,
    RobustRiskMeasure, TerminalExpectation, WorstCase,
};
use procrisk::scalar::{parse_rational, rat_string, Scalar};
use report::Report;
use scenario::{ControlSetSpec, PenaltySpec, RiskMeasureSpec, Scenario};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Report,
    Csv,
}

#[derive(Parser)]
#[command(name = "procrisk", version, about = "Risk measures for cash-flow processes on event trees")]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Seed override (the scenario's seed otherwise).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for control sweeps (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Report)]
    format: OutputFormat,
    /// Float comparison tolerance override.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Grid-steps override for grid-based trees.
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a measure into its deflator/discount pair and verify it.
    Decompose {
        #[arg(long, default_value = "a")]
        measure: String,
        #[arg(long, value_enum, default_value_t = Mode::Optional)]
        mode: Mode,
    },
    /// Risk-measure evaluation, duality, axioms, and penalties.
    Risk {
        #[command(subcommand)]
        action: RiskAction,
    },
    /// BSDE solving and dual verification.
    Bsde {
        #[command(subcommand)]
        action: BsdeAction,
    },
    /// Full acceptance run: every criterion, one check per line.
    Suite,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Optional,
    Predictable,
}

#[derive(Subcommand)]
enum RiskAction {
    /// Primal evaluation plus the bisection capital requirement.
    Eval {
        #[arg(long, default_value = "x")]
        process: String,
    },
    /// Robust evaluation over the scenario's control set.
    Dual {
        #[arg(long, default_value = "x")]
        process: String,
    },
    /// Axiom and cash-subadditivity harnesses.
    Axioms,
    /// Minimal penalty of the scenario's risk measure at a measure.
    Penalty {
        #[arg(long, default_value = "a")]
        measure: String,
    },
}

#[derive(Subcommand)]
enum BsdeAction {
    Solve {
        #[arg(long, default_value = "x")]
        process: String,
        #[arg(long)]
        reflected: bool,
    },
    Dual {
        #[arg(long, default_value = "x")]
        process: String,
        #[arg(long)]
        reflected: bool,
    },
    NegativeExample {
        #[arg(long, default_value = "obstacle")]
        process: String,
    },
}

fn main() {
    let cli = Cli::parse();
    if cli.workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    match execute(&cli) {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            std::process::exit(if report.passed { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let guard = e.downcast_ref::<procrisk::Error>().is_some_and(|pe| {
                matches!(
                    pe,
                    procrisk::Error::EnumerationGuard { .. }
                        | procrisk::Error::ContractionGuard { .. }
                )
            });
            std::process::exit(if guard { 3 } else { 2 });
        }
    }
}

fn load_scenario(cli: &Cli) -> Result<Scenario> {
    let path = cli
        .scenario
        .as_ref()
        .ok_or_else(|| anyhow!("--scenario is required for this subcommand"))?;
    Scenario::load(path)
}

fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Decompose { measure, mode } => decompose_cmd(cli, measure, *mode),
        Command::Risk { action } => risk_cmd(cli, action),
        Command::Bsde { action } => bsde_cmd(cli, action),
        Command::Suite => suite_cmd(cli),
    }
}

fn decompose_cmd(cli: &Cli, measure: &str, mode: Mode) -> Result<Report> {
    let sc = load_scenario(cli)?;
    let seed = cli.seed.unwrap_or(sc.seed);
    let tree = sc.build_tree(cli.steps)?;
    let a = sc.measure(&tree, measure)?;
    let mut report = Report::new("decompose", seed, cli.workers);
    let dec = match mode {
        Mode::Optional => decompose_optional(&tree, &a)?,
        Mode::Predictable => decompose_predictable(&tree, &a)?,
    };
    let verification = verify_decomposition(&tree, &dec, &a);
    let witness = |flag: bool| (!flag).then(|| verification.witnesses.join("; "));
    report.check("martingale_property", verification.martingale, witness(verification.martingale));
    report.check(
        "discount_monotone",
        verification.discount_monotone,
        witness(verification.discount_monotone),
    );
    report.check("class_d", verification.class_d, witness(verification.class_d));
    report.check(
        "recomposition_round_trip",
        verification.recomposition,
        witness(verification.recomposition),
    );
    report.check(
        "support_freezing",
        verification.support_freezing,
        witness(verification.support_freezing),
    );
    report.check(
        "multiplicative_identity",
        verification.multiplicative,
        witness(verification.multiplicative),
    );
    report.check(
        "uniqueness_dual_implementation",
        verification.uniqueness,
        witness(verification.uniqueness),
    );
    report.check(
        "exhaustion_consistent",
        verification.exhaustion_consistent,
        witness(verification.exhaustion_consistent),
    );

    report.value_string(
        "mode",
        match dec.mode {
            DecompositionMode::Optional => "optional".into(),
            DecompositionMode::Predictable => "predictable".into(),
        },
    );
    report.value_rational("total_mass", &dec.total_mass);
    let root = tree.root();
    report.value_rational("deflator_at_root", dec.deflator.value(root));
    report.value_rational("discount_at_root", dec.discount.value(root));
    report.value_string(
        "deflator",
        dec.deflator.values().iter().map(rat_string).collect::<Vec<_>>().join(","),
    );
    report.value_string(
        "discount",
        dec.discount.values().iter().map(rat_string).collect::<Vec<_>>().join(","),
    );
    Ok(report)
}

fn build_controls(
    sc: &Scenario,
    tree: &procrisk::filtration::FiltrationTree,
) -> Result<(Vec<DualControl<BigRational>>, PenaltyFunction<BigRational>)> {
    let controls = match sc.controls.as_ref().unwrap_or(&ControlSetSpec::ExtremePoints) {
        ControlSetSpec::ExtremePoints => extreme_point_controls::<BigRational>(tree),
        ControlSetSpec::Measures { names } => names
            .iter()
            .map(|n| Ok(DualControl::Measure(sc.measure(tree, n)?)))
            .collect::<Result<Vec<_>>>()?,
    };
    let penalty = match sc.penalty.as_ref().unwrap_or(&PenaltySpec::Zero) {
        PenaltySpec::Zero => PenaltyFunction::zero(controls.len()),
        PenaltySpec::Values { values } => {
            let parsed: Result<Vec<_>> = values
                .iter()
                .map(|s| {
                    Ok(PenaltyValue::Finite(
                        parse_rational(s).ok_or_else(|| anyhow!("`{s}` is not rational"))?,
                    ))
                })
                .collect();
            PenaltyFunction::new(parsed?)?
        }
    };
    Ok((controls, penalty))
}

fn scenario_risk_measure(
    sc: &Scenario,
    tree: &procrisk::filtration::FiltrationTree,
) -> Result<Box<dyn RiskMeasure<BigRational>>> {
    Ok(
        match sc.risk_measure.as_ref().unwrap_or(&RiskMeasureSpec::WorstCase) {
            RiskMeasureSpec::WorstCase => Box::new(WorstCase),
            RiskMeasureSpec::TerminalExpectation => Box::new(TerminalExpectation),
            RiskMeasureSpec::Robust => {
                let (controls, penalty) = build_controls(sc, tree)?;
                Box::new(RobustRiskMeasure {
                    controls,
                    penalty,
                    form: DualForm::Z1,
                })
            }
        },
    )
}

fn risk_cmd(cli: &Cli, action: &RiskAction) -> Result<Report> {
    let sc = load_scenario(cli)?;
    let seed = cli.seed.unwrap_or(sc.seed);
    let tree = sc.build_tree(cli.steps)?;
    match action {
        RiskAction::Eval { process } => {
            let mut report = Report::new("risk eval", seed, cli.workers);
            let x = sc.rational_process(&tree, process)?;
            let rm = scenario_risk_measure(&sc, &tree)?;
            let value = rm.evaluate(&tree, &x);
            report.value_rational("rho", &value);
            let acc = AcceptanceSet::from_measure(rm.as_ref());
            let cr = capital_requirement(&acc, &tree, &x, sc.tolerances.bisection)?;
            report.value_f64("capital_requirement", cr);
            let tol = cli.tolerance.unwrap_or(1e-9);
            let ok = (cr - value.to_f64()).abs() <= tol.max(sc.tolerances.bisection * 4.0);
            report.check(
                "capital_requirement_matches_evaluation",
                ok,
                (!ok).then(|| format!("bisection {cr} vs evaluation {}", value.to_f64())),
            );
            Ok(report)
        }
        RiskAction::Dual { process } => {
            let mut report = Report::new("risk dual", seed, cli.workers);
            let x = sc.rational_process(&tree, process)?;
            let (controls, penalty) = build_controls(&sc, &tree)?;
            let robust = robust_evaluate(&tree, &x, &controls, &penalty, DualForm::Z1)?;
            report.value_rational("rho", &robust.value);
            report.value_usize("argmax_control", robust.argmax);
            let rm = scenario_risk_measure(&sc, &tree)?;
            let primal = rm.evaluate(&tree, &x);
            report.value_rational("primal", &primal);
            let ok = robust.value <= primal;
            report.check(
                "dual_below_primal",
                ok,
                (!ok).then(|| format!("dual {} exceeds primal {primal}", robust.value)),
            );
            Ok(report)
        }
        RiskAction::Axioms => {
            let mut report = Report::new("risk axioms", seed, cli.workers);
            let rm = scenario_risk_measure(&sc, &tree)?;
            let cfg = HarnessConfig {
                seed,
                ..HarnessConfig::exact(seed)
            };
            let axioms = axiom_check(rm.as_ref(), &tree, &cfg);
            report.check(
                "cash_invariance",
                axioms.cash_invariance.passed,
                axioms.cash_invariance.witness.clone(),
            );
            report.check(
                "monotonicity",
                axioms.monotonicity.passed,
                axioms.monotonicity.witness.clone(),
            );
            report.check(
                "convexity",
                axioms.convexity.passed,
                axioms.convexity.witness.clone(),
            );
            report.check(
                "normalization",
                axioms.normalization.passed,
                axioms.normalization.witness.clone(),
            );
            let sub = cash_subadditivity_check(rm.as_ref(), &tree, &cfg);
            report.check(
                "cash_subadditivity",
                sub.subadditive.passed,
                sub.subadditive.witness.clone(),
            );
            report.check(
                "declared_additivity",
                sub.declared_additivity.passed,
                sub.declared_additivity.witness.clone(),
            );
            Ok(report)
        }
        RiskAction::Penalty { measure } => {
            let mut report = Report::new("risk penalty", seed, cli.workers);
            let a = sc.measure(&tree, measure)?;
            let control = DualControl::Measure(a);
            let rm = scenario_risk_measure(&sc, &tree)?;
            let (controls, penalty) = build_controls(&sc, &tree)?;
            let representation = RobustRiskMeasure {
                controls,
                penalty,
                form: DualForm::Z1,
            };
            let outcome = minimal_penalty(
                rm.as_ref(),
                &tree,
                &control,
                Some(&representation),
                &PenaltySearchConfig::default(),
            );
            match outcome {
                MinimalPenalty::Exact(v) => {
                    report.value_string("status", "exact".into());
                    report.value_rational("alpha", &v);
                }
                MinimalPenalty::LowerBound(v) => {
                    report.value_string("status", "lower_bound".into());
                    report.value_rational("alpha_lower_bound", &v);
                }
                MinimalPenalty::InfiniteSurrogate => {
                    report.value_string("status", "infinite".into());
                }
            }
            Ok(report)
        }
    }
}

fn bsde_cmd(cli: &Cli, action: &BsdeAction) -> Result<Report> {
    let sc = load_scenario(cli)?;
    let seed = cli.seed.unwrap_or(sc.seed);
    let bt = sc.build_brownian(cli.steps)?;
    let g = sc.driver()?;
    g.validate(seed, 200)?;
    let solver_cfg = SolverConfig::default();
    let tol = cli.tolerance.unwrap_or(sc.tolerances.float);
    match action {
        BsdeAction::Solve { process, reflected } => {
            let mut report = Report::new("bsde solve", seed, cli.workers);
            let x = sc.float_process(&bt, process)?;
            let sol = if *reflected {
                solve_rbsde(&bt, &x, &g, &solver_cfg)?
            } else {
                solve_bsde(&bt, &x, &g, &solver_cfg)?
            };
            let norm = procrisk::filtration::sup_norm(&x);
            let worst = bt
                .tree
                .nodes()
                .map(|n| sol.y.value(n).abs())
                .fold(0.0f64, f64::max);
            let bounded = worst <= norm + 1e-9;
            report.check(
                "bounded_by_sup_norm",
                bounded,
                (!bounded).then(|| format!("max |Y| = {worst} against norm {norm}")),
            );
            let residual = sol.step_residual(&bt, &g);
            report.check("one_step_identity", residual <= 1e-12, Some(format!("{residual:.3e}")));
            if *reflected {
                let comp = sol.complementarity(&bt);
                report.check("skorokhod_complementarity", comp <= tol, Some(format!("{comp:.3e}")));
                let above = bt.tree.nodes().all(|n| sol.y.value(n) >= &(-x.value(n) - 1e-12));
                report.check(
                    "stays_above_obstacle",
                    above,
                    (!above).then(|| "solution dips below the obstacle".to_string()),
                );
            }
            report.value_f64("y0", *sol.y.value(bt.tree.root()));
            report.value_f64("bmo_diagnostic", bmo_diagnostic(&bt, &sol));
            Ok(report)
        }
        BsdeAction::Dual { process, reflected } => {
            let mut report = Report::new("bsde dual", seed, cli.workers);
            let x = sc.float_process(&bt, process)?;
            let conj_cfg = ConjugateConfig::default();
            let sol = if *reflected {
                solve_rbsde(&bt, &x, &g, &solver_cfg)?
            } else {
                solve_bsde(&bt, &x, &g, &solver_cfg)?
            };
            let primal = *sol.y.value(bt.tree.root());
            report.value_f64("primal", primal);
            let (mut ctrl, fenchel_gap) = optimal_control(&bt, &sol, &g, &conj_cfg);
            let dual = if *reflected {
                ctrl.stop = Some(epsilon_optimal_stop(&bt, &sol, sc.tolerances.epsilon_stop));
                dual_evaluate_reflected(&bt, &x, &g, &ctrl, &conj_cfg)?
            } else {
                dual_evaluate_unreflected(&bt, &x, &g, &ctrl, &conj_cfg)?
            };
            report.value_f64("dual_at_optimizer", dual);
            report.value_f64("duality_gap", primal - dual);
            report.value_f64("fenchel_gap", fenchel_gap);
            let budget = 1e-6 + if *reflected { sc.tolerances.epsilon_stop } else { 0.0 };
            let strong = (primal - dual).abs() <= budget;
            report.check(
                "strong_duality",
                strong,
                (!strong).then(|| format!("gap {} over budget {budget}", primal - dual)),
            );

            // Weak duality over a grid of constant controls.
            let bound = g.rate_bound().min(1.0 / bt.sqrt_dt * 0.9);
            let mut weak = true;
            let mut best = f64::NEG_INFINITY;
            for i in 0..=8 {
                let mu = -bound + 2.0 * bound * i as f64 / 8.0;
                for rate_step in 0..=2 {
                    let rate = g.rate_bound() * rate_step as f64 / 2.0;
                    let c = DualControlBsde::constant(&bt, rate, mu);
                    let v = if *reflected {
                        reflected_dual_best_stop(&bt, &x, &g, &c, &conj_cfg)?
                    } else {
                        dual_evaluate_unreflected(&bt, &x, &g, &c, &conj_cfg)?
                    };
                    weak &= v <= primal + 1e-9;
                    best = best.max(v);
                }
            }
            report.value_f64("best_grid_control", best);
            report.check(
                "weak_duality_on_grid",
                weak,
                (!weak).then(|| format!("a grid control exceeded the primal {primal}")),
            );
            Ok(report)
        }
        BsdeAction::NegativeExample { process } => {
            let mut report = Report::new("bsde negative-example", seed, cli.workers);
            let x = sc.float_process(&bt, process)?;
            let out = negative_example_check(&bt, &x, &g, &solver_cfg, 1e-3)?;
            report.value_f64("classical_violation", out.classical_violation);
            report.value_f64("sum_form_violation", out.paper_form_violation);
            if let Some((level, m)) = out.witness {
                report.value_string("witness", format!("level {level}, payment {m}"));
            }
            report.check(
                "classical_form_violates",
                out.conclusive,
                (!out.conclusive).then(|| "no witness found; inconclusive".to_string()),
            );
            let invariant = out.paper_form_violation <= tol;
            report.check(
                "sum_form_invariant",
                invariant,
                (!invariant).then(|| format!("sum-form violation {}", out.paper_form_violation)),
            );
            Ok(report)
        }
    }
}

fn suite_cmd(cli: &Cli) -> Result<Report> {
    let seed = match (&cli.seed, &cli.scenario) {
        (Some(s), _) => *s,
        (None, Some(_)) => load_scenario(cli)?.seed,
        (None, None) => 20_240_817,
    };
    let mut report = Report::new("suite", seed, cli.workers);
    for outcome in procrisk::suite::run_all(seed) {
        eprintln!("{}", outcome.line());
        report.check(
            &format!("criterion {:02}: {}", outcome.id, outcome.title),
            outcome.passed,
            Some(outcome.detail),
        );
    }
    Ok(report)
}

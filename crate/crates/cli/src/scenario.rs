//! Scenario file schema: everything a batch run needs, in one JSON document.
//!
//! Exact quantities (probabilities, measure increments, rational process
//! values) are strings of the form `"num/den"` so nothing is lost to float
//! parsing; solver parameters and tolerances are plain numbers.

use anyhow::{anyhow, bail, Context, Result};
use num::BigRational;
use procrisk::bsde::{BrownianTree, Driver, DriverKind, GridDriver};
use procrisk::decomposition::OptionalMeasure;
use procrisk::filtration::{AdaptedProcess, FiltrationTree};
use procrisk::sampling::{
    random_normalized_measure, random_predictable_measure, random_process, random_tree,
    seeded_rng,
};
use procrisk::scalar::{parse_rational, Scalar};
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    /// Mandatory: every randomized generator draws from this seed.
    pub seed: u64,
    pub tree: TreeSpec,
    #[serde(default)]
    pub processes: BTreeMap<String, ProcessSpec>,
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureSpec>,
    #[serde(default)]
    pub driver: Option<DriverSpec>,
    #[serde(default)]
    pub risk_measure: Option<RiskMeasureSpec>,
    #[serde(default)]
    pub controls: Option<ControlSetSpec>,
    #[serde(default)]
    pub penalty: Option<PenaltySpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeSpec {
    Deterministic { steps: usize, horizon: f64 },
    Binary { steps: usize, horizon: f64 },
    Brownian { steps: usize, horizon: f64 },
    Random { depth: usize, max_branching: usize, horizon: f64 },
    /// Fully explicit tree: nested nodes with exact edge probabilities; all
    /// leaves must sit at the same depth.
    Explicit { horizon: f64, root: NodeSpec },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    #[serde(default)]
    pub children: Vec<EdgeSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub prob: String,
    #[serde(default)]
    pub node: NodeSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    Constant { value: String },
    SinglePayment { amount: String, from_level: usize },
    /// Sign of the terminal Brownian value, paid at the horizon.
    TerminalSignW,
    /// Terminal Brownian value itself, paid at the horizon.
    TerminalW,
    /// Interior hump obstacle (Brownian trees only).
    Hump { peak: f64, pull: f64 },
    Explicit { values: Vec<String> },
    Random { bound: i64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Explicit { values: Vec<String> },
    Random,
    RandomPredictable,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverSpec {
    Zero,
    Linear { theta: f64, beta: f64 },
    Quadratic { gamma: f64, beta: f64 },
    CustomGrid {
        y_grid: Vec<f64>,
        z_grid: Vec<f64>,
        values: Vec<Vec<f64>>,
        lipschitz: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RiskMeasureSpec {
    WorstCase,
    TerminalExpectation,
    /// Robust measure over the scenario's control set and penalty.
    Robust,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlSetSpec {
    /// All unit-mass-at-a-node extreme points of the normalized measures.
    ExtremePoints,
    /// Named measures from the `measures` table.
    Measures { names: Vec<String> },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PenaltySpec {
    Zero,
    Values { values: Vec<String> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_bisection")]
    pub bisection: f64,
    #[serde(default = "default_float")]
    pub float: f64,
    #[serde(default = "default_epsilon_stop")]
    pub epsilon_stop: f64,
}

fn default_bisection() -> f64 {
    1e-12
}
fn default_float() -> f64 {
    1e-9
}
fn default_epsilon_stop() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bisection: default_bisection(),
            float: default_float(),
            epsilon_stop: default_epsilon_stop(),
        }
    }
}

impl Scenario {
    pub fn load(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        let scenario: Scenario =
            serde_json::from_str(&text).with_context(|| "scenario does not match the schema")?;
        if scenario.schema_version != 1 {
            bail!("unsupported schema version {}", scenario.schema_version);
        }
        Ok(scenario)
    }

    /// Builds the filtration tree; `steps_override` rescales grid-based
    /// trees from the command line.
    pub fn build_tree(&self, steps_override: Option<usize>) -> Result<FiltrationTree> {
        Ok(match &self.tree {
            TreeSpec::Deterministic { steps, horizon } => {
                FiltrationTree::deterministic(steps_override.unwrap_or(*steps), *horizon)
            }
            TreeSpec::Binary { steps, horizon } | TreeSpec::Brownian { steps, horizon } => {
                FiltrationTree::binary(steps_override.unwrap_or(*steps), *horizon)
            }
            TreeSpec::Random {
                depth,
                max_branching,
                horizon,
            } => {
                let mut rng = seeded_rng(self.seed);
                random_tree(&mut rng, *depth, *max_branching, *horizon)
            }
            TreeSpec::Explicit { horizon, root } => {
                let mut builder = procrisk::filtration::TreeBuilder::new(*horizon);
                let id = builder.root();
                attach_children(&mut builder, id, root)?;
                builder.finish()?
            }
        })
    }

    pub fn build_brownian(&self, steps_override: Option<usize>) -> Result<BrownianTree> {
        match &self.tree {
            TreeSpec::Brownian { steps, horizon } => Ok(BrownianTree::new(
                steps_override.unwrap_or(*steps),
                *horizon,
                1,
            )?),
            _ => bail!("this subcommand needs a brownian tree"),
        }
    }

    pub fn rational_process(
        &self,
        tree: &FiltrationTree,
        name: &str,
    ) -> Result<AdaptedProcess<BigRational>> {
        let spec = self
            .processes
            .get(name)
            .ok_or_else(|| anyhow!("process `{name}` not defined in the scenario"))?;
        let parse = |s: &str| {
            parse_rational(s).ok_or_else(|| anyhow!("`{s}` is not a rational number"))
        };
        Ok(match spec {
            ProcessSpec::Constant { value } => AdaptedProcess::constant(tree, parse(value)?),
            ProcessSpec::SinglePayment { amount, from_level } => {
                AdaptedProcess::single_payment(tree, parse(amount)?, *from_level)
            }
            ProcessSpec::Explicit { values } => {
                let parsed: Result<Vec<BigRational>> = values.iter().map(|s| parse(s)).collect();
                AdaptedProcess::new(tree, parsed?)?
            }
            ProcessSpec::Random { bound } => {
                let mut rng = seeded_rng(self.seed.wrapping_add(fnv(name)));
                random_process(&mut rng, tree, *bound)
            }
            other => bail!("process `{name}` ({other:?}) needs a brownian tree"),
        })
    }

    pub fn float_process(&self, bt: &BrownianTree, name: &str) -> Result<AdaptedProcess<f64>> {
        let spec = self
            .processes
            .get(name)
            .ok_or_else(|| anyhow!("process `{name}` not defined in the scenario"))?;
        Ok(match spec {
            ProcessSpec::Constant { value } => AdaptedProcess::constant(
                &bt.tree,
                parse_rational(value)
                    .ok_or_else(|| anyhow!("bad rational"))?
                    .to_f64(),
            ),
            ProcessSpec::SinglePayment { amount, from_level } => AdaptedProcess::single_payment(
                &bt.tree,
                parse_rational(amount)
                    .ok_or_else(|| anyhow!("bad rational"))?
                    .to_f64(),
                *from_level,
            ),
            ProcessSpec::TerminalSignW => bt.terminal_payoff(|w| {
                if w > 0.0 {
                    1.0
                } else if w < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }),
            ProcessSpec::TerminalW => bt.terminal_payoff(|w| w),
            ProcessSpec::Hump { peak, pull } => procrisk::bsde::hump_process(bt, *peak, *pull),
            ProcessSpec::Explicit { values } => {
                let parsed: Result<Vec<f64>> = values
                    .iter()
                    .map(|s| {
                        parse_rational(s)
                            .map(|r| r.to_f64())
                            .ok_or_else(|| anyhow!("`{s}` is not a rational number"))
                    })
                    .collect();
                AdaptedProcess::new(&bt.tree, parsed?)?
            }
            ProcessSpec::Random { bound } => {
                let mut rng = seeded_rng(self.seed.wrapping_add(fnv(name)));
                let r = random_process(&mut rng, &bt.tree, *bound);
                AdaptedProcess::from_fn(&bt.tree, |n| r.value(n).to_f64())
            }
        })
    }

    pub fn measure(
        &self,
        tree: &FiltrationTree,
        name: &str,
    ) -> Result<OptionalMeasure<BigRational>> {
        let spec = self
            .measures
            .get(name)
            .ok_or_else(|| anyhow!("measure `{name}` not defined in the scenario"))?;
        Ok(match spec {
            MeasureSpec::Explicit { values } => {
                let parsed: Result<Vec<BigRational>> = values
                    .iter()
                    .map(|s| parse_rational(s).ok_or_else(|| anyhow!("`{s}` is not rational")))
                    .collect();
                OptionalMeasure::exact(tree, AdaptedProcess::new(tree, parsed?)?)?
            }
            MeasureSpec::Random => {
                let mut rng = seeded_rng(self.seed.wrapping_add(fnv(name)));
                OptionalMeasure::exact(tree, random_normalized_measure(&mut rng, tree))?
            }
            MeasureSpec::RandomPredictable => {
                let mut rng = seeded_rng(self.seed.wrapping_add(fnv(name)));
                OptionalMeasure::exact(tree, random_predictable_measure(&mut rng, tree, false))?
            }
        })
    }

    pub fn driver(&self) -> Result<Driver> {
        Ok(match self.driver.as_ref().ok_or_else(|| anyhow!("scenario has no driver"))? {
            DriverSpec::Zero => Driver::zero(),
            DriverSpec::Linear { theta, beta } => Driver::linear(*theta, *beta),
            DriverSpec::Quadratic { gamma, beta } => Driver::quadratic(*gamma, *beta),
            DriverSpec::CustomGrid {
                y_grid,
                z_grid,
                values,
                lipschitz,
            } => Driver {
                kind: DriverKind::Grid(GridDriver {
                    y_grid: y_grid.clone(),
                    z_grid: z_grid.clone(),
                    values: values.clone(),
                    lipschitz: *lipschitz,
                }),
            },
        })
    }
}

fn attach_children(
    builder: &mut procrisk::filtration::TreeBuilder,
    parent: procrisk::filtration::NodeId,
    spec: &NodeSpec,
) -> Result<()> {
    if spec.children.is_empty() {
        return Ok(());
    }
    let probs: Result<Vec<BigRational>> = spec
        .children
        .iter()
        .map(|e| parse_rational(&e.prob).ok_or_else(|| anyhow!("`{}` is not rational", e.prob)))
        .collect();
    let ids = builder.add_children(parent, &probs?);
    for (id, edge) in ids.into_iter().zip(&spec.children) {
        attach_children(builder, id, &edge.node)?;
    }
    Ok(())
}

/// Stable name hash so different named generators draw distinct streams.
fn fnv(name: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

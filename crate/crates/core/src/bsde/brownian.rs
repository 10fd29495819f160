//! Binomial discretization of the Brownian filtration: a non-recombining
//! event tree carrying ±√Δt increments, and a recombining lattice storage
//! mode for path-independent data. The two must produce identical solver
//! results; the lattice only removes the exponential node blow-up.

use crate::error::{Error, Result};
use crate::filtration::{AdaptedProcess, FiltrationTree, NodeId};


/// Event tree of a one-dimensional Brownian motion: binary branching with
/// probability 1/2 and increments ±√Δt, so `E[ΔW] = 0` and `E[ΔW²] = Δt`
/// hold exactly. Children are ordered down, then up.
#[derive(Debug, Clone)]
pub struct BrownianTree {
    pub tree: FiltrationTree,
    increment: Vec<f64>,
    cumulative: Vec<f64>,
    ups: Vec<usize>,
    pub dt: f64,
    pub sqrt_dt: f64,
}

impl BrownianTree {
    pub fn new(steps: usize, horizon: f64, dims: usize) -> Result<Self> {
        if dims != 1 {
            return Err(Error::Unsupported(
                "multi-dimensional Brownian trees are a data extension not built yet".into(),
            ));
        }
        if steps == 0 {
            return Err(Error::InvalidTree("at least one step required".into()));
        }
        let tree = FiltrationTree::binary(steps, horizon);
        let dt = horizon / steps as f64;
        let sqrt_dt = dt.sqrt();
        let mut increment = vec![0.0; tree.node_count()];
        let mut cumulative = vec![0.0; tree.node_count()];
        let mut ups = vec![0usize; tree.node_count()];
        for n in tree.nodes() {
            if !tree.is_leaf(n) {
                let kids = tree.children(n);
                increment[kids[0]] = -sqrt_dt;
                increment[kids[1]] = sqrt_dt;
            }
        }
        for n in tree.nodes() {
            if let Some(p) = tree.parent(n) {
                cumulative[n] = cumulative[p] + increment[n];
                ups[n] = ups[p] + usize::from(increment[n] > 0.0);
            }
        }
        Ok(BrownianTree {
            tree,
            increment,
            cumulative,
            ups,
            dt,
            sqrt_dt,
        })
    }

    pub fn steps(&self) -> usize {
        self.tree.steps()
    }

    /// Increment `ΔW` on the edge into `node` (0 at the root).
    pub fn dw(&self, node: NodeId) -> f64 {
        self.increment[node]
    }

    /// `W` at the node.
    pub fn w(&self, node: NodeId) -> f64 {
        self.cumulative[node]
    }

    /// Count of up-moves along the path (lattice coordinate of the node).
    pub fn up_count(&self, node: NodeId) -> usize {
        self.ups[node]
    }

    /// Terminal payoff process from a function of the terminal Brownian value.
    pub fn terminal_payoff(&self, f: impl Fn(f64) -> f64) -> AdaptedProcess<f64> {
        AdaptedProcess::from_fn(&self.tree, |n| {
            if self.tree.is_leaf(n) {
                f(self.cumulative[n])
            } else {
                0.0
            }
        })
    }

    /// Process from a function of time index and current Brownian value.
    pub fn path_process(&self, f: impl Fn(usize, f64) -> f64) -> AdaptedProcess<f64> {
        AdaptedProcess::from_fn(&self.tree, |n| f(self.tree.level_of(n), self.cumulative[n]))
    }
}

/// Recombining storage: values indexed by `(level, up-count)`.
pub type LatticeProcess = Vec<Vec<f64>>;

/// Recombining binomial lattice over the same grid as [`BrownianTree`].
///
/// Valid only for path-independent data; the solvers on the two storages
/// produce bitwise-identical values on such inputs.
#[derive(Debug, Clone)]
pub struct BrownianLattice {
    pub steps: usize,
    pub horizon: f64,
    pub dt: f64,
    pub sqrt_dt: f64,
}

impl BrownianLattice {
    pub fn new(steps: usize, horizon: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidTree("at least one step required".into()));
        }
        let dt = horizon / steps as f64;
        Ok(BrownianLattice {
            steps,
            horizon,
            dt,
            sqrt_dt: dt.sqrt(),
        })
    }

    pub fn time(&self, level: usize) -> f64 {
        self.horizon * level as f64 / self.steps as f64
    }

    /// Brownian value at `(level, ups)`.
    pub fn w(&self, level: usize, ups: usize) -> f64 {
        (2.0 * ups as f64 - level as f64) * self.sqrt_dt
    }

    pub fn process(&self, f: impl Fn(usize, f64) -> f64) -> LatticeProcess {
        (0..=self.steps)
            .map(|k| (0..=k).map(|j| f(k, self.w(k, j))).collect())
            .collect()
    }

    /// Expands a lattice process onto a Brownian tree over the same grid.
    pub fn expand(&self, bt: &BrownianTree, values: &LatticeProcess) -> AdaptedProcess<f64> {
        AdaptedProcess::from_fn(&bt.tree, |n| {
            values[bt.tree.level_of(n)][bt.up_count(n)]
        })
    }
}

/// Exact binomial weight `C(n, k) / 2^n` of a terminal lattice node.
pub fn binomial_weight(n: usize, k: usize) -> num::BigRational {
    let mut c = num::BigInt::from(1);
    for i in 0..k {
        c = c * num::BigInt::from(n - i) / num::BigInt::from(i + 1);
    }
    num::BigRational::new(c, num::BigInt::from(2).pow(n as u32))
}

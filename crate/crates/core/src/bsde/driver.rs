//! BSDE drivers: built-in families, regularity spot checks, and the convex
//! conjugate `g*(β, μ) = sup_{y,z} {−βy − μ·z − g(y, z)}`.

use crate::error::{Error, Result};
use rand::Rng;

/// Tolerance for matching the conjugate's effective domain in floats.
const DOMAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum DriverKind {
    /// g ≡ 0.
    Zero,
    /// g(y, z) = theta·|z| − beta·y (Lipschitz).
    Linear { theta: f64, beta: f64 },
    /// g(y, z) = (gamma/2)·|z|² − beta·y (quadratic growth).
    Quadratic { gamma: f64, beta: f64 },
    /// Tabulated driver on a (y, z) grid, bilinear in between.
    Grid(GridDriver),
}

#[derive(Debug, Clone)]
pub struct GridDriver {
    pub y_grid: Vec<f64>,
    pub z_grid: Vec<f64>,
    /// values[i][j] = g(y_grid[i], z_grid[j]).
    pub values: Vec<Vec<f64>>,
    pub lipschitz: f64,
}

/// Growth class declared by the driver, deciding which existence regime the
/// solver relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Lipschitz,
    Quadratic,
}

#[derive(Debug, Clone)]
pub struct Driver {
    pub kind: DriverKind,
}

impl Driver {
    pub fn zero() -> Self {
        Driver {
            kind: DriverKind::Zero,
        }
    }

    pub fn linear(theta: f64, beta: f64) -> Self {
        Driver {
            kind: DriverKind::Linear { theta, beta },
        }
    }

    pub fn quadratic(gamma: f64, beta: f64) -> Self {
        Driver {
            kind: DriverKind::Quadratic { gamma, beta },
        }
    }

    pub fn eval(&self, _t: f64, y: f64, z: &[f64]) -> f64 {
        let z0 = z.first().copied().unwrap_or(0.0);
        match &self.kind {
            DriverKind::Zero => 0.0,
            DriverKind::Linear { theta, beta } => theta * z0.abs() - beta * y,
            DriverKind::Quadratic { gamma, beta } => 0.5 * gamma * z0 * z0 - beta * y,
            DriverKind::Grid(g) => g.eval(y, z0),
        }
    }

    pub fn growth_class(&self) -> GrowthClass {
        match &self.kind {
            DriverKind::Quadratic { .. } => GrowthClass::Quadratic,
            _ => GrowthClass::Lipschitz,
        }
    }

    /// Joint Lipschitz constant for Lipschitz drivers; the y-direction
    /// Lipschitz constant for quadratic ones (what the implicit step
    /// contraction needs).
    pub fn contraction_constant(&self) -> f64 {
        match &self.kind {
            DriverKind::Zero => 0.0,
            DriverKind::Linear { theta, beta } => theta.max(*beta),
            DriverKind::Quadratic { beta, .. } => *beta,
            DriverKind::Grid(g) => g.lipschitz,
        }
    }

    /// Upper bound of the admissible discount rates: the conjugate is
    /// infinite for β outside [0, this].
    pub fn rate_bound(&self) -> f64 {
        match &self.kind {
            DriverKind::Zero => 0.0,
            DriverKind::Linear { theta, beta } => beta.max(*theta),
            DriverKind::Quadratic { gamma, beta } => beta.max(0.5 * gamma).max(1.0),
            DriverKind::Grid(g) => g.lipschitz,
        }
    }

    /// Closed-form conjugate where available (`None` for tabulated drivers).
    pub fn conjugate_closed(&self, beta: f64, mu: &[f64]) -> Option<f64> {
        let m = mu.first().copied().unwrap_or(0.0);
        match &self.kind {
            DriverKind::Zero => Some(if beta.abs() <= DOMAIN_EPS && m.abs() <= DOMAIN_EPS {
                0.0
            } else {
                f64::INFINITY
            }),
            DriverKind::Linear { theta, beta: b } => {
                Some(if (beta - b).abs() <= DOMAIN_EPS && m.abs() <= theta + DOMAIN_EPS {
                    0.0
                } else {
                    f64::INFINITY
                })
            }
            DriverKind::Quadratic { gamma, beta: b } => Some(if (beta - b).abs() <= DOMAIN_EPS {
                m * m / (2.0 * gamma)
            } else {
                f64::INFINITY
            }),
            DriverKind::Grid(_) => None,
        }
    }

    /// Conjugate: closed form when declared, otherwise a grid supremum over a
    /// box whose radius is derived from the Lipschitz scale, with an infinity
    /// surrogate when the supremum keeps growing toward the boundary.
    pub fn conjugate(&self, beta: f64, mu: &[f64], cfg: &ConjugateConfig) -> f64 {
        if let Some(v) = self.conjugate_closed(beta, mu) {
            return v;
        }
        let m = mu.first().copied().unwrap_or(0.0);
        let sup_r = self.grid_sup(beta, m, cfg.radius, cfg.points);
        let sup_half = self.grid_sup(beta, m, 0.5 * cfg.radius, cfg.points);
        if sup_r > sup_half + cfg.growth_tolerance || sup_r > cfg.cap {
            f64::INFINITY
        } else {
            sup_r
        }
    }

    fn grid_sup(&self, beta: f64, mu: f64, radius: f64, points: usize) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..=points {
            let y = -radius + 2.0 * radius * i as f64 / points as f64;
            for j in 0..=points {
                let z = -radius + 2.0 * radius * j as f64 / points as f64;
                let v = -beta * y - mu * z - self.eval(0.0, y, &[z]);
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    /// Pointwise maximizer of `−β(y+x) − μ·z − g*(β, μ)` in closed form;
    /// tabulated drivers go through [`optimal_control_grid`] instead.
    pub fn optimal_control_at(&self, z: f64) -> Option<(f64, f64)> {
        match &self.kind {
            DriverKind::Zero => Some((0.0, 0.0)),
            DriverKind::Linear { theta, beta } => {
                let mu = if z > 0.0 {
                    -theta
                } else if z < 0.0 {
                    *theta
                } else {
                    0.0
                };
                Some((*beta, mu))
            }
            DriverKind::Quadratic { gamma, beta } => Some((*beta, -gamma * z)),
            DriverKind::Grid(_) => None,
        }
    }

    /// Fenchel-Young residual `g(y+x, z) + β(y+x) + μ·z + g*(β, μ)`;
    /// nonnegative everywhere, zero at the pointwise maximizer.
    pub fn fenchel_gap(&self, t: f64, y_plus_x: f64, z: f64, beta: f64, mu: f64, cfg: &ConjugateConfig) -> f64 {
        let gstar = self.conjugate(beta, &[mu], cfg);
        if gstar.is_infinite() {
            return f64::INFINITY;
        }
        self.eval(t, y_plus_x, &[z]) + beta * y_plus_x + mu * z + gstar
    }

    /// Spot checks of the declared regularity: Lipschitz/growth bound,
    /// midpoint convexity, monotonicity in y, and normalization on the grid.
    pub fn validate(&self, seed: u64, samples: usize) -> Result<()> {
        let mut rng = crate::sampling::seeded_rng(seed);
        let c = self.contraction_constant();
        for i in 0..samples {
            let y1 = rng.gen_range(-4.0..4.0);
            let y2 = rng.gen_range(-4.0..4.0);
            let z1 = rng.gen_range(-4.0..4.0);
            let z2 = rng.gen_range(-4.0..4.0);
            let g11 = self.eval(0.0, y1, &[z1]);

            if self.eval(0.0, 0.0, &[0.0]).abs() > 1e-12 {
                return Err(Error::DriverCheck("normalization g(0,0) = 0 fails".into()));
            }
            if y2 > y1 && self.eval(0.0, y2, &[z1]) > g11 + 1e-9 {
                return Err(Error::DriverCheck(format!(
                    "monotonicity in y fails at sample {i}"
                )));
            }
            let mid = self.eval(0.0, 0.5 * (y1 + y2), &[0.5 * (z1 + z2)]);
            let avg = 0.5 * g11 + 0.5 * self.eval(0.0, y2, &[z2]);
            if mid > avg + 1e-9 {
                return Err(Error::DriverCheck(format!(
                    "midpoint convexity fails at sample {i}"
                )));
            }
            match self.growth_class() {
                GrowthClass::Lipschitz => {
                    let diff = (g11 - self.eval(0.0, y2, &[z2])).abs();
                    let dist = (y1 - y2).abs() + (z1 - z2).abs();
                    if diff > c * dist + 1e-9 {
                        return Err(Error::DriverCheck(format!(
                            "difference quotient exceeds the declared Lipschitz constant at sample {i}"
                        )));
                    }
                }
                GrowthClass::Quadratic => {
                    let bound = self.rate_bound() * (1.0 + y1.abs() + z1 * z1);
                    if g11.abs() > bound + 1e-9 {
                        return Err(Error::DriverCheck(format!(
                            "quadratic growth bound exceeded at sample {i}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl GridDriver {
    fn eval(&self, y: f64, z: f64) -> f64 {
        let yi = bracket(&self.y_grid, y);
        let zi = bracket(&self.z_grid, z);
        let (y0, y1) = (self.y_grid[yi], self.y_grid[yi + 1]);
        let (z0, z1) = (self.z_grid[zi], self.z_grid[zi + 1]);
        let ty = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
        let tz = ((z - z0) / (z1 - z0)).clamp(0.0, 1.0);
        let v00 = self.values[yi][zi];
        let v01 = self.values[yi][zi + 1];
        let v10 = self.values[yi + 1][zi];
        let v11 = self.values[yi + 1][zi + 1];
        v00 * (1.0 - ty) * (1.0 - tz) + v10 * ty * (1.0 - tz) + v01 * (1.0 - ty) * tz
            + v11 * ty * tz
    }
}

fn bracket(grid: &[f64], x: f64) -> usize {
    let mut i = match grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    };
    if i >= grid.len() - 1 {
        i = grid.len() - 2;
    }
    i
}

/// Grid argmax of the dual objective for tabulated drivers; returns the best
/// control and its Fenchel gap.
pub fn optimal_control_grid(
    driver: &Driver,
    t: f64,
    y_plus_x: f64,
    z: f64,
    cfg: &ConjugateConfig,
) -> ((f64, f64), f64) {
    let c = driver.rate_bound();
    let mut best = (0.0, 0.0);
    let mut best_obj = f64::NEG_INFINITY;
    let n = cfg.points.max(8);
    for i in 0..=n {
        let beta = c * i as f64 / n as f64;
        for j in 0..=n {
            let mu = -c + 2.0 * c * j as f64 / n as f64;
            let gstar = driver.conjugate(beta, &[mu], cfg);
            if gstar.is_infinite() {
                continue;
            }
            let obj = -beta * y_plus_x - mu * z - gstar;
            if obj > best_obj {
                best_obj = obj;
                best = (beta, mu);
            }
        }
    }
    let gap = driver.eval(t, y_plus_x, &[z]) - best_obj;
    (best, gap)
}

#[derive(Debug, Clone)]
pub struct ConjugateConfig {
    pub radius: f64,
    pub points: usize,
    pub cap: f64,
    pub growth_tolerance: f64,
}

impl Default for ConjugateConfig {
    fn default() -> Self {
        ConjugateConfig {
            radius: 64.0,
            points: 64,
            cap: 1e9,
            growth_tolerance: 1e-9,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_drivers_pass_their_spot_checks() {
        Driver::zero().validate(1, 200).unwrap();
        Driver::linear(0.3, 0.4).validate(2, 200).unwrap();
        Driver::quadratic(0.8, 0.2).validate(3, 200).unwrap();
    }

    #[test]
    fn conjugate_of_zero_driver() {
        let g = Driver::zero();
        assert_eq!(g.conjugate_closed(0.0, &[0.0]), Some(0.0));
        assert_eq!(g.conjugate_closed(0.1, &[0.0]), Some(f64::INFINITY));
        assert_eq!(g.conjugate_closed(0.0, &[0.2]), Some(f64::INFINITY));
    }

    #[test]
    fn conjugate_of_linear_driver_is_indicator() {
        let g = Driver::linear(0.3, 0.4);
        assert_eq!(g.conjugate_closed(0.4, &[0.25]), Some(0.0));
        assert_eq!(g.conjugate_closed(0.4, &[-0.3]), Some(0.0));
        assert_eq!(g.conjugate_closed(0.4, &[0.31]), Some(f64::INFINITY));
        assert_eq!(g.conjugate_closed(0.5, &[0.0]), Some(f64::INFINITY));

        // Grid sup through the generic path agrees on the effective domain:
        // build the same driver as a table and compare. The search radius
        // must stay inside the tabulated span.
        let tab = tabulated(&g);
        let cfg = ConjugateConfig {
            radius: 8.0,
            ..ConjugateConfig::default()
        };
        let v = tab.conjugate(0.4, &[0.2], &cfg);
        assert!(v.is_finite());
        assert!(v <= 0.0 + 0.2, "grid value {v} far above the closed form");
    }

    #[test]
    fn conjugate_of_quadratic_driver() {
        let g = Driver::quadratic(0.8, 0.0);
        let mu = 0.6;
        assert!((g.conjugate_closed(0.0, &[mu]).unwrap() - mu * mu / 1.6).abs() < 1e-12);

        // Grid supremum stays below closed form + grid slack.
        let tab = tabulated(&g);
        let cfg = ConjugateConfig {
            radius: 8.0,
            ..ConjugateConfig::default()
        };
        let grid_v = tab.conjugate(0.0, &[mu], &cfg);
        assert!(grid_v <= mu * mu / 1.6 + 0.05, "{grid_v}");
    }

    #[test]
    fn fenchel_young_nonnegative_and_tight_at_optimum() {
        let cfg = ConjugateConfig::default();
        for g in [Driver::zero(), Driver::linear(0.3, 0.4), Driver::quadratic(0.8, 0.2)] {
            for &(y, z) in &[(0.0, 0.0), (1.0, -2.0), (-0.5, 0.7)] {
                let (beta, mu) = g.optimal_control_at(z).unwrap();
                let gap = g.fenchel_gap(0.0, y, z, beta, mu, &cfg);
                assert!(gap.abs() < 1e-12, "gap {gap} for {:?}", g.kind);
                // Any other admissible control has nonnegative gap.
                let off = g.fenchel_gap(0.0, y, z, beta, mu * 0.5, &cfg);
                assert!(off >= -1e-12);
            }
        }
    }

    #[test]
    fn bad_drivers_are_rejected() {
        // Increasing in y breaks monotonicity.
        let bad = Driver {
            kind: DriverKind::Grid(GridDriver {
                y_grid: vec![-5.0, 0.0, 5.0],
                z_grid: vec![-5.0, 0.0, 5.0],
                values: vec![
                    vec![-5.0, -5.0, -5.0],
                    vec![0.0, 0.0, 0.0],
                    vec![5.0, 5.0, 5.0],
                ],
                lipschitz: 1.0,
            }),
        };
        assert!(bad.validate(5, 300).is_err());
    }

    /// Tabulates a closed-form driver so the grid-conjugate path gets
    /// exercised against known values.
    fn tabulated(g: &Driver) -> Driver {
        let pts: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.25).collect();
        let values = pts
            .iter()
            .map(|&y| pts.iter().map(|&z| g.eval(0.0, y, &[z])).collect())
            .collect();
        Driver {
            kind: DriverKind::Grid(GridDriver {
                y_grid: pts.clone(),
                z_grid: pts,
                values,
                lipschitz: g.contraction_constant().max(1.0),
            }),
        }
    }
}

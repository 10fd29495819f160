//! Scalar abstraction shared by the exact-rational and floating-point paths.

use num::{BigRational, FromPrimitive, Signed, ToPrimitive};
use std::fmt::{Debug, Display};

/// Field-like scalar the tree machinery is generic over.
///
/// Two implementations are used: [`BigRational`] for everything whose
/// correctness is an algebraic identity, and `f64` for the BSDE solvers.
pub trait Scalar:
    Clone + Debug + Display + PartialEq + PartialOrd + Signed + num::Zero + num::One
{
    /// True when arithmetic in this scalar is exact; harnesses then demand
    /// equality instead of tolerance comparisons.
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_f64(v: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(v).expect("finite float required")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Shorthand rational constructor.
pub fn rat(numer: i64, denom: i64) -> BigRational {
    BigRational::new(numer.into(), denom.into())
}

/// Serializes a rational losslessly as `numer/denom`.
pub fn rat_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses the `numer/denom` form produced by [`rat_string`]; a bare integer
/// is accepted as well.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: num::BigInt = n.trim().parse().ok()?;
            let d: num::BigInt = d.trim().parse().ok()?;
            if d == num::BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => {
            let n: num::BigInt = s.parse().ok()?;
            Some(BigRational::from(n))
        }
    }
}

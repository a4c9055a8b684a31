//! The centrally symmetric Lorenz map `L_ε` on `[ε/2, 1−ε/2]`.

use num_bigint::BigInt;
use num_traits::{Pow, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::scalar::{format_scalar, half, int, serde_scalar, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LorenzError {
    #[error("critical point 1/2")]
    CriticalPoint,
    #[error("{0} is outside the domain of the Lorenz map")]
    OutsideDomain(String),
    #[error("interval straddles the critical point")]
    StraddlesCritical,
    #[error("eps = {0} is outside the two-component window")]
    OutsideWindow(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    #[serde(with = "serde_scalar")]
    pub lo: Scalar,
    #[serde(with = "serde_scalar")]
    pub hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Self {
        assert!(lo <= hi, "empty interval");
        Interval { lo, hi }
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", format_scalar(&self.lo), format_scalar(&self.hi))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LorenzMap {
    pub eps: Scalar,
}

impl LorenzMap {
    pub fn new(eps: Scalar) -> Self {
        LorenzMap { eps }
    }

    pub fn domain(&self) -> Interval {
        let h = &self.eps / int(2);
        Interval::new(h.clone(), int(1) - h)
    }

    fn slope(&self) -> Scalar {
        int(2) * (int(1) - &self.eps)
    }

    /// Affine branch of `v` with no domain check; `v` on the left branch iff `v < 1/2`.
    fn branch(&self, v: &Scalar, left: bool) -> Scalar {
        if left {
            self.slope() * v + &self.eps / int(2)
        } else {
            self.slope() * v + int(3) * &self.eps / int(2) - int(1)
        }
    }

    /// Defined on the closed domain minus the critical point.
    pub fn eval(&self, v: &Scalar) -> Result<Scalar, LorenzError> {
        let d = self.domain();
        if *v < d.lo || *v > d.hi {
            return Err(LorenzError::OutsideDomain(format_scalar(v)));
        }
        let h = half();
        if *v == h {
            return Err(LorenzError::CriticalPoint);
        }
        Ok(self.branch(v, *v < h))
    }

    pub fn iterate(&self, v: &Scalar, n: usize) -> Result<Scalar, LorenzError> {
        (0..n).try_fold(v.clone(), |x, _| self.eval(&x))
    }

    /// Image of an interval lying on one side of 1/2; an endpoint may sit at
    /// 1/2, in which case the one-sided limit is used.
    pub fn interval_image(&self, i: &Interval) -> Result<Interval, LorenzError> {
        let h = half();
        let left = if i.hi <= h {
            true
        } else if i.lo >= h {
            false
        } else {
            return Err(LorenzError::StraddlesCritical);
        };
        let d = self.domain();
        if i.lo < d.lo || i.hi > d.hi {
            return Err(LorenzError::OutsideDomain(i.to_string()));
        }
        Ok(Interval::new(self.branch(&i.lo, left), self.branch(&i.hi, left)))
    }
}

/// The period-two point `p* ↔ 1−p*`.
pub fn p_star(eps: &Scalar) -> Scalar {
    (eps - int(2)) / (int(4) * eps - int(6))
}

/// `ε ≥ 1 − 2^{1/2ⁿ}/2`, decided exactly as `(2(1−ε))^{2ⁿ} ≤ 2`.
pub fn at_least_critical(eps: &Scalar, n: u32) -> bool {
    let base = int(2) * (int(1) - eps);
    let power = Pow::pow(&base, 1u64 << n);
    power <= int(2)
}

/// Two mixing components of `L_ε`, each a union of open intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MixingComponents {
    pub c1: Vec<Interval>,
    pub c2: Vec<Interval>,
}

/// Defined on `ε₁ ≤ ε < ε₂`.
pub fn mixing_components(eps: &Scalar) -> Result<MixingComponents, LorenzError> {
    if !at_least_critical(eps, 1) || at_least_critical(eps, 2) {
        return Err(LorenzError::OutsideWindow(format_scalar(eps)));
    }
    let l = LorenzMap::new(eps.clone());
    let d = l.domain();
    let f = |v: &Scalar, n| l.iterate(v, n);
    Ok(MixingComponents {
        c1: vec![
            Interval::new(d.lo.clone(), f(&d.hi, 2)?),
            Interval::new(f(&d.lo, 2)?, d.hi.clone()),
        ],
        c2: vec![Interval::new(f(&d.lo, 1)?, f(&d.hi, 1)?)],
    })
}

impl MixingComponents {
    /// Image of each component, as a list of intervals, lies in the other.
    pub fn cycle_holds(&self, l: &LorenzMap) -> Result<bool, LorenzError> {
        let into = |from: &[Interval], to: &[Interval]| -> Result<bool, LorenzError> {
            for i in from {
                let h = half();
                let pieces = if i.lo < h && h < i.hi {
                    vec![Interval::new(i.lo.clone(), h.clone()), Interval::new(h, i.hi.clone())]
                } else {
                    vec![i.clone()]
                };
                for p in pieces {
                    let img = l.interval_image(&p)?;
                    if !to.iter().any(|t| t.contains_interval(&img)) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        };
        Ok(into(&self.c1, &self.c2)? && into(&self.c2, &self.c1)?)
    }
}

/// `εₙ = 1 − 2^{1/2ⁿ}/2` as a decimal string and a double.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalEps {
    pub n: u32,
    pub decimal: String,
    pub value: f64,
}

const CRITICAL_DIGITS: usize = 40;
const GUARD_DIGITS: usize = 20;

/// `floor(2^{1/2ⁿ}·10^k)` up to `n` units, with `k = CRITICAL_DIGITS + GUARD_DIGITS`.
/// Each square root is taken at fixed scale: `y ↦ isqrt(y·10^k)`.
fn root_of_two_scaled(n: u32) -> (BigInt, BigInt) {
    let scale = BigInt::from(10u32).pow(CRITICAL_DIGITS + GUARD_DIGITS);
    let mut y = BigInt::from(2) * &scale;
    for _ in 0..n {
        y = (y * &scale).sqrt();
    }
    (y, scale)
}

/// Rational bounds `lo < εₙ ≤ hi`, about `n·10⁻⁶⁰` apart.
pub fn critical_eps_bracket(n: u32) -> (Scalar, Scalar) {
    let (y, scale) = root_of_two_scaled(n);
    let d = BigInt::from(2) * &scale;
    // The computed root is low by less than n units, so ε is at most hi.
    let hi = Scalar::new(&d - &y, d.clone());
    let lo = Scalar::new(&d - &y - BigInt::from(n + 1), d);
    (lo, hi)
}

/// `εₙ` truncated to 40 decimal places, plus a double.
pub fn critical_eps(n: u32) -> CriticalEps {
    assert!(n >= 1, "n must be positive");
    let (_, hi) = critical_eps_bracket(n);
    let digits = (hi.numer() * BigInt::from(10u32).pow(CRITICAL_DIGITS)) / hi.denom();
    let decimal = format!("0.{:0>width$}", digits.to_string(), width = CRITICAL_DIGITS);
    CriticalEps { n, value: hi.to_f64().unwrap_or(f64::NAN), decimal }
}

/// Whether `L³(1−ε/2) ≤ L(1−ε/2)`; holds exactly from `ε₁` on.
pub fn third_iterate_condition(eps: &Scalar) -> Result<bool, LorenzError> {
    let l = LorenzMap::new(eps.clone());
    let top = l.domain().hi;
    Ok(l.iterate(&top, 3)? <= l.iterate(&top, 1)?)
}

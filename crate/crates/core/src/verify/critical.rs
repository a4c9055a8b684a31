//! Critical coupling values: the cubic root `ε*`, `ε** = (5−√17)/2`,
//! `ε_B = (7−√17)/8` and the Lorenz thresholds `εₙ`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::lorenz::{critical_eps, CriticalEps};
use crate::scalar::{format_scalar, from_f64, int, rat, serde_scalar, to_f64, Scalar};

/// `4ε³ − 14ε² + 15ε − 4`
pub fn cubic(e: &Scalar) -> Scalar {
    let e2 = e * e;
    let e3 = &e2 * e;
    int(4) * e3 - int(14) * e2 + int(15) * e - int(4)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bracket {
    #[serde(with = "serde_scalar")]
    pub lo: Scalar,
    #[serde(with = "serde_scalar")]
    pub hi: Scalar,
    pub value: f64,
    pub width: f64,
    pub steps: u32,
}

/// Exact-sign bisection of [`cubic`] on `[39/100, 40/100]` down to `tol`.
pub fn bisect_eps_star(tol: f64) -> Bracket {
    let tol = from_f64(tol.max(1e-30)).expect("finite tolerance");
    let mut lo = rat(39, 100);
    let mut hi = rat(40, 100);
    assert!(cubic(&lo).is_negative() && cubic(&hi).is_positive());
    let mut steps = 0;
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / int(2);
        if cubic(&mid).is_positive() {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    Bracket { value: to_f64(&((&lo + &hi) / int(2))), width: to_f64(&(&hi - &lo)), lo, hi, steps }
}

/// `(7 − 4∛(k/(43−3√177)) − ∛((43−3√177)/2)) / 6`. `k = 2` solves the cubic;
/// `k = 1` does not and is kept for comparison.
pub fn radical(k: f64) -> f64 {
    let d = 43.0 - 3.0 * 177f64.sqrt();
    (7.0 - 4.0 * (k / d).cbrt() - (d / 2.0).cbrt()) / 6.0
}

const DIGITS: u32 = 30;
const GUARD: u32 = 20;

/// `a + b√n` over `c`, as a truncated decimal and a double.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surd {
    pub expression: String,
    pub decimal: String,
    pub value: f64,
}

fn surd(expression: &str, a: i64, b: i64, n: u32, c: i64) -> Surd {
    let k = DIGITS + GUARD;
    let scale = BigInt::from(10u32).pow(k);
    let root = (BigInt::from(n) * &scale * &scale).sqrt();
    // √n ∈ [root, root+1)/scale; pick the endpoint that bounds the value from below.
    let root = if b < 0 { root + 1 } else { root };
    let x = Scalar::new(BigInt::from(a) * &scale + BigInt::from(b) * root, BigInt::from(c) * &scale);
    let digits = (x.numer() * BigInt::from(10u32).pow(DIGITS)) / x.denom();
    let s = digits.to_string();
    let decimal = if s.len() > DIGITS as usize {
        let (i, f) = s.split_at(s.len() - DIGITS as usize);
        format!("{i}.{f}")
    } else {
        format!("0.{:0>w$}", s, w = DIGITS as usize)
    };
    Surd { expression: expression.to_string(), decimal, value: x.to_f64().unwrap_or(f64::NAN) }
}

pub fn eps_star2() -> Surd {
    surd("(5-sqrt(17))/2", 5, -1, 17, 2)
}

pub fn eps_b() -> Surd {
    surd("(7-sqrt(17))/8", 7, -1, 17, 8)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalValues {
    pub eps_star: Bracket,
    #[serde(with = "serde_scalar")]
    pub cubic_at_397: Scalar,
    #[serde(with = "serde_scalar")]
    pub cubic_at_398: Scalar,
    pub radical_uncorrected: f64,
    pub radical_corrected: f64,
    /// `|radical_corrected − ε*| ≤ 10⁻⁹`.
    pub radical_agrees: bool,
    pub eps_star2: Surd,
    pub eps_b: Surd,
    pub eps_n: Vec<CriticalEps>,
    /// `ε₁ < ε_B < ε* < ε₂ < ε** < 1/2`.
    pub ordering_holds: bool,
}

pub const RADICAL_TOL: f64 = 1e-9;

pub fn critical_values(tol: f64) -> CriticalValues {
    let eps_star = bisect_eps_star(tol);
    let radical_corrected = radical(2.0);
    let eps_n: Vec<CriticalEps> = (1..=4).map(critical_eps).collect();
    let star2 = eps_star2();
    let b = eps_b();
    let chain = [eps_n[0].value, b.value, eps_star.value, eps_n[1].value, star2.value, 0.5];
    CriticalValues {
        radical_agrees: (radical_corrected - eps_star.value).abs() <= RADICAL_TOL,
        radical_uncorrected: radical(1.0),
        radical_corrected,
        cubic_at_397: cubic(&rat(397, 1000)),
        cubic_at_398: cubic(&rat(398, 1000)),
        ordering_holds: chain.windows(2).all(|w| w[0] < w[1]),
        eps_star,
        eps_star2: star2,
        eps_b: b,
        eps_n,
    }
}

impl std::fmt::Display for CriticalValues {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = &self.eps_star;
        writeln!(f, "eps*  in [{}, {}]  ~ {:.15}  ({} steps)", format_scalar(&s.lo), format_scalar(&s.hi), s.value, s.steps)?;
        writeln!(f, "      cubic(397/1000) = {}", format_scalar(&self.cubic_at_397))?;
        writeln!(f, "      cubic(398/1000) = {}", format_scalar(&self.cubic_at_398))?;
        writeln!(f, "      radical, uncorrected form = {:.15}", self.radical_uncorrected)?;
        writeln!(f, "      radical, corrected form   = {:.15}", self.radical_corrected)?;
        writeln!(f, "eps** = {} = {}", self.eps_star2.expression, self.eps_star2.decimal)?;
        writeln!(f, "eps_B = {} = {}", self.eps_b.expression, self.eps_b.decimal)?;
        for e in &self.eps_n {
            writeln!(f, "eps_{} = {}", e.n, e.decimal)?;
        }
        write!(f, "ordering eps_1 < eps_B < eps* < eps_2 < eps** < 1/2: {}", self.ordering_holds)
    }
}

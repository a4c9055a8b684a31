//! The coupled doubling maps, the reduction to the 3-torus and the reduced
//! map, both as a closed formula and as a table of affine branches.

mod branches;

use thiserror::Error;

pub use branches::{branch_table, Branch, BranchTable, Inequality, LinearForm, Relation};

use crate::scalar::{format_scalar, half, Real, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error("singular point ({0})")]
    Singular(String),
    #[error("coordinate reduction needs 4 sites, got {0}")]
    SiteCount(usize),
    #[error("coupling must satisfy 0 <= eps < 1/2, got {0}")]
    CouplingOutOfRange(String),
}

/// Checks `0 ≤ ε < 1/2`.
pub fn check_eps(eps: &Scalar) -> Result<(), DynamicsError> {
    if *eps < Scalar::from_int(0) || *eps >= half() {
        return Err(DynamicsError::CouplingOutOfRange(format_scalar(eps)));
    }
    Ok(())
}

pub fn check_eps_f64(eps: f64) -> Result<(), DynamicsError> {
    if !(0.0..0.5).contains(&eps) {
        return Err(DynamicsError::CouplingOutOfRange(eps.to_string()));
    }
    Ok(())
}

/// Signed distance to the nearest integer, with `g = 0` at half-integers.
pub fn g<T: Real>(u: &T) -> T {
    let f = u.frac();
    let h = T::from_ratio(1, 2);
    if f < h {
        f
    } else if f > h {
        f - T::from_int(1)
    } else {
        T::from_int(0)
    }
}

/// One step of the globally coupled system of `N = x.len()` doubling maps.
pub fn full_step<T: Real>(x: &[T], eps: &T) -> Vec<T> {
    let inv_n = T::from_ratio(1, x.len() as i64);
    let two = T::from_int(2);
    x.iter()
        .map(|xi| {
            let coupling = x
                .iter()
                .fold(T::from_int(0), |acc, xj| acc + g(&(xj.clone() - xi)));
            let y = two.clone() * (xi.clone() + eps.clone() * coupling * inv_n.clone());
            y.frac()
        })
        .collect()
}

/// `s` and `(p, q, r) = (x₁−x₂, x₂−x₃, x₃−x₄)`, all reduced mod 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCoordinates<T> {
    pub s: T,
    pub point: [T; 3],
}

pub fn reduce_coordinates<T: Real>(x: &[T]) -> Result<ReducedCoordinates<T>, DynamicsError> {
    if x.len() != 4 {
        return Err(DynamicsError::SiteCount(x.len()));
    }
    let s = x.iter().fold(T::from_int(0), |acc, v| acc + v).frac();
    let d = |i: usize| (x[i].clone() - &x[i + 1]).frac();
    Ok(ReducedCoordinates { s, point: [d(0), d(1), d(2)] })
}

/// The reduced map evaluated directly from `g`.
///
/// Each coordinate is grouped into differences that vanish identically when
/// that coordinate is 0, so the faces of the cube stay exactly invariant in
/// floating point too.
pub fn g3_step_formula<T: Real>(pt: &[T; 3], eps: &T) -> [T; 3] {
    let [p, q, r] = pt;
    let pq = p.clone() + q;
    let qr = q.clone() + r;
    let pqr = pq.clone() + r;
    let (gp, gq, gr) = (g(p), g(q), g(r));
    let (gpq, gqr, gpqr) = (g(&pq), g(&qr), g(&pqr));
    let two = T::from_int(2);
    let k = eps.clone() * T::from_ratio(1, 2);

    let c1 = (gq.clone() - &gpq) + (gqr.clone() - &gpqr) - two.clone() * gp.clone();
    let c2 = (gp - &gpq) + (gr.clone() - &gqr) - two.clone() * gq.clone();
    let c3 = (gq - &gqr) + (gpq - &gpqr) - two.clone() * gr;
    [
        (two.clone() * p.clone() + k.clone() * c1).frac(),
        (two.clone() * q.clone() + k.clone() * c2).frac(),
        (two * r.clone() + k * c3).frac(),
    ]
}

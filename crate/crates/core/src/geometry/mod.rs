//! Exact rational polytope calculus in low dimension.
//!
//! Polyhedra are stored in H-representation (`a·x ≤ b` rows) and are always
//! treated as closed sets. Vertices are found by intersecting every
//! `d`-subset of constraint hyperplanes and keeping the feasible solutions;
//! with at most a couple of dozen constraints in dimension three this is
//! cheap, exact and needs no pivoting rules. Everything downstream
//! (optimization, emptiness, volume, containment) is built on that
//! enumeration.

mod hull;
mod lattice;
pub mod linalg;
mod region;

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{dot, int, serde_scalar, serde_scalar_vec, Point, Scalar};

pub use hull::{convex_hull_2d, Facet};
pub use lattice::{
    contains_in_region, region_equal_mod_lattice, regions_disjoint, Containment, CoverPiece, PreparedPolytope,
    PreparedRegion, DEFAULT_SHIFT_RANGE,
};
pub(crate) use lattice::{prepared_disjoint, prepared_equal};
pub use region::{Member, Region};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("empty polyhedron")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0}; only 1, 2 and 3 are handled")]
    UnsupportedDimension(usize),
    #[error("half-space normal is the zero vector")]
    ZeroNormal,
    #[error("shift range exhausted: no lattice translate within ±{range} meets the region")]
    ShiftRangeExhausted { range: i64 },
    #[error("a lattice shift of {needed} is needed but the search range is ±{range}")]
    ShiftBoundExceeded { needed: i64, range: i64 },
}

/// The closed half-space `normal · x ≤ bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawHalfSpace")]
pub struct HalfSpace {
    #[serde(rename = "a", with = "serde_scalar_vec")]
    normal: Vec<Scalar>,
    #[serde(rename = "b", with = "serde_scalar")]
    bound: Scalar,
}

#[derive(Deserialize)]
struct RawHalfSpace {
    #[serde(with = "serde_scalar_vec")]
    a: Vec<Scalar>,
    #[serde(with = "serde_scalar")]
    b: Scalar,
}

impl TryFrom<RawHalfSpace> for HalfSpace {
    type Error = GeometryError;
    fn try_from(raw: RawHalfSpace) -> Result<Self, Self::Error> {
        HalfSpace::new(raw.a, raw.b)
    }
}

impl HalfSpace {
    pub fn new(normal: Vec<Scalar>, bound: Scalar) -> Result<Self, GeometryError> {
        if normal.iter().all(Zero::is_zero) {
            return Err(GeometryError::ZeroNormal);
        }
        Ok(HalfSpace { normal, bound })
    }

    /// `normal · x ≤ bound` with an integer normal.
    ///
    /// Panics on a zero normal.
    pub fn le(normal: &[i64], bound: Scalar) -> Self {
        Self::new(normal.iter().map(|&a| int(a)).collect(), bound).expect("nonzero normal")
    }

    /// `normal · x ≥ bound` with an integer normal.
    pub fn ge(normal: &[i64], bound: Scalar) -> Self {
        let neg: Vec<i64> = normal.iter().map(|a| -a).collect();
        Self::le(&neg, -bound)
    }

    pub fn normal(&self) -> &[Scalar] {
        &self.normal
    }

    pub fn bound(&self) -> &Scalar {
        &self.bound
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `bound - normal · x`; nonnegative exactly on the half-space.
    pub fn slack(&self, x: &[Scalar]) -> Scalar {
        &self.bound - dot(&self.normal, x)
    }

    pub fn contains(&self, x: &[Scalar]) -> bool {
        !self.slack(x).is_negative()
    }

    /// The closure of the complement, `normal · x ≥ bound`.
    pub fn complement(&self) -> HalfSpace {
        HalfSpace {
            normal: self.normal.iter().map(|a| -a).collect(),
            bound: -self.bound.clone(),
        }
    }

    /// Image under `x ↦ x + v`.
    pub fn translate(&self, v: &[Scalar]) -> HalfSpace {
        HalfSpace {
            normal: self.normal.clone(),
            bound: &self.bound + dot(&self.normal, v),
        }
    }
}

/// Written as `p+q >= 277/436`; the sense is flipped when every
/// coefficient is negative.
impl std::fmt::Display for HalfSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<String> = match self.dim() {
            3 => vec!["p".into(), "q".into(), "r".into()],
            d => (1..=d).map(|i| format!("x{i}")).collect(),
        };
        let flip = self.normal.iter().all(|a| !a.is_positive());
        let (normal, bound, op): (Vec<Scalar>, Scalar, &str) = if flip {
            (self.normal.iter().map(|a| -a).collect(), -self.bound.clone(), ">=")
        } else {
            (self.normal.clone(), self.bound.clone(), "<=")
        };
        let mut lhs = String::new();
        for (a, name) in normal.iter().zip(&names) {
            if a.is_zero() {
                continue;
            }
            let sign = if a.is_negative() { "-" } else if lhs.is_empty() { "" } else { "+" };
            let mag = a.abs();
            if mag == int(1) {
                lhs.push_str(&format!("{sign}{name}"));
            } else {
                lhs.push_str(&format!("{sign}{}*{name}", crate::scalar::format_scalar(&mag)));
            }
        }
        write!(f, "{lhs} {op} {}", crate::scalar::format_scalar(&bound))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// Optimal value together with a vertex attaining it (the first one in
/// enumeration order; which one is unspecified).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub value: Scalar,
    pub point: Point,
}

/// Closed convex polyhedron `{x ∈ ℝᵈ : a_i·x ≤ b_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyhedron {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
}

impl Polyhedron {
    pub fn new(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self, GeometryError> {
        if !(1..=3).contains(&dim) {
            return Err(GeometryError::UnsupportedDimension(dim));
        }
        if let Some(h) = halfspaces.iter().find(|h| h.dim() != dim) {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: h.dim() });
        }
        Ok(Polyhedron { dim, halfspaces })
    }

    /// Axis-aligned box `lo ≤ x ≤ hi`.
    pub fn boxed(lo: &[Scalar], hi: &[Scalar]) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return Err(GeometryError::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        let d = lo.len();
        let mut hs = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = vec![0i64; d];
            e[i] = 1;
            hs.push(HalfSpace::le(&e, hi[i].clone()));
            hs.push(HalfSpace::ge(&e, lo[i].clone()));
        }
        Polyhedron::new(d, hs)
    }

    pub fn unit_cube(dim: usize) -> Self {
        Self::boxed(&vec![int(0); dim], &vec![int(1); dim]).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn contains(&self, x: &[Scalar]) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x))
    }

    /// Extreme points, sorted lexicographically. Empty iff the polyhedron is empty.
    pub fn vertices(&self) -> Result<Vec<Point>, GeometryError> {
        let d = self.dim;
        let normals: Vec<&[Scalar]> = self.halfspaces.iter().map(|h| h.normal()).collect();
        let lineality = linalg::nullspace(&normals, d);

        // Restricting to the orthogonal complement of the lineality space gives a
        // pointed polyhedron, which is nonempty iff it has a vertex.
        let mut rows: Vec<(&[Scalar], Scalar)> =
            self.halfspaces.iter().map(|h| (h.normal(), h.bound().clone())).collect();
        let negated: Vec<Point> = lineality.iter().map(|l| l.iter().map(|x| -x).collect()).collect();
        for (l, nl) in lineality.iter().zip(&negated) {
            rows.push((l.as_slice(), Scalar::zero()));
            rows.push((nl.as_slice(), Scalar::zero()));
        }
        let verts = enumerate_vertices(d, &rows);
        if verts.is_empty() {
            return Ok(verts);
        }
        if !lineality.is_empty() || has_recession_ray(d, &normals) {
            return Err(GeometryError::Unbounded);
        }
        Ok(verts)
    }

    pub fn optimize(&self, objective: &[Scalar], sense: Sense) -> Result<Optimum, GeometryError> {
        if objective.len() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, found: objective.len() });
        }
        optimize_over(&self.vertices()?, objective, sense).ok_or(GeometryError::Empty)
    }

    /// Concatenates the H-representations. Redundant rows are kept.
    pub fn intersect(&self, constraints: &[HalfSpace]) -> Result<Polyhedron, GeometryError> {
        let mut hs = self.halfspaces.clone();
        hs.extend_from_slice(constraints);
        Polyhedron::new(self.dim, hs)
    }

    pub fn intersect_with(&self, other: &Polyhedron) -> Result<Polyhedron, GeometryError> {
        self.intersect(&other.halfspaces)
    }

    /// True iff the closed set has no point. Unbounded sets are nonempty.
    pub fn is_empty(&self) -> bool {
        match self.vertices() {
            Ok(v) => v.is_empty(),
            Err(_) => false,
        }
    }

    /// Image under `x ↦ scale·x + translation`, computed row by row:
    /// `a·x ≤ b` becomes `a·y ≤ scale·b + a·translation`.
    ///
    /// Panics unless `scale > 0`.
    pub fn scalar_affine_image(&self, scale: &Scalar, translation: &[Scalar]) -> Polyhedron {
        assert!(scale.is_positive(), "scale must be positive");
        assert_eq!(translation.len(), self.dim);
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| HalfSpace {
                normal: h.normal.clone(),
                bound: scale * &h.bound + dot(&h.normal, translation),
            })
            .collect();
        Polyhedron { dim: self.dim, halfspaces }
    }

    pub fn translate(&self, v: &[Scalar]) -> Polyhedron {
        Polyhedron {
            dim: self.dim,
            halfspaces: self.halfspaces.iter().map(|h| h.translate(v)).collect(),
        }
    }

    pub fn translate_int(&self, v: &[i64]) -> Polyhedron {
        let v: Point = v.iter().map(|&x| int(x)).collect();
        self.translate(&v)
    }

    /// Exact volume; zero for empty or lower-dimensional sets.
    pub fn volume(&self) -> Result<Scalar, GeometryError> {
        let verts = self.vertices()?;
        Ok(hull::volume(self, &verts))
    }

    /// Dimension of the affine hull; `None` when empty.
    pub fn affine_dimension(&self) -> Result<Option<usize>, GeometryError> {
        Ok(linalg::affine_dimension(&self.vertices()?))
    }

    pub fn is_full_dimensional(&self) -> Result<bool, GeometryError> {
        Ok(self.affine_dimension()? == Some(self.dim))
    }

    /// Outward-oriented boundary polygons of a bounded 3-polytope.
    pub fn facets(&self) -> Result<Vec<Facet>, GeometryError> {
        if self.dim != 3 {
            return Err(GeometryError::UnsupportedDimension(self.dim));
        }
        let verts = self.vertices()?;
        Ok(hull::facets(self, &verts))
    }
}

pub(crate) fn optimize_over(verts: &[Point], objective: &[Scalar], sense: Sense) -> Option<Optimum> {
    let mut best: Option<Optimum> = None;
    for v in verts {
        let value = dot(objective, v);
        let better = match &best {
            None => true,
            Some(b) => match sense {
                Sense::Max => value > b.value,
                Sense::Min => value < b.value,
            },
        };
        if better {
            best = Some(Optimum { value, point: v.clone() });
        }
    }
    best
}

/// Calls `f` with every strictly increasing `k`-tuple of indices below `n`.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn enumerate_vertices(d: usize, rows: &[(&[Scalar], Scalar)]) -> Vec<Point> {
    let mut found = BTreeSet::new();
    for_each_combination(rows.len(), d, |pick| {
        let lhs: Vec<&[Scalar]> = pick.iter().map(|&i| rows[i].0).collect();
        let rhs: Vec<Scalar> = pick.iter().map(|&i| rows[i].1.clone()).collect();
        if let Some(x) = linalg::solve(&lhs, &rhs) {
            if found.contains(&x) {
                return;
            }
            if rows.iter().all(|(a, b)| dot(a, &x) <= *b) {
                found.insert(x);
            }
        }
    });
    found.into_iter().collect()
}

/// Whether the recession cone `{u : a_i·u ≤ 0}` of a polyhedron with trivial
/// lineality space contains a nonzero direction. A pointed nontrivial cone
/// has an extreme ray, and every extreme ray spans the null space of `d - 1`
/// independent constraint normals.
fn has_recession_ray(d: usize, normals: &[&[Scalar]]) -> bool {
    let mut unbounded = false;
    for_each_combination(normals.len(), d - 1, |pick| {
        if unbounded {
            return;
        }
        let sub: Vec<&[Scalar]> = pick.iter().map(|&i| normals[i]).collect();
        let ns = linalg::nullspace(&sub, d);
        if ns.len() != 1 {
            return;
        }
        let u = &ns[0];
        let signs: Vec<Scalar> = normals.iter().map(|a| dot(a, u)).collect();
        if signs.iter().all(|s| !s.is_positive()) || signs.iter().all(|s| !s.is_negative()) {
            unbounded = true;
        }
    });
    if d == 1 && normals.is_empty() {
        return true;
    }
    unbounded
}

//! Containment and disjointness of polytopes on the torus ℝᵈ/ℤᵈ.
//!
//! Everything is done on lifted representatives. Instead of looping over the
//! whole cube of integer shifts, the shifts that can matter are read off the
//! bounding boxes; the configured range is then only an assertion that the
//! lifted data stays close to the unit cube.

use num_traits::Zero;
use serde::Serialize;

use super::{linalg, GeometryError, HalfSpace, Polyhedron, Region};
use crate::scalar::{int, Point, Scalar};

/// Default bound on the components of lattice shifts considered.
pub const DEFAULT_SHIFT_RANGE: i64 = 3;

/// Polytope with its vertices and bounding box cached.
#[derive(Debug, Clone)]
pub struct PreparedPolytope {
    pub label: String,
    pub poly: Polyhedron,
    pub verts: Vec<Point>,
    pub lo: Point,
    pub hi: Point,
    affine_dim: usize,
}

impl PreparedPolytope {
    /// Fails with `Empty` or `Unbounded` unless the polytope is a nonempty bounded set.
    pub fn new(label: impl Into<String>, poly: Polyhedron) -> Result<Self, GeometryError> {
        let verts = poly.vertices()?;
        Self::with_vertices(label.into(), poly, verts)
    }

    fn with_vertices(label: String, poly: Polyhedron, verts: Vec<Point>) -> Result<Self, GeometryError> {
        let affine_dim = linalg::affine_dimension(&verts).ok_or(GeometryError::Empty)?;
        let d = poly.dim();
        let lo = (0..d).map(|i| verts.iter().map(|v| &v[i]).min().unwrap().clone()).collect();
        let hi = (0..d).map(|i| verts.iter().map(|v| &v[i]).max().unwrap().clone()).collect();
        Ok(PreparedPolytope { label, poly, verts, lo, hi, affine_dim })
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == self.dim()
    }

    pub fn translated(&self, w: &[i64]) -> PreparedPolytope {
        let v: Point = w.iter().map(|&x| int(x)).collect();
        let add = |p: &Point| -> Point { p.iter().zip(&v).map(|(a, b)| a + b).collect() };
        PreparedPolytope {
            label: self.label.clone(),
            poly: self.poly.translate(&v),
            verts: self.verts.iter().map(add).collect(),
            lo: add(&self.lo),
            hi: add(&self.hi),
            affine_dim: self.affine_dim,
        }
    }

    pub fn centroid(&self) -> Point {
        let n = int(self.verts.len() as i64);
        (0..self.dim())
            .map(|i| self.verts.iter().fold(Scalar::zero(), |acc, v| acc + &v[i]) / &n)
            .collect()
    }
}

/// Region whose members have been prepared once.
#[derive(Debug, Clone)]
pub struct PreparedRegion {
    pub label: String,
    pub members: Vec<PreparedPolytope>,
}

impl PreparedRegion {
    pub fn new(region: &Region) -> Result<Self, GeometryError> {
        let members = region
            .members
            .iter()
            .map(|m| PreparedPolytope::new(m.label.clone(), m.polyhedron.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PreparedRegion { label: region.label.clone(), members })
    }

    /// See [`contains_in_region`].
    pub fn contains(&self, p: &PreparedPolytope, shift_range: i64) -> Result<Containment, GeometryError> {
        let cands = candidate_translates(p, &self.members, shift_range)?;

        for (idx, w) in &cands {
            let m = &self.members[*idx];
            if p.verts.iter().all(|x| contains_shifted(&m.poly, x, w)) {
                return Ok(Containment::Member { member: m.label.clone(), shift: negate(w) });
            }
        }

        let k = p.affine_dim;
        let meeting: Vec<(usize, PreparedPolytope)> = cands
            .iter()
            .map(|(idx, w)| (*idx, self.members[*idx].translated(w)))
            .filter(|(_, q)| overlaps(p, q, k))
            .collect();
        if meeting.is_empty() {
            return Err(GeometryError::ShiftRangeExhausted { range: shift_range });
        }
        // A vertex outside the closed union has a neighbourhood outside it too.
        if let Some(v) = p.verts.iter().find(|x| {
            !cands.iter().any(|(idx, w)| contains_shifted(&self.members[*idx].poly, x, w))
        }) {
            return Ok(Containment::Outside { witness: v.clone() });
        }

        let mut pieces = vec![p.clone()];
        for (_, q) in &meeting {
            let mut next = Vec::new();
            for piece in pieces {
                next.extend(subtract(&piece, q, k)?);
            }
            pieces = next;
            if pieces.is_empty() {
                break;
            }
        }
        match pieces.first() {
            None => Ok(Containment::Union {
                cover: meeting
                    .iter()
                    .map(|(idx, q)| {
                        let w: Vec<i64> = q.lo.iter().zip(&self.members[*idx].lo).map(|(a, b)| to_i64(&(a - b))).collect();
                        CoverPiece { member: q.label.clone(), shift: negate(&w) }
                    })
                    .collect(),
            }),
            Some(piece) => Ok(Containment::Outside { witness: piece.centroid() }),
        }
    }
}

fn to_i64(x: &Scalar) -> i64 {
    use num_traits::ToPrimitive;
    x.to_integer().to_i64().expect("small lattice shift")
}

fn negate(w: &[i64]) -> Vec<i64> {
    w.iter().map(|x| -x).collect()
}

/// `x ∈ M + w`, i.e. `x - w ∈ M`.
fn contains_shifted(m: &Polyhedron, x: &[Scalar], w: &[i64]) -> bool {
    m.halfspaces().iter().all(|h| {
        let shifted: Scalar = h
            .normal()
            .iter()
            .zip(w)
            .fold(h.bound().clone(), |acc, (a, &wi)| acc + a * int(wi));
        crate::scalar::dot(h.normal(), x) <= shifted
    })
}

/// Member translates `(member index, w)` whose bounding boxes meet `p`'s,
/// ordered by size of the shift applied to `p` (which is `-w`).
fn candidate_translates(
    p: &PreparedPolytope,
    members: &[PreparedPolytope],
    shift_range: i64,
) -> Result<Vec<(usize, Vec<i64>)>, GeometryError> {
    let mut out = Vec::new();
    for (idx, m) in members.iter().enumerate() {
        let mut ranges = Vec::with_capacity(p.dim());
        for i in 0..p.dim() {
            let lo = to_i64(&(&p.lo[i] - &m.hi[i]).ceil());
            let hi = to_i64(&(&p.hi[i] - &m.lo[i]).floor());
            if lo > hi {
                ranges.clear();
                break;
            }
            let needed = lo.abs().max(hi.abs());
            if needed > shift_range {
                return Err(GeometryError::ShiftBoundExceeded { needed, range: shift_range });
            }
            ranges.push(lo..=hi);
        }
        if ranges.is_empty() {
            continue;
        }
        let mut acc: Vec<Vec<i64>> = vec![vec![]];
        for r in &ranges {
            acc = acc
                .into_iter()
                .flat_map(|prefix| {
                    r.clone().map(move |x| {
                        let mut v = prefix.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        out.extend(acc.into_iter().map(|w| (idx, w)));
    }
    out.sort_by_key(|(idx, w)| {
        let inf = w.iter().map(|x| x.abs()).max().unwrap_or(0);
        let l1: i64 = w.iter().map(|x| x.abs()).sum();
        (inf, l1, negate(w), *idx)
    });
    Ok(out)
}

fn boxes_overlap(a: &PreparedPolytope, b: &PreparedPolytope, strict: bool) -> bool {
    (0..a.dim()).all(|i| {
        if strict {
            a.lo[i] < b.hi[i] && b.lo[i] < a.hi[i]
        } else {
            a.lo[i] <= b.hi[i] && b.lo[i] <= a.hi[i]
        }
    })
}

/// Some half-space of `a` has all of `b` on or beyond its boundary plane.
fn separated_by_face(a: &PreparedPolytope, b: &PreparedPolytope) -> bool {
    a.poly
        .halfspaces()
        .iter()
        .any(|h| b.verts.iter().all(|v| !h.slack(v).is_positive()))
}

use num_traits::Signed;

/// Whether `p ∩ q` has affine dimension `k` (with `k` the dimension of `p`).
fn overlaps(p: &PreparedPolytope, q: &PreparedPolytope, k: usize) -> bool {
    let full = k == p.dim();
    if !boxes_overlap(p, q, full) {
        return false;
    }
    if full && (separated_by_face(p, q) || separated_by_face(q, p)) {
        return false;
    }
    if p.verts.iter().all(|v| q.poly.contains(v)) {
        return true;
    }
    if full && q.is_full_dimensional() && q.verts.iter().all(|v| p.poly.contains(v)) {
        return true;
    }
    match p.poly.intersect_with(&q.poly).and_then(|i| i.vertices()) {
        Ok(v) => linalg::affine_dimension(&v) == Some(k),
        Err(_) => false,
    }
}

/// Drops constraints that do not support a facet.
fn prune(poly: &Polyhedron, verts: &[Point]) -> Polyhedron {
    let d = poly.dim();
    let mut kept: Vec<HalfSpace> = Vec::new();
    let mut faces: Vec<Vec<&Point>> = Vec::new();
    for h in poly.halfspaces() {
        let tight: Vec<&Point> = verts.iter().filter(|v| h.slack(v).is_zero()).collect();
        let owned: Vec<Point> = tight.iter().map(|p| (*p).clone()).collect();
        if linalg::affine_dimension(&owned) != Some(d - 1) || faces.contains(&tight) {
            continue;
        }
        faces.push(tight);
        kept.push(h.clone());
    }
    Polyhedron::new(d, kept).expect("same dimension")
}

/// `piece \ q` as a list of closed pieces of dimension `k`; pieces of lower
/// dimension (shared boundaries) are discarded.
fn subtract(piece: &PreparedPolytope, q: &PreparedPolytope, k: usize) -> Result<Vec<PreparedPolytope>, GeometryError> {
    if !overlaps(piece, q, k) {
        return Ok(vec![piece.clone()]);
    }
    let mut out = Vec::new();
    let mut acc = piece.poly.clone();
    for h in q.poly.halfspaces() {
        let part = acc.intersect(&[h.complement()])?;
        let verts = part.vertices()?;
        if linalg::affine_dimension(&verts) == Some(k) {
            let part = if k == part.dim() { prune(&part, &verts) } else { part };
            out.push(PreparedPolytope::with_vertices(piece.label.clone(), part, verts)?);
        }
        acc = acc.intersect(std::slice::from_ref(h))?;
        if linalg::affine_dimension(&acc.vertices()?).is_none_or(|dim| dim < k) {
            break;
        }
    }
    Ok(out)
}

/// One lattice translate used in a union cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverPiece {
    pub member: String,
    pub shift: Vec<i64>,
}

/// Outcome of [`contains_in_region`]. Shifts are applied to the tested
/// polytope: `P + shift ⊆ member`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Containment {
    Member {
        member: String,
        shift: Vec<i64>,
    },
    Union {
        cover: Vec<CoverPiece>,
    },
    Outside {
        #[serde(with = "crate::scalar::serde_scalar_vec")]
        witness: Point,
    },
}

impl Containment {
    pub fn is_contained(&self) -> bool {
        !matches!(self, Containment::Outside { .. })
    }
}

/// Decides `P ⊆ R` on the torus. First tries to fit `P` into a single lattice
/// translate of one member; failing that, subtracts every member translate
/// meeting `P` and reports containment iff nothing of full dimension is left.
/// A failure carries an interior point of the remainder as witness.
pub fn contains_in_region(p: &Polyhedron, region: &Region, shift_range: i64) -> Result<Containment, GeometryError> {
    let p = PreparedPolytope::new("P", p.clone())?;
    PreparedRegion::new(region)?.contains(&p, shift_range)
}

/// True iff no two members meet in a set of positive measure under any
/// lattice shift. Shared faces do not count.
pub fn regions_disjoint(a: &Region, b: &Region, shift_range: i64) -> Result<bool, GeometryError> {
    let a = PreparedRegion::new(a)?;
    let b = PreparedRegion::new(b)?;
    prepared_disjoint(&a, &b, shift_range)
}

pub(crate) fn prepared_disjoint(a: &PreparedRegion, b: &PreparedRegion, shift_range: i64) -> Result<bool, GeometryError> {
    for p in &a.members {
        for (idx, w) in candidate_translates(p, &b.members, shift_range)? {
            let q = b.members[idx].translated(&w);
            if q.is_full_dimensional() && p.is_full_dimensional() && overlaps(p, &q, p.dim()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Equality of the torus sets, by containment both ways.
pub fn region_equal_mod_lattice(a: &Region, b: &Region) -> Result<bool, GeometryError> {
    let a = PreparedRegion::new(a)?;
    let b = PreparedRegion::new(b)?;
    prepared_equal(&a, &b, DEFAULT_SHIFT_RANGE)
}

pub(crate) fn prepared_contained(a: &PreparedRegion, b: &PreparedRegion, shift_range: i64) -> Result<bool, GeometryError> {
    for m in &a.members {
        match b.contains(m, shift_range) {
            Ok(c) if c.is_contained() => {}
            Ok(_) | Err(GeometryError::ShiftRangeExhausted { .. }) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

pub(crate) fn prepared_equal(a: &PreparedRegion, b: &PreparedRegion, shift_range: i64) -> Result<bool, GeometryError> {
    Ok(prepared_contained(a, b, shift_range)? && prepared_contained(b, a, shift_range)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Member;
    use crate::scalar::rat;

    fn boxed(lo: [(i64, i64); 3], hi: [(i64, i64); 3]) -> Polyhedron {
        let l: Vec<Scalar> = lo.iter().map(|&(n, d)| rat(n, d)).collect();
        let h: Vec<Scalar> = hi.iter().map(|&(n, d)| rat(n, d)).collect();
        Polyhedron::boxed(&l, &h).unwrap()
    }

    fn cube_region() -> Region {
        Region::single("cube", Polyhedron::unit_cube(3))
    }

    #[test]
    fn self_containment_with_zero_shift() {
        let p = boxed([(1, 4), (0, 1), (0, 1)], [(1, 2), (1, 2), (1, 2)]);
        let r = Region::single("p", p.clone());
        let c = contains_in_region(&p, &r, 0).unwrap();
        assert_eq!(c, Containment::Member { member: "p".into(), shift: vec![0, 0, 0] });
    }

    #[test]
    fn containment_finds_lattice_shift() {
        let p = boxed([(5, 4), (1, 4), (-3, 4)], [(3, 2), (1, 2), (-1, 2)]);
        let c = contains_in_region(&p, &cube_region(), 3).unwrap();
        assert_eq!(c, Containment::Member { member: "cube".into(), shift: vec![-1, 0, 1] });
    }

    #[test]
    fn box_straddling_cube_boundary_needs_union() {
        // [3/4, 5/4] × [0,1/2]² lies in the torus cube but in no single translate.
        let p = boxed([(3, 4), (0, 1), (0, 1)], [(5, 4), (1, 2), (1, 2)]);
        let c = contains_in_region(&p, &cube_region(), 3).unwrap();
        match c {
            Containment::Union { cover } => assert_eq!(cover.len(), 2),
            other => panic!("expected union cover, got {other:?}"),
        }
    }

    #[test]
    fn witness_lies_outside_every_translate() {
        let small = Region::single("s", boxed([(0, 1), (0, 1), (0, 1)], [(1, 2), (1, 2), (1, 2)]));
        let p = boxed([(1, 4), (1, 4), (1, 4)], [(3, 4), (3, 4), (3, 4)]);
        let Containment::Outside { witness } = contains_in_region(&p, &small, 3).unwrap() else {
            panic!("should not be contained");
        };
        assert!(p.contains(&witness));
        let m = &small.members[0].polyhedron;
        for a in -3..=3 {
            for b in -3..=3 {
                for c in -3..=3 {
                    assert!(!contains_shifted(m, &witness, &[a, b, c]));
                }
            }
        }
    }

    #[test]
    fn no_meeting_translate_exhausts_range() {
        let p = boxed([(1, 10), (1, 10), (1, 10)], [(2, 10), (2, 10), (2, 10)]);
        let r = Region::single("far", boxed([(5, 10), (5, 10), (5, 10)], [(6, 10), (6, 10), (6, 10)]));
        assert_eq!(contains_in_region(&p, &r, 3), Err(GeometryError::ShiftRangeExhausted { range: 3 }));
    }

    #[test]
    fn shift_bound_is_asserted() {
        let p = boxed([(9, 1), (0, 1), (0, 1)], [(19, 2), (1, 2), (1, 2)]);
        assert!(matches!(
            contains_in_region(&p, &cube_region(), 3),
            Err(GeometryError::ShiftBoundExceeded { .. })
        ));
    }

    #[test]
    fn face_sharing_members_are_disjoint() {
        let a = Region::single("a", boxed([(0, 1), (0, 1), (0, 1)], [(1, 2), (1, 1), (1, 1)]));
        let b = Region::single("b", boxed([(1, 2), (0, 1), (0, 1)], [(1, 1), (1, 1), (1, 1)]));
        assert!(regions_disjoint(&a, &b, 3).unwrap());
        assert!(!regions_disjoint(&a, &a, 3).unwrap());
        // a + (1,0,0) is the same torus set as a.
        let shifted = Region::single("a1", boxed([(1, 1), (0, 1), (0, 1)], [(3, 2), (1, 1), (1, 1)]));
        assert!(!regions_disjoint(&shifted, &a, 3).unwrap());
    }

    #[test]
    fn equality_mod_lattice_of_split_cube() {
        let halves = Region::new(
            "halves",
            vec![
                Member { label: "h0".into(), polyhedron: boxed([(0, 1), (0, 1), (0, 1)], [(1, 2), (1, 1), (1, 1)]) },
                Member { label: "h1".into(), polyhedron: boxed([(-1, 2), (0, 1), (0, 1)], [(0, 1), (1, 1), (1, 1)]) },
            ],
        );
        assert!(region_equal_mod_lattice(&halves, &cube_region()).unwrap());
        let one_half = Region::single("h0", halves.members[0].polyhedron.clone());
        assert!(!region_equal_mod_lattice(&one_half, &cube_region()).unwrap());
        assert!(region_equal_mod_lattice(&cube_region(), &cube_region()).unwrap());
    }

    #[test]
    fn touching_translates_do_not_overlap() {
        let a = PreparedPolytope::new("a", Polyhedron::unit_cube(3)).unwrap();
        let b = a.translated(&[1, 0, 0]);
        assert!(!overlaps(&a, &b, 3));
        let c = PreparedPolytope::new("c", boxed([(1, 2), (1, 2), (1, 2)], [(3, 2), (3, 2), (3, 2)])).unwrap();
        assert!(overlaps(&a, &c, 3));
    }
}

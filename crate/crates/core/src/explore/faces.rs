//! The faces `p = 0`, `q = 0`, `r = 0` of the cube are invariant; on each
//! the map is a piecewise affine map of the 2-torus.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{orbit_rng, ExploreError, SimulationConfig};
use crate::dynamics::{branch_table, g3_step_formula};
use crate::geometry::{
    Containment, GeometryError, HalfSpace, Member, Polyhedron, PreparedPolytope, PreparedRegion, Region,
    DEFAULT_SHIFT_RANGE,
};
use crate::scalar::{int, rat, Point, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Face {
    #[serde(rename = "p0")]
    P0,
    #[serde(rename = "q0")]
    Q0,
    #[serde(rename = "r0")]
    R0,
}

impl Face {
    /// Index of the coordinate held at 0.
    pub fn fixed(self) -> usize {
        match self {
            Face::P0 => 0,
            Face::Q0 => 1,
            Face::R0 => 2,
        }
    }

    fn free(self) -> [usize; 2] {
        match self {
            Face::P0 => [1, 2],
            Face::Q0 => [0, 2],
            Face::R0 => [0, 1],
        }
    }

    fn embed(self, u: [f64; 2]) -> [f64; 3] {
        let mut x = [0.0; 3];
        let [a, b] = self.free();
        x[a] = u[0];
        x[b] = u[1];
        x
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Face::P0 => "p0",
            Face::Q0 => "q0",
            Face::R0 => "r0",
        })
    }
}

impl FromStr for Face {
    type Err = ExploreError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "p0" | "p" => Ok(Face::P0),
            "q0" | "q" => Ok(Face::Q0),
            "r0" | "r" => Ok(Face::R0),
            _ => Err(ExploreError::Config(format!("unknown face {s:?}; expected p0, q0 or r0"))),
        }
    }
}

/// Restriction of one branch to a face: a polygon in the two free
/// coordinates and the matching part of the offset.
#[derive(Debug, Clone)]
pub struct FacePiece {
    pub label: &'static str,
    pub domain: Polyhedron,
    pub offset: [i64; 2],
}

/// Drops coordinate `i` from `a·x ≤ b` on the plane `x_i = k`. `None` when
/// the row becomes trivially true; `Err` when it becomes infeasible.
fn restrict_row(h: &HalfSpace, i: usize, k: &Scalar) -> Result<Option<HalfSpace>, ()> {
    let a: Point = h.normal().iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect();
    let b = h.bound() - &h.normal()[i] * k;
    if a.iter().all(|v| v.is_zero()) {
        return if b >= Scalar::zero() { Ok(None) } else { Err(()) };
    }
    Ok(Some(HalfSpace::new(a, b).expect("nonzero normal")))
}

/// Section of a 3-polyhedron by the plane `x_i = k`, if two-dimensional.
fn section(p: &Polyhedron, i: usize, k: &Scalar) -> Option<Polyhedron> {
    let mut rows = Vec::new();
    for h in p.halfspaces() {
        match restrict_row(h, i, k) {
            Ok(Some(r)) => rows.push(r),
            Ok(None) => {}
            Err(()) => return None,
        }
    }
    let q = Polyhedron::new(2, rows).ok()?;
    q.is_full_dimensional().ok()?.then_some(q)
}

/// Branches whose closed domain meets the face in a polygon. On all of
/// them the fixed coordinate has offset 0, so the face maps into itself.
pub fn face_pieces(face: Face) -> Vec<FacePiece> {
    let i = face.fixed();
    let [a, b] = face.free();
    branch_table()
        .branches()
        .iter()
        .filter_map(|br| {
            let domain = section(&br.domain, i, &int(0))?;
            assert_eq!(br.offset[i], 0, "branch {} would leave the face", br.label);
            Some(FacePiece { label: br.label, domain, offset: [br.offset[a], br.offset[b]] })
        })
        .collect()
}

/// Sections of every member by the planes `x_i = k`, `k` an integer, as a
/// region of the 2-torus.
pub fn restrict_region(region: &Region, face: Face) -> Result<Region, GeometryError> {
    let i = face.fixed();
    let mut members = Vec::new();
    for m in &region.members {
        let verts = m.polyhedron.vertices()?;
        let lo = verts.iter().map(|v| &v[i]).min().ok_or(GeometryError::Empty)?.ceil();
        let hi = verts.iter().map(|v| &v[i]).max().ok_or(GeometryError::Empty)?.floor();
        let mut k = lo;
        while k <= hi {
            if let Some(s) = section(&m.polyhedron, i, &k) {
                members.push(Member { label: format!("{}|{}={}", m.label, ["p", "q", "r"][i], k), polyhedron: s });
            }
            k += int(1);
        }
    }
    Ok(Region::new(format!("{}|{}", region.label, face), members))
}

#[derive(Debug, Clone, Serialize)]
pub struct FacePieceCheck {
    pub branch: String,
    pub lift: Vec<i64>,
    pub containment: Containment,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceInvariance {
    pub face: Face,
    pub holds: bool,
    pub pieces: Vec<FacePieceCheck>,
}

/// Exact invariance of a region of the face (dimension 2) under the
/// restricted map.
pub fn face_polygon_invariance(face: Face, region: &Region, eps: &Scalar) -> Result<FaceInvariance, GeometryError> {
    let target = PreparedRegion::new(region)?;
    let lambda = int(2) * (int(1) - eps);
    let k = eps * rat(1, 2);
    let pieces = face_pieces(face);
    let mut checks = Vec::new();
    for m in &target.members {
        let lifts: Vec<[i64; 2]> = {
            let r = |i: usize| {
                use num_traits::ToPrimitive;
                let lo = m.lo[i].floor().to_integer().to_i64().expect("small");
                let hi = m.hi[i].ceil().to_integer().to_i64().expect("small") - 1;
                lo..=hi
            };
            r(0).flat_map(|a| r(1).map(move |b| [a, b])).collect()
        };
        for w in lifts {
            for fp in &pieces {
                let q = m.poly.translate_int(&[-w[0], -w[1]]).intersect_with(&fp.domain)?;
                if !q.is_full_dimensional()? {
                    continue;
                }
                let t: Point = fp.offset.iter().map(|&c| &k * int(c)).collect();
                let image = PreparedPolytope::new("image", q.scalar_affine_image(&lambda, &t))?;
                let c = match target.contains(&image, DEFAULT_SHIFT_RANGE) {
                    Ok(c) => c,
                    Err(GeometryError::ShiftRangeExhausted { .. }) => Containment::Outside { witness: image.centroid() },
                    Err(e) => return Err(e),
                };
                checks.push(FacePieceCheck { branch: fp.label.to_string(), lift: w.to_vec(), containment: c });
            }
        }
    }
    Ok(FaceInvariance { face, holds: checks.iter().all(|c| c.containment.is_contained()), pieces: checks })
}

/// Tail statistics of one orbit on a face, in the two free coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct FaceOrbit {
    pub orbit_id: usize,
    pub start: [f64; 2],
    /// Convex hull of the post burn-in iterates, counter-clockwise.
    pub hull: Vec<[f64; 2]>,
    pub area: f64,
    pub centroid: [f64; 2],
}

/// Orbits whose tails fill the same hull.
#[derive(Debug, Clone, Serialize)]
pub struct FaceCandidate {
    pub hull: Vec<[f64; 2]>,
    pub area: f64,
    pub centroid: [f64; 2],
    pub orbit_ids: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceReport {
    pub face: Face,
    pub eps: f64,
    /// The fixed coordinate stayed exactly `0.0` along every orbit.
    pub fixed_coordinate_preserved: bool,
    pub orbits: Vec<FaceOrbit>,
    /// Distinct tail hulls; more than one suggests several invariant sets.
    pub candidates: Vec<FaceCandidate>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone chain hull, counter-clockwise.
pub fn hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn area_and_centroid(h: &[[f64; 2]]) -> (f64, [f64; 2]) {
    let n = h.len();
    if n < 3 {
        let c = h.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        let m = n.max(1) as f64;
        return (0.0, [c[0] / m, c[1] / m]);
    }
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (h[i], h[(i + 1) % n]);
        let c = p[0] * q[1] - q[0] * p[1];
        a += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    (a / 2.0, [cx / (3.0 * a), cy / (3.0 * a)])
}

/// Tail hulls closer than this in centroid and relative area are merged.
const SAME_HULL: f64 = 0.02;

/// Random orbits on the face through the formula path, which keeps the fixed
/// coordinate exactly zero. Tails are taken on the torus without unwrapping,
/// so a hull is only meaningful for tails away from the face's edges.
pub fn face_dynamics(face: Face, cfg: &SimulationConfig) -> Result<FaceReport, ExploreError> {
    cfg.validate()?;
    let i = face.fixed();
    let [a, b] = face.free();
    let runs: Vec<(FaceOrbit, bool)> = (0..cfg.orbit_count)
        .into_par_iter()
        .map(|id| {
            let mut rng = orbit_rng(cfg.rng_seed, id);
            let start = [rng.gen::<f64>(), rng.gen::<f64>()];
            let mut x = face.embed(start);
            let mut preserved = true;
            let mut tail = Vec::with_capacity((cfg.steps - cfg.burn_in) as usize);
            for k in 1..=cfg.steps {
                x = g3_step_formula(&x, &cfg.eps);
                preserved &= x[i] == 0.0;
                if k > cfg.burn_in {
                    tail.push([x[a], x[b]]);
                }
            }
            let hull = hull_2d(&tail);
            let (area, centroid) = area_and_centroid(&hull);
            (FaceOrbit { orbit_id: id, start, hull, area, centroid }, preserved)
        })
        .collect();
    let fixed_coordinate_preserved = runs.iter().all(|(_, p)| *p);
    let orbits: Vec<FaceOrbit> = runs.into_iter().map(|(o, _)| o).collect();
    let mut candidates: Vec<FaceCandidate> = Vec::new();
    for o in &orbits {
        let same = candidates.iter_mut().find(|c| {
            let d = ((c.centroid[0] - o.centroid[0]).powi(2) + (c.centroid[1] - o.centroid[1]).powi(2)).sqrt();
            d < SAME_HULL && (c.area - o.area).abs() <= SAME_HULL * c.area.max(o.area).max(1e-12) * 10.0
        });
        match same {
            Some(c) => c.orbit_ids.push(o.orbit_id),
            None => candidates.push(FaceCandidate {
                hull: o.hull.clone(),
                area: o.area,
                centroid: o.centroid,
                orbit_ids: vec![o.orbit_id],
            }),
        }
    }
    Ok(FaceReport { face, eps: cfg.eps, fixed_coordinate_preserved, orbits, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{build_region, RegionName};

    #[test]
    fn face_pieces_tile_each_face() {
        for face in [Face::P0, Face::Q0, Face::R0] {
            let pieces = face_pieces(face);
            let total = pieces.iter().fold(int(0), |acc, p| acc + p.domain.volume().unwrap());
            assert_eq!(total, int(1), "{face}");
        }
    }

    #[test]
    fn whole_face_is_invariant_and_a_small_square_is_not() {
        let eps = rat(41, 100);
        let face = Region::single("face", Polyhedron::unit_cube(2));
        assert!(face_polygon_invariance(Face::Q0, &face, &eps).unwrap().holds);
        let small = Polyhedron::boxed(&[rat(1, 10), rat(1, 10)], &[rat(1, 5), rat(1, 5)]).unwrap();
        assert!(!face_polygon_invariance(Face::Q0, &Region::single("sq", small), &eps).unwrap().holds);
    }

    #[test]
    fn section_of_a_on_r0_is_invariant() {
        let eps = rat(41, 100);
        let a = build_region(RegionName::A, &eps).unwrap();
        let sec = restrict_region(&a.region, Face::R0).unwrap();
        assert!(!sec.members.is_empty());
        assert!(face_polygon_invariance(Face::R0, &sec, &eps).unwrap().holds);
    }

    #[test]
    fn hull_of_square_points() {
        let h = hull_2d(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]);
        assert_eq!(h.len(), 4);
        let (a, c) = area_and_centroid(&h);
        assert!((a - 1.0).abs() < 1e-12 && (c[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn faces_stay_exactly_invariant() {
        let cfg = SimulationConfig { eps: 0.45, steps: 20_000, burn_in: 1_000, orbit_count: 4, ..Default::default() };
        for face in [Face::P0, Face::Q0, Face::R0] {
            assert!(face_dynamics(face, &cfg).unwrap().fixed_coordinate_preserved);
        }
    }
}

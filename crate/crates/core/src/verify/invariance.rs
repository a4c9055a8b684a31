//! Forward invariance of a region under the reduced map, decided piece by
//! piece: member ∩ branch domain, mapped affinely, tested for containment.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::regions::{build_region, BuiltRegion, RegionName};
use super::VerifyError;
use crate::dynamics::{branch_table, Branch};
use crate::geometry::{
    Containment, GeometryError, HalfSpace, Member, Polyhedron, PreparedPolytope, PreparedRegion, Region,
    DEFAULT_SHIFT_RANGE,
};
use crate::scalar::{format_scalar, int, serde_scalar, serde_scalar_vec, Point, Scalar};
use crate::symmetry::parse_word;

/// `member ∩ (domain + lift)` and its image.
#[derive(Debug, Clone)]
pub struct Piece {
    pub member: String,
    pub branch: &'static str,
    pub lift: Vec<i64>,
    /// The piece moved into the unit cube, i.e. `(member − lift) ∩ domain`.
    pub piece: Polyhedron,
    pub image: Polyhedron,
}

fn floor_i64(x: &Scalar) -> i64 {
    use num_traits::ToPrimitive;
    x.floor().to_integer().to_i64().expect("coordinates are small")
}

fn ceil_i64(x: &Scalar) -> i64 {
    use num_traits::ToPrimitive;
    x.ceil().to_integer().to_i64().expect("coordinates are small")
}

/// Integer cubes `lift + [0,1]³` meeting the member's bounding box in a solid.
fn lifts(member: &PreparedPolytope) -> Vec<Vec<i64>> {
    let ranges: Vec<(i64, i64)> =
        member.lo.iter().zip(&member.hi).map(|(lo, hi)| (floor_i64(lo), ceil_i64(hi) - 1)).collect();
    let mut out = Vec::new();
    for a in ranges[0].0..=ranges[0].1 {
        for b in ranges[1].0..=ranges[1].1 {
            for c in ranges[2].0..=ranges[2].1 {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

fn piece_of(member: &Member, lift: &[i64], branch: &Branch, eps: &Scalar) -> Result<Option<Piece>, VerifyError> {
    let neg: Vec<i64> = lift.iter().map(|x| -x).collect();
    let q = member.polyhedron.translate_int(&neg).intersect_with(&branch.domain)?;
    if !q.is_full_dimensional()? {
        return Ok(None);
    }
    let (l, t) = branch.scale_and_translation(eps);
    let image = q.scalar_affine_image(&l, &t);
    Ok(Some(Piece { member: member.label.clone(), branch: branch.label, lift: lift.to_vec(), piece: q, image }))
}

/// All full-dimensional pieces of a member, in lift order then table order.
pub fn member_pieces(member: &Member, eps: &Scalar) -> Result<Vec<Piece>, VerifyError> {
    let prepared = PreparedPolytope::new(member.label.clone(), member.polyhedron.clone())?;
    let jobs: Vec<(Vec<i64>, &Branch)> = lifts(&prepared)
        .into_iter()
        .flat_map(|w| branch_table().branches().iter().map(move |b| (w.clone(), b)))
        .collect();
    let found = jobs
        .par_iter()
        .map(|(w, b)| piece_of(member, w, b, eps))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Branch labels met by each member in a set of positive volume.
pub fn check_intersection_pattern(name: RegionName, eps: &Scalar) -> Result<BTreeMap<String, Vec<String>>, VerifyError> {
    let built = build_region(name, eps)?;
    intersection_pattern(&built.region, eps)
}

pub fn intersection_pattern(region: &Region, eps: &Scalar) -> Result<BTreeMap<String, Vec<String>>, VerifyError> {
    let mut out = BTreeMap::new();
    for m in &region.members {
        let mut labels: Vec<String> = Vec::new();
        for p in member_pieces(m, eps)? {
            if !labels.iter().any(|l| l == p.branch) {
                labels.push(p.branch.to_string());
            }
        }
        out.insert(m.label.clone(), labels);
    }
    Ok(out)
}

/// A piece whose image lands inside the region.
#[derive(Debug, Clone, Serialize)]
pub struct PieceRecord {
    pub member: String,
    pub branch: String,
    pub lift: Vec<i64>,
    pub containment: Containment,
}

impl PieceRecord {
    /// The member receiving the whole image, when a single one does.
    pub fn target(&self) -> Option<&str> {
        match &self.containment {
            Containment::Member { member, .. } => Some(member),
            _ => None,
        }
    }
}

/// A piece whose image leaves the region.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub member: String,
    pub branch: String,
    pub lift: Vec<i64>,
    /// Member translate receiving most of the image.
    pub target: Option<String>,
    pub shift: Option<Vec<i64>>,
    /// Rows of the target member (before shifting) that the image crosses.
    pub failed: Vec<String>,
    pub failed_halfspaces: Vec<HalfSpace>,
    /// Image vertex violating the first failed row.
    #[serde(with = "serde_opt_point")]
    pub vertex: Option<Point>,
    /// Point of the image outside every member translate.
    #[serde(with = "serde_scalar_vec")]
    pub witness: Point,
    /// A point of the piece, in unit-cube coordinates, mapped to `witness`.
    #[serde(with = "serde_scalar_vec")]
    pub preimage: Point,
}

mod serde_opt_point {
    use serde::Serializer;

    use crate::scalar::{format_scalar, Point};

    pub fn serialize<S: Serializer>(p: &Option<Point>, s: S) -> Result<S::Ok, S::Error> {
        match p {
            Some(v) => s.collect_seq(v.iter().map(format_scalar)),
            None => s.serialize_none(),
        }
    }
}

/// Whether a non-generating member is covered by the symmetry reduction.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionCheck {
    pub member: String,
    pub word: String,
    /// `word(R) = R` on the torus.
    pub stabilizes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    #[serde(with = "serde_scalar")]
    pub eps: Scalar,
    pub region: String,
    pub holds: bool,
    pub torus_faithful: bool,
    /// True when only generating members were mapped.
    pub reduced: bool,
    pub checked_members: Vec<String>,
    pub reduction: Vec<ReductionCheck>,
    pub pieces: Vec<PieceRecord>,
    pub violations: Vec<Violation>,
}

impl InvarianceReport {
    pub fn piece(&self, member: &str, branch: &str) -> Option<&PieceRecord> {
        self.pieces.iter().find(|p| p.member == member && p.branch == branch)
    }

    /// `(member, branch) → target member`, with `"union"` for covers.
    pub fn routing(&self) -> Vec<(String, String, String)> {
        self.pieces
            .iter()
            .map(|p| (p.member.clone(), p.branch.clone(), p.target().unwrap_or("union").to_string()))
            .collect()
    }
}

enum Outcome {
    Inside(PieceRecord),
    Outside(Violation),
}

fn centroid(verts: &[Point]) -> Point {
    let n = int(verts.len() as i64);
    (0..verts[0].len())
        .map(|i| verts.iter().fold(Scalar::zero(), |acc, v| acc + &v[i]) / &n)
        .collect()
}

struct Nearest {
    target: String,
    shift: Vec<i64>,
    failed: Vec<HalfSpace>,
    vertex: Option<Point>,
}

/// Among the member translates violated by the fewest rows, the one
/// receiving the largest volume of the image. Shifts apply to the image, as
/// in [`Containment`].
fn nearest_target(image: &PreparedPolytope, region: &PreparedRegion) -> Result<Option<Nearest>, VerifyError> {
    let ci = centroid(&image.verts);
    let mut cands: Vec<(usize, Scalar, Nearest, Point)> = Vec::new();
    for m in &region.members {
        let cm = centroid(&m.verts);
        let base: Vec<i64> = cm.iter().zip(&ci).map(|(a, b)| floor_i64(&(a - b + crate::scalar::half()))).collect();
        for d in 0..27i64 {
            let delta = [d / 9 - 1, (d / 3) % 3 - 1, d % 3 - 1];
            let w: Vec<i64> = base.iter().zip(delta).map(|(b, e)| b + e).collect();
            let wv: Point = w.iter().map(|&x| int(x)).collect();
            if !(0..3).all(|i| &image.lo[i] + &wv[i] < m.hi[i] && m.lo[i] < &image.hi[i] + &wv[i]) {
                continue;
            }
            let moved: Vec<Point> =
                image.verts.iter().map(|v| v.iter().zip(&wv).map(|(a, b)| a + b).collect()).collect();
            let mut failed = Vec::new();
            let mut amount = Scalar::zero();
            let mut vertex = None;
            for h in m.poly.halfspaces() {
                let worst = moved
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (h.slack(v), i))
                    .min_by(|a, b| a.0.cmp(&b.0))
                    .expect("nonempty image");
                if worst.0.is_negative() {
                    if vertex.is_none() {
                        vertex = Some(image.verts[worst.1].clone());
                    }
                    amount += worst.0.abs();
                    failed.push(h.clone());
                }
            }
            cands.push((failed.len(), amount, Nearest { target: m.label.clone(), shift: w, failed, vertex }, wv));
        }
    }
    let Some(fewest) = cands.iter().map(|c| c.0).min() else {
        return Ok(None);
    };
    let mut best: Option<(Scalar, Scalar, Nearest)> = None;
    for (n, amount, near, wv) in cands {
        if n > fewest + 1 {
            continue;
        }
        let m = region.members.iter().find(|m| m.label == near.target).expect("candidate member");
        let overlap = image.poly.translate(&wv).intersect_with(&m.poly)?.volume()?;
        let better = match &best {
            None => true,
            Some((v, a, _)) => overlap > *v || (overlap == *v && amount < *a),
        };
        if better {
            best = Some((overlap, amount, near));
        }
    }
    Ok(best.map(|(_, _, n)| n))
}

fn judge(piece: &Piece, region: &PreparedRegion, eps: &Scalar) -> Result<Outcome, VerifyError> {
    let image = PreparedPolytope::new("image", piece.image.clone())?;
    let containment = match region.contains(&image, DEFAULT_SHIFT_RANGE) {
        Ok(c) => c,
        Err(GeometryError::ShiftRangeExhausted { .. }) => Containment::Outside { witness: image.centroid() },
        Err(e) => return Err(e.into()),
    };
    match containment {
        Containment::Outside { witness } => {
            let branch = branch_table().get(piece.branch).expect("known label");
            let (l, t) = branch.scale_and_translation(eps);
            let preimage: Point = witness.iter().zip(&t).map(|(y, ti)| (y - ti) / &l).collect();
            let near = nearest_target(&image, region)?;
            Ok(Outcome::Outside(Violation {
                member: piece.member.clone(),
                branch: piece.branch.to_string(),
                lift: piece.lift.clone(),
                target: near.as_ref().map(|n| n.target.clone()),
                shift: near.as_ref().map(|n| n.shift.clone()),
                failed: near.as_ref().map(|n| n.failed.iter().map(|h| h.to_string()).collect()).unwrap_or_default(),
                failed_halfspaces: near.as_ref().map(|n| n.failed.clone()).unwrap_or_default(),
                vertex: near.and_then(|n| n.vertex),
                witness,
                preimage,
            }))
        }
        c => Ok(Outcome::Inside(PieceRecord {
            member: piece.member.clone(),
            branch: piece.branch.to_string(),
            lift: piece.lift.clone(),
            containment: c,
        })),
    }
}

/// Maps every piece of `members` and tests it against `region`.
fn run(
    members: &[&Member],
    region: &Region,
    eps: &Scalar,
) -> Result<(Vec<PieceRecord>, Vec<Violation>), VerifyError> {
    let prepared = PreparedRegion::new(region)?;
    let mut pieces = Vec::new();
    for m in members {
        pieces.extend(member_pieces(m, eps)?);
    }
    let outcomes = pieces
        .par_iter()
        .map(|p| judge(p, &prepared, eps))
        .collect::<Result<Vec<_>, _>>()?;
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Inside(r) => inside.push(r),
            Outcome::Outside(v) => outside.push(v),
        }
    }
    Ok((inside, outside))
}

/// Reduced check: generating members are mapped; every other member must
/// be the image of one under a symmetry fixing the region, otherwise it is
/// mapped as well.
pub fn check_invariance(name: RegionName, eps: &Scalar) -> Result<InvarianceReport, VerifyError> {
    let built = build_region(name, eps)?;
    invariance_of(&built, true)
}

/// Every member mapped; serves as the oracle for the reduced check.
pub fn check_invariance_full(name: RegionName, eps: &Scalar) -> Result<InvarianceReport, VerifyError> {
    let built = build_region(name, eps)?;
    invariance_of(&built, false)
}

pub fn invariance_of(built: &BuiltRegion, reduce: bool) -> Result<InvarianceReport, VerifyError> {
    let region = &built.region;
    let mut reduction = Vec::new();
    let mut checked: Vec<&Member> = Vec::new();
    if reduce {
        let prepared = PreparedRegion::new(region)?;
        let mut verdicts: BTreeMap<String, bool> = BTreeMap::new();
        for o in &built.origins {
            let m = region.member(&o.member).expect("origin names a member");
            if o.word == "id" {
                checked.push(m);
                continue;
            }
            let stabilizes = match verdicts.get(&o.word) {
                Some(v) => *v,
                None => {
                    let s = parse_word(&o.word).ok_or_else(|| VerifyError::UnknownWord(o.word.clone()))?;
                    let img = PreparedRegion::new(&s.apply_to_region(region)?)?;
                    let v = crate::geometry::prepared_equal(&img, &prepared, DEFAULT_SHIFT_RANGE)?;
                    verdicts.insert(o.word.clone(), v);
                    v
                }
            };
            if !stabilizes {
                checked.push(m);
            }
            reduction.push(ReductionCheck { member: o.member.clone(), word: o.word.clone(), stabilizes });
        }
    } else {
        checked = region.members.iter().collect();
    }
    let (pieces, violations) = run(&checked, region, &built.eps)?;
    Ok(InvarianceReport {
        eps: built.eps.clone(),
        region: built.name.to_string(),
        holds: violations.is_empty(),
        torus_faithful: built.torus_faithful,
        reduced: reduce,
        checked_members: checked.iter().map(|m| m.label.clone()).collect(),
        reduction,
        pieces,
        violations,
    })
}

/// Outcome of mapping one named piece into a target region.
#[derive(Debug, Clone, Serialize)]
pub struct PieceCheck {
    pub member: String,
    pub branch: String,
    #[serde(with = "serde_scalar")]
    pub eps: Scalar,
    pub target: String,
    pub contained: bool,
    pub containment: Containment,
}

/// `G(member ∩ branch) ⊆ target` for one member of a built region.
pub fn check_piece(
    source: RegionName,
    member: &str,
    branch: &str,
    target: RegionName,
    eps: &Scalar,
) -> Result<PieceCheck, VerifyError> {
    let src = build_region(source, eps)?;
    let m = src.region.member(member).ok_or_else(|| VerifyError::UnknownMember(member.to_string()))?;
    branch_table().get(branch).ok_or_else(|| VerifyError::UnknownBranch(branch.to_string()))?;
    let tgt = build_region(target, eps)?;
    let prepared = PreparedRegion::new(&tgt.region)?;
    let pieces: Vec<Piece> = member_pieces(m, eps)?.into_iter().filter(|p| p.branch == branch).collect();
    if pieces.is_empty() {
        return Err(VerifyError::EmptyPiece { member: member.to_string(), branch: branch.to_string(), eps: format_scalar(eps) });
    }
    // A piece split across lifts is contained iff every part is.
    let mut last = None;
    for p in &pieces {
        let image = PreparedPolytope::new("image", p.image.clone())?;
        let c = match prepared.contains(&image, DEFAULT_SHIFT_RANGE) {
            Ok(c) => c,
            Err(GeometryError::ShiftRangeExhausted { .. }) => Containment::Outside { witness: image.centroid() },
            Err(e) => return Err(e.into()),
        };
        let done = !c.is_contained();
        last = Some(c);
        if done {
            break;
        }
    }
    let containment = last.expect("at least one piece");
    Ok(PieceCheck {
        member: member.to_string(),
        branch: branch.to_string(),
        eps: eps.clone(),
        target: target.to_string(),
        contained: containment.is_contained(),
        containment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn labels(v: &[String]) -> Vec<&str> {
        v.iter().map(|s| s.as_str()).collect()
    }

    #[test]
    fn p1_and_p2_patterns() {
        let pat = check_intersection_pattern(RegionName::A, &rat(41, 100)).unwrap();
        assert_eq!(labels(&pat["P1"]), ["1b", "4a"]);
        assert_eq!(labels(&pat["P2"]), ["3a", "3b", "3c", "4a", "4b", "4c"]);
    }

    #[test]
    fn p0_pattern() {
        let pat = check_intersection_pattern(RegionName::P0, &rat(32, 100)).unwrap();
        assert_eq!(labels(&pat["P0"]), ["1e", "4b", "5b", "8b"]);
    }

    #[test]
    fn violation_witness_maps_outside() {
        let eps = rat(39, 100);
        let rep = check_invariance(RegionName::A, &eps).unwrap();
        assert!(!rep.holds);
        let v = &rep.violations[0];
        let x: [Scalar; 3] = [v.preimage[0].clone(), v.preimage[1].clone(), v.preimage[2].clone()];
        let b = branch_table().get(&v.branch).unwrap();
        assert_eq!(b.apply(&x, &eps).to_vec(), v.witness);
        let a = build_region(RegionName::A, &eps).unwrap();
        let pr = PreparedRegion::new(&a.region).unwrap();
        let dot = PreparedPolytope::new("w", Polyhedron::boxed(&v.witness, &v.witness).unwrap()).unwrap();
        assert!(!pr.contains(&dot, DEFAULT_SHIFT_RANGE).map(|c| c.is_contained()).unwrap_or(false));
    }
}

//! Invariance, symmetry and asymmetry of the regions `𝒜` and `𝒮`.

mod certificate;
mod critical;
mod invariance;
mod regions;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use certificate::{
    asymmetry_certificates, evaluate_certificate, verify_certificate, CertificateCheck, SeparationCertificate, Side,
};
pub use critical::{
    bisect_eps_star, critical_values, cubic, eps_b, eps_star2, radical, Bracket, CriticalValues, Surd, RADICAL_TOL,
};
pub use invariance::{
    check_intersection_pattern, check_invariance, check_invariance_full, check_piece, intersection_pattern,
    invariance_of, member_pieces, InvarianceReport, Piece, PieceCheck, PieceRecord, ReductionCheck, Violation,
};
pub use regions::{
    build_region, image_member, member_label, p0, p1, p2, BuiltRegion, Constants, MemberOrigin, RegionName, A_WORDS,
    S_COMPONENTS, S_WORDS,
};

use crate::geometry::{prepared_disjoint, prepared_equal, GeometryError, PreparedRegion, Region, DEFAULT_SHIFT_RANGE};
use crate::scalar::{serde_scalar, Scalar};
use crate::symmetry::{generators, orbit_of_region, SymmetryGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("region {name} is not buildable at eps = {eps}: {reason}")]
    NotBuildable { name: String, eps: String, reason: String },
    #[error("unknown region {0:?}; expected one of P0, P1, P2, A, S")]
    UnknownRegion(String),
    #[error("unknown symmetry word {0:?}")]
    UnknownWord(String),
    #[error("unknown member {0:?}")]
    UnknownMember(String),
    #[error("unknown branch {0:?}")]
    UnknownBranch(String),
    #[error("{member} does not meet branch {branch} in a solid at eps = {eps}")]
    EmptyPiece { member: String, branch: String, eps: String },
    #[error("no proposition {0}; expected 1 or 2")]
    InvalidProposition(u8),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryVerdict {
    Equal,
    Disjoint,
    Neither,
}

/// `S_i(R)` against `R` for each generator.
pub fn symmetry_profile(region: &Region) -> Result<BTreeMap<String, SymmetryVerdict>, VerifyError> {
    let base = PreparedRegion::new(region)?;
    let mut out = BTreeMap::new();
    for s in generators() {
        let img = PreparedRegion::new(&s.apply_to_region(region)?)?;
        let v = if prepared_equal(&img, &base, DEFAULT_SHIFT_RANGE)? {
            SymmetryVerdict::Equal
        } else if prepared_disjoint(&img, &base, DEFAULT_SHIFT_RANGE)? {
            SymmetryVerdict::Disjoint
        } else {
            SymmetryVerdict::Neither
        };
        out.insert(s.name.clone(), v);
    }
    Ok(out)
}

pub fn check_symmetry_profile(name: RegionName, eps: &Scalar) -> Result<BTreeMap<String, SymmetryVerdict>, VerifyError> {
    symmetry_profile(&build_region(name, eps)?.region)
}

/// The profile each proposition asserts.
pub fn expected_profile(which: u8) -> BTreeMap<String, SymmetryVerdict> {
    (0..7)
        .map(|i| {
            let v = match (which, i) {
                (1, 3) | (1, 4) | (2, _) => SymmetryVerdict::Equal,
                _ => SymmetryVerdict::Disjoint,
            };
            (format!("S{i}"), v)
        })
        .collect()
}

/// `𝒜 ∩ 𝒮` has measure zero.
pub fn disjointness_a_s(eps: &Scalar) -> Result<bool, VerifyError> {
    let a = PreparedRegion::new(&build_region(RegionName::A, eps)?.region)?;
    let s = PreparedRegion::new(&build_region(RegionName::S, eps)?.region)?;
    Ok(prepared_disjoint(&a, &s, DEFAULT_SHIFT_RANGE)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizerReport {
    pub region: String,
    pub group_order: usize,
    pub orbit_size: usize,
    pub stabilizer_order: usize,
    pub stabilizer: Vec<String>,
}

/// Orbit and stabilizer of a region under the group generated by `S₀ … S₆`.
pub fn stabilizer_report(name: RegionName, eps: &Scalar) -> Result<StabilizerReport, VerifyError> {
    let built = build_region(name, eps)?;
    let group = SymmetryGroup::full();
    let orbit = orbit_of_region(&built.region, &group)?;
    Ok(StabilizerReport {
        region: name.to_string(),
        group_order: group.order(),
        orbit_size: orbit.images.len(),
        stabilizer_order: orbit.stabilizer_order,
        stabilizer: orbit.stabilizer,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PropositionReport {
    pub proposition: u8,
    #[serde(with = "serde_scalar")]
    pub eps: Scalar,
    pub verdict: bool,
    pub region: String,
    pub members: Vec<String>,
    pub torus_faithful: bool,
    pub constants: Constants,
    /// Branches met by each generating member.
    pub intersection_pattern: BTreeMap<String, Vec<String>>,
    pub invariance: InvarianceReport,
    pub symmetry_profile: BTreeMap<String, SymmetryVerdict>,
    pub profile_as_stated: bool,
    pub certificates: Vec<CertificateCheck>,
    pub checks: BTreeMap<String, bool>,
}

/// Everything one proposition asserts, checked at one coupling value.
pub fn proposition_report(which: u8, eps: &Scalar) -> Result<PropositionReport, VerifyError> {
    let name = match which {
        1 => RegionName::A,
        2 => RegionName::S,
        w => return Err(VerifyError::InvalidProposition(w)),
    };
    let built = build_region(name, eps)?;
    let mut pattern = BTreeMap::new();
    for m in built.generating_members() {
        let single = Region::new(m.label.clone(), vec![m.clone()]);
        pattern.extend(intersection_pattern(&single, eps)?);
    }
    let invariance = invariance_of(&built, true)?;
    let profile = symmetry_profile(&built.region)?;
    let profile_as_stated = profile == expected_profile(which);
    let certificates = if which == 1 {
        asymmetry_certificates(eps)?
            .iter()
            .map(|c| evaluate_certificate(c, eps))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let mut checks = BTreeMap::new();
    checks.insert("invariance".to_string(), invariance.holds);
    checks.insert("reduction".to_string(), invariance.reduction.iter().all(|r| r.stabilizes));
    checks.insert("symmetry_profile".to_string(), profile_as_stated);
    if which == 1 {
        checks.insert("certificates".to_string(), certificates.iter().all(|c| c.holds));
    }
    let verdict = checks.values().all(|&v| v);
    Ok(PropositionReport {
        proposition: which,
        eps: eps.clone(),
        verdict,
        region: name.to_string(),
        members: built.region.members.iter().map(|m| m.label.clone()).collect(),
        torus_faithful: built.torus_faithful,
        constants: built.constants.clone(),
        intersection_pattern: pattern,
        invariance,
        symmetry_profile: profile,
        profile_as_stated,
        certificates,
        checks,
    })
}

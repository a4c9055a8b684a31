//! The candidate regions `P₀, P₁, P₂, 𝒜, 𝒮` as exact lifted polyhedra.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::VerifyError;
use crate::geometry::{HalfSpace, Member, Polyhedron, Region};
use crate::lorenz::{at_least_critical, p_star, LorenzMap};
use crate::scalar::{format_scalar, half, int, serde_scalar, Scalar};
use crate::symmetry::{canonical_shift, parse_word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RegionName {
    P0,
    P1,
    P2,
    A,
    S,
}

impl RegionName {
    pub const ALL: [RegionName; 5] = [RegionName::P0, RegionName::P1, RegionName::P2, RegionName::A, RegionName::S];
}

impl fmt::Display for RegionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionName::P0 => "P0",
            RegionName::P1 => "P1",
            RegionName::P2 => "P2",
            RegionName::A => "A",
            RegionName::S => "S",
        };
        f.write_str(s)
    }
}

impl FromStr for RegionName {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "P0" | "p0" => Ok(RegionName::P0),
            "P1" | "p1" => Ok(RegionName::P1),
            "P2" | "p2" => Ok(RegionName::P2),
            "A" | "a" => Ok(RegionName::A),
            "S" | "s" => Ok(RegionName::S),
            _ => Err(VerifyError::UnknownRegion(s.to_string())),
        }
    }
}

/// The numbers the region tables are written in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constants {
    #[serde(with = "serde_scalar")]
    pub eps: Scalar,
    #[serde(with = "serde_scalar")]
    pub half_eps: Scalar,
    #[serde(with = "serde_scalar")]
    pub p_star: Scalar,
    /// `L(ε/2)`
    #[serde(with = "serde_scalar")]
    pub l_lo: Scalar,
    /// `L(1−ε/2)`
    #[serde(with = "serde_scalar")]
    pub l_hi: Scalar,
    /// `L²(ε/2)`
    #[serde(with = "serde_scalar")]
    pub l2_lo: Scalar,
    /// `L²(1−ε/2)`
    #[serde(with = "serde_scalar")]
    pub l2_hi: Scalar,
}

impl Constants {
    pub fn new(eps: &Scalar) -> Result<Self, VerifyError> {
        check_range(eps)?;
        let l = LorenzMap::new(eps.clone());
        let d = l.domain();
        let it = |v: &Scalar, n| {
            l.iterate(v, n).map_err(|e| VerifyError::NotBuildable {
                name: "constants".into(),
                eps: format_scalar(eps),
                reason: e.to_string(),
            })
        };
        Ok(Constants {
            eps: eps.clone(),
            half_eps: d.lo.clone(),
            p_star: p_star(eps),
            l_lo: it(&d.lo, 1)?,
            l_hi: it(&d.hi, 1)?,
            l2_lo: it(&d.lo, 2)?,
            l2_hi: it(&d.hi, 2)?,
        })
    }
}

fn check_range(eps: &Scalar) -> Result<(), VerifyError> {
    if *eps <= int(0) || *eps >= half() {
        return Err(VerifyError::NotBuildable {
            name: "region".into(),
            eps: format_scalar(eps),
            reason: "eps must lie in (0, 1/2)".into(),
        });
    }
    Ok(())
}

const P: [i64; 3] = [1, 0, 0];
const Q: [i64; 3] = [0, 1, 0];
const R: [i64; 3] = [0, 0, 1];
const PQ: [i64; 3] = [1, 1, 0];
const QR: [i64; 3] = [0, 1, 1];
const PQR: [i64; 3] = [1, 1, 1];

fn poly(hs: Vec<HalfSpace>) -> Polyhedron {
    Polyhedron::new(3, hs).expect("three-dimensional rows")
}

pub fn p1(c: &Constants) -> Polyhedron {
    poly(vec![
        HalfSpace::ge(&Q, c.half_eps.clone()),
        HalfSpace::ge(&R, int(0)),
        HalfSpace::ge(&PQ, int(1) - &c.p_star),
        HalfSpace::le(&QR, c.p_star.clone()),
        HalfSpace::le(&PQR, int(1) - &c.half_eps),
    ])
}

pub fn p2(c: &Constants) -> Polyhedron {
    poly(vec![
        HalfSpace::le(&P, int(1)),
        HalfSpace::ge(&R, int(0)),
        HalfSpace::ge(&PQ, int(1) + &c.p_star),
        HalfSpace::le(&QR, int(1) - &c.p_star),
    ])
}

pub fn p0(c: &Constants) -> Polyhedron {
    poly(vec![
        HalfSpace::ge(&P, c.l_lo.clone()),
        HalfSpace::le(&P, c.l_hi.clone()),
        HalfSpace::ge(&Q, c.half_eps.clone()),
        HalfSpace::le(&Q, c.l2_hi.clone()),
        HalfSpace::ge(&R, c.l_lo.clone()),
        HalfSpace::le(&R, c.l_hi.clone()),
        HalfSpace::ge(&PQR, int(1) + &c.half_eps),
        HalfSpace::le(&PQR, int(1) + &c.l2_hi),
    ])
}

/// Words producing the members of `𝒜` from `P₁` and `P₂`.
pub const A_WORDS: [(&str, RegionName); 6] = [
    ("id", RegionName::P1),
    ("id", RegionName::P2),
    ("S3", RegionName::P1),
    ("S4", RegionName::P1),
    ("S3S4", RegionName::P1),
    ("S3", RegionName::P2),
];

/// Words producing the twelve members of `𝒮` from `P₀`.
pub const S_WORDS: [&str; 12] = ["id", "S0", "S1", "S2", "S3", "S4", "S5", "S0S1", "S2S1", "S3S1", "S4S1", "S5S1"];

/// The two-member connected components of `𝒮`.
pub const S_COMPONENTS: [[&str; 2]; 6] =
    [["id", "S0S1"], ["S0", "S1"], ["S2", "S5S1"], ["S3", "S4S1"], ["S4", "S3S1"], ["S5", "S2S1"]];

/// How a member arises: `word` applied to the base polyhedron.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberOrigin {
    pub member: String,
    pub word: String,
    pub base: RegionName,
}

#[derive(Debug, Clone, Serialize)]
pub struct BuiltRegion {
    pub name: RegionName,
    #[serde(with = "serde_scalar")]
    pub eps: Scalar,
    pub constants: Constants,
    pub region: Region,
    pub origins: Vec<MemberOrigin>,
    /// False for `𝒮` below `ε₁`, where the tables no longer describe the
    /// torus set; verdicts there are advisory.
    pub torus_faithful: bool,
}

impl BuiltRegion {
    /// Members that the symmetry reduction has to check directly.
    pub fn generating_members(&self) -> Vec<&Member> {
        self.origins
            .iter()
            .filter(|o| o.word == "id")
            .filter_map(|o| self.region.member(&o.member))
            .collect()
    }

    pub fn origin(&self, member: &str) -> Option<&MemberOrigin> {
        self.origins.iter().find(|o| o.member == member)
    }
}

pub fn member_label(word: &str, base: RegionName) -> String {
    if word == "id" {
        base.to_string()
    } else {
        format!("{word}({base})")
    }
}

fn base_polyhedron(base: RegionName, c: &Constants) -> Polyhedron {
    match base {
        RegionName::P0 => p0(c),
        RegionName::P1 => p1(c),
        RegionName::P2 => p2(c),
        _ => unreachable!("only P0, P1, P2 are bases"),
    }
}

/// `word(base)`, lifted so that its vertex centroid lies in `[0,1)³`.
pub fn image_member(word: &str, base: RegionName, c: &Constants) -> Result<Member, VerifyError> {
    let s = parse_word(word).ok_or_else(|| VerifyError::UnknownWord(word.to_string()))?;
    let b = base_polyhedron(base, c);
    let polyhedron = if s.is_identity() { b } else { canonical_shift(&s.apply_to_polyhedron(&b))? };
    Ok(Member { label: member_label(word, base), polyhedron })
}

pub fn build_region(name: RegionName, eps: &Scalar) -> Result<BuiltRegion, VerifyError> {
    let c = Constants::new(eps)?;
    let words: Vec<(&str, RegionName)> = match name {
        RegionName::P0 | RegionName::P1 | RegionName::P2 => vec![("id", name)],
        RegionName::A => A_WORDS.to_vec(),
        RegionName::S => S_WORDS.iter().map(|w| (*w, RegionName::P0)).collect(),
    };
    let mut members = Vec::new();
    let mut origins = Vec::new();
    for (w, base) in words {
        let m = image_member(w, base, &c)?;
        match m.polyhedron.is_full_dimensional() {
            Ok(true) => {}
            Ok(false) | Err(_) => {
                return Err(VerifyError::NotBuildable {
                    name: name.to_string(),
                    eps: format_scalar(eps),
                    reason: format!("member {} is empty or degenerate", m.label),
                })
            }
        }
        origins.push(MemberOrigin { member: m.label.clone(), word: w.to_string(), base });
        members.push(m);
    }
    let torus_faithful = !matches!(name, RegionName::S | RegionName::P0) || at_least_critical(eps, 1);
    Ok(BuiltRegion {
        name,
        eps: eps.clone(),
        constants: c,
        region: Region::new(name.to_string(), members),
        origins,
        torus_faithful,
    })
}

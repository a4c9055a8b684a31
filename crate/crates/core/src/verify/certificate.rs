//! Separating-plane certificates: an integer functional whose maximum over
//! one family of lifted members is at most a threshold, which in turn is at
//! most its minimum over another family.

use serde::Serialize;

use super::regions::{build_region, image_member, Constants, RegionName};
use super::VerifyError;
use crate::geometry::{Member, Sense};
use crate::scalar::{format_scalar, int, serde_scalar, Scalar};

/// A family of members: `"A"` (all of `𝒜`), `"A\P1"` (all but one member),
/// or a single image such as `"S1S3(P2)"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Side(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationCertificate {
    pub functional: [i64; 3],
    #[serde(with = "serde_scalar")]
    pub threshold: Scalar,
    pub lower: Vec<Side>,
    pub upper: Vec<Side>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateCheck {
    pub certificate: SeparationCertificate,
    pub plane: String,
    #[serde(with = "serde_scalar")]
    pub lower_max: Scalar,
    #[serde(with = "serde_scalar")]
    pub upper_min: Scalar,
    pub holds: bool,
}

fn resolve(side: &Side, eps: &Scalar) -> Result<Vec<Member>, VerifyError> {
    let s = side.0.as_str();
    let (region, excluded) = match s.split_once('\\') {
        Some((r, ex)) => (r, Some(ex)),
        None => (s, None),
    };
    if let Ok(name) = region.parse::<RegionName>() {
        let built = build_region(name, eps)?;
        if let Some(ex) = excluded {
            built.region.member(ex).ok_or_else(|| VerifyError::UnknownMember(ex.to_string()))?;
        }
        return Ok(built.region.members.into_iter().filter(|m| Some(m.label.as_str()) != excluded).collect());
    }
    let (word, base) = s
        .strip_suffix(')')
        .and_then(|t| t.split_once('('))
        .ok_or_else(|| VerifyError::UnknownMember(s.to_string()))?;
    let base: RegionName = base.parse()?;
    if !matches!(base, RegionName::P0 | RegionName::P1 | RegionName::P2) {
        return Err(VerifyError::UnknownMember(s.to_string()));
    }
    Ok(vec![image_member(word, base, &Constants::new(eps)?)?])
}

fn extreme(sides: &[Side], f: &[Scalar], sense: Sense, eps: &Scalar) -> Result<Scalar, VerifyError> {
    let mut best: Option<Scalar> = None;
    for side in sides {
        for m in resolve(side, eps)? {
            let v = m.polyhedron.optimize(f, sense)?.value;
            best = Some(match (best, sense) {
                (None, _) => v,
                (Some(b), Sense::Max) => b.max(v),
                (Some(b), Sense::Min) => b.min(v),
            });
        }
    }
    best.ok_or_else(|| VerifyError::UnknownMember("empty side".into()))
}

fn plane(f: &[i64; 3], t: &Scalar) -> String {
    let names = ["p", "q", "r"];
    let mut s = String::new();
    for (c, n) in f.iter().zip(names) {
        match *c {
            0 => continue,
            1 if s.is_empty() => s.push_str(n),
            1 => s.push_str(&format!("+{n}")),
            -1 => s.push_str(&format!("-{n}")),
            c if c > 0 && !s.is_empty() => s.push_str(&format!("+{c}{n}")),
            c => s.push_str(&format!("{c}{n}")),
        }
    }
    format!("{s} = {}", format_scalar(t))
}

pub fn evaluate_certificate(cert: &SeparationCertificate, eps: &Scalar) -> Result<CertificateCheck, VerifyError> {
    let f: Vec<Scalar> = cert.functional.iter().map(|&c| int(c)).collect();
    let lower_max = extreme(&cert.lower, &f, Sense::Max, eps)?;
    let upper_min = extreme(&cert.upper, &f, Sense::Min, eps)?;
    Ok(CertificateCheck {
        plane: plane(&cert.functional, &cert.threshold),
        holds: lower_max <= cert.threshold && cert.threshold <= upper_min,
        lower_max,
        upper_min,
        certificate: cert.clone(),
    })
}

/// True iff the plane separates the two sides.
pub fn verify_certificate(cert: &SeparationCertificate, eps: &Scalar) -> Result<bool, VerifyError> {
    Ok(evaluate_certificate(cert, eps)?.holds)
}

fn sides(names: &[&str]) -> Vec<Side> {
    names.iter().map(|s| Side(s.to_string())).collect()
}

/// The six planes showing that `S₀(𝒜)` and `S₁(𝒜)` meet `𝒜` in measure zero.
pub fn asymmetry_certificates(eps: &Scalar) -> Result<Vec<SeparationCertificate>, VerifyError> {
    let p = Constants::new(eps)?.p_star;
    let s1_p1 = ["S1(P1)", "S1S3(P1)", "S1S4(P1)", "S1S3S4(P1)"];
    let cert = |functional, threshold, lower: &[&str], upper: &[&str]| SeparationCertificate {
        functional,
        threshold,
        lower: sides(lower),
        upper: sides(upper),
    };
    Ok(vec![
        cert([-1, 0, 1], int(1) - int(2) * &p, &["A"], &["S0(P1)"]),
        cert([-1, 0, 1], int(1) - int(2) * &p, &["A"], &["S0(P2)"]),
        cert([1, 1, 1], int(1) - &p, &["S1(P2)"], &["A"]),
        cert([0, 1, 1], int(1) + &p, &["A"], &["S1S3(P2)"]),
        cert([1, 0, 1], int(2) * &p, &s1_p1, &["A\\P1"]),
        cert([1, 1, 1], int(1), &["P1"], &s1_p1),
    ])
}

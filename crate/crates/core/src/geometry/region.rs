use serde::{Deserialize, Serialize};

use super::{GeometryError, HalfSpace, Polyhedron};

/// One convex piece of a [`Region`], stored as a lifted representative in ℝᵈ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub label: String,
    pub polyhedron: Polyhedron,
}

/// Labeled finite union of convex polyhedra on the torus. Members are lifted
/// representatives; only their reductions mod ℤᵈ matter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RegionJson", into = "RegionJson")]
pub struct Region {
    pub label: String,
    pub members: Vec<Member>,
}

#[derive(Serialize, Deserialize)]
struct MemberJson {
    label: String,
    halfspaces: Vec<HalfSpace>,
}

#[derive(Serialize, Deserialize)]
struct RegionJson {
    label: String,
    members: Vec<MemberJson>,
}

impl From<Region> for RegionJson {
    fn from(r: Region) -> Self {
        RegionJson {
            label: r.label,
            members: r
                .members
                .into_iter()
                .map(|m| MemberJson { label: m.label, halfspaces: m.polyhedron.halfspaces().to_vec() })
                .collect(),
        }
    }
}

impl TryFrom<RegionJson> for Region {
    type Error = GeometryError;
    fn try_from(raw: RegionJson) -> Result<Self, Self::Error> {
        let members = raw
            .members
            .into_iter()
            .map(|m| {
                let dim = m.halfspaces.first().map(HalfSpace::dim).unwrap_or(3);
                Ok(Member { label: m.label, polyhedron: Polyhedron::new(dim, m.halfspaces)? })
            })
            .collect::<Result<Vec<_>, GeometryError>>()?;
        Ok(Region { label: raw.label, members })
    }
}

impl Region {
    pub fn new(label: impl Into<String>, members: Vec<Member>) -> Self {
        Region { label: label.into(), members }
    }

    pub fn single(label: impl Into<String>, polyhedron: Polyhedron) -> Self {
        let label = label.into();
        Region { members: vec![Member { label: label.clone(), polyhedron }], label }
    }

    pub fn dim(&self) -> Option<usize> {
        self.members.first().map(|m| m.polyhedron.dim())
    }

    pub fn member(&self, label: &str) -> Option<&Member> {
        self.members.iter().find(|m| m.label == label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("region serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn json_uses_fraction_strings() {
        let p = Polyhedron::new(2, vec![HalfSpace::le(&[1, -1], rat(41, 100)), HalfSpace::ge(&[0, 1], int(0))])
            .unwrap();
        let r = Region::single("T", p);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["members"][0]["halfspaces"][0]["a"][1], "-1/1");
        assert_eq!(v["members"][0]["halfspaces"][0]["b"], "41/100");
        assert_eq!(Region::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn json_rejects_zero_normals_and_bad_numbers() {
        let zero = r#"{"label":"x","members":[{"label":"m","halfspaces":[{"a":["0/1","0/1"],"b":"1/1"}]}]}"#;
        assert!(Region::from_json(zero).is_err());
        let junk = r#"{"label":"x","members":[{"label":"m","halfspaces":[{"a":["x","0/1"],"b":"1/1"}]}]}"#;
        assert!(Region::from_json(junk).is_err());
        let mixed = r#"{"label":"x","members":[{"label":"m","halfspaces":[{"a":["1/1","0/1"],"b":"1/1"},{"a":["1/1"],"b":"1/1"}]}]}"#;
        assert!(Region::from_json(mixed).is_err());
    }
}

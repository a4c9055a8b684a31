//! The affine symmetries of the reduced map, their closure into a group and
//! their action on points, polyhedra and regions.

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::branch_table;
use crate::geometry::{
    GeometryError, HalfSpace, Member, Polyhedron, PreparedRegion, Region, DEFAULT_SHIFT_RANGE,
};
use crate::scalar::{fmt_point, int, rat, Point, Real, Scalar};

pub type Matrix = [[i64; 3]; 3];

/// `x ↦ matrix·x + translation (mod 1)` with a unimodular integer matrix.
#[derive(Debug, Clone, Serialize)]
pub struct AffineSymmetry {
    pub name: String,
    pub matrix: Matrix,
    pub translation: [i64; 3],
}

/// Translations are integral, so two elements act identically on the torus
/// exactly when their matrices agree.
impl PartialEq for AffineSymmetry {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}
impl Eq for AffineSymmetry {}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

fn mat_vec(a: &Matrix, v: &[i64; 3]) -> [i64; 3] {
    std::array::from_fn(|i| (0..3).map(|k| a[i][k] * v[k]).sum())
}

fn det(m: &Matrix) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl AffineSymmetry {
    pub fn new(name: impl Into<String>, matrix: Matrix, translation: [i64; 3]) -> Self {
        assert_eq!(det(&matrix).abs(), 1, "symmetry matrices must be unimodular");
        AffineSymmetry { name: name.into(), matrix, translation }
    }

    pub fn identity() -> Self {
        AffineSymmetry::new("id", [[1, 0, 0], [0, 1, 0], [0, 0, 1]], [0, 0, 0])
    }

    pub fn is_identity(&self) -> bool {
        *self == AffineSymmetry::identity()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineSymmetry) -> AffineSymmetry {
        let t = mat_vec(&self.matrix, &other.translation);
        let name = match (self.is_identity(), other.is_identity()) {
            (true, _) => other.name.clone(),
            (_, true) => self.name.clone(),
            _ => format!("{}{}", self.name, other.name),
        };
        AffineSymmetry {
            name,
            matrix: mat_mul(&self.matrix, &other.matrix),
            translation: std::array::from_fn(|i| t[i] + self.translation[i]),
        }
    }

    pub fn inverse(&self) -> AffineSymmetry {
        let m = &self.matrix;
        let d = det(m);
        let cof = |i: usize, j: usize| {
            let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
            let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let inv: Matrix = std::array::from_fn(|i| std::array::from_fn(|j| cof(j, i) * d));
        let t = mat_vec(&inv, &self.translation);
        AffineSymmetry {
            name: format!("({})^-1", self.name),
            matrix: inv,
            translation: t.map(|x| -x),
        }
    }

    /// Lifted action, without reduction mod 1.
    pub fn apply_lifted<T: Real>(&self, x: &[T; 3]) -> [T; 3] {
        std::array::from_fn(|i| {
            (0..3).fold(T::from_int(self.translation[i]), |acc, k| {
                acc + T::from_int(self.matrix[i][k]) * x[k].clone()
            })
        })
    }

    pub fn apply_to_point<T: Real>(&self, x: &[T; 3]) -> [T; 3] {
        self.apply_lifted(x).map(|v| v.frac())
    }

    /// Exact image of a polyhedron in lifted coordinates, not shifted.
    pub fn apply_to_polyhedron(&self, p: &Polyhedron) -> Polyhedron {
        let inv = self.inverse().matrix;
        let hs = p
            .halfspaces()
            .iter()
            .map(|h| {
                // a·x ≤ b with x = M⁻¹(y − t) becomes (a·M⁻¹)·y ≤ b + (a·M⁻¹)·t.
                let a: Point = (0..3)
                    .map(|j| (0..3).fold(int(0), |acc, k| acc + &h.normal()[k] * int(inv[k][j])))
                    .collect();
                let shift = (0..3).fold(int(0), |acc, j| acc + &a[j] * int(self.translation[j]));
                HalfSpace::new(a, h.bound() + shift).expect("unimodular image of a nonzero normal")
            })
            .collect();
        Polyhedron::new(3, hs).expect("dimension 3")
    }

    /// Image of every member, each moved by the integer vector that brings
    /// its vertex centroid into `[0,1)³`.
    pub fn apply_to_region(&self, r: &Region) -> Result<Region, GeometryError> {
        let members = r
            .members
            .iter()
            .map(|m| {
                let img = canonical_shift(&self.apply_to_polyhedron(&m.polyhedron))?;
                Ok(Member { label: format!("{}({})", self.name, m.label), polyhedron: img })
            })
            .collect::<Result<Vec<_>, GeometryError>>()?;
        Ok(Region::new(format!("{}({})", self.name, r.label), members))
    }
}

/// Translate by `-floor(centroid)`.
pub fn canonical_shift(p: &Polyhedron) -> Result<Polyhedron, GeometryError> {
    let verts = p.vertices()?;
    let n = int(verts.len() as i64);
    let v: Point = (0..p.dim())
        .map(|i| -(verts.iter().fold(int(0), |acc, x| acc + &x[i]) / &n).floor())
        .collect();
    Ok(p.translate(&v))
}

/// `S₀ … S₆`.
pub fn generators() -> Vec<AffineSymmetry> {
    vec![
        AffineSymmetry::new("S0", [[-1, 0, 0], [0, -1, 0], [0, 0, -1]], [1, 1, 1]),
        AffineSymmetry::new("S1", [[-1, 0, 0], [1, 1, 0], [0, 0, 1]], [0, 0, 0]),
        AffineSymmetry::new("S2", [[0, -1, 0], [-1, 0, 0], [1, 1, 1]], [0, 0, 0]),
        AffineSymmetry::new("S3", [[0, -1, -1], [0, 1, 0], [-1, -1, 0]], [0, 0, 0]),
        AffineSymmetry::new("S4", [[1, 1, 0], [0, -1, 0], [0, 1, 1]], [0, 0, 0]),
        AffineSymmetry::new("S5", [[1, 1, 1], [0, 0, -1], [0, -1, 0]], [0, 0, 0]),
        AffineSymmetry::new("S6", [[1, 0, 0], [0, 1, 1], [0, 0, -1]], [0, 0, 0]),
    ]
}

pub fn generator(i: usize) -> AffineSymmetry {
    generators().swap_remove(i)
}

/// Composition of generators written as a word like `"S3S4"` (rightmost
/// acts first). `"id"` is the identity.
pub fn parse_word(word: &str) -> Option<AffineSymmetry> {
    if word == "id" {
        return Some(AffineSymmetry::identity());
    }
    let gens = generators();
    let mut out = AffineSymmetry::identity();
    let mut rest = word;
    while !rest.is_empty() {
        let tail = rest.strip_prefix('S')?;
        let d = tail.chars().next()?.to_digit(10)? as usize;
        out = out.compose(gens.get(d)?);
        rest = &tail[1..];
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("group closure exceeded {cap} elements")]
pub struct GroupTooLarge {
    pub cap: usize,
}

pub const DEFAULT_GROUP_CAP: usize = 10_000;

/// Finite group of affine symmetries; each element is named by a shortest
/// generator word.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryGroup {
    pub elements: Vec<AffineSymmetry>,
}

impl SymmetryGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn find(&self, s: &AffineSymmetry) -> Option<&AffineSymmetry> {
        self.elements.iter().find(|e| *e == s)
    }

    /// The full group generated by `S₀ … S₆`.
    pub fn full() -> SymmetryGroup {
        generate_group(&generators(), DEFAULT_GROUP_CAP).expect("finite group")
    }
}

/// Breadth-first closure of `generators` under composition.
pub fn generate_group(generators: &[AffineSymmetry], cap: usize) -> Result<SymmetryGroup, GroupTooLarge> {
    let mut elements = vec![AffineSymmetry::identity()];
    let mut seen: BTreeSet<Matrix> = BTreeSet::from([elements[0].matrix]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in generators {
            let e = elements[i].compose(g);
            if seen.insert(e.matrix) {
                if elements.len() >= cap {
                    return Err(GroupTooLarge { cap });
                }
                elements.push(e);
                queue.push_back(elements.len() - 1);
            }
        }
    }
    Ok(SymmetryGroup { elements })
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivarianceReport {
    pub symmetry: String,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl EquivarianceReport {
    pub fn holds(&self) -> bool {
        self.failed == 0
    }
}

/// Tests `G(S x) = S(G x)` exactly on random rational points, skipping
/// points where either side hits a singularity.
pub fn check_equivariance(s: &AffineSymmetry, eps: &Scalar, samples: usize, seed: u64) -> EquivarianceReport {
    let table = branch_table();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = EquivarianceReport {
        symmetry: s.name.clone(),
        passed: 0,
        failed: 0,
        skipped: 0,
        counterexample: None,
    };
    for _ in 0..samples {
        let x: [Scalar; 3] = std::array::from_fn(|_| rat(rng.gen_range(1..1009), 1009));
        let sx = s.apply_to_point(&x);
        let (Ok(gx), Ok(gsx)) = (table.g3_step_table(&x, eps), table.g3_step_table(&sx, eps)) else {
            report.skipped += 1;
            continue;
        };
        if gsx == s.apply_to_point(&gx) {
            report.passed += 1;
        } else {
            report.failed += 1;
            report.counterexample.get_or_insert_with(|| fmt_point(&x));
        }
    }
    report
}

/// Distinct images of a region under a group, with the stabilizer.
#[derive(Debug, Clone, Serialize)]
pub struct Orbit {
    pub images: Vec<OrbitImage>,
    pub stabilizer: Vec<String>,
    pub stabilizer_order: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitImage {
    pub region: Region,
    /// Names of the group elements producing this image.
    pub elements: Vec<String>,
}

pub fn orbit_of_region(r: &Region, group: &SymmetryGroup) -> Result<Orbit, GeometryError> {
    let mut images: Vec<(PreparedRegion, OrbitImage)> = Vec::new();
    for s in &group.elements {
        let img = s.apply_to_region(r)?;
        let prepared = PreparedRegion::new(&img)?;
        let mut found = false;
        for (p, o) in images.iter_mut() {
            if crate::geometry::prepared_equal(p, &prepared, DEFAULT_SHIFT_RANGE)? {
                o.elements.push(s.name.clone());
                found = true;
                break;
            }
        }
        if !found {
            images.push((prepared, OrbitImage { region: img, elements: vec![s.name.clone()] }));
        }
    }
    let stabilizer = images[0].1.elements.clone();
    Ok(Orbit {
        stabilizer_order: group.order() / images.len(),
        stabilizer,
        images: images.into_iter().map(|(_, o)| o).collect(),
    })
}

//! The 26 continuity domains of the reduced map and the affine action on each.

use std::sync::OnceLock;

use num_traits::Signed;
use serde::Serialize;

use super::DynamicsError;
use crate::geometry::{HalfSpace, Polyhedron};
use crate::scalar::{fmt_point, format_scalar, half, int, parse_scalar, rat, Point, Real, Scalar};

/// The six linear forms the singularities are level sets of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LinearForm {
    P,
    Q,
    R,
    PQ,
    QR,
    PQR,
}

impl LinearForm {
    pub const ALL: [LinearForm; 6] =
        [LinearForm::P, LinearForm::Q, LinearForm::R, LinearForm::PQ, LinearForm::QR, LinearForm::PQR];

    pub fn coefficients(self) -> [i64; 3] {
        match self {
            LinearForm::P => [1, 0, 0],
            LinearForm::Q => [0, 1, 0],
            LinearForm::R => [0, 0, 1],
            LinearForm::PQ => [1, 1, 0],
            LinearForm::QR => [0, 1, 1],
            LinearForm::PQR => [1, 1, 1],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LinearForm::P => "p",
            LinearForm::Q => "q",
            LinearForm::R => "r",
            LinearForm::PQ => "p+q",
            LinearForm::QR => "q+r",
            LinearForm::PQR => "p+q+r",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        LinearForm::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn eval<T: Real>(self, x: &[T; 3]) -> T {
        let c = self.coefficients();
        (0..3)
            .filter(|&i| c[i] != 0)
            .fold(T::from_int(0), |acc, i| acc + &x[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

/// `form < value` or `form > value`, one cell of the domain tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inequality {
    pub form: LinearForm,
    pub relation: Relation,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub value: Scalar,
}

impl Inequality {
    fn parse(s: &str) -> Self {
        let (pos, relation) = match (s.find('<'), s.find('>')) {
            (Some(i), None) => (i, Relation::Less),
            (None, Some(i)) => (i, Relation::Greater),
            _ => panic!("bad table entry {s}"),
        };
        Inequality {
            form: LinearForm::parse(&s[..pos]).unwrap_or_else(|| panic!("bad form in {s}")),
            relation,
            value: parse_scalar(&s[pos + 1..]).unwrap(),
        }
    }

    /// Closed half-space version.
    pub fn halfspace(&self) -> HalfSpace {
        let c = self.form.coefficients();
        match self.relation {
            Relation::Less => HalfSpace::le(&c, self.value.clone()),
            Relation::Greater => HalfSpace::ge(&c, self.value.clone()),
        }
    }

    pub fn holds_strictly(&self, x: &[Scalar; 3]) -> bool {
        let v = self.form.eval(x);
        match self.relation {
            Relation::Less => v < self.value,
            Relation::Greater => v > self.value,
        }
    }
}

impl std::fmt::Display for Inequality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = match self.relation {
            Relation::Less => "<",
            Relation::Greater => ">",
        };
        write!(f, "{} {} {}", self.form.name(), op, format_scalar(&self.value))
    }
}

/// One continuity domain: the table inequalities, the containing half-cube
/// and the offset vector `c` of the affine action.
#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub label: &'static str,
    pub cube: u8,
    pub inequalities: Vec<Inequality>,
    pub offset: [i64; 3],
    #[serde(skip)]
    pub domain: Polyhedron,
    #[serde(skip)]
    rows: Vec<([f64; 3], f64)>,
}

// (label, table inequalities, c). In cubes 3 and 6 the inequality rows are
// matched to labels through their offsets, which are fixed by the formula.
const TABLE: [(&str, &[&str], [i64; 3]); 26] = [
    ("1a", &["p>0", "q>0", "r>0", "p+q+r<1/2"], [0, 0, 0]),
    ("1b", &["p<1/2", "r>0", "p+q>1/2", "q+r<1/2"], [2, 1, 0]),
    ("1c", &["p>0", "r<1/2", "p+q<1/2", "q+r>1/2"], [0, 1, 2]),
    ("1d", &["q>0", "p+q<1/2", "q+r<1/2", "p+q+r>1/2"], [1, 0, 1]),
    ("1e", &["p<1/2", "q<1/2", "r<1/2", "p+q>1/2", "q+r>1/2"], [1, 2, 1]),
    ("2a", &["p>0", "p<1/2", "q>1/2", "q<1", "r>0", "r<1/2", "p+q+r<3/2"], [0, 4, 0]),
    ("2b", &["p<1/2", "q<1", "r<1/2", "p+q+r>3/2"], [1, 4, 1]),
    ("3a", &["p<1", "q<1", "r>0", "r<1/2", "p+q>3/2"], [4, 4, 0]),
    ("3b", &["p>1/2", "q>1/2", "r<1/2", "p+q<3/2", "p+q+r>3/2"], [3, 3, 1]),
    ("3c", &["p>1/2", "q>1/2", "r>0", "p+q+r<3/2"], [2, 3, 0]),
    ("4a", &["p>1/2", "p<1", "q>0", "r>0", "q+r<1/2"], [4, 0, 0]),
    ("4b", &["p>1/2", "q<1/2", "r<1/2", "q+r>1/2", "p+q+r<3/2"], [3, 1, 1]),
    ("4c", &["p<1", "q<1/2", "r<1/2", "p+q+r>3/2"], [4, 1, 2]),
    ("5a", &["p>0", "q>0", "r>1/2", "r<1", "p+q<1/2"], [0, 0, 4]),
    ("5b", &["p<1/2", "q<1/2", "r>1/2", "p+q>1/2", "p+q+r<3/2"], [1, 1, 3]),
    ("5c", &["p<1/2", "q<1/2", "r<1", "p+q+r>3/2"], [2, 1, 4]),
    ("6a", &["p>0", "p<1/2", "q<1", "r<1", "q+r>3/2"], [0, 4, 4]),
    ("6b", &["p<1/2", "q>1/2", "r>1/2", "q+r<3/2", "p+q+r>3/2"], [1, 3, 3]),
    ("6c", &["p>0", "q>1/2", "r>1/2", "p+q+r<3/2"], [0, 3, 2]),
    ("7a", &["p<1", "q<1", "r<1", "p+q+r>5/2"], [4, 4, 4]),
    ("7b", &["p>1/2", "r<1", "p+q<3/2", "q+r>3/2"], [2, 3, 4]),
    ("7c", &["p<1", "r>1/2", "p+q>3/2", "q+r<3/2"], [4, 3, 2]),
    ("7d", &["q<1", "p+q>3/2", "q+r>3/2", "p+q+r<5/2"], [3, 4, 3]),
    ("7e", &["p>1/2", "q>1/2", "r>1/2", "p+q<3/2", "q+r<3/2"], [3, 2, 3]),
    ("8a", &["p>1/2", "p<1", "q>0", "q<1", "r>1/2", "r<1", "p+q+r>3/2"], [4, 0, 4]),
    ("8b", &["p>1/2", "q>0", "r>1/2", "p+q+r<3/2"], [3, 0, 3]),
];

/// Which coordinates exceed 1/2 in each numbered half-cube.
fn cube_pattern(cube: u8) -> [bool; 3] {
    match cube {
        1 => [false, false, false],
        2 => [false, true, false],
        3 => [true, true, false],
        4 => [true, false, false],
        5 => [false, false, true],
        6 => [false, true, true],
        7 => [true, true, true],
        8 => [true, false, true],
        _ => unreachable!(),
    }
}

fn cube_of_pattern(high: [bool; 3]) -> u8 {
    (1..=8).find(|&c| cube_pattern(c) == high).unwrap()
}

fn cube_box(cube: u8) -> Vec<HalfSpace> {
    let pat = cube_pattern(cube);
    let mut out = Vec::new();
    for (i, &high) in pat.iter().enumerate() {
        let mut e = [0i64; 3];
        e[i] = 1;
        let (lo, hi) = if high { (half(), int(1)) } else { (int(0), half()) };
        out.push(HalfSpace::ge(&e, lo));
        out.push(HalfSpace::le(&e, hi));
    }
    out
}

impl Branch {
    fn build(label: &'static str, entries: &[&str], offset: [i64; 3]) -> Branch {
        let cube = label[..1].parse().unwrap();
        let inequalities: Vec<Inequality> = entries.iter().map(|e| Inequality::parse(e)).collect();
        let mut hs = cube_box(cube);
        hs.extend(inequalities.iter().map(Inequality::halfspace));
        let domain = Polyhedron::new(3, hs).unwrap();
        let rows = domain
            .halfspaces()
            .iter()
            .map(|h| {
                let a = h.normal();
                let t = |x: &Scalar| crate::scalar::to_f64(x);
                ([t(&a[0]), t(&a[1]), t(&a[2])], t(h.bound()))
            })
            .collect();
        Branch { label, cube, inequalities, offset, domain, rows }
    }

    /// All table inequalities strictly satisfied, given the six form values
    /// in `LinearForm::ALL` order. The cube bounds are checked by the caller.
    fn holds_strictly_at(&self, forms: &[Scalar; 6]) -> bool {
        self.inequalities.iter().all(|q| {
            let v = &forms[LinearForm::ALL.iter().position(|f| *f == q.form).unwrap()];
            match q.relation {
                Relation::Less => *v < q.value,
                Relation::Greater => *v > q.value,
            }
        })
    }

    fn contains_f64(&self, x: &[f64; 3]) -> bool {
        self.rows
            .iter()
            .all(|(a, b)| a[0] * x[0] + a[1] * x[1] + a[2] * x[2] <= *b)
    }

    /// `x ↦ 2(1−ε)x + c·ε/2`, without reduction mod 1.
    pub fn apply<T: Real>(&self, x: &[T; 3], eps: &T) -> [T; 3] {
        let lambda = T::from_int(2) * (T::from_int(1) - eps.clone());
        let k = eps.clone() * T::from_ratio(1, 2);
        std::array::from_fn(|i| lambda.clone() * x[i].clone() + k.clone() * T::from_int(self.offset[i]))
    }

    pub fn scale_and_translation(&self, eps: &Scalar) -> (Scalar, Point) {
        let lambda = int(2) * (int(1) - eps);
        let k = eps * rat(1, 2);
        (lambda, self.offset.iter().map(|&c| &k * int(c)).collect())
    }

    /// Exact lifted image of the whole domain.
    pub fn image(&self, eps: &Scalar) -> Polyhedron {
        let (l, t) = self.scale_and_translation(eps);
        self.domain.scalar_affine_image(&l, &t)
    }

    /// Exact lifted image of `domain ∩ piece`.
    pub fn image_of(&self, piece: &Polyhedron, eps: &Scalar) -> Polyhedron {
        let (l, t) = self.scale_and_translation(eps);
        let restricted = piece.intersect_with(&self.domain).expect("both are 3-dimensional");
        restricted.scalar_affine_image(&l, &t)
    }
}

/// The immutable table of all 26 branches.
#[derive(Debug)]
pub struct BranchTable {
    branches: Vec<Branch>,
}

pub fn branch_table() -> &'static BranchTable {
    static TABLE_CELL: OnceLock<BranchTable> = OnceLock::new();
    TABLE_CELL.get_or_init(|| BranchTable {
        branches: TABLE.iter().map(|(l, e, c)| Branch::build(l, e, *c)).collect(),
    })
}

const SINGULAR_TOL: f64 = 1e-12;

impl BranchTable {
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn get(&self, label: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == label)
    }

    /// The unique branch whose defining inequalities hold strictly at `pt`.
    /// Boundary points, including the faces of the half-cubes, are singular.
    pub fn classify(&self, pt: &[Scalar; 3]) -> Result<&Branch, DynamicsError> {
        let singular = || DynamicsError::Singular(fmt_point(pt));
        let h = half();
        if pt.contains(&h) {
            return Err(singular());
        }
        if pt.iter().any(|x| !x.is_positive() || *x >= int(1)) {
            return Err(singular());
        }
        let cube = cube_of_pattern(std::array::from_fn(|i| pt[i] > h));
        let forms = LinearForm::ALL.map(|f| f.eval(pt));
        let mut hits = self
            .branches
            .iter()
            .filter(|b| b.cube == cube && b.holds_strictly_at(&forms));
        match (hits.next(), hits.next()) {
            (Some(b), None) => Ok(b),
            _ => Err(singular()),
        }
    }

    /// Floating point classification. Points within 1e-12 of a singularity
    /// plane are rejected; on integer planes, where the map is continuous
    /// mod 1, any adjacent branch is returned.
    pub fn classify_f64(&self, pt: &[f64; 3]) -> Result<&Branch, DynamicsError> {
        for form in LinearForm::ALL {
            let v = form.eval(pt);
            let w = v - 0.5;
            if (w - w.round()).abs() < SINGULAR_TOL {
                return Err(DynamicsError::Singular(format!("{pt:?}")));
            }
        }
        let cube = cube_of_pattern(std::array::from_fn(|i| pt[i] > 0.5));
        self.branches
            .iter()
            .find(|b| b.cube == cube && b.contains_f64(pt))
            .ok_or_else(|| DynamicsError::Singular(format!("{pt:?}")))
    }

    /// The reduced map through the branch table, reduced mod 1.
    pub fn g3_step_table(&self, pt: &[Scalar; 3], eps: &Scalar) -> Result<[Scalar; 3], DynamicsError> {
        let b = self.classify(pt)?;
        Ok(b.apply(pt, eps).map(|x| x.frac()))
    }

    pub fn g3_step_table_f64(&self, pt: &[f64; 3], eps: f64) -> Result<[f64; 3], DynamicsError> {
        let b = self.classify_f64(pt)?;
        Ok(b.apply(pt, &eps).map(|x| x.frac()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::g3_step_formula;
    use crate::scalar::{rat, Scalar};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn pt(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> [Scalar; 3] {
        [rat(a.0, a.1), rat(b.0, b.1), rat(c.0, c.1)]
    }

    #[test]
    fn classification_examples() {
        let t = branch_table();
        assert_eq!(t.classify(&pt((1, 10), (1, 10), (1, 10))).unwrap().label, "1a");
        assert_eq!(t.classify(&pt((1, 4), (3, 5), (1, 4))).unwrap().label, "2a");
        assert_eq!(t.classify(&pt((9, 10), (9, 10), (9, 10))).unwrap().label, "7a");
        assert!(t.classify(&pt((1, 4), (1, 4), (0, 1))).is_err());
        assert!(t.classify(&pt((1, 4), (1, 4), (1, 2))).is_err());
        assert!(t.classify(&pt((1, 5), (1, 5), (1, 10))).is_err());
    }

    #[test]
    fn table_step_examples() {
        let t = branch_table();
        let eps = rat(2, 5);
        let x = pt((1, 10), (1, 10), (1, 10));
        assert_eq!(t.g3_step_table(&x, &eps).unwrap(), [rat(3, 25), rat(3, 25), rat(3, 25)]);
        let x = pt((9, 10), (9, 10), (9, 10));
        assert_eq!(t.g3_step_table(&x, &eps).unwrap(), [rat(22, 25), rat(22, 25), rat(22, 25)]);
        assert_eq!(t.get("1b").unwrap().offset, [2, 1, 0]);
        assert_eq!(t.get("7a").unwrap().offset, [4, 4, 4]);
    }

    #[test]
    fn offsets_in_range_and_labels_unique() {
        let t = branch_table();
        assert_eq!(t.branches().len(), 26);
        let mut labels: Vec<_> = t.branches().iter().map(|b| b.label).collect();
        labels.dedup();
        assert_eq!(labels.len(), 26);
        assert!(t.branches().iter().all(|b| b.offset.iter().all(|c| (0..=4).contains(c))));
    }

    #[test]
    fn domains_partition_the_cube() {
        let t = branch_table();
        let total = t
            .branches()
            .iter()
            .fold(int(0), |acc, b| acc + b.domain.volume().unwrap());
        assert_eq!(total, int(1));
        let bs = t.branches();
        for i in 0..bs.len() {
            for j in i + 1..bs.len() {
                let v = bs[i].domain.intersect_with(&bs[j].domain).unwrap().volume().unwrap();
                assert_eq!(v, int(0), "{} and {} overlap", bs[i].label, bs[j].label);
            }
        }
    }

    #[test]
    fn uncoupled_table_is_doubling() {
        let t = branch_table();
        let x = pt((3, 7), (5, 9), (2, 11));
        let y = t.g3_step_table(&x, &int(0)).unwrap();
        assert_eq!(y, [rat(6, 7), rat(1, 9), rat(4, 11)]);
        for b in t.branches() {
            let img = b.image(&int(0));
            assert_eq!(img.volume().unwrap(), b.domain.volume().unwrap() * int(8));
        }
    }

    #[test]
    fn image_of_branch_scales_volume() {
        let t = branch_table();
        let eps = rat(41, 100);
        let b = t.get("1b").unwrap();
        let l = int(2) * (int(1) - &eps);
        assert_eq!(b.image(&eps).volume().unwrap(), b.domain.volume().unwrap() * &l * &l * &l);
    }

    fn random_rational(rng: &mut impl Rng, den: i64) -> Scalar {
        rat(rng.gen_range(0..den), den)
    }

    #[test]
    fn formula_and_table_agree_exactly() {
        let t = branch_table();
        let epss = [rat(1, 10), rat(1, 4), rat(41, 100), rat(49, 100)];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 10_000 {
            let x: [Scalar; 3] = std::array::from_fn(|_| random_rational(&mut rng, 997));
            let eps = &epss[rng.gen_range(0..4)];
            let Ok(y) = t.g3_step_table(&x, eps) else { continue };
            assert_eq!(y, g3_step_formula(&x, eps), "at {}", fmt_point(&x));
            checked += 1;
        }
    }

    #[test]
    fn float_classification_matches_exact() {
        let t = branch_table();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let x: [Scalar; 3] = std::array::from_fn(|_| random_rational(&mut rng, 1009));
            let xf = x.clone().map(|v| crate::scalar::to_f64(&v));
            if let Ok(b) = t.classify(&x) {
                assert_eq!(t.classify_f64(&xf).unwrap().label, b.label);
            }
        }
        assert!(t.classify_f64(&[0.25, 0.25, 0.5]).is_err());
        assert!(t.classify_f64(&[0.2, 0.3 + 1e-14, 0.1]).is_err());
    }

    proptest! {
        #[test]
        fn float_table_tracks_formula(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, eps in 0.0f64..0.5) {
            let x = [a, b, c];
            if let Ok(y) = branch_table().g3_step_table_f64(&x, eps) {
                let z = g3_step_formula(&x, &eps);
                for i in 0..3 {
                    let d = (y[i] - z[i]).abs();
                    prop_assert!(d < 1e-9 || (1.0 - d) < 1e-9);
                }
            }
        }
    }
}

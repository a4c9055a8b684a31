//! Tiny exact linear algebra over [`Scalar`]: solves, ranks and null spaces
//! for systems with at most a handful of columns.

use num_traits::{One, Zero};

use crate::scalar::{Point, Scalar};

/// Unique solution of the square system `rows · x = rhs`, or `None` when singular.
pub fn solve(rows: &[&[Scalar]], rhs: &[Scalar]) -> Option<Point> {
    let d = rows.len();
    match d {
        2 => solve2(rows, rhs),
        3 => solve3(rows, rhs),
        _ => solve_gauss(rows, rhs),
    }
}

fn solve2(r: &[&[Scalar]], b: &[Scalar]) -> Option<Point> {
    let det = &r[0][0] * &r[1][1] - &r[0][1] * &r[1][0];
    if det.is_zero() {
        return None;
    }
    let x = (&b[0] * &r[1][1] - &r[0][1] * &b[1]) / &det;
    let y = (&r[0][0] * &b[1] - &b[0] * &r[1][0]) / &det;
    Some(vec![x, y])
}

pub fn cross(a: &[Scalar], b: &[Scalar]) -> Point {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn solve3(r: &[&[Scalar]], b: &[Scalar]) -> Option<Point> {
    // Cramer's rule written with cross products of the rows.
    let c12 = cross(r[1], r[2]);
    let det = crate::scalar::dot(r[0], &c12);
    if det.is_zero() {
        return None;
    }
    let c20 = cross(r[2], r[0]);
    let c01 = cross(r[0], r[1]);
    let x = (0..3)
        .map(|i| (&b[0] * &c12[i] + &b[1] * &c20[i] + &b[2] * &c01[i]) / &det)
        .collect();
    Some(x)
}

fn solve_gauss(rows: &[&[Scalar]], rhs: &[Scalar]) -> Option<Point> {
    let d = rows.len();
    let mut m: Vec<Vec<Scalar>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.to_vec();
            row.push(b.clone());
            row
        })
        .collect();
    for col in 0..d {
        let pivot = (col..d).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, pivot);
        let inv = Scalar::one() / &m[col][col];
        for v in m[col].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..d {
            if i != col && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in col..=d {
                    let t = &f * &m[col][j];
                    m[i][j] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[d].clone()).collect())
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [Vec<Scalar>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = Scalar::one() / &m[row][col];
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in col..ncols {
                    let t = &f * &m[row][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(rows: &[Point], ncols: usize) -> usize {
    let mut m: Vec<Vec<Scalar>> = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Basis of `{x : rows · x = 0}`.
pub fn nullspace(rows: &[&[Scalar]], ncols: usize) -> Vec<Point> {
    let mut m: Vec<Vec<Scalar>> = rows.iter().map(|r| r.to_vec()).collect();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(); ncols];
            v[f] = Scalar::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Dimension of the affine hull of a point set; `None` for the empty set.
pub fn affine_dimension(points: &[Point]) -> Option<usize> {
    let first = points.first()?;
    let diffs: Vec<Point> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    Some(rank(&diffs, first.len()))
}

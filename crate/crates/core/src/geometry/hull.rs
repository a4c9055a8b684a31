//! Exact convex hulls in the plane and the volume/facet computations that
//! rest on them.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::linalg::{affine_dimension, cross};
use super::Polyhedron;
use crate::scalar::{dot, int, Point, Scalar};

/// One boundary polygon of a 3-polytope, vertices ordered counter-clockwise
/// when seen from outside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Facet {
    pub halfspace: usize,
    #[serde(skip)]
    pub vertices: Vec<Point>,
}

fn turn(o: &[Scalar], a: &[Scalar], b: &[Scalar]) -> Scalar {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Andrew's monotone chain; returns the hull counter-clockwise without
/// collinear points. Input points are 2-vectors.
pub fn convex_hull_2d(points: &[Point]) -> Vec<Point> {
    let pts: Vec<Point> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn polygon_area(ccw: &[Point]) -> Scalar {
    let n = ccw.len();
    if n < 3 {
        return Scalar::zero();
    }
    let twice = (0..n).fold(Scalar::zero(), |acc, i| {
        let a = &ccw[i];
        let b = &ccw[(i + 1) % n];
        acc + (&a[0] * &b[1] - &a[1] * &b[0])
    });
    twice / int(2)
}

fn drop_coord(p: &[Scalar], k: usize) -> Point {
    p.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| x.clone()).collect()
}

fn centroid(points: &[Point]) -> Point {
    let n = int(points.len() as i64);
    let d = points[0].len();
    (0..d)
        .map(|i| points.iter().fold(Scalar::zero(), |acc, p| acc + &p[i]) / &n)
        .collect()
}

/// Vertex sets of the 2-dimensional faces, one per distinct face, tagged
/// with the first constraint that supports it.
fn facet_vertex_sets(poly: &Polyhedron, verts: &[Point]) -> Vec<(usize, Vec<Point>)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, h) in poly.halfspaces().iter().enumerate() {
        let on: Vec<Point> = verts.iter().filter(|v| h.slack(v).is_zero()).cloned().collect();
        if affine_dimension(&on) != Some(2) || !seen.insert(on.clone()) {
            continue;
        }
        out.push((i, on));
    }
    out
}

pub(super) fn volume(poly: &Polyhedron, verts: &[Point]) -> Scalar {
    let d = poly.dim();
    if verts.is_empty() || affine_dimension(verts) != Some(d) {
        return Scalar::zero();
    }
    match d {
        1 => {
            let lo = verts.iter().map(|v| &v[0]).min().unwrap();
            let hi = verts.iter().map(|v| &v[0]).max().unwrap();
            hi - lo
        }
        2 => polygon_area(&convex_hull_2d(verts)),
        3 => {
            // Sum of pyramids over the facets, apex at the vertex centroid.
            // Projecting a facet along a coordinate with a_k ≠ 0 scales its
            // area by |a_k|/|a|, which cancels the |a| in the height.
            let c = centroid(verts);
            facet_vertex_sets(poly, verts)
                .into_iter()
                .map(|(i, on)| {
                    let h = &poly.halfspaces()[i];
                    let k = h.normal().iter().position(|a| !a.is_zero()).unwrap();
                    let flat: Vec<Point> = on.iter().map(|p| drop_coord(p, k)).collect();
                    let area = polygon_area(&convex_hull_2d(&flat));
                    h.slack(&c) * area / h.normal()[k].abs()
                })
                .fold(Scalar::zero(), |acc, x| acc + x)
                / int(3)
        }
        _ => unreachable!("dimension is validated on construction"),
    }
}

pub(super) fn facets(poly: &Polyhedron, verts: &[Point]) -> Vec<Facet> {
    facet_vertex_sets(poly, verts)
        .into_iter()
        .map(|(i, on)| {
            let h = &poly.halfspaces()[i];
            let k = h.normal().iter().position(|a| !a.is_zero()).unwrap();
            let flat_hull = convex_hull_2d(&on.iter().map(|p| drop_coord(p, k)).collect::<Vec<_>>());
            let mut ordered: Vec<Point> = flat_hull
                .iter()
                .map(|q| on.iter().find(|p| drop_coord(p, k) == *q).unwrap().clone())
                .collect();
            let e1: Point = ordered[1].iter().zip(&ordered[0]).map(|(a, b)| a - b).collect();
            let e2: Point = ordered[2].iter().zip(&ordered[0]).map(|(a, b)| a - b).collect();
            if dot(&cross(&e1, &e2), h.normal()).is_negative() {
                ordered.reverse();
            }
            Facet { halfspace: i, vertices: ordered }
        })
        .collect()
}

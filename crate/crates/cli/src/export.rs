use std::fmt::Write;

use anyhow::{ensure, Result};

use cml4::geometry::Region;
use cml4::scalar::to_f64;

/// One `o` block per member. Vertex coordinates are rounded to doubles;
/// faces come from the exact facet polygons, counter-clockwise from outside.
pub fn to_obj(region: &Region) -> Result<String> {
    ensure!(region.dim() == Some(3), "OBJ export needs a region of dimension 3");
    let mut out = format!("# {}\n", region.label);
    let mut base = 1;
    for m in &region.members {
        let verts = m.polyhedron.vertices()?;
        writeln!(out, "o {}", m.label)?;
        for v in &verts {
            writeln!(out, "v {} {} {}", to_f64(&v[0]), to_f64(&v[1]), to_f64(&v[2]))?;
        }
        for f in m.polyhedron.facets()? {
            let idx: Vec<String> = f
                .vertices
                .iter()
                .map(|p| (base + verts.iter().position(|v| v == p).expect("facet vertex is a vertex")).to_string())
                .collect();
            writeln!(out, "f {}", idx.join(" "))?;
        }
        base += verts.len();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cml4::geometry::Polyhedron;

    #[test]
    fn cube_has_eight_vertices_and_six_quads() {
        let obj = to_obj(&Region::single("cube", Polyhedron::unit_cube(3))).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 8);
        let faces: Vec<&str> = obj.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(faces.len(), 6);
        assert!(faces.iter().all(|f| f.split_whitespace().count() == 5));
    }

    #[test]
    fn planar_regions_are_rejected() {
        assert!(to_obj(&Region::single("sq", Polyhedron::unit_cube(2))).is_err());
    }
}

use std::io::Write;

use super::cut::{CutDecomposition, ElementClass};
use super::structured::StructuredMesh;
use crate::error::Result;

/// Writes a line-oriented description of a mesh and its cut decomposition:
///
/// ```text
/// vertices <nv>
/// <x> <y>                                  (nv lines)
/// triangles <ne>
/// <v0> <v1> <v2> <subdomain | -1 if cut>   (ne lines)
/// cuts <nc>
/// <element> <first> <second> <x0> <y0> <x1> <y1>
/// ghost_faces <ng>
/// <subdomain> <v0> <v1>
/// ```
pub fn write_dump<W: Write>(mesh: &StructuredMesh, decomp: &CutDecomposition, mut w: W) -> Result<()> {
    writeln!(w, "vertices {}", mesh.num_vertices())?;
    for p in mesh.vertices() {
        writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
    }
    writeln!(w, "triangles {}", mesh.num_elements())?;
    for (e, t) in mesh.triangles().iter().enumerate() {
        let tag = match decomp.class(e) {
            ElementClass::Inside(s) => s as i64,
            ElementClass::Cut(_) => -1,
        };
        writeln!(w, "{} {} {} {}", t[0], t[1], t[2], tag)?;
    }
    writeln!(w, "cuts {}", decomp.cuts().len())?;
    for c in decomp.cuts() {
        let [a, b] = c.segment;
        writeln!(
            w,
            "{} {} {} {:.17e} {:.17e} {:.17e} {:.17e}",
            c.element, c.subdomains[0], c.subdomains[1], a[0], a[1], b[0], b[1]
        )?;
    }
    writeln!(w, "ghost_faces {}", decomp.ghost_faces().len())?;
    for g in decomp.ghost_faces() {
        writeln!(w, "{} {} {}", g.subdomain, g.vertices[0], g.vertices[1])?;
    }
    Ok(())
}

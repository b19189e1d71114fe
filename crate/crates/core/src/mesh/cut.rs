//! Classification of background elements against interfaces and sub-triangulation
//! of cut elements.

use super::levelset::{InterfaceSet, LevelSet};
use super::structured::{signed_area, Point, StructuredMesh};
use crate::error::{Error, Result};

/// Default snapping tolerance, relative to the element diameter.
pub const DEFAULT_SNAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    /// Lies entirely in one subdomain.
    Inside(usize),
    /// Index into [`CutDecomposition::cuts`].
    Cut(usize),
}

/// An element crossed by exactly one interface.
#[derive(Debug, Clone)]
pub struct CutElement {
    pub element: usize,
    pub interface: usize,
    /// `[first, second]`; the interface function is negative on `first`.
    pub subdomains: [usize; 2],
    /// Counter-clockwise sub-triangles of each part, in the order of `subdomains`.
    pub parts: [Vec<[Point; 3]>; 2],
    pub measures: [f64; 2],
    /// Straight interface piece inside the element.
    pub segment: [Point; 2],
    /// Unit normal pointing from the first into the second subdomain.
    pub normal: Point,
}

impl CutElement {
    pub fn length(&self) -> f64 {
        let [a, b] = self.segment;
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    /// 0 or 1 if `sub` is one of the two sides.
    pub fn side_of(&self, sub: usize) -> Option<usize> {
        self.subdomains.iter().position(|&s| s == sub)
    }
}

/// A face shared by two elements of the same subdomain, at least one of them cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GhostFace {
    pub subdomain: usize,
    pub elements: [usize; 2],
    pub vertices: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct CutDecomposition {
    num_subdomains: usize,
    classes: Vec<ElementClass>,
    cuts: Vec<CutElement>,
    ghost_faces: Vec<GhostFace>,
}

impl CutDecomposition {
    pub fn num_subdomains(&self) -> usize {
        self.num_subdomains
    }

    pub fn num_elements(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, e: usize) -> ElementClass {
        self.classes[e]
    }

    pub fn cuts(&self) -> &[CutElement] {
        &self.cuts
    }

    pub fn cut(&self, e: usize) -> Option<&CutElement> {
        match self.classes[e] {
            ElementClass::Cut(c) => Some(&self.cuts[c]),
            ElementClass::Inside(_) => None,
        }
    }

    pub fn ghost_faces(&self) -> &[GhostFace] {
        &self.ghost_faces
    }

    /// Whether element `e` has a part of positive measure in subdomain `sub`.
    pub fn contains(&self, e: usize, sub: usize) -> bool {
        match self.classes[e] {
            ElementClass::Inside(s) => s == sub,
            ElementClass::Cut(c) => self.cuts[c].subdomains.contains(&sub),
        }
    }

    /// Subdomains touched by `e`, in increasing order.
    pub fn subdomains_of(&self, e: usize) -> Vec<usize> {
        match self.classes[e] {
            ElementClass::Inside(s) => vec![s],
            ElementClass::Cut(c) => self.cuts[c].subdomains.to_vec(),
        }
    }

    /// Sub-triangles of `e ∩ Ω_sub`; empty if the element does not touch `sub`.
    pub fn part(&self, mesh: &StructuredMesh, e: usize, sub: usize) -> Vec<[Point; 3]> {
        match self.classes[e] {
            ElementClass::Inside(s) if s == sub => vec![mesh.coords(e)],
            ElementClass::Inside(_) => Vec::new(),
            ElementClass::Cut(c) => {
                let cut = &self.cuts[c];
                match cut.side_of(sub) {
                    Some(k) => cut.parts[k].clone(),
                    None => Vec::new(),
                }
            }
        }
    }

    pub fn part_measure(&self, mesh: &StructuredMesh, e: usize, sub: usize) -> f64 {
        match self.classes[e] {
            ElementClass::Inside(s) => {
                if s == sub {
                    mesh.area(e)
                } else {
                    0.0
                }
            }
            ElementClass::Cut(c) => {
                let cut = &self.cuts[c];
                cut.side_of(sub).map_or(0.0, |k| cut.measures[k])
            }
        }
    }
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Classifies every element of `mesh` and splits the cut ones.
pub fn classify_and_cut(
    mesh: &StructuredMesh,
    interfaces: &InterfaceSet,
    snap_tol: f64,
) -> Result<CutDecomposition> {
    assert!(snap_tol > 0.0);
    let nif = interfaces.len();
    let h = mesh.h();
    // snapped sign of each vertex w.r.t. each interface
    let mut signs = vec![0i8; mesh.num_vertices() * nif];
    for (v, &p) in mesh.vertices().iter().enumerate() {
        for (k, ls) in interfaces.iter().enumerate() {
            let d = ls.distance(p);
            signs[v * nif + k] = if d.abs() < snap_tol * h {
                0
            } else if d < 0.0 {
                -1
            } else {
                1
            };
        }
    }

    let mut classes = Vec::with_capacity(mesh.num_elements());
    let mut cuts = Vec::new();
    for e in 0..mesh.num_elements() {
        let tri = mesh.triangle(e);
        let mut cut_by = None;
        let mut base = 0;
        for k in 0..nif {
            let s = tri.map(|v| signs[v * nif + k]);
            let neg = s.iter().any(|&x| x < 0);
            let pos = s.iter().any(|&x| x > 0);
            if neg && pos {
                if cut_by.is_some() {
                    return Err(Error::MultipleInterfaces { element: e });
                }
                cut_by = Some((k, s));
            } else {
                if s.iter().filter(|&&x| x == 0).count() >= 2 {
                    return Err(Error::EdgeAlignedInterface { element: e, interface: k });
                }
                if pos {
                    base += 1;
                }
            }
        }
        match cut_by {
            None => classes.push(ElementClass::Inside(base)),
            Some((k, s)) => {
                let cut = split_element(mesh.coords(e), e, k, s, [base, base + 1], interfaces.get(k))?;
                classes.push(ElementClass::Cut(cuts.len()));
                cuts.push(cut);
            }
        }
    }

    let mut decomp = CutDecomposition {
        num_subdomains: interfaces.num_subdomains(),
        classes,
        cuts,
        ghost_faces: Vec::new(),
    };
    decomp.ghost_faces = ghost_faces(mesh, &decomp);
    Ok(decomp)
}

/// Splits a single triangle by one interface, snapping vertices closer than
/// `snap_tol` times the triangle's diameter. Returns `None` if it is not cut.
pub fn cut_triangle(x: [Point; 3], ls: &LevelSet, snap_tol: f64) -> Result<Option<CutElement>> {
    let diam = (0..3)
        .map(|a| {
            let b = (a + 1) % 3;
            ((x[b][0] - x[a][0]).powi(2) + (x[b][1] - x[a][1]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    let s = x.map(|p| {
        let d = ls.distance(p);
        if d.abs() < snap_tol * diam {
            0
        } else if d < 0.0 {
            -1
        } else {
            1
        }
    });
    if s.iter().any(|&v| v < 0) && s.iter().any(|&v| v > 0) {
        split_element(x, 0, 0, s, [0, 1], ls).map(Some)
    } else {
        Ok(None)
    }
}

fn split_element(
    x: [Point; 3],
    e: usize,
    k: usize,
    s: [i8; 3],
    subdomains: [usize; 2],
    ls: &LevelSet,
) -> Result<CutElement> {
    let side = |sign: i8| usize::from(sign > 0);
    let mut parts: [Vec<[Point; 3]>; 2] = [Vec::new(), Vec::new()];
    let segment;
    let positive_vertex;
    if let Some(z) = s.iter().position(|&v| v == 0) {
        let (b, c) = ((z + 1) % 3, (z + 2) % 3);
        let xp = lerp(x[b], x[c], ls.crossing(x[b], x[c]));
        parts[side(s[b])].push([x[z], x[b], xp]);
        parts[side(s[c])].push([x[z], xp, x[c]]);
        segment = [x[z], xp];
        positive_vertex = if s[b] > 0 { x[b] } else { x[c] };
    } else {
        let a = (0..3)
            .find(|&a| s[a] != s[(a + 1) % 3] && s[a] != s[(a + 2) % 3])
            .expect("a cut element has an isolated vertex");
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let x1 = lerp(x[a], x[b], ls.crossing(x[a], x[b]));
        let x2 = lerp(x[a], x[c], ls.crossing(x[a], x[c]));
        parts[side(s[a])].push([x[a], x1, x2]);
        parts[side(s[b])].push([x1, x[b], x[c]]);
        parts[side(s[b])].push([x1, x[c], x2]);
        segment = [x1, x2];
        positive_vertex = if s[a] > 0 { x[a] } else { x[b] };
    }
    let measures = [0, 1].map(|i| parts[i].iter().map(|t| signed_area(t)).sum::<f64>());
    let area = signed_area(&x);
    for (i, m) in measures.iter().enumerate() {
        if !(*m > 0.0) || parts[i].iter().any(|t| signed_area(t) < -1e-14 * area) {
            return Err(Error::DegenerateElement {
                element: e,
                reason: format!("part {i} has measure {m:e}"),
            });
        }
    }
    let d = [segment[1][0] - segment[0][0], segment[1][1] - segment[0][1]];
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if !(len > 0.0) {
        return Err(Error::DegenerateElement {
            element: e,
            reason: "interface segment has zero length".into(),
        });
    }
    let mut normal = [d[1] / len, -d[0] / len];
    let to_pos = [positive_vertex[0] - segment[0][0], positive_vertex[1] - segment[0][1]];
    if normal[0] * to_pos[0] + normal[1] * to_pos[1] < 0.0 {
        normal = [-normal[0], -normal[1]];
    }
    Ok(CutElement {
        element: e,
        interface: k,
        subdomains,
        parts,
        measures,
        segment,
        normal,
    })
}

fn ghost_faces(mesh: &StructuredMesh, decomp: &CutDecomposition) -> Vec<GhostFace> {
    let mut faces = Vec::new();
    for cut in &decomp.cuts {
        let e = cut.element;
        let tri = mesh.triangle(e);
        for &sub in &cut.subdomains {
            for k in 0..3 {
                let Some(nb) = mesh.neighbor(e, k) else { continue };
                if !decomp.contains(nb, sub) {
                    continue;
                }
                // faces between two cut elements are emitted once, from the lower id
                if decomp.cut(nb).is_some() && nb < e {
                    continue;
                }
                faces.push(GhostFace {
                    subdomain: sub,
                    elements: [e, nb],
                    vertices: [tri[k], tri[(k + 1) % 3]],
                });
            }
        }
    }
    faces
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_triangle_cut_at_half() {
        let x = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let c = cut_triangle(x, &LevelSet::vertical(0.5), DEFAULT_SNAP_TOL).unwrap().unwrap();
        assert!((c.measures[0] - 3.0 / 8.0).abs() < 1e-15);
        assert!((c.measures[1] - 1.0 / 8.0).abs() < 1e-15);
        assert!((c.length() - 0.5).abs() < 1e-15);
        assert!((c.normal[0] - 1.0).abs() < 1e-15 && c.normal[1].abs() < 1e-15);
    }

    #[test]
    fn no_interface_means_no_cuts() {
        let m = StructuredMesh::new(4);
        let d = classify_and_cut(&m, &InterfaceSet::single(LevelSet::vertical(-1.0)), DEFAULT_SNAP_TOL).unwrap();
        assert!(d.cuts().is_empty());
        assert!((0..m.num_elements()).all(|e| d.class(e) == ElementClass::Inside(1)));
    }

    #[test]
    fn areas_add_up_and_normals_point_to_second_side() {
        let m = StructuredMesh::new(10);
        let ifs = InterfaceSet::single(LevelSet::circle([0.5, 0.5], 0.1));
        let d = classify_and_cut(&m, &ifs, DEFAULT_SNAP_TOL).unwrap();
        assert!(!d.cuts().is_empty());
        for c in d.cuts() {
            let total = c.measures[0] + c.measures[1];
            assert!((total - m.area(c.element)).abs() < 1e-13 * total);
            let mid = [(c.segment[0][0] + c.segment[1][0]) / 2.0, (c.segment[0][1] + c.segment[1][1]) / 2.0];
            let probe = |t: f64| ifs.get(0).phi([mid[0] + t * c.normal[0], mid[1] + t * c.normal[1]]);
            assert!(probe(1e-3) > probe(-1e-3));
        }
    }

    #[test]
    fn stripes_need_separate_elements() {
        let m = StructuredMesh::new(4);
        let ifs = InterfaceSet::stripes(&[0.3, 0.4]);
        assert!(matches!(
            classify_and_cut(&m, &ifs, DEFAULT_SNAP_TOL),
            Err(Error::MultipleInterfaces { .. })
        ));
    }

    #[test]
    fn grid_aligned_interface_is_rejected() {
        let m = StructuredMesh::new(4);
        let ifs = InterfaceSet::single(LevelSet::vertical(0.5));
        assert!(matches!(
            classify_and_cut(&m, &ifs, DEFAULT_SNAP_TOL),
            Err(Error::EdgeAlignedInterface { .. })
        ));
    }
}

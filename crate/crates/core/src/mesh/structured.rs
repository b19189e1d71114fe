//! Structured triangulations of the unit square and their uniform refinements.

pub type Point = [f64; 2];

/// `n x n` quads, each split along the lower-left to upper-right diagonal.
///
/// Vertex `(i, j)` has id `j * (n + 1) + i`. Quad `(i, j)` owns elements
/// `2 * (j * n + i)` (lower, `[(i,j), (i+1,j), (i+1,j+1)]`) and `2 * (j * n + i) + 1`
/// (upper, `[(i,j), (i+1,j+1), (i,j+1)]`). Both are counter-clockwise.
#[derive(Debug, Clone)]
pub struct StructuredMesh {
    n: usize,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
}

impl StructuredMesh {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "mesh needs at least one cell per direction");
        let h = 1.0 / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                // exact endpoints so that boundary tests are exact
                let x = if i == n { 1.0 } else { i as f64 * h };
                let y = if j == n { 1.0 } else { j as f64 * h };
                vertices.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self { n, vertices, triangles }
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, e: usize) -> [usize; 3] {
        self.triangles[e]
    }

    pub fn coords(&self, e: usize) -> [Point; 3] {
        self.triangles[e].map(|v| self.vertices[v])
    }

    pub fn area(&self, _e: usize) -> f64 {
        0.5 / (self.n * self.n) as f64
    }

    /// Element diameter (the diagonal).
    pub fn diameter(&self, _e: usize) -> f64 {
        std::f64::consts::SQRT_2 / self.n as f64
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.n as f64
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let (i, j) = (v % (self.n + 1), v / (self.n + 1));
        i == 0 || j == 0 || i == self.n || j == self.n
    }

    /// Element across local edge `k`, where edge `k` joins local vertices `k` and `(k+1) % 3`.
    pub fn neighbor(&self, e: usize, k: usize) -> Option<usize> {
        let n = self.n;
        let cell = e / 2;
        let (i, j) = (cell % n, cell / n);
        let lower = |i: usize, j: usize| 2 * (j * n + i);
        let upper = |i: usize, j: usize| 2 * (j * n + i) + 1;
        if e % 2 == 0 {
            match k {
                0 => (j > 0).then(|| upper(i, j - 1)),
                1 => (i + 1 < n).then(|| upper(i + 1, j)),
                _ => Some(upper(i, j)),
            }
        } else {
            match k {
                0 => Some(lower(i, j)),
                1 => (j + 1 < n).then(|| lower(i, j + 1)),
                _ => (i > 0).then(|| lower(i - 1, j)),
            }
        }
    }

    /// Element containing `p` (ties resolved towards the lower-left).
    pub fn locate(&self, p: Point) -> usize {
        let n = self.n;
        let fx = (p[0] * n as f64).clamp(0.0, n as f64);
        let fy = (p[1] * n as f64).clamp(0.0, n as f64);
        let i = (fx.floor() as usize).min(n - 1);
        let j = (fy.floor() as usize).min(n - 1);
        let (u, v) = (fx - i as f64, fy - j as f64);
        2 * (j * n + i) + usize::from(v > u)
    }

    /// Parent of fine element `e` in the mesh with half as many cells per side.
    pub fn parent_of(&self, e: usize) -> usize {
        assert!(self.n % 2 == 0, "mesh is not a refinement");
        let n = self.n;
        let nc = n / 2;
        let cell = e / 2;
        let (i, j) = (cell % n, cell / n);
        let (ci, cj) = (i / 2, j / 2);
        // centroid of the fine triangle in the coarse cell's unit coordinates
        let (du, dv) = if e % 2 == 0 { (2.0 / 3.0, 1.0 / 3.0) } else { (1.0 / 3.0, 2.0 / 3.0) };
        let u = ((i % 2) as f64 + du) / 2.0;
        let v = ((j % 2) as f64 + dv) / 2.0;
        2 * (cj * nc + ci) + usize::from(v > u)
    }
}

/// Barycentric coordinates of `p` in triangle `t`.
pub fn barycentric(t: &[Point; 3], p: Point) -> [f64; 3] {
    let det = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]);
    let l1 = ((p[0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (p[1] - t[0][1])) / det;
    let l2 = ((t[1][0] - t[0][0]) * (p[1] - t[0][1]) - (p[0] - t[0][0]) * (t[1][1] - t[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Constant gradients of the three P1 basis functions of `t`.
pub fn p1_gradients(t: &[Point; 3]) -> [[f64; 2]; 3] {
    let det = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]);
    let mut g = [[0.0; 2]; 3];
    for a in 0..3 {
        let b = t[(a + 1) % 3];
        let c = t[(a + 2) % 3];
        g[a] = [(b[1] - c[1]) / det, (c[0] - b[0]) / det];
    }
    g
}

pub fn signed_area(t: &[Point; 3]) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]))
}

/// Nested sequence of structured meshes; level 0 is the coarsest.
#[derive(Debug, Clone)]
pub struct BackgroundHierarchy {
    levels: Vec<StructuredMesh>,
}

impl BackgroundHierarchy {
    pub fn new(n_coarse: usize, n_levels: usize) -> Self {
        assert!(n_coarse >= 1 && n_levels >= 1);
        let levels = (0..n_levels).map(|l| StructuredMesh::new(n_coarse << l)).collect();
        Self { levels }
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, l: usize) -> &StructuredMesh {
        &self.levels[l]
    }

    pub fn finest(&self) -> &StructuredMesh {
        self.levels.last().expect("hierarchy has at least one level")
    }

    pub fn levels(&self) -> &[StructuredMesh] {
        &self.levels
    }

    /// Parent (on level `l - 1`) of element `e` on level `l`.
    pub fn parent(&self, l: usize, e: usize) -> usize {
        assert!(l >= 1, "level 0 has no parents");
        self.levels[l].parent_of(e)
    }

    /// Children (on level `l + 1`) of every element on level `l`.
    pub fn children(&self, l: usize) -> Vec<[usize; 4]> {
        let fine = &self.levels[l + 1];
        let mut out = vec![[usize::MAX; 4]; self.levels[l].num_elements()];
        let mut fill = vec![0usize; out.len()];
        for e in 0..fine.num_elements() {
            let p = fine.parent_of(e);
            out[p][fill[p]] = e;
            fill[p] += 1;
        }
        out
    }
}

pub fn build_hierarchy(n_coarse: usize, n_levels: usize) -> BackgroundHierarchy {
    BackgroundHierarchy::new(n_coarse, n_levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn counts() {
        let m = StructuredMesh::new(100);
        assert_eq!(m.num_elements(), 20_000);
        assert_eq!(m.num_vertices(), 10_201);
        let h = build_hierarchy(1, 2);
        assert_eq!(h.level(1).num_elements(), 8);
    }

    #[test]
    fn orientation_is_counter_clockwise() {
        let m = StructuredMesh::new(3);
        for e in 0..m.num_elements() {
            assert!(signed_area(&m.coords(e)) > 0.0);
        }
    }

    #[test]
    fn neighbors_match_shared_edges() {
        let m = StructuredMesh::new(4);
        let mut owners: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (e, t) in m.triangles().iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                owners.entry((a.min(b), a.max(b))).or_default().push(e);
            }
        }
        for (e, t) in m.triangles().iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let other = owners[&(a.min(b), a.max(b))].iter().copied().find(|&o| o != e);
                assert_eq!(m.neighbor(e, k), other, "element {e} edge {k}");
            }
        }
    }

    #[test]
    fn children_tile_parent() {
        let h = build_hierarchy(3, 2);
        let kids = h.children(0);
        for (p, ch) in kids.iter().enumerate() {
            let parent = h.level(0).coords(p);
            let total: f64 = ch.iter().map(|&c| signed_area(&h.level(1).coords(c))).sum();
            assert!((total - signed_area(&parent)).abs() < 1e-14 * total);
            for &c in ch {
                for v in h.level(1).coords(c) {
                    let l = barycentric(&parent, v);
                    assert!(l.iter().all(|&x| x > -1e-12), "child {c} leaves parent {p}");
                }
            }
        }
    }

    #[test]
    fn locate_finds_containing_element() {
        let m = StructuredMesh::new(5);
        for e in 0..m.num_elements() {
            let t = m.coords(e);
            let c = [(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0];
            assert_eq!(m.locate(c), e);
        }
    }

    #[test]
    fn p1_gradients_on_reference_triangle() {
        let g = p1_gradients(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(g[0], [-1.0, -1.0]);
        assert_eq!(g[1], [1.0, 0.0]);
        assert_eq!(g[2], [0.0, 1.0]);
    }
}

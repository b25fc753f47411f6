//! Triangulations: data model, structured generators, shape classification
//! and the plain-text mesh format.

mod generate;
mod io;
mod shape;

pub use generate::{generate_friedrichs_keller, generate_reference_triangle_mesh, subdivide_triangle};
pub use io::{fmt17, read_mesh, write_mesh};
pub use shape::{classify_shape, TriangleShape};

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// A point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x1 * other.x2 - self.x2 * other.x1
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x1 * s, self.x2 * s)
    }
}

/// Signed area of the triangle `a b c` (positive when counter-clockwise).
pub fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Relative threshold below which a triangle counts as degenerate.
pub const AREA_EPS: f64 = 1e-14;

/// `true` if `|area| <= AREA_EPS * (longest edge)^2`.
pub fn is_degenerate(p: &[Point2; 3]) -> bool {
    let longest = (p[1] - p[0])
        .norm_sq()
        .max((p[2] - p[1]).norm_sq())
        .max((p[0] - p[2]).norm_sq());
    signed_area(p[0], p[1], p[2]).abs() <= AREA_EPS * longest
}

/// A mesh edge. Vertex indices are stored ascending; adjacent triangles are
/// stored ascending, the second one absent on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub midpoint: Point2,
    pub triangles: (usize, Option<usize>),
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles.1.is_none()
    }
}

/// An immutable conforming triangulation.
///
/// Triangles are counter-clockwise. Local edge `i` of a triangle is the edge
/// opposite its local vertex `i`.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    shapes: Vec<TriangleShape>,
}

impl PartialEq for Mesh {
    /// Structural equality: vertex coordinates and triangle lists.
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.triangles == other.triangles
    }
}

impl Mesh {
    /// Builds a mesh, deriving edges and classifying every triangle.
    pub fn new(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite vertex {p:?}")));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&i) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::InvalidInput(format!(
                    "triangle {t} references vertex {i} (only {} vertices)",
                    vertices.len()
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Degenerate { index: t, area: 0.0 });
            }
            let p = tri.map(|i| vertices[i]);
            let area = signed_area(p[0], p[1], p[2]);
            if is_degenerate(&p) {
                return Err(Error::Degenerate { index: t, area });
            }
            if area < 0.0 {
                return Err(Error::Orientation { index: t, area });
            }
        }

        let mut incidence: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for local in 0..3 {
                let a = tri[(local + 1) % 3];
                let b = tri[(local + 2) % 3];
                incidence.entry((a.min(b), a.max(b))).or_default().push((t, local));
            }
        }

        let mut edges = Vec::with_capacity(incidence.len());
        let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
        for ((a, b), adj) in incidence {
            if adj.len() > 2 {
                return Err(Error::NonManifoldEdge(a, b));
            }
            let e = edges.len();
            for &(t, local) in &adj {
                tri_edges[t][local] = e;
            }
            let second = adj.get(1).map(|&(t, _)| t);
            edges.push(Edge {
                vertices: [a, b],
                midpoint: (vertices[a] + vertices[b]) * 0.5,
                triangles: (adj[0].0, second),
            });
        }

        let shapes = triangles
            .iter()
            .map(|tri| classify_shape(&tri.map(|i| vertices[i])))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self { vertices, triangles, edges, tri_edges, shapes })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Global edge indices of a triangle, local edge `i` opposite local vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    /// Per-triangle `(alpha, theta, h)`.
    pub fn shapes(&self) -> &[TriangleShape] {
        &self.shapes
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `V - E + T`; equals 1 for a simply connected domain.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point2 {
        let [a, b, c] = self.triangle_points(t);
        (a + b + c) * (1.0 / 3.0)
    }

    /// Constant gradients of the three barycentric coordinates on triangle `t`.
    pub fn barycentric_gradients(&self, t: usize) -> [Point2; 3] {
        barycentric_gradients(&self.triangle_points(t))
    }

    /// Largest medium-edge length `h_*` over all triangles.
    pub fn h_star(&self) -> f64 {
        self.shapes.iter().map(|s| s.h).fold(0.0, f64::max)
    }

    /// Boundary flag per vertex (a vertex is on the boundary if it touches a boundary edge).
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            flags[e.vertices[0]] = true;
            flags[e.vertices[1]] = true;
        }
        flags
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[b] - self.vertices[a]).norm()
    }

    /// Unit normal of edge `e`, pointing out of its lower-index adjacent
    /// triangle (outward on the boundary).
    pub fn edge_normal(&self, e: usize) -> Point2 {
        let edge = &self.edges[e];
        let [a, b] = edge.vertices;
        let d = self.vertices[b] - self.vertices[a];
        let mut n = Point2::new(d.x2, -d.x1) * (1.0 / d.norm());
        let inner = self.centroid(edge.triangles.0);
        if (inner - edge.midpoint).dot(n) > 0.0 {
            n = n * -1.0;
        }
        n
    }

    /// `+1` if the normal of local edge `local` of triangle `t` points out of `t`, else `-1`.
    pub fn edge_sign(&self, t: usize, local: usize) -> f64 {
        if self.edges[self.tri_edges[t][local]].triangles.0 == t {
            1.0
        } else {
            -1.0
        }
    }
}

/// Gradients of the barycentric coordinates of a counter-clockwise triangle.
pub fn barycentric_gradients(p: &[Point2; 3]) -> [Point2; 3] {
    let two_area = 2.0 * signed_area(p[0], p[1], p[2]);
    std::array::from_fn(|i| {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        let d = b - a;
        Point2::new(-d.x2, d.x1) * (1.0 / two_area)
    })
}

/// Barycentric coordinates of `x` with respect to the triangle `p`.
pub fn barycentric(p: &[Point2; 3], x: Point2) -> [f64; 3] {
    let area = signed_area(p[0], p[1], p[2]);
    [
        signed_area(x, p[1], p[2]) / area,
        signed_area(p[0], x, p[2]) / area,
        signed_area(p[0], p[1], x) / area,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_right() -> Mesh {
        Mesh::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn single_triangle_edges_are_boundary() {
        let m = unit_right();
        assert_eq!(m.num_edges(), 3);
        assert!(m.edges().iter().all(Edge::is_boundary));
        assert_eq!(m.euler_characteristic(), 1);
        // local edge 0 is opposite vertex 0, i.e. (1,2)
        assert_eq!(m.edges()[m.triangle_edges(0)[0]].vertices, [1, 2]);
    }

    #[test]
    fn barycentric_gradients_sum_to_zero() {
        let p = [Point2::new(0.3, 0.1), Point2::new(2.0, 0.4), Point2::new(0.7, 1.9)];
        let g = barycentric_gradients(&p);
        let s = g[0] + g[1] + g[2];
        assert!(s.norm() < 1e-14);
        // grad lambda_i . (p_j - p_k) reproduces the Kronecker delta
        for i in 0..3 {
            for j in 0..3 {
                let v = g[i].dot(p[j] - p[(j + 1) % 3]);
                let expect = if i == j { 1.0 } else if i == (j + 1) % 3 { -1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-13);
            }
        }
        let l = barycentric(&p, p[1]);
        assert!((l[1] - 1.0).abs() < 1e-14 && l[0].abs() < 1e-14);
    }

    #[test]
    fn rejects_clockwise_and_degenerate() {
        let v = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 2, 1]]), Err(Error::Orientation { .. })));
        let flat = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 1e-16)];
        assert!(matches!(Mesh::new(flat, vec![[0, 1, 2]]), Err(Error::Degenerate { .. })));
        assert!(Mesh::new(v, vec![[0, 1, 3]]).is_err());
    }

    #[test]
    fn rejects_non_manifold_edge() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 1.0),
            Point2::new(0.5, -1.0),
            Point2::new(0.5, 2.0),
        ];
        let r = Mesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]);
        assert!(matches!(r, Err(Error::NonManifoldEdge(0, 1))));
    }

    #[test]
    fn normals_point_from_lower_to_higher_triangle() {
        let m = generate_friedrichs_keller(3).unwrap();
        for (e, edge) in m.edges().iter().enumerate() {
            let n = m.edge_normal(e);
            assert!((n.norm() - 1.0).abs() < 1e-14);
            let out = edge.midpoint - m.centroid(edge.triangles.0);
            assert!(out.dot(n) > 0.0);
            if let Some(t2) = edge.triangles.1 {
                assert!(edge.triangles.0 < t2);
                assert!((m.centroid(t2) - edge.midpoint).dot(n) > 0.0);
            }
        }
    }

    #[test]
    fn adjacency_is_symmetric() {
        let m = generate_friedrichs_keller(4).unwrap();
        for (e, edge) in m.edges().iter().enumerate() {
            assert!(m.triangle_edges(edge.triangles.0).contains(&e));
            if let Some(t2) = edge.triangles.1 {
                assert!(m.triangle_edges(t2).contains(&e));
            }
        }
        for t in 0..m.num_triangles() {
            for (local, &e) in m.triangle_edges(t).iter().enumerate() {
                let edge = &m.edges()[e];
                assert!(edge.triangles.0 == t || edge.triangles.1 == Some(t));
                assert!(!edge.vertices.contains(&m.triangles()[t][local]));
            }
        }
    }
}

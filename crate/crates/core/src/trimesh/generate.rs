use super::{Mesh, Point2, TriangleShape};
use crate::error::{Error, Result};

/// `N x N` Friedrichs-Keller triangulation of the unit square.
///
/// Each cell is cut along its `(i,j)-(i+1,j+1)` diagonal, so every triangle
/// is congruent to `T_{1,pi/2,1/N}`.
pub fn generate_friedrichs_keller(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidInput("Friedrichs-Keller mesh needs N >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // exact at the far edge
            let x = if i == n { 1.0 } else { i as f64 * h };
            let y = if j == n { 1.0 } else { j as f64 * h };
            vertices.push(Point2::new(x, y));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(vertices, triangles)
}

/// Uniform subdivision of `T_{alpha,theta,1}` into `n^2` congruent copies of
/// `T_{alpha,theta,1/n}`.
pub fn generate_reference_triangle_mesh(alpha: f64, theta: f64, n: usize) -> Result<Mesh> {
    let shape = TriangleShape::new(alpha, theta, 1.0)?;
    subdivide_triangle(shape.vertices(), n)
}

/// Splits a counter-clockwise triangle `[o, a, b]` into `n^2` congruent
/// triangles. Vertex `(i, j)` sits at `o + (i/n)(a - o) + (j/n)(b - o)`.
pub fn subdivide_triangle(corners: [Point2; 3], n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidInput("subdivision count must be >= 1".into()));
    }
    let [o, a, b] = corners;
    let inv = 1.0 / n as f64;
    // row j holds n + 1 - j vertices
    let row_start: Vec<usize> = (0..=n + 1).scan(0, |acc, j| {
        let s = *acc;
        *acc += n + 1 - j.min(n + 1);
        Some(s)
    })
    .collect();
    let id = |i: usize, j: usize| row_start[j] + i;

    let mut vertices = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for j in 0..=n {
        for i in 0..=n - j {
            let p = if i == n {
                a
            } else if j == n {
                b
            } else {
                o + (a - o) * (i as f64 * inv) + (b - o) * (j as f64 * inv)
            };
            vertices.push(p);
        }
    }
    let mut triangles = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n - j {
            triangles.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
            if i + j + 1 < n {
                triangles.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
    }
    Mesh::new(vertices, triangles)
}

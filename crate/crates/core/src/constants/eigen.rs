use super::ConstantId;
use crate::error::{Error, Result};
use crate::femcore::{assemble_conforming, assemble_p1_mass};
use crate::linalg::smallest_constrained_eigenvalue;
use crate::trimesh::{subdivide_triangle, Mesh, Point2, TriangleShape};

/// Conforming P1 Rayleigh-Ritz lower bound for `C_J(alpha, theta)` with
/// `n^2` subdivision triangles.
pub fn eigen_constant_lower(id: ConstantId, alpha: f64, theta: f64, n: usize) -> Result<f64> {
    eigen_constant_lower_on(id, TriangleShape::new(alpha, theta, 1.0)?, n)
}

/// Same as [`eigen_constant_lower`] on `T_{alpha,theta,h}`; the result
/// scales linearly in `h`.
pub fn eigen_constant_lower_on(id: ConstantId, shape: TriangleShape, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidInput("eigen subdivision must be >= 1".into()));
    }
    let mesh = subdivide_triangle(shape.vertices(), n)?;
    let (a, _) = assemble_conforming(&mesh);
    let m = assemble_p1_mass(&mesh);
    let rows = constraint_rows(id, &mesh, shape)?;
    let lambda = smallest_constrained_eigenvalue(&a, &m, &rows, 1.0 / (shape.h * shape.h))?;
    if !(lambda > 0.0) {
        return Err(Error::NotConverged { residual: lambda });
    }
    Ok(1.0 / lambda.sqrt())
}

/// Rows `b` with `b . v = int v` (J = 0) or `b . v = int_{e_i} v` (edge
/// types, exact for P1 traces).
fn constraint_rows(id: ConstantId, mesh: &Mesh, shape: TriangleShape) -> Result<Vec<Vec<f64>>> {
    let [o, a, b] = shape.vertices();
    let edges: &[usize] = match id {
        ConstantId::C0 => {
            let m = assemble_p1_mass(mesh);
            let ones = vec![1.0; mesh.num_vertices()];
            return Ok(vec![m.mul_vec(&ones)]);
        }
        ConstantId::C1 => &[0],
        ConstantId::C2 => &[1],
        ConstantId::C3 => &[2],
        ConstantId::C12 => &[0, 1],
        ConstantId::C123 => &[0, 1, 2],
        other => return Err(Error::InvalidInput(format!("C_{} is not an H^1 Rayleigh quotient", other.tag()))),
    };
    let sides = [(o, a), (o, b), (a, b)];
    Ok(edges.iter().map(|&i| edge_row(mesh, sides[i].0, sides[i].1)).collect())
}

fn edge_row(mesh: &Mesh, p: Point2, q: Point2) -> Vec<f64> {
    let dir = q - p;
    let len = dir.norm();
    let on_side = |x: Point2| (x - p).cross(dir).abs() <= 1e-12 * len * len;
    let mut row = vec![0.0; mesh.num_vertices()];
    for (k, edge) in mesh.edges().iter().enumerate() {
        let [i, j] = edge.vertices;
        if edge.is_boundary() && on_side(mesh.vertices()[i]) && on_side(mesh.vertices()[j]) {
            let half = 0.5 * mesh.edge_length(k);
            row[i] += half;
            row[j] += half;
        }
    }
    row
}

use super::{DofMap, PwConstant, ScalarField};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::par;
use crate::quadrature::TriangleRule;
use crate::trimesh::{barycentric, Mesh};

/// Element matrices in parallel, scattered in triangle order.
fn assemble_elements<F>(n: usize, mesh: &Mesh, dofs: impl Fn(usize) -> [usize; 3], element: F) -> CsrMatrix
where
    F: Fn(usize) -> [[f64; 3]; 3] + Sync + Send,
{
    let local = par::map_range(mesh.num_triangles(), element);
    let mut t = TripletBuilder::new(n, n);
    for (k, ke) in local.iter().enumerate() {
        let d = dofs(k);
        for i in 0..3 {
            for j in 0..3 {
                t.add(d[i], d[j], ke[i][j]);
            }
        }
    }
    t.build()
}

fn gradient_products(mesh: &Mesh, t: usize, scale: f64) -> [[f64; 3]; 3] {
    let g = mesh.barycentric_gradients(t);
    let a = mesh.area(t) * scale;
    let mut ke = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = a * g[i].dot(g[j]);
            ke[i][j] = v;
            ke[j][i] = v;
        }
    }
    ke
}

/// Full (unmasked) Crouzeix-Raviart stiffness matrix over all edges.
pub fn assemble_cr(mesh: &Mesh) -> (CsrMatrix, DofMap) {
    // basis 1 - 2 lambda_i has gradient -2 grad lambda_i
    let a = assemble_elements(mesh.num_edges(), mesh, |t| mesh.triangle_edges(t), |t| gradient_products(mesh, t, 4.0));
    (a, DofMap::cr(mesh))
}

/// Full (unmasked) conforming P1 stiffness matrix over all vertices.
pub fn assemble_conforming(mesh: &Mesh) -> (CsrMatrix, DofMap) {
    let a = assemble_elements(mesh.num_vertices(), mesh, |t| mesh.triangles()[t], |t| gradient_products(mesh, t, 1.0));
    (a, DofMap::conforming(mesh))
}

/// Consistent P1 mass matrix.
pub fn assemble_p1_mass(mesh: &Mesh) -> CsrMatrix {
    assemble_elements(mesh.num_vertices(), mesh, |t| mesh.triangles()[t], |t| {
        let a = mesh.area(t) / 12.0;
        std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 2.0 * a } else { a }))
    })
}

fn scatter(n: usize, local: Vec<[f64; 3]>, dofs: impl Fn(usize) -> [usize; 3]) -> Vec<f64> {
    let mut b = vec![0.0; n];
    for (t, l) in local.iter().enumerate() {
        for (d, v) in dofs(t).iter().zip(l) {
            b[*d] += v;
        }
    }
    b
}

/// `(f, psi_e)` for every CR basis function, seven-point rule per triangle.
pub fn cr_load(mesh: &Mesh, f: &ScalarField) -> Vec<f64> {
    if let Some(c) = f.as_constant() {
        return cr_load_piecewise_constant(mesh, &PwConstant { values: vec![c; mesh.num_triangles()] });
    }
    let rule = TriangleRule::degree5();
    let local = par::map_range(mesh.num_triangles(), |t| {
        let p = mesh.triangle_points(t);
        let area = mesh.area(t);
        let mut l = [0.0; 3];
        for (x, w) in rule.map(&p) {
            let lam = barycentric(&p, x);
            let fx = f.eval(x);
            for i in 0..3 {
                l[i] += area * w * fx * (1.0 - 2.0 * lam[i]);
            }
        }
        l
    });
    scatter(mesh.num_edges(), local, |t| mesh.triangle_edges(t))
}

/// Exact `(fbar, psi_e)` for a piecewise-constant load: `fbar_K |K| / 3` per edge.
pub fn cr_load_piecewise_constant(mesh: &Mesh, fbar: &PwConstant) -> Vec<f64> {
    let local = (0..mesh.num_triangles()).map(|t| [fbar.values[t] * mesh.area(t) / 3.0; 3]).collect();
    scatter(mesh.num_edges(), local, |t| mesh.triangle_edges(t))
}

/// `(f, lambda_v)` for every vertex hat function, seven-point rule.
pub fn conforming_load(mesh: &Mesh, f: &ScalarField) -> Vec<f64> {
    if let Some(c) = f.as_constant() {
        return conforming_load_piecewise_constant(mesh, &PwConstant { values: vec![c; mesh.num_triangles()] });
    }
    let rule = TriangleRule::degree5();
    let local = par::map_range(mesh.num_triangles(), |t| {
        let p = mesh.triangle_points(t);
        let area = mesh.area(t);
        let mut l = [0.0; 3];
        for (x, w) in rule.map(&p) {
            let lam = barycentric(&p, x);
            let fx = f.eval(x);
            for i in 0..3 {
                l[i] += area * w * fx * lam[i];
            }
        }
        l
    });
    scatter(mesh.num_vertices(), local, |t| mesh.triangles()[t])
}

pub fn conforming_load_piecewise_constant(mesh: &Mesh, fbar: &PwConstant) -> Vec<f64> {
    let local = (0..mesh.num_triangles()).map(|t| [fbar.values[t] * mesh.area(t) / 3.0; 3]).collect();
    scatter(mesh.num_vertices(), local, |t| mesh.triangles()[t])
}

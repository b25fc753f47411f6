use super::{ConformingSolution, CrSolution, DiscreteField, PwConstant, ScalarField};
use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::{integrate_segment, TriangleRule};
use crate::trimesh::Mesh;

/// Per-triangle means `fbar_K = int_K f / |K|` (seven-point rule).
pub fn project_mean(mesh: &Mesh, f: &ScalarField) -> PwConstant {
    if let Some(c) = f.as_constant() {
        return PwConstant { values: vec![c; mesh.num_triangles()] };
    }
    let rule = TriangleRule::degree5();
    PwConstant {
        values: par::map_range(mesh.num_triangles(), |t| {
            let p = mesh.triangle_points(t);
            rule.map(&p).map(|(x, w)| w * f.eval(x)).sum()
        }),
    }
}

/// CR interpolant: every edge DOF is the edge mean of `v` (five-point Gauss).
/// Boundary edges are filled too.
pub fn interpolate_cr(mesh: &Mesh, v: &ScalarField) -> CrSolution {
    let values = par::map_range(mesh.num_edges(), |e| {
        let [a, b] = mesh.edges()[e].vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        integrate_segment(pa, pb, 5, |x| v.eval(x)) / (pb - pa).norm()
    });
    CrSolution { values }
}

/// Nodal P1 interpolant.
pub fn interpolate_conforming(mesh: &Mesh, v: &ScalarField) -> ConformingSolution {
    ConformingSolution { values: mesh.vertices().iter().map(|&p| v.eval(p)).collect() }
}

/// `||grad u - grad_h u_h||` with the seven-point rule on every triangle.
pub fn energy_error<D: DiscreteField + Sync>(mesh: &Mesh, uh: &D, exact: &ScalarField) -> Result<f64> {
    if !exact.has_gradient() {
        return Err(Error::InvalidInput(format!("field `{}` has no gradient", exact.name())));
    }
    let rule = TriangleRule::degree5();
    let sq = par::sum_range(mesh.num_triangles(), |t| {
        let p = mesh.triangle_points(t);
        rule.integrate(&p, |x| (exact.grad(x).unwrap() - uh.gradient(mesh, t, x)).norm_sq())
    });
    Ok(sq.sqrt())
}

/// `||u - u_h||` with the seven-point rule on every triangle.
pub fn l2_error<D: DiscreteField + Sync>(mesh: &Mesh, uh: &D, exact: &ScalarField) -> f64 {
    let rule = TriangleRule::degree5();
    par::sum_range(mesh.num_triangles(), |t| {
        let p = mesh.triangle_points(t);
        rule.integrate(&p, |x| (exact.eval(x) - uh.value(mesh, t, x)).powi(2))
    })
    .sqrt()
}

/// `||grad_h a - grad_h b||` for two discrete fields on the same mesh,
/// with the exact edge-midpoint rule (both gradients are affine at most).
pub fn seminorm_difference<A, B>(mesh: &Mesh, a: &A, b: &B) -> f64
where
    A: DiscreteField + Sync,
    B: DiscreteField + Sync,
{
    let rule = TriangleRule::degree2();
    par::sum_range(mesh.num_triangles(), |t| {
        let p = mesh.triangle_points(t);
        rule.integrate(&p, |x| (a.gradient(mesh, t, x) - b.gradient(mesh, t, x)).norm_sq())
    })
    .sqrt()
}

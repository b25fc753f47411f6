use super::{
    assemble_conforming, assemble_cr, conforming_load, cr_load, interpolate_conforming, interpolate_cr,
    ConformingSolution, CrSolution, DofMap, ScalarField,
};
use crate::error::Result;
use crate::linalg::{solve_spd, CsrMatrix};
use crate::trimesh::Mesh;

/// Eliminates the masked DOFs (fixed to `boundary`) and solves the reduced system.
fn solve_reduced(a: &CsrMatrix, dofs: &DofMap, load: &[f64], boundary: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = dofs.n_dofs();
    let mut x = vec![0.0; n];
    if let Some(g) = boundary {
        for d in 0..n {
            if dofs.is_dirichlet(d) {
                x[d] = g[d];
            }
        }
    }
    let mut rhs = vec![0.0; dofs.n_free()];
    for i in 0..n {
        let Some(ri) = dofs.free_index(i) else { continue };
        rhs[ri] = load[i];
        if boundary.is_some() {
            for (j, v) in a.row(i) {
                if dofs.is_dirichlet(j) {
                    rhs[ri] -= v * x[j];
                }
            }
        }
    }
    let reduced = a.restrict(dofs.free_indices(), dofs.n_free());
    let sol = solve_spd(&reduced, &rhs)?;
    for i in 0..n {
        if let Some(ri) = dofs.free_index(i) {
            x[i] = sol[ri];
        }
    }
    Ok(x)
}

/// CR solve for a given assembled load vector (`(f, psi_e)` per edge),
/// homogeneous or with prescribed boundary edge values.
pub fn solve_cr_with_load(mesh: &Mesh, load: &[f64], boundary: Option<&[f64]>) -> Result<CrSolution> {
    let (a, dofs) = assemble_cr(mesh);
    Ok(CrSolution { values: solve_reduced(&a, &dofs, load, boundary)? })
}

/// `(grad_h u_h, grad_h v_h) = (f, v_h)` for all CR `v_h` vanishing at boundary midpoints.
pub fn solve_poisson_cr(mesh: &Mesh, f: &ScalarField) -> Result<CrSolution> {
    solve_cr_with_load(mesh, &cr_load(mesh, f), None)
}

/// CR solve with boundary edge DOFs set to the edge means of `g`.
pub fn solve_poisson_cr_dirichlet(mesh: &Mesh, f: &ScalarField, g: &ScalarField) -> Result<CrSolution> {
    let boundary = interpolate_cr(mesh, g);
    solve_cr_with_load(mesh, &cr_load(mesh, f), Some(&boundary.values))
}

pub fn solve_conforming_with_load(mesh: &Mesh, load: &[f64], boundary: Option<&[f64]>) -> Result<ConformingSolution> {
    let (a, dofs) = assemble_conforming(mesh);
    Ok(ConformingSolution { values: solve_reduced(&a, &dofs, load, boundary)? })
}

/// Conforming P1 solution in `H^1_0`.
pub fn solve_poisson_conforming(mesh: &Mesh, f: &ScalarField) -> Result<ConformingSolution> {
    solve_conforming_with_load(mesh, &conforming_load(mesh, f), None)
}

/// Conforming P1 solve with nodal boundary values of `g`.
pub fn solve_poisson_conforming_dirichlet(
    mesh: &Mesh,
    f: &ScalarField,
    g: &ScalarField,
) -> Result<ConformingSolution> {
    let boundary = interpolate_conforming(mesh, g);
    solve_conforming_with_load(mesh, &conforming_load(mesh, f), Some(&boundary.values))
}

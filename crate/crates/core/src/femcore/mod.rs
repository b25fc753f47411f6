//! Conforming P1 and Crouzeix-Raviart spaces: assembly, Poisson solves,
//! projections, interpolation and error norms.

mod assemble;
mod field;
mod norms;
mod output;
mod solve;

pub use assemble::{
    assemble_conforming, assemble_cr, assemble_p1_mass, conforming_load, conforming_load_piecewise_constant,
    cr_load, cr_load_piecewise_constant,
};
pub use field::{DataNorms, ScalarField};
pub use norms::{energy_error, interpolate_conforming, interpolate_cr, l2_error, project_mean, seminorm_difference};
pub use output::{write_conforming_csv, write_cr_csv};
pub use solve::{
    solve_conforming_with_load, solve_cr_with_load, solve_poisson_conforming, solve_poisson_conforming_dirichlet,
    solve_poisson_cr, solve_poisson_cr_dirichlet,
};

use crate::trimesh::{barycentric, Mesh, Point2};

/// Which geometric entity carries the degrees of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    /// One DOF per edge midpoint.
    CrEdge,
    /// One DOF per vertex.
    ConformingVertex,
    /// One DOF per triangle.
    PiecewiseConstant,
}

/// DOF numbering with the Dirichlet mask and the compressed numbering of
/// the free DOFs.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub space: Space,
    dirichlet: Vec<bool>,
    free_index: Vec<Option<usize>>,
    n_free: usize,
}

impl DofMap {
    fn from_mask(space: Space, dirichlet: Vec<bool>) -> Self {
        let mut n_free = 0;
        let free_index = dirichlet
            .iter()
            .map(|&d| {
                if d {
                    None
                } else {
                    n_free += 1;
                    Some(n_free - 1)
                }
            })
            .collect();
        Self { space, dirichlet, free_index, n_free }
    }

    /// Edge DOFs; boundary edges are masked.
    pub fn cr(mesh: &Mesh) -> Self {
        Self::from_mask(Space::CrEdge, mesh.edges().iter().map(|e| e.is_boundary()).collect())
    }

    /// Vertex DOFs; boundary vertices are masked.
    pub fn conforming(mesh: &Mesh) -> Self {
        Self::from_mask(Space::ConformingVertex, mesh.boundary_vertices())
    }

    pub fn piecewise_constant(mesh: &Mesh) -> Self {
        Self::from_mask(Space::PiecewiseConstant, vec![false; mesh.num_triangles()])
    }

    pub fn n_dofs(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    /// Position of `dof` in the reduced system, `None` if masked.
    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn free_indices(&self) -> &[Option<usize>] {
        &self.free_index
    }
}

/// Finite element function with a piecewise-affine restriction to each
/// triangle, evaluated triangle by triangle.
pub trait DiscreteField {
    fn value(&self, mesh: &Mesh, t: usize, x: Point2) -> f64;
    fn gradient(&self, mesh: &Mesh, t: usize, x: Point2) -> Point2;
}

/// Crouzeix-Raviart function: one value per edge midpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct CrSolution {
    pub values: Vec<f64>,
}

/// Conforming P1 function: one value per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformingSolution {
    pub values: Vec<f64>,
}

/// One value per triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct PwConstant {
    pub values: Vec<f64>,
}

impl CrSolution {
    /// Local coefficients, ordered as the local edges of triangle `t`.
    pub fn local(&self, mesh: &Mesh, t: usize) -> [f64; 3] {
        mesh.triangle_edges(t).map(|e| self.values[e])
    }

    /// Constant gradient on triangle `t`: the basis function of local edge
    /// `i` is `1 - 2 lambda_i`.
    pub fn element_gradient(&self, mesh: &Mesh, t: usize) -> Point2 {
        let g = mesh.barycentric_gradients(t);
        let c = self.local(mesh, t);
        (g[0] * c[0] + g[1] * c[1] + g[2] * c[2]) * -2.0
    }
}

impl DiscreteField for CrSolution {
    fn value(&self, mesh: &Mesh, t: usize, x: Point2) -> f64 {
        let l = barycentric(&mesh.triangle_points(t), x);
        let c = self.local(mesh, t);
        (0..3).map(|i| c[i] * (1.0 - 2.0 * l[i])).sum()
    }

    fn gradient(&self, mesh: &Mesh, t: usize, _x: Point2) -> Point2 {
        self.element_gradient(mesh, t)
    }
}

impl ConformingSolution {
    pub fn element_gradient(&self, mesh: &Mesh, t: usize) -> Point2 {
        let g = mesh.barycentric_gradients(t);
        let c = mesh.triangles()[t].map(|v| self.values[v]);
        g[0] * c[0] + g[1] * c[1] + g[2] * c[2]
    }
}

impl DiscreteField for ConformingSolution {
    fn value(&self, mesh: &Mesh, t: usize, x: Point2) -> f64 {
        let l = barycentric(&mesh.triangle_points(t), x);
        let c = mesh.triangles()[t].map(|v| self.values[v]);
        (0..3).map(|i| c[i] * l[i]).sum()
    }

    fn gradient(&self, mesh: &Mesh, t: usize, _x: Point2) -> Point2 {
        self.element_gradient(mesh, t)
    }
}

impl DiscreteField for PwConstant {
    fn value(&self, _mesh: &Mesh, t: usize, _x: Point2) -> f64 {
        self.values[t]
    }

    fn gradient(&self, _mesh: &Mesh, _t: usize, _x: Point2) -> Point2 {
        Point2::new(0.0, 0.0)
    }
}

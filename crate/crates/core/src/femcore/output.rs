use std::io::Write;

use super::{ConformingSolution, CrSolution};
use crate::error::{Error, Result};
use crate::trimesh::{fmt17, Mesh};

/// `edge_index,midpoint_x1,midpoint_x2,value`
pub fn write_cr_csv<W: Write>(mesh: &Mesh, u: &CrSolution, mut w: W) -> Result<()> {
    if u.values.len() != mesh.num_edges() {
        return Err(Error::MeshMismatch(format!("{} values for {} edges", u.values.len(), mesh.num_edges())));
    }
    writeln!(w, "edge_index,midpoint_x1,midpoint_x2,value")?;
    for (e, edge) in mesh.edges().iter().enumerate() {
        writeln!(w, "{e},{},{},{}", fmt17(edge.midpoint.x1), fmt17(edge.midpoint.x2), fmt17(u.values[e]))?;
    }
    Ok(())
}

/// `vertex_index,x1,x2,value`
pub fn write_conforming_csv<W: Write>(mesh: &Mesh, u: &ConformingSolution, mut w: W) -> Result<()> {
    if u.values.len() != mesh.num_vertices() {
        return Err(Error::MeshMismatch(format!(
            "{} values for {} vertices",
            u.values.len(),
            mesh.num_vertices()
        )));
    }
    writeln!(w, "vertex_index,x1,x2,value")?;
    for (v, p) in mesh.vertices().iter().enumerate() {
        writeln!(w, "{v},{},{},{}", fmt17(p.x1), fmt17(p.x2), fmt17(u.values[v]))?;
    }
    Ok(())
}

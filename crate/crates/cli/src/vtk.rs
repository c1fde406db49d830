//! Legacy ASCII VTK export of cell values.

use std::fmt::Write as _;
use std::path::Path;

use hfv_core::discretization::DofVector;
use hfv_core::mesh::Mesh;

use crate::output::{format_real, write_atomic};
use crate::CliError;

/// POLYDATA with one polygon per cell and the cell unknowns as `u_cell`.
/// Face unknowns are not exported.
pub fn render_vtk(mesh: &Mesh, u: &DofVector) -> Result<String, CliError> {
    if u.cells.len() != mesh.num_cells() {
        return Err(CliError::Export(format!("{} cell values for {} cells", u.cells.len(), mesh.num_cells())));
    }
    let mut s = String::new();
    let connectivity: usize = mesh.cells.iter().map(|c| c.vertices.len() + 1).sum();
    // writing into a String cannot fail
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nhfv solution\nASCII\nDATASET POLYDATA");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} 0", format_real(v.x), format_real(v.y));
    }
    let _ = writeln!(s, "POLYGONS {} {connectivity}", mesh.num_cells());
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.vertices.len());
        for v in &c.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_DATA {}\nSCALARS u_cell double 1\nLOOKUP_TABLE default", mesh.num_cells());
    for v in &u.cells {
        let _ = writeln!(s, "{}", format_real(*v));
    }
    Ok(s)
}

pub fn export_vtk(mesh: &Mesh, u: &DofVector, path: &Path) -> Result<(), CliError> {
    let text = render_vtk(mesh, u)?;
    write_atomic(path, text.as_bytes())
}

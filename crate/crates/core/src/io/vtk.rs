//! Legacy ASCII VTK output of nodal and element fields.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::coupled::CoupledState;
use crate::error::Result;
use crate::mesh::{MeridionalMesh, Point};

/// A named scalar field.
pub type Field<'a> = (&'a str, &'a [f64]);

/// Unstructured grid text. Points live in the `(r, z, 0)` plane.
pub fn vtk_text(nodes: &[Point], triangles: &[[usize; 3]], point_data: &[Field], cell_data: &[Field]) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\naxitherm\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", nodes.len());
    for p in nodes {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {} {}", triangles.len(), 4 * triangles.len());
    for t in triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", triangles.len());
    for _ in triangles {
        s.push_str("5\n");
    }
    let block = |s: &mut String, kind: &str, n: usize, data: &[Field]| {
        if data.is_empty() {
            return;
        }
        let _ = writeln!(s, "{kind} {n}");
        for (name, v) in data {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for x in v.iter() {
                let _ = writeln!(s, "{x:.16e}");
            }
        }
    };
    block(&mut s, "POINT_DATA", nodes.len(), point_data);
    block(&mut s, "CELL_DATA", triangles.len(), cell_data);
    s
}

/// Writes `<stem>.vtk` on the reference mesh and, when `current_nodes` is
/// given, `<stem>_current.vtk` on the deformed one. Returns the files written.
pub fn write_state_vtk(
    dir: &Path,
    stem: &str,
    mesh: &MeridionalMesh,
    state: &CoupledState,
    current_nodes: Option<&[Point]>,
) -> Result<Vec<PathBuf>> {
    let h_abs: Vec<f64> = state.h.iter().map(|h| h.norm()).collect();
    let point: [Field; 2] = [("theta", &state.theta), ("H_abs", &h_abs)];
    let cell: [Field; 2] = [("J_abs", &state.post.j_abs), ("Q", &state.post.joule)];
    let mut written = Vec::new();
    let mut emit = |name: String, nodes: &[Point]| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, vtk_text(nodes, mesh.triangles(), &point, &cell))?;
        written.push(path);
        Ok(())
    };
    emit(format!("{stem}.vtk"), mesh.nodes())?;
    if let Some(nodes) = current_nodes {
        emit(format!("{stem}_current.vtk"), nodes)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_precision() {
        let nodes = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0 / 3.0]];
        let s = vtk_text(&nodes, &[[0, 1, 2]], &[("theta", &[1.0, 2.0, 3.0])], &[("Q", &[0.1])]);
        assert!(s.contains("POINTS 3 double"));
        assert!(s.contains("CELLS 1 4\n3 0 1 2"));
        assert!(s.contains("CELL_TYPES 1\n5"));
        assert!(s.contains("POINT_DATA 3\nSCALARS theta double 1"));
        assert!(s.contains("CELL_DATA 1\nSCALARS Q double 1"));
        let third: f64 = s.lines().nth(7).unwrap().split(' ').nth(1).unwrap().parse().unwrap();
        assert_eq!(third, 1.0 / 3.0);
    }
}

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{DiscreteSolution, ErrorReport};
use crate::cutgeom::interface_triangles;
use crate::error::Result;
use crate::fespace::DofMaps;
use crate::levelset::LevelSetField;
use crate::scalar::Real;

pub const CSV_HEADER: &str =
    "level,h,l2_bulk,order_l2_bulk,h1_bulk,order_h1_bulk,l2_surf,order_l2_surf,h1_surf,order_h1_surf,gcr_iters";

/// Renders the error table. Orders are blank on the first row.
pub fn render_csv(report: &ErrorReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, row) in report.rows.iter().enumerate() {
        let orders = report.orders(i);
        let e = row.errors.as_array();
        write!(out, "{},{:.5e}", row.level, row.h).unwrap();
        for k in 0..4 {
            let o = orders.map(|o| format!("{:.5e}", o[k])).unwrap_or_default();
            write!(out, ",{:.5e},{}", e[k], o).unwrap();
        }
        writeln!(out, ",{}", row.gcr_iters).unwrap();
    }
    out
}

pub fn write_csv(report: &ErrorReport, path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(report))?;
    Ok(())
}

/// Legacy ASCII VTK of the background mesh with the level set and the
/// bulk concentration (`u1` where `phi < 0`, else `u2`) as point data.
pub fn write_bulk_vtk<T: Real>(
    path: &Path,
    field: &LevelSetField<'_, T>,
    dofs: &DofMaps,
    sol: &DiscreteSolution<T>,
) -> Result<()> {
    let mesh = field.mesh;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# vtk DataFile Version 3.0\nbulk solution\nASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(f, "POINTS {} double", mesh.num_vertices())?;
    for p in &mesh.vertices {
        writeln!(f, "{:e} {:e} {:e}", p[0].as_f64(), p[1].as_f64(), p[2].as_f64())?;
    }
    writeln!(f, "CELLS {} {}", mesh.num_tets(), 5 * mesh.num_tets())?;
    for t in &mesh.tets {
        writeln!(f, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    writeln!(f, "CELL_TYPES {}", mesh.num_tets())?;
    for _ in &mesh.tets {
        writeln!(f, "10")?;
    }
    writeln!(f, "POINT_DATA {}", mesh.num_vertices())?;
    writeln!(f, "SCALARS phi double 1\nLOOKUP_TABLE default")?;
    for v in &field.nodal_values {
        writeln!(f, "{:e}", v.as_f64())?;
    }
    writeln!(f, "SCALARS u double 1\nLOOKUP_TABLE default")?;
    for (g, v) in field.nodal_values.iter().enumerate() {
        let (map, coeffs) = if *v < T::zero() { (&dofs.bulk1, &sol.u1) } else { (&dofs.bulk2, &sol.u2) };
        let value = map.local(g).map_or(0.0, |l| coeffs[l].as_f64());
        writeln!(f, "{value:e}")?;
    }
    f.flush()?;
    Ok(())
}

/// Legacy ASCII VTK of the discrete interface, one triangle per cell, with
/// the interface concentration as point data. Shared points are merged.
pub fn write_interface_vtk<T: Real>(
    path: &Path,
    field: &LevelSetField<'_, T>,
    dofs: &DofMaps,
    sol: &DiscreteSolution<T>,
) -> Result<()> {
    let mesh = field.mesh;
    let tris = interface_triangles(field);
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut cells = Vec::with_capacity(tris.len());
    for (t, tri) in &tris {
        let c = dofs.surface.tet_dofs(&mesh.tets[*t]).map(|l| sol.v[l]);
        let mut cell = [0usize; 3];
        for (k, p) in tri.points.iter().enumerate() {
            let key = p.map(|x| x.as_f64().to_bits());
            cell[k] = *index.entry(key).or_insert_with(|| {
                let b = tri.bary[k];
                points.push(p.map(|x| x.as_f64()));
                values.push((0..4).map(|j| b[j] * c[j]).sum::<T>().as_f64());
                points.len() - 1
            });
        }
        cells.push(cell);
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# vtk DataFile Version 3.0\ninterface solution\nASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(f, "POINTS {} double", points.len())?;
    for p in &points {
        writeln!(f, "{:e} {:e} {:e}", p[0], p[1], p[2])?;
    }
    writeln!(f, "CELLS {} {}", cells.len(), 4 * cells.len())?;
    for c in &cells {
        writeln!(f, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    writeln!(f, "CELL_TYPES {}", cells.len())?;
    for _ in &cells {
        writeln!(f, "5")?;
    }
    writeln!(f, "POINT_DATA {}\nSCALARS v double 1\nLOOKUP_TABLE default", points.len())?;
    for v in &values {
        writeln!(f, "{v:e}")?;
    }
    f.flush()?;
    Ok(())
}

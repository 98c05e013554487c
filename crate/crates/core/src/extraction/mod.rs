//! Mean surface extraction and mesh export.
//!
//! Marching cubes runs on raw grid node values, not the smoothing
//! interpolant: the extracted mesh is detached from the gradient computation,
//! so a cheap non-differentiable extraction is fine.

mod tables;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::ScalarGrid;
use crate::geometry::{TriangleMesh, Vec3};
use tables::{CORNER_PAIRS, TRIANGLE_TABLE};

/// Offset of each cube corner from the cell base node.
const CORNER_OFFSET: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Nudge for corner values exactly equal to iso; removes the classification
/// ambiguity of the constant initialization plateau.
const ISO_NUDGE: f64 = 1e-12;

/// Extracts the iso-levelset of `grid` as a triangle mesh with vertices on
/// grid edges and outward orientation (normals point toward increasing
/// values). Grids without crossings yield an empty mesh.
pub fn marching_cubes(grid: &ScalarGrid, iso: f64) -> TriangleMesh {
    let [nx, ny, nz] = grid.resolution();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    // Welding map: global grid edge (base node, axis) -> vertex id.
    let mut edge_vertex: HashMap<u64, u32> = HashMap::new();

    let value = |i: usize, j: usize, k: usize| -> f64 {
        let v = grid.values[grid.index(i, j, k)];
        if v == iso {
            v + ISO_NUDGE
        } else {
            v
        }
    };

    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let mut corner_vals = [0.0f64; 8];
                let mut case = 0usize;
                for (c, off) in CORNER_OFFSET.iter().enumerate() {
                    let v = value(i + off[0], j + off[1], k + off[2]);
                    corner_vals[c] = v;
                    if v < iso {
                        case |= 1 << c;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }

                let row = &TRIANGLE_TABLE[case];
                let mut t = 0;
                while row[t] >= 0 {
                    let mut ids = [0u32; 3];
                    for (slot, &e) in ids.iter_mut().zip(&row[t..t + 3]) {
                        *slot = edge_vertex_id(
                            grid,
                            (i, j, k),
                            e as usize,
                            &corner_vals,
                            iso,
                            &mut edge_vertex,
                            &mut vertices,
                        );
                    }
                    // The lookup table winds triangles toward decreasing
                    // values; flip so normals point toward increasing values.
                    faces.push([ids[0], ids[2], ids[1]]);
                    t += 3;
                }
            }
        }
    }

    TriangleMesh {
        material_ids: vec![0; faces.len()],
        vertices,
        faces,
    }
}

#[allow(clippy::too_many_arguments)]
fn edge_vertex_id(
    grid: &ScalarGrid,
    cell: (usize, usize, usize),
    edge: usize,
    corner_vals: &[f64; 8],
    iso: f64,
    edge_vertex: &mut HashMap<u64, u32>,
    vertices: &mut Vec<Vec3>,
) -> u32 {
    let [ca, cb] = CORNER_PAIRS[edge];
    let oa = CORNER_OFFSET[ca];
    let ob = CORNER_OFFSET[cb];
    let base = (
        cell.0 + oa[0].min(ob[0]),
        cell.1 + oa[1].min(ob[1]),
        cell.2 + oa[2].min(ob[2]),
    );
    let axis = (0..3).find(|&a| oa[a] != ob[a]).expect("edge spans one axis");
    let key = (grid.index(base.0, base.1, base.2) as u64) * 3 + axis as u64;

    if let Some(&id) = edge_vertex.get(&key) {
        return id;
    }
    let pa = grid.node_position(cell.0 + oa[0], cell.1 + oa[1], cell.2 + oa[2]);
    let pb = grid.node_position(cell.0 + ob[0], cell.1 + ob[1], cell.2 + ob[2]);
    let va = corner_vals[ca];
    let vb = corner_vals[cb];
    let t = (iso - va) / (vb - va);
    let p = pa + (pb - pa) * t;
    let id = vertices.len() as u32;
    vertices.push(p);
    edge_vertex.insert(key, id);
    id
}

/// Writes `v`/`f` records, faces 1-indexed.
pub fn export_obj(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let ctx = || format!("write {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z).map_err(|e| Error::io(ctx(), e))?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)
            .map_err(|e| Error::io(ctx(), e))?;
    }
    w.flush().map_err(|e| Error::io(ctx(), e))?;
    Ok(())
}

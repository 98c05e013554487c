//! Triangle meshes and OBJ input.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    /// One material id per face.
    pub material_ids: Vec<u32>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let mesh = TriangleMesh {
            material_ids: vec![0; faces.len()],
            vertices,
            faces,
        };
        mesh.check_indices()?;
        Ok(mesh)
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    fn check_indices(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        for (fi, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} references vertex out of range (have {n} vertices)"
                )));
            }
        }
        Ok(())
    }

    pub fn face_vertices(&self, face: u32) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face as usize];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn face_area(&self, face: u32) -> f64 {
        let [a, b, c] = self.face_vertices(face);
        (b - a).cross(c - a).norm() * 0.5
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::empty();
        for v in &self.vertices {
            b.grow(*v);
        }
        b
    }

    /// Drops faces with area below the degeneracy threshold, logging a warning
    /// per dropped face. Used on loaded geometry; extraction output is kept
    /// as-is so that closedness is preserved.
    pub fn drop_degenerate_faces(&mut self) {
        let vertices = &self.vertices;
        let mut kept_materials = Vec::with_capacity(self.faces.len());
        let mut dropped = 0usize;
        let materials = std::mem::take(&mut self.material_ids);
        let faces = std::mem::take(&mut self.faces);
        self.faces = faces
            .into_iter()
            .zip(materials)
            .filter_map(|(f, m)| {
                let [a, b, c] = [
                    vertices[f[0] as usize],
                    vertices[f[1] as usize],
                    vertices[f[2] as usize],
                ];
                let area = (b - a).cross(c - a).norm() * 0.5;
                if area > DEGENERATE_AREA {
                    kept_materials.push(m);
                    Some(f)
                } else {
                    dropped += 1;
                    None
                }
            })
            .collect();
        self.material_ids = kept_materials;
        if dropped > 0 {
            log::warn!("dropped {dropped} degenerate faces (area <= {DEGENERATE_AREA})");
        }
    }

    /// Signed volume via the divergence theorem; positive for closed meshes
    /// whose winding points outward.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let a = self.vertices[f[0] as usize];
                let b = self.vertices[f[1] as usize];
                let c = self.vertices[f[2] as usize];
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    /// True when every edge is shared by exactly two faces.
    pub fn is_closed(&self) -> bool {
        use std::collections::HashMap;
        let mut edges: HashMap<(u32, u32), i32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let a = f[k];
                let b = f[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                *edges.entry(key).or_insert(0) += 1;
            }
        }
        !self.faces.is_empty() && edges.values().all(|&c| c == 2)
    }
}

/// Loads an OBJ file containing `v` and triangular `f` records. Positions are
/// taken as scene units; texture/normal indices in face records are ignored.
pub fn load_obj(path: &Path) -> Result<TriangleMesh> {
    let file = File::open(path).map_err(|e| Error::io(format!("open {}", path.display()), e))?;
    let reader = BufReader::new(file);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("read {}", path.display()), e))?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut coord = |name: &str| -> Result<f64> {
                    it.next()
                        .ok_or_else(|| bad(path, lineno, &format!("missing {name} coordinate")))?
                        .parse::<f64>()
                        .map_err(|_| bad(path, lineno, &format!("bad {name} coordinate")))
                };
                let x = coord("x")?;
                let y = coord("y")?;
                let z = coord("z")?;
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let idx: Vec<&str> = it.collect();
                if idx.len() != 3 {
                    return Err(bad(
                        path,
                        lineno,
                        &format!("only triangular faces supported, found {} vertices", idx.len()),
                    ));
                }
                let mut face = [0u32; 3];
                for (k, tok) in idx.iter().enumerate() {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|_| bad(path, lineno, "bad face index"))?;
                    // OBJ indices are 1-based; negative indices count from the end.
                    let resolved = if i > 0 {
                        i - 1
                    } else {
                        vertices.len() as i64 + i
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(bad(path, lineno, "face index out of range"));
                    }
                    face[k] = resolved as u32;
                }
                faces.push(face);
            }
            _ => {}
        }
    }

    let mut mesh = TriangleMesh::new(vertices, faces)?;
    mesh.drop_degenerate_faces();
    Ok(mesh)
}

fn bad(path: &Path, lineno: usize, reason: &str) -> Error {
    Error::BadFormat {
        path: path.to_path_buf(),
        reason: format!("line {}: {reason}", lineno + 1),
    }
}

/// Geodesic sphere built by subdividing an icosahedron; 20 * 4^level faces.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> TriangleMesh {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalized())
    .collect();

    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    use std::collections::HashMap;
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0u32; 3];
            for k in 0..3 {
                let a = f[k];
                let b = f[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let p = (vertices[a as usize] + vertices[b as usize]).normalized();
                    vertices.push(p);
                    (vertices.len() - 1) as u32
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([f[1], mid[1], mid[0]]);
            next.push([f[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        faces = next;
    }

    for v in &mut vertices {
        *v = center + *v * radius;
    }
    TriangleMesh {
        material_ids: vec![0; faces.len()],
        vertices,
        faces,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_face_count_and_closedness() {
        let m = icosphere(Vec3::ZERO, 1.0, 2);
        assert_eq!(m.faces.len(), 320);
        assert!(m.is_closed());
        // Outward winding: positive volume approaching the ball volume.
        let v = m.signed_volume();
        assert!(v > 0.0 && v < 4.0 / 3.0 * std::f64::consts::PI);
    }

    #[test]
    fn degenerate_faces_are_dropped() {
        let mut m = TriangleMesh::new(
            vec![
                Vec3::ZERO,
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(2.0, 0.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 1, 3]], // second face is collinear
        )
        .unwrap();
        m.drop_degenerate_faces();
        assert_eq!(m.faces.len(), 1);
        assert_eq!(m.material_ids.len(), 1);
    }

    #[test]
    fn out_of_range_index_rejected() {
        let r = TriangleMesh::new(vec![Vec3::ZERO], vec![[0, 0, 7]]);
        assert!(r.is_err());
    }
}

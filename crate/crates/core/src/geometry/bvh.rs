//! Bounding volume hierarchy over one triangle mesh.
//!
//! Built once with median splits on the longest centroid axis; immutable
//! afterwards, so concurrent queries are safe.

use crate::geometry::{Aabb, Intersection, Ray, TriangleMesh, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: (first, count) into `tris`. Inner: left child is `first`,
    /// right child is `first + 1`, count is 0.
    first: u32,
    count: u32,
}

#[derive(Debug, Clone, Copy)]
struct Triangle {
    p0: Vec3,
    e1: Vec3,
    e2: Vec3,
    face_id: u32,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    tris: Vec<Triangle>,
    bounds: Aabb,
}

impl Bvh {
    /// Builds an accelerator answering queries equivalently to a brute-force
    /// loop over faces. An empty mesh yields a handle that never reports hits.
    pub fn build(mesh: &TriangleMesh) -> Bvh {
        let mut tris: Vec<Triangle> = mesh
            .faces
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let a = mesh.vertices[f[0] as usize];
                let b = mesh.vertices[f[1] as usize];
                let c = mesh.vertices[f[2] as usize];
                Triangle {
                    p0: a,
                    e1: b - a,
                    e2: c - a,
                    face_id: i as u32,
                }
            })
            .collect();

        if tris.is_empty() {
            return Bvh {
                nodes: Vec::new(),
                tris,
                bounds: Aabb::empty(),
            };
        }

        let mut nodes = Vec::with_capacity(2 * tris.len());
        nodes.push(Node {
            bounds: Aabb::empty(),
            first: 0,
            count: tris.len() as u32,
        });
        build_recursive(&mut nodes, &mut tris, 0);
        let bounds = nodes[0].bounds;
        Bvh { nodes, tris, bounds }
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    /// Nearest hit with t in `(ray.t_min, ray.t_max]`, or `None`.
    /// The returned `mesh_id` is zero; callers owning several meshes rewrite it.
    pub fn intersect(&self, ray: &Ray) -> Option<Intersection> {
        let mut best: Option<(f64, u32, Vec3)> = None;
        self.traverse(ray, |tri, t| {
            if best.map_or(true, |(bt, _, _)| t < bt) {
                best = Some((t, tri.face_id, tri.e1.cross(tri.e2)));
                Some(t)
            } else {
                None
            }
        });
        best.map(|(t, face_id, n)| Intersection {
            t,
            position: ray.at(t),
            geometric_normal: n.normalized(),
            mesh_id: 0,
            face_id,
        })
    }

    /// Number of intersections with t in `(ray.t_min, ray.t_max]`; used for
    /// parity-based inside tests.
    pub fn count_hits(&self, ray: &Ray) -> usize {
        let mut n = 0;
        self.traverse(ray, |_, _| {
            n += 1;
            None
        });
        n
    }

    /// Visits every triangle hit in `(t_min, current_t_max]`. The callback may
    /// return a new `t_max` to shrink the query window.
    fn traverse<F: FnMut(&Triangle, f64) -> Option<f64>>(&self, ray: &Ray, mut visit: F) {
        if self.nodes.is_empty() {
            return;
        }
        let mut t_max = ray.t_max;
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        stack[sp] = 0;
        sp += 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            match node.bounds.intersect_interval(ray) {
                Some((t0, t1)) if t1 >= ray.t_min && t0 <= t_max => {}
                _ => continue,
            }
            if node.count > 0 {
                for tri in &self.tris[node.first as usize..(node.first + node.count) as usize] {
                    if let Some(t) = intersect_triangle(ray, tri, t_max) {
                        if let Some(new_max) = visit(tri, t) {
                            t_max = new_max;
                        }
                    }
                }
            } else {
                // Near child last so it is popped first.
                let l = node.first;
                let r = node.first + 1;
                let dl = node_entry(&self.nodes[l as usize], ray);
                let dr = node_entry(&self.nodes[r as usize], ray);
                if dl <= dr {
                    stack[sp] = r;
                    stack[sp + 1] = l;
                } else {
                    stack[sp] = l;
                    stack[sp + 1] = r;
                }
                sp += 2;
            }
        }
    }
}

fn node_entry(node: &Node, ray: &Ray) -> f64 {
    node.bounds
        .intersect_interval(ray)
        .map(|(t0, _)| t0)
        .unwrap_or(f64::INFINITY)
}

fn build_recursive(nodes: &mut Vec<Node>, tris: &mut [Triangle], node_index: usize) {
    let (first, count) = {
        let n = &nodes[node_index];
        (n.first as usize, n.count as usize)
    };
    let mut bounds = Aabb::empty();
    let mut centroid_bounds = Aabb::empty();
    for tri in &tris[first..first + count] {
        bounds.grow(tri.p0);
        bounds.grow(tri.p0 + tri.e1);
        bounds.grow(tri.p0 + tri.e2);
        centroid_bounds.grow(centroid(tri));
    }
    nodes[node_index].bounds = bounds;
    if count <= LEAF_SIZE {
        return;
    }

    let axis = centroid_bounds.extent().largest_axis();
    // Stable, fully deterministic split: order by (centroid, face id).
    let slice = &mut tris[first..first + count];
    slice.sort_by(|a, b| {
        centroid(a)[axis]
            .partial_cmp(&centroid(b)[axis])
            .unwrap()
            .then(a.face_id.cmp(&b.face_id))
    });
    let mid = count / 2;

    let left = nodes.len() as u32;
    nodes.push(Node {
        bounds: Aabb::empty(),
        first: first as u32,
        count: mid as u32,
    });
    nodes.push(Node {
        bounds: Aabb::empty(),
        first: (first + mid) as u32,
        count: (count - mid) as u32,
    });
    nodes[node_index].first = left;
    nodes[node_index].count = 0;
    build_recursive(nodes, tris, left as usize);
    build_recursive(nodes, tris, left as usize + 1);
}

fn centroid(tri: &Triangle) -> Vec3 {
    tri.p0 + (tri.e1 + tri.e2) * (1.0 / 3.0)
}

/// Moller-Trumbore, two-sided. Hits with t in `(t_min, t_max]`.
fn intersect_triangle(ray: &Ray, tri: &Triangle, t_max: f64) -> Option<f64> {
    let pvec = ray.dir.cross(tri.e2);
    let det = tri.e1.dot(pvec);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = ray.origin - tri.p0;
    let u = tvec.dot(pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(tri.e1);
    let v = ray.dir.dot(qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = tri.e2.dot(qvec) * inv_det;
    if t > ray.t_min && t <= t_max {
        Some(t)
    } else {
        None
    }
}

/// Brute-force reference: nearest hit by looping over every face.
pub fn intersect_brute_force(mesh: &TriangleMesh, ray: &Ray) -> Option<Intersection> {
    let mut best: Option<Intersection> = None;
    for (i, f) in mesh.faces.iter().enumerate() {
        let a = mesh.vertices[f[0] as usize];
        let b = mesh.vertices[f[1] as usize];
        let c = mesh.vertices[f[2] as usize];
        let tri = Triangle {
            p0: a,
            e1: b - a,
            e2: c - a,
            face_id: i as u32,
        };
        let t_max = best.map(|h| h.t).unwrap_or(ray.t_max);
        if let Some(t) = intersect_triangle(ray, &tri, t_max) {
            best = Some(Intersection {
                t,
                position: ray.at(t),
                geometric_normal: tri.e1.cross(tri.e2).normalized(),
                mesh_id: 0,
                face_id: i as u32,
            });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::icosphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z_plane_triangle() -> TriangleMesh {
        TriangleMesh::new(
            vec![
                Vec3::new(-1.0, -1.0, 0.0),
                Vec3::new(1.0, -1.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn empty_mesh_never_hits() {
        let bvh = Bvh::build(&TriangleMesh::default());
        let ray = Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0));
        assert!(bvh.intersect(&ray).is_none());
        assert_eq!(bvh.count_hits(&ray), 0);
    }

    #[test]
    fn axis_aligned_triangle_hit() {
        let bvh = Bvh::build(&z_plane_triangle());
        let hit = bvh
            .intersect(&Ray::new(Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, 1.0)))
            .unwrap();
        assert!((hit.t - 1.0).abs() < 1e-12);
        assert!((hit.position - Vec3::ZERO).norm() < 1e-12);
    }

    #[test]
    fn facing_away_misses() {
        let bvh = Bvh::build(&z_plane_triangle());
        let hit = bvh.intersect(&Ray::new(
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ));
        assert!(hit.is_none());
    }

    fn random_ray(rng: &mut ChaCha8Rng) -> Ray {
        let origin = Vec3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let dir = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        match dir.try_normalized(1e-6) {
            Some(d) => Ray::new(origin, d),
            None => Ray::new(origin, Vec3::new(0.0, 0.0, 1.0)),
        }
    }

    fn agree_with_brute_force(mesh: &TriangleMesh, rays: usize, seed: u64) {
        let bvh = Bvh::build(mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..rays {
            let ray = random_ray(&mut rng);
            let a = bvh.intersect(&ray);
            let b = intersect_brute_force(mesh, &ray);
            match (a, b) {
                (None, None) => {}
                (Some(x), Some(y)) => {
                    assert!((x.t - y.t).abs() < 1e-6, "t mismatch: {} vs {}", x.t, y.t);
                    assert_eq!(x.face_id, y.face_id);
                }
                (x, y) => panic!("hit disagreement: {x:?} vs {y:?}"),
            }
        }
    }

    #[test]
    fn single_triangle_matches_brute_force() {
        agree_with_brute_force(&z_plane_triangle(), 1000, 7);
    }

    #[test]
    fn icosphere_matches_brute_force() {
        let mesh = icosphere(Vec3::new(0.2, -0.1, 0.3), 0.9, 2);
        assert_eq!(mesh.faces.len(), 320);
        agree_with_brute_force(&mesh, 1000, 11);
    }

    #[test]
    fn sphere_hit_distance_matches_analytic() {
        // Ray through the center of a radius-r sphere from distance d hits at
        // d - r, up to one facet sagitta.
        let r = 0.8;
        let mesh = icosphere(Vec3::ZERO, r, 3);
        let bvh = Bvh::build(&mesh);
        let origin = Vec3::new(0.0, 0.0, -3.0);
        let hit = bvh
            .intersect(&Ray::new(origin, Vec3::new(0.0, 0.0, 1.0)))
            .unwrap();
        // Sagitta of a level-3 icosphere facet is tiny relative to r.
        let sagitta = r * (1.0 - (std::f64::consts::PI / 24.0).cos());
        assert!((hit.t - (3.0 - r)).abs() < sagitta.max(1e-3));
    }

    #[test]
    fn interior_ray_always_hits_closed_mesh() {
        let mesh = icosphere(Vec3::ZERO, 1.0, 2);
        let bvh = Bvh::build(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let dir = loop {
                let d = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                if let Some(u) = d.try_normalized(1e-3) {
                    break u;
                }
            };
            assert!(bvh.intersect(&Ray::new(Vec3::ZERO, dir)).is_some());
        }
    }

    #[test]
    fn intersection_position_consistency() {
        let mesh = icosphere(Vec3::ZERO, 1.0, 2);
        let bvh = Bvh::build(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let ray = random_ray(&mut rng);
            if let Some(h) = bvh.intersect(&ray) {
                assert!((h.position - ray.at(h.t)).norm() < 1e-5);
                assert!(h.t > ray.t_min && h.t <= ray.t_max);
            }
        }
    }
}

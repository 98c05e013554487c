//! Geometric substrate: vectors, rays, triangle meshes and ray intersection.

mod bvh;
pub mod mesh;
mod vec3;

pub use bvh::{intersect_brute_force, Bvh};
pub use mesh::{icosphere, load_obj, TriangleMesh};
pub use vec3::Vec3;

use serde::{Deserialize, Serialize};

/// A parametric ray segment. Hits are reported for t in `(t_min, t_max]`.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3) -> Self {
        Ray {
            origin,
            dir,
            t_min: 0.0,
            t_max: f64::INFINITY,
        }
    }

    pub fn with_range(origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Self {
        debug_assert!(t_min < t_max);
        Ray {
            origin,
            dir,
            t_min,
            t_max,
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

/// Record of the nearest ray/mesh intersection.
#[derive(Debug, Clone, Copy)]
pub struct Intersection {
    pub t: f64,
    pub position: Vec3,
    /// Unit normal defined by the face winding (not flipped toward the ray).
    pub geometric_normal: Vec3,
    pub mesh_id: u32,
    pub face_id: u32,
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// Empty box, absorbing under `union`.
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::splat(f64::INFINITY),
            max: Vec3::splat(f64::NEG_INFINITY),
        }
    }

    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn is_valid(&self) -> bool {
        self.min.x <= self.max.x && self.min.y <= self.max.y && self.min.z <= self.max.z
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.componentwise_min(other.min),
            max: self.max.componentwise_max(other.max),
        }
    }

    pub fn grow(&mut self, p: Vec3) {
        self.min = self.min.componentwise_min(p);
        self.max = self.max.componentwise_max(p);
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn centroid(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Entry/exit interval of a ray against the box, ignoring the ray's own
    /// t-range. Returns `None` when the ray line misses the box.
    pub fn intersect_interval(&self, ray: &Ray) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for axis in 0..3 {
            let o = ray.origin[axis];
            let d = ray.dir[axis];
            let lo = self.min[axis];
            let hi = self.max[axis];
            if d.abs() < 1e-300 {
                // Parallel to the slab: reject unless the origin lies inside it.
                if o < lo || o > hi {
                    return None;
                }
            } else {
                let inv = 1.0 / d;
                let (near, far) = if inv >= 0.0 {
                    ((lo - o) * inv, (hi - o) * inv)
                } else {
                    ((hi - o) * inv, (lo - o) * inv)
                };
                t0 = t0.max(near);
                t1 = t1.min(far);
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }
}

/// Parametric distance at which `ray` exits `bounds`, or 0 when the forward
/// ray never enters the box.
pub fn aabb_exit_distance(ray: &Ray, bounds: &Aabb) -> f64 {
    match bounds.intersect_interval(ray) {
        Some((t_enter, t_exit)) if t_exit > t_enter.max(0.0) && t_exit > 0.0 => t_exit,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> Aabb {
        Aabb::new(Vec3::splat(-0.5), Vec3::splat(0.5))
    }

    #[test]
    fn exit_from_center_is_half_width() {
        let ray = Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(aabb_exit_distance(&ray, &unit_cube()), 0.5);
    }

    #[test]
    fn miss_gives_zero() {
        let ray = Ray::new(Vec3::new(-2.0, 5.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(aabb_exit_distance(&ray, &unit_cube()), 0.0);
    }

    #[test]
    fn entry_before_box_reports_far_exit() {
        // Slab-method hand computation: x spans hit at t = 1.5 and t = 2.5.
        let ray = Ray::new(Vec3::new(-2.0, 0.1, 0.2), Vec3::new(1.0, 0.0, 0.0));
        assert!((aabb_exit_distance(&ray, &unit_cube()) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn parallel_outside_slab_gives_zero() {
        let ray = Ray::new(Vec3::new(-2.0, 0.7, 0.0), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(aabb_exit_distance(&ray, &unit_cube()), 0.0);
    }

    #[test]
    fn box_behind_ray_gives_zero() {
        let ray = Ray::new(Vec3::new(2.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(aabb_exit_distance(&ray, &unit_cube()), 0.0);
    }
}

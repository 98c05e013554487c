//! Scene assembly: static geometry, the extracted mean surface, fields,
//! emitters and cameras.

use crate::error::Result;
use crate::extraction::marching_cubes;
use crate::fields::{AlbedoGrid, OccupancyField};
use crate::geometry::{Aabb, Bvh, Intersection, Ray, TriangleMesh, Vec3};
use crate::transport::{Bsdf, Camera, Emitter, Rgb};

/// Mesh id reserved for the mean surface so the adjoint can identify
/// occupancy-driven interactions.
pub const MEAN_SURFACE_MESH_ID: u32 = u32::MAX;

/// Default factor of the scene diagonal used as the secondary-ray offset.
pub const RAY_EPSILON_FACTOR: f64 = 1e-4;

#[derive(Debug)]
pub struct MeshInstance {
    pub mesh: TriangleMesh,
    pub bvh: Bvh,
    pub bsdf: Bsdf,
    pub emission: Rgb,
}

impl MeshInstance {
    pub fn new(mesh: TriangleMesh, bsdf: Bsdf, emission: Rgb) -> Self {
        let bvh = Bvh::build(&mesh);
        MeshInstance {
            mesh,
            bvh,
            bsdf,
            emission,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SceneHit {
    pub isect: Intersection,
    pub on_mean_surface: bool,
}

#[derive(Debug)]
pub struct Scene {
    pub statics: Vec<MeshInstance>,
    mean_surface: Option<MeshInstance>,
    /// Field generation the current mean surface was extracted from.
    pub mean_surface_generation: u64,
    pub field: OccupancyField,
    pub albedo_grid: Option<AlbedoGrid>,
    /// BSDF of hypothetical surfaces; the mean surface uses the same model
    /// with the mesh geometric normal.
    pub mw_bsdf: Bsdf,
    pub emitters: Vec<Emitter>,
    pub cameras: Vec<Camera>,
    /// t_min offset for secondary rays (shadow-acne control).
    pub ray_epsilon: f64,
}

impl Scene {
    /// Assembles a scene. Emissive rectangles are turned into two-triangle
    /// instances so that BSDF sampling can hit them.
    pub fn new(
        mut statics: Vec<MeshInstance>,
        field: OccupancyField,
        albedo_grid: Option<AlbedoGrid>,
        mw_bsdf: Bsdf,
        emitters: Vec<Emitter>,
        cameras: Vec<Camera>,
    ) -> Result<Self> {
        for e in &emitters {
            if let Emitter::Rect {
                corner,
                edge_u,
                edge_v,
                radiance,
            } = e
            {
                let quad = TriangleMesh::new(
                    vec![
                        *corner,
                        *corner + *edge_u,
                        *corner + *edge_u + *edge_v,
                        *corner + *edge_v,
                    ],
                    vec![[0, 1, 2], [0, 2, 3]],
                )?;
                statics.push(MeshInstance::new(quad, Bsdf::diffuse(Rgb::BLACK), *radiance));
            }
        }

        let mut scene_bounds = field.bounds();
        for inst in &statics {
            if !inst.mesh.is_empty() {
                scene_bounds = scene_bounds.union(&inst.mesh.bounds());
            }
        }
        let ray_epsilon = RAY_EPSILON_FACTOR * scene_bounds.diagonal();

        Ok(Scene {
            statics,
            mean_surface: None,
            mean_surface_generation: 0,
            field,
            albedo_grid,
            mw_bsdf,
            emitters,
            cameras,
            ray_epsilon,
        })
    }

    pub fn mean_surface(&self) -> Option<&MeshInstance> {
        self.mean_surface.as_ref()
    }

    /// Installs a mean surface extracted elsewhere; tags it with the current
    /// field generation.
    pub fn set_mean_surface(&mut self, mesh: TriangleMesh) {
        self.mean_surface = if mesh.is_empty() {
            None
        } else {
            Some(MeshInstance::new(mesh, self.mw_bsdf.clone(), Rgb::BLACK))
        };
        self.mean_surface_generation = self.field.generation;
    }

    /// Re-extracts the zero levelset of mu and installs it.
    pub fn refresh_mean_surface(&mut self) {
        let mesh = marching_cubes(&self.field.mu, 0.0);
        self.set_mean_surface(mesh);
    }

    pub fn mean_surface_is_current(&self) -> bool {
        self.mean_surface_generation == self.field.generation
    }

    pub fn field_bounds(&self) -> Aabb {
        self.field.bounds()
    }

    /// Nearest hit over static geometry and the mean surface; t in
    /// `(ray.t_min, ray.t_max]`.
    pub fn intersect(&self, ray: &Ray) -> Option<SceneHit> {
        let mut best: Option<SceneHit> = None;
        let mut ray = *ray;
        for (i, inst) in self.statics.iter().enumerate() {
            if let Some(mut isect) = inst.bvh.intersect(&ray) {
                isect.mesh_id = i as u32;
                ray.t_max = isect.t;
                best = Some(SceneHit {
                    isect,
                    on_mean_surface: false,
                });
            }
        }
        if let Some(inst) = &self.mean_surface {
            if let Some(mut isect) = inst.bvh.intersect(&ray) {
                isect.mesh_id = MEAN_SURFACE_MESH_ID;
                best = Some(SceneHit {
                    isect,
                    on_mean_surface: true,
                });
            }
        }
        best
    }

    pub fn bsdf_of(&self, hit: &SceneHit) -> &Bsdf {
        if hit.on_mean_surface {
            &self.mw_bsdf
        } else {
            &self.statics[hit.isect.mesh_id as usize].bsdf
        }
    }

    pub fn emission_of(&self, hit: &SceneHit) -> Rgb {
        if hit.on_mean_surface {
            Rgb::BLACK
        } else {
            self.statics[hit.isect.mesh_id as usize].emission
        }
    }

    pub fn eval_env(&self, dir: Vec3) -> Rgb {
        super::eval_env(&self.emitters, dir)
    }

    /// Secondary ray with the self-intersection offset applied.
    pub fn secondary_ray(&self, origin: Vec3, dir: Vec3) -> Ray {
        Ray::with_range(origin, dir, self.ray_epsilon, f64::INFINITY)
    }

    /// Largest emitter radiance channel; bounds every path sample in scenes
    /// whose materials have albedo <= 1.
    pub fn max_emitter_radiance(&self) -> f64 {
        let env = self
            .emitters
            .iter()
            .map(|e| e.radiance().max_channel())
            .fold(0.0, f64::max);
        let surf = self
            .statics
            .iter()
            .map(|m| m.emission.max_channel())
            .fold(0.0, f64::max);
        env.max(surf)
    }
}

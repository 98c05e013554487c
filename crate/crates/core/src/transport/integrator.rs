//! Recursive path estimator.
//!
//! One uniformly chosen path segment blends the usual surface radiance with
//! the radiance of a hypothetical surface sampled along that segment:
//!
//! ```text
//! value = lerp(L_bg, L_fg, occ(x'))      x' uniform on the segment
//! ```
//!
//! The uniform pdf over the segment cancels the 1/s normalization of the
//! blended line integral, so no extra 1/t factor appears. There is no
//! transmittance anywhere: hypothetical surfaces never shadow each other, and
//! at most one segment per path evaluates the blend.

use rayon::prelude::*;

use crate::fields::{Facing, OccupancyField};
use crate::geometry::{aabb_exit_distance, Ray, Vec3};
use crate::transport::sampler::PixelStreams;
use crate::transport::{sample_bsdf, Camera, Image, PathConfig, Rgb, Scene};
use crate::error::Result;
use rand::Rng;

/// Occupancy/orientation source for the blended segment. The production
/// model is the occupancy field; tests may substitute analytic models.
pub trait WorldModel: Sync {
    fn interaction(&self, x: Vec3, d: Vec3) -> MwInteraction;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MwInteraction {
    /// Facing the ray origin: blend with this occupancy and shade about this
    /// normal.
    Front { occ: f64, normal: Vec3 },
    /// No orientation defined (constant-field initialization).
    Degenerate,
    /// Back-facing or outside the field bounds: masked, occupancy zero.
    Masked,
}

impl MwInteraction {
    pub fn occupancy(&self) -> f64 {
        match self {
            MwInteraction::Front { occ, .. } => *occ,
            _ => 0.0,
        }
    }
}

impl WorldModel for OccupancyField {
    fn interaction(&self, x: Vec3, d: Vec3) -> MwInteraction {
        // The field is zero outside its bounds; lookups would clamp, so mask
        // explicitly.
        if !self.bounds().contains(x) {
            return MwInteraction::Masked;
        }
        match self.facing_at(x, d) {
            Facing::Front { alpha, normal } => MwInteraction::Front { occ: alpha, normal },
            Facing::Degenerate => MwInteraction::Degenerate,
            Facing::Back => MwInteraction::Masked,
        }
    }
}

/// Per-sample instrumentation.
#[derive(Debug, Clone, Copy, Default)]
pub struct PathStats {
    /// Segments that evaluated the occupancy blend; must be <= 1 per path.
    pub blend_segments: u32,
}

/// Aggregated render instrumentation.
#[derive(Debug, Clone, Copy, Default)]
pub struct RenderStats {
    pub samples: u64,
    /// Non-finite sample values rejected and not accumulated.
    pub rejected_non_finite: u64,
    /// Paths that blended on more than one segment (must stay zero).
    pub multi_blend_violations: u64,
    /// Largest channel value seen across all accepted samples.
    pub max_sample_channel: f64,
}

impl RenderStats {
    fn merge(&mut self, o: &RenderStats) {
        self.samples += o.samples;
        self.rejected_non_finite += o.rejected_non_finite;
        self.multi_blend_violations += o.multi_blend_violations;
        self.max_sample_channel = self.max_sample_channel.max(o.max_sample_channel);
    }
}

/// One primal sample: picks the blended segment uniformly, then delegates.
pub fn li(
    scene: &Scene,
    world: &dyn WorldModel,
    ray: Ray,
    streams: &mut PixelStreams,
    cfg: &PathConfig,
    stats: &mut PathStats,
) -> Rgb {
    let k_mw = (cfg.k_max as f64 * streams.mw.gen::<f64>()) as u32;
    li_k(scene, Some(world), ray, k_mw, 0, streams, cfg, stats)
}

/// Surface-only sample sharing the exact code path (and path-stream draws)
/// of `li`, with the blend disabled.
pub fn li_surface(
    scene: &Scene,
    ray: Ray,
    streams: &mut PixelStreams,
    cfg: &PathConfig,
    stats: &mut PathStats,
) -> Rgb {
    li_k(scene, None, ray, u32::MAX, 0, streams, cfg, stats)
}

/// Radiance of segment `k`; `k_mw` is the blended segment. The background
/// branch intersects the mean scene; on a miss the segment ends at the field
/// bounds exit and the background is the environment.
#[allow(clippy::too_many_arguments)]
pub fn li_k(
    scene: &Scene,
    world: Option<&dyn WorldModel>,
    ray: Ray,
    k_mw: u32,
    k: u32,
    streams: &mut PixelStreams,
    cfg: &PathConfig,
    stats: &mut PathStats,
) -> Rgb {
    if k > cfg.k_max {
        return Rgb::BLACK;
    }

    let hit = scene.intersect(&ray);
    let (t_end, l_bg) = match &hit {
        Some(h) => {
            let emitted = scene.emission_of(h);
            let wo = -ray.dir;
            let bsdf = scene.bsdf_of(h);
            let sample = sample_bsdf(
                bsdf,
                scene.albedo_grid.as_ref(),
                h.isect.geometric_normal,
                wo,
                h.isect.position,
                &mut streams.path,
            );
            let cont = if sample.weight.is_black() {
                Rgb::BLACK
            } else {
                let next = scene.secondary_ray(h.isect.position, sample.wi);
                li_k(scene, world, next, k_mw, k + 1, streams, cfg, stats) * sample.weight
            };
            (h.isect.t, emitted + cont)
        }
        None => (
            aabb_exit_distance(&ray, &scene.field_bounds()),
            scene.eval_env(ray.dir),
        ),
    };

    let world = match world {
        Some(w) if k == k_mw => w,
        _ => return l_bg,
    };
    if t_end <= ray.t_min.max(0.0) {
        // Zero-length segment: nothing to sample.
        return l_bg;
    }

    stats.blend_segments += 1;
    let n = cfg.mw_samples;
    let mut acc = Rgb::BLACK;
    for j in 0..n {
        let u = (j as f64 + streams.mw.gen::<f64>()) / n as f64;
        let x = ray.at(u * t_end);
        let value = match world.interaction(x, ray.dir) {
            MwInteraction::Front { occ, normal } if occ > 0.0 => {
                let wo = -ray.dir;
                let sample = sample_bsdf(
                    &scene.mw_bsdf,
                    scene.albedo_grid.as_ref(),
                    normal,
                    wo,
                    x,
                    &mut streams.mw,
                );
                let l_fg = if sample.weight.is_black() {
                    Rgb::BLACK
                } else {
                    let next = scene.secondary_ray(x, sample.wi);
                    li_k(scene, Some(world), next, k_mw, k + 1, streams, cfg, stats)
                        * sample.weight
                };
                Rgb::lerp(l_bg, l_fg, occ)
            }
            _ => l_bg,
        };
        acc += value;
    }
    acc / n as f64
}

fn render_with(
    scene: &Scene,
    world: Option<&dyn WorldModel>,
    camera: &Camera,
    cfg: &PathConfig,
) -> Result<(Image, RenderStats)> {
    cfg.validate()?;
    camera.validate()?;
    let width = camera.width;
    let height = camera.height;
    let results: Vec<(Rgb, RenderStats)> = (0..(width * height) as u64)
        .into_par_iter()
        .map(|pixel| {
            let px = (pixel % width as u64) as u32;
            let py = (pixel / width as u64) as u32;
            let mut local = RenderStats::default();
            let mut acc = Rgb::BLACK;
            let mut accepted = 0u32;
            for sample in 0..cfg.spp as u64 {
                let mut streams = PixelStreams::new(cfg.seed, pixel, sample);
                let ray = camera.generate_ray(px, py, cfg.jitter, &mut streams.path);
                let mut path_stats = PathStats::default();
                let value = match world {
                    Some(w) => li(scene, w, ray, &mut streams, cfg, &mut path_stats),
                    None => li_surface(scene, ray, &mut streams, cfg, &mut path_stats),
                };
                local.samples += 1;
                if path_stats.blend_segments > 1 {
                    local.multi_blend_violations += 1;
                }
                if value.is_finite() {
                    acc += value;
                    accepted += 1;
                    local.max_sample_channel = local.max_sample_channel.max(value.max_channel());
                } else {
                    local.rejected_non_finite += 1;
                }
            }
            let value = if accepted > 0 {
                acc / accepted as f64
            } else {
                Rgb::BLACK
            };
            (value, local)
        })
        .collect();

    let mut img = Image::new(width, height);
    let mut stats = RenderStats::default();
    for (i, (value, local)) in results.iter().enumerate() {
        img.pixels_mut()[i] = *value;
        stats.merge(local);
    }
    if stats.rejected_non_finite > 0 {
        log::warn!(
            "rejected {} non-finite samples out of {}",
            stats.rejected_non_finite,
            stats.samples
        );
    }
    Ok((img, stats))
}

/// Per-pixel average of spp independent estimates against the occupancy
/// field. The mean surface installed in the scene must match the field.
pub fn render_primal(scene: &Scene, camera: &Camera, cfg: &PathConfig) -> Result<(Image, RenderStats)> {
    render_with(scene, Some(&scene.field), camera, cfg)
}

/// Primal render against a caller-provided occupancy model.
pub fn render_primal_with(
    scene: &Scene,
    world: &dyn WorldModel,
    camera: &Camera,
    cfg: &PathConfig,
) -> Result<(Image, RenderStats)> {
    render_with(scene, Some(world), camera, cfg)
}

/// Surface-only render (no occupancy machinery); used for reference images.
pub fn render_reference(
    scene: &Scene,
    camera: &Camera,
    cfg: &PathConfig,
) -> Result<(Image, RenderStats)> {
    render_with(scene, None, camera, cfg)
}

//! Surface scattering models.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fields::AlbedoGrid;
use crate::geometry::Vec3;
use crate::transport::Rgb;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", untagged)]
pub enum AlbedoRef {
    /// Constant reflectance in [0,1] per channel.
    Constant(Rgb),
    /// Looked up in the scene's albedo grid at the shading point.
    Grid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Bsdf {
    Diffuse { albedo: AlbedoRef },
    Mirror,
}

impl Bsdf {
    pub fn diffuse(albedo: Rgb) -> Bsdf {
        Bsdf::Diffuse {
            albedo: AlbedoRef::Constant(albedo),
        }
    }

    pub fn diffuse_grid() -> Bsdf {
        Bsdf::Diffuse {
            albedo: AlbedoRef::Grid("grid".into()),
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Bsdf::Diffuse {
                albedo: AlbedoRef::Constant(a),
            } => [a.r, a.g, a.b].iter().all(|c| (0.0..=1.0).contains(c)),
            _ => true,
        }
    }

    /// Reflectance at a shading point; grid-backed albedos fall back to black
    /// when the scene carries no grid.
    pub fn albedo_at(&self, albedo_grid: Option<&AlbedoGrid>, x: Vec3) -> Rgb {
        match self {
            Bsdf::Diffuse {
                albedo: AlbedoRef::Constant(a),
            } => *a,
            Bsdf::Diffuse {
                albedo: AlbedoRef::Grid(_),
            } => albedo_grid
                .map(|g| Rgb::from_array(g.albedo_at(x)))
                .unwrap_or(Rgb::BLACK),
            Bsdf::Mirror => Rgb::WHITE,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BsdfSample {
    pub wi: Vec3,
    /// Path weight: albedo for the cosine-sampled diffuse lobe (the cosine
    /// and pdf cancel), one for the mirror. Zero kills the path.
    pub weight: Rgb,
}

impl BsdfSample {
    fn invalid() -> Self {
        BsdfSample {
            wi: Vec3::new(0.0, 0.0, 1.0),
            weight: Rgb::BLACK,
        }
    }
}

/// Samples an incident direction for outgoing direction `wo` (pointing away
/// from the surface) about shading normal `n`. `wo` below the hemisphere of
/// `n` yields zero weight.
pub fn sample_bsdf(
    bsdf: &Bsdf,
    albedo_grid: Option<&AlbedoGrid>,
    n: Vec3,
    wo: Vec3,
    x: Vec3,
    rng: &mut impl Rng,
) -> BsdfSample {
    match bsdf {
        Bsdf::Diffuse { .. } => {
            if n.dot(wo) <= 0.0 {
                return BsdfSample::invalid();
            }
            let u1: f64 = rng.gen();
            let u2: f64 = rng.gen();
            let r = u1.sqrt();
            let phi = 2.0 * std::f64::consts::PI * u2;
            let (t, b) = n.orthonormal_basis();
            let wi = t * (r * phi.cos()) + b * (r * phi.sin()) + n * (1.0 - u1).max(0.0).sqrt();
            BsdfSample {
                wi: wi.normalized(),
                weight: bsdf.albedo_at(albedo_grid, x),
            }
        }
        Bsdf::Mirror => {
            let cos = n.dot(wo);
            if cos <= 0.0 {
                return BsdfSample::invalid();
            }
            BsdfSample {
                wi: (n * (2.0 * cos) - wo).normalized(),
                weight: Rgb::WHITE,
            }
        }
    }
}

/// Uniform direction on the hemisphere about `n` with pdf 1/(2 pi).
pub fn sample_uniform_hemisphere(n: Vec3, rng: &mut impl Rng) -> Vec3 {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let cos_theta = u1;
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    let (t, b) = n.orthonormal_basis();
    (t * (sin_theta * phi.cos()) + b * (sin_theta * phi.sin()) + n * cos_theta).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mirror_obeys_law_of_reflection() {
        let n = Vec3::new(0.0, 0.0, 1.0);
        let wo = Vec3::new(1.0, 0.0, 1.0).normalized(); // 45 degrees
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = sample_bsdf(&Bsdf::Mirror, None, n, wo, Vec3::ZERO, &mut rng);
        assert_eq!(s.weight, Rgb::WHITE);
        assert!((s.wi - Vec3::new(-1.0, 0.0, 1.0).normalized()).norm() < 1e-12);
    }

    #[test]
    fn diffuse_below_hemisphere_is_black() {
        let n = Vec3::new(0.0, 0.0, 1.0);
        let wo = Vec3::new(0.0, 0.0, -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = sample_bsdf(&Bsdf::diffuse(Rgb::splat(0.8)), None, n, wo, Vec3::ZERO, &mut rng);
        assert!(s.weight.is_black());
    }

    #[test]
    fn diffuse_zero_albedo_gives_zero_weight() {
        let n = Vec3::new(0.0, 0.0, 1.0);
        let wo = Vec3::new(0.3, 0.1, 0.9).normalized();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = sample_bsdf(&Bsdf::diffuse(Rgb::BLACK), None, n, wo, Vec3::ZERO, &mut rng);
        assert!(s.weight.is_black());
    }

    #[test]
    fn diffuse_weight_integrates_to_albedo() {
        // The cosine-weighted estimator's average weight is the albedo.
        let n = Vec3::new(0.0, 0.0, 1.0);
        let wo = Vec3::new(0.0, 0.3, 1.0).normalized();
        let bsdf = Bsdf::diffuse(Rgb::splat(0.37));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut acc = Rgb::BLACK;
        let num = 100_000;
        let mut cos_acc = 0.0;
        for _ in 0..num {
            let s = sample_bsdf(&bsdf, None, n, wo, Vec3::ZERO, &mut rng);
            assert!(s.wi.dot(n) >= 0.0);
            acc += s.weight;
            cos_acc += s.wi.dot(n);
        }
        let mean = acc / num as f64;
        assert!((mean.r - 0.37).abs() < 0.37 * 0.01);
        // Cosine-weighted: E[cos] = 2/3.
        assert!((cos_acc / num as f64 - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn uniform_hemisphere_mean_direction() {
        // E[w] = n/2 for a uniform hemisphere about n.
        let n = Vec3::new(0.0, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut acc = Vec3::ZERO;
        let num = 100_000;
        for _ in 0..num {
            let w = sample_uniform_hemisphere(n, &mut rng);
            assert!(w.dot(n) >= 0.0);
            acc += w;
        }
        let mean = acc / num as f64;
        assert!((mean - n * 0.5).norm() < 0.01);
    }
}

//! Pinhole camera.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Ray, Vec3};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Camera {
    pub position: Vec3,
    pub target: Vec3,
    pub up: Vec3,
    /// Vertical field of view in degrees, in (0, 180).
    pub fov: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    pub fn new(
        position: Vec3,
        target: Vec3,
        up: Vec3,
        fov: f64,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        let cam = Camera {
            position,
            target,
            up,
            fov,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov > 0.0 && self.fov < 180.0) {
            return Err(Error::InvalidConfig(format!(
                "camera fov must be in (0, 180), got {}",
                self.fov
            )));
        }
        if (self.target - self.position).norm() < 1e-12 {
            return Err(Error::InvalidConfig(
                "camera target coincides with position".into(),
            ));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig("camera resolution must be nonzero".into()));
        }
        Ok(())
    }

    fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let forward = (self.target - self.position).normalized();
        let right = forward.cross(self.up).normalized();
        let up = right.cross(forward);
        (forward, right, up)
    }

    /// Ray through continuous image coordinates (u, v) in
    /// [0, width] x [0, height]; pixel centers sit at half-integers and
    /// v grows downward.
    pub fn ray_at(&self, u: f64, v: f64) -> Ray {
        let (forward, right, up) = self.basis();
        let tan_half = (self.fov.to_radians() / 2.0).tan();
        let aspect = self.width as f64 / self.height as f64;
        let sx = (2.0 * u / self.width as f64 - 1.0) * tan_half * aspect;
        let sy = (1.0 - 2.0 * v / self.height as f64) * tan_half;
        let dir = (forward + right * sx + up * sy).normalized();
        Ray::new(self.position, dir)
    }

    /// Primary ray for a pixel, uniformly jittered inside it unless jitter is
    /// disabled (then the pixel center is used and no random numbers are
    /// consumed).
    pub fn generate_ray(&self, px: u32, py: u32, jitter: bool, rng: &mut impl Rng) -> Ray {
        debug_assert!(px < self.width && py < self.height);
        let (ju, jv) = if jitter {
            (rng.gen::<f64>(), rng.gen::<f64>())
        } else {
            (0.5, 0.5)
        };
        self.ray_at(px as f64 + ju, py as f64 + jv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn camera(fov: f64, w: u32, h: u32) -> Camera {
        Camera::new(
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(0.0, 1.0, 0.0),
            fov,
            w,
            h,
        )
        .unwrap()
    }

    #[test]
    fn center_pixel_is_on_axis() {
        let cam = camera(60.0, 5, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ray = cam.generate_ray(2, 2, false, &mut rng);
        assert!((ray.dir - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn corner_rays_are_symmetric() {
        let cam = camera(45.0, 8, 8);
        let tl = cam.ray_at(0.5, 0.5).dir;
        let tr = cam.ray_at(7.5, 0.5).dir;
        let bl = cam.ray_at(0.5, 7.5).dir;
        let br = cam.ray_at(7.5, 7.5).dir;
        assert!((tl.x + tr.x).abs() < 1e-12 && (tl.y - tr.y).abs() < 1e-12);
        assert!((tl.y + bl.y).abs() < 1e-12 && (tl.x - bl.x).abs() < 1e-12);
        assert!((tl.x + br.x).abs() < 1e-12 && (tl.y + br.y).abs() < 1e-12);
    }

    #[test]
    fn fov_90_edge_center_at_45_degrees() {
        // Pinhole trigonometry: the top edge midpoint of a square image sits
        // at tan(fov/2) = 1, i.e. 45 degrees off the view axis.
        let cam = camera(90.0, 64, 64);
        let dir = cam.ray_at(32.0, 0.0).dir;
        let axis = Vec3::new(0.0, 0.0, -1.0);
        let angle = dir.dot(axis).acos().to_degrees();
        assert!((angle - 45.0).abs() < 1e-9, "angle {angle}");
    }

    #[test]
    fn invalid_cameras_rejected() {
        assert!(Camera::new(Vec3::ZERO, Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 45.0, 8, 8).is_err());
        assert!(
            Camera::new(Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 1.0, 0.0), 0.0, 8, 8)
                .is_err()
        );
        assert!(Camera::new(
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(0.0, 1.0, 0.0),
            180.0,
            8,
            8
        )
        .is_err());
    }
}

//! Primal rendering: cameras, emitters, BSDFs, film, and the recursive
//! estimator that blends mean-surface radiance with sampled hypothetical
//! surfaces by occupancy.

mod bsdf;
mod camera;
mod emitter;
mod image;
mod integrator;
pub mod sampler;
mod scene;

pub use bsdf::{sample_bsdf, AlbedoRef, Bsdf, BsdfSample};
pub use camera::Camera;
pub use emitter::{eval_env, Emitter};
pub use image::Image;
pub use integrator::{
    li, li_k, render_primal, render_reference, MwInteraction, PathStats, RenderStats, WorldModel,
};
pub use scene::{Scene, SceneHit, MEAN_SURFACE_MESH_ID};

use std::ops::{Add, AddAssign, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear RGB radiance or reflectance triple.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb {
        r: 0.0,
        g: 0.0,
        b: 0.0,
    };
    pub const WHITE: Rgb = Rgb {
        r: 1.0,
        g: 1.0,
        b: 1.0,
    };

    pub fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb { r, g, b }
    }

    pub fn splat(v: f64) -> Self {
        Rgb { r: v, g: v, b: v }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Rgb {
            r: a[0],
            g: a[1],
            b: a[2],
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn channel(self, c: usize) -> f64 {
        match c {
            0 => self.r,
            1 => self.g,
            _ => self.b,
        }
    }

    pub fn max_channel(self) -> f64 {
        self.r.max(self.g).max(self.b)
    }

    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.g.is_finite() && self.b.is_finite()
    }

    pub fn is_black(self) -> bool {
        self == Rgb::BLACK
    }

    /// a + (b - a) t, componentwise.
    pub fn lerp(a: Rgb, b: Rgb, t: f64) -> Rgb {
        a * (1.0 - t) + b * t
    }
}

impl Add for Rgb {
    type Output = Rgb;
    fn add(self, o: Rgb) -> Rgb {
        Rgb::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }
}

impl AddAssign for Rgb {
    fn add_assign(&mut self, o: Rgb) {
        self.r += o.r;
        self.g += o.g;
        self.b += o.b;
    }
}

impl Sub for Rgb {
    type Output = Rgb;
    fn sub(self, o: Rgb) -> Rgb {
        Rgb::new(self.r - o.r, self.g - o.g, self.b - o.b)
    }
}

impl Mul<f64> for Rgb {
    type Output = Rgb;
    fn mul(self, s: f64) -> Rgb {
        Rgb::new(self.r * s, self.g * s, self.b * s)
    }
}

impl Mul<Rgb> for Rgb {
    type Output = Rgb;
    fn mul(self, o: Rgb) -> Rgb {
        Rgb::new(self.r * o.r, self.g * o.g, self.b * o.b)
    }
}

impl Div<f64> for Rgb {
    type Output = Rgb;
    fn div(self, s: f64) -> Rgb {
        Rgb::new(self.r / s, self.g / s, self.b / s)
    }
}

fn default_mw_samples() -> u32 {
    1
}

fn default_jitter() -> bool {
    true
}

/// Sampling parameters for one primal render.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathConfig {
    /// Deepest segment index that is still traced; recursion past it returns
    /// black. The blended segment index is drawn uniformly from 0..k_max.
    pub k_max: u32,
    pub spp: u32,
    pub seed: u64,
    /// Stratified occupancy samples per selected segment.
    #[serde(default = "default_mw_samples")]
    pub mw_samples: u32,
    #[serde(default = "default_jitter")]
    pub jitter: bool,
}

impl PathConfig {
    pub fn new(k_max: u32, spp: u32, seed: u64) -> Self {
        PathConfig {
            k_max,
            spp,
            seed,
            mw_samples: 1,
            jitter: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max < 1 {
            return Err(Error::InvalidConfig("k_max must be >= 1".into()));
        }
        if self.spp < 1 {
            return Err(Error::InvalidConfig("spp must be >= 1".into()));
        }
        if self.mw_samples < 1 {
            return Err(Error::InvalidConfig("mw_samples must be >= 1".into()));
        }
        Ok(())
    }
}

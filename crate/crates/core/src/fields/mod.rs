//! Occupancy and albedo fields plus their gradient accumulators.
//!
//! The mean implicit field mu lives on a regular grid and is looked up with a
//! smoothing tricubic B-spline, so both the value and its analytic gradient
//! are C1 inside the bounds. Occupancy is alpha = 0.5 (1 - erf(mu / (sqrt(2)
//! sigma))) with a single global sigma, and the orientation beta is the
//! normalized gradient of mu. Every scatter operation below is the exact
//! transpose of its interpolation.

mod interp;
pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};
use interp::{bspline_stencil, linear_stencil, AxisStencil};

/// Threshold under which the mu gradient is considered degenerate and no
/// orientation exists (constant-field initialization).
pub const DEGENERATE_GRAD_NORM: f64 = 1e-9;

/// Regular grid of scalars; nodes span `bounds` inclusively.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    nx: usize,
    ny: usize,
    nz: usize,
    pub bounds: Aabb,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(resolution: [usize; 3], bounds: Aabb, fill: f64) -> Result<Self> {
        Self::from_values(
            resolution,
            bounds,
            vec![fill; resolution[0] * resolution[1] * resolution[2]],
        )
    }

    pub fn from_values(resolution: [usize; 3], bounds: Aabb, values: Vec<f64>) -> Result<Self> {
        let [nx, ny, nz] = resolution;
        if nx < 2 || ny < 2 || nz < 2 {
            return Err(Error::InvalidGrid(format!(
                "resolution must be >= 2 per axis, got {nx}x{ny}x{nz}"
            )));
        }
        if !bounds.is_valid() || bounds.extent().min_component() <= 0.0 {
            return Err(Error::InvalidGrid("grid bounds are degenerate".into()));
        }
        if values.len() != nx * ny * nz {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not match resolution {nx}x{ny}x{nz}",
                values.len()
            )));
        }
        Ok(ScalarGrid {
            nx,
            ny,
            nz,
            bounds,
            values,
        })
    }

    /// Samples `f` at every node position.
    pub fn from_fn(
        resolution: [usize; 3],
        bounds: Aabb,
        f: impl Fn(Vec3) -> f64,
    ) -> Result<Self> {
        let mut grid = ScalarGrid::new(resolution, bounds, 0.0)?;
        for k in 0..grid.nz {
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    let p = grid.node_position(i, j, k);
                    let idx = grid.index(i, j, k);
                    grid.values[idx] = f(p);
                }
            }
        }
        Ok(grid)
    }

    pub fn resolution(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny && k < self.nz);
        i + self.nx * (j + self.ny * k)
    }

    /// Node spacing per axis.
    pub fn spacing(&self) -> Vec3 {
        let e = self.bounds.extent();
        Vec3::new(
            e.x / (self.nx - 1) as f64,
            e.y / (self.ny - 1) as f64,
            e.z / (self.nz - 1) as f64,
        )
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let h = self.spacing();
        self.bounds.min + Vec3::new(i as f64 * h.x, j as f64 * h.y, k as f64 * h.z)
    }

    /// Continuous grid coordinates of a world point (clamping happens in the
    /// per-axis stencils).
    fn grid_coords(&self, p: Vec3) -> Vec3 {
        let h = self.spacing();
        Vec3::new(
            (p.x - self.bounds.min.x) / h.x,
            (p.y - self.bounds.min.y) / h.y,
            (p.z - self.bounds.min.z) / h.z,
        )
    }

    fn cubic_stencils(&self, p: Vec3) -> [AxisStencil<4>; 3] {
        let u = self.grid_coords(p);
        [
            bspline_stencil(u.x, self.nx),
            bspline_stencil(u.y, self.ny),
            bspline_stencil(u.z, self.nz),
        ]
    }

    /// Tricubic B-spline value at a world point; clamped outside the bounds.
    pub fn value_at(&self, p: Vec3) -> f64 {
        let [sx, sy, sz] = self.cubic_stencils(p);
        let mut acc = 0.0;
        for (kz, &wz) in sz.w.iter().enumerate() {
            for (ky, &wy) in sy.w.iter().enumerate() {
                let wyz = wy * wz;
                let row = self.nx * (sy.idx[ky] + self.ny * sz.idx[kz]);
                for (kx, &wx) in sx.w.iter().enumerate() {
                    acc += wx * wyz * self.values[row + sx.idx[kx]];
                }
            }
        }
        acc
    }

    /// Analytic gradient of the tricubic interpolant (world units).
    pub fn gradient_at(&self, p: Vec3) -> Vec3 {
        let [sx, sy, sz] = self.cubic_stencils(p);
        let h = self.spacing();
        let mut g = Vec3::ZERO;
        for kz in 0..4 {
            for ky in 0..4 {
                let row = self.nx * (sy.idx[ky] + self.ny * sz.idx[kz]);
                for kx in 0..4 {
                    let c = self.values[row + sx.idx[kx]];
                    g.x += sx.dw[kx] * sy.w[ky] * sz.w[kz] * c;
                    g.y += sx.w[kx] * sy.dw[ky] * sz.w[kz] * c;
                    g.z += sx.w[kx] * sy.w[ky] * sz.dw[kz] * c;
                }
            }
        }
        Vec3::new(g.x / h.x, g.y / h.y, g.z / h.z)
    }
}

/// How a point relates to the ray travelling through it, as seen by the
/// stochastic surface: the facing test masks back-facing interactions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Facing {
    /// Orientation opposes the travel direction: the surface hypothesis is
    /// visible from the ray origin.
    Front { alpha: f64, normal: Vec3 },
    /// Orientation undefined (near-zero mu gradient).
    Degenerate,
    /// Back-facing: interaction masked.
    Back,
}

/// Mean implicit field plus the global standard deviation.
#[derive(Debug, Clone)]
pub struct OccupancyField {
    pub mu: ScalarGrid,
    sigma: f64,
    /// Flips the facing convention (see `facing_at`); off by default.
    pub flip_facing: bool,
    /// Bumped whenever mu is mutated, so consumers can detect stale meshes.
    pub generation: u64,
}

impl OccupancyField {
    pub fn new(mu: ScalarGrid, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidGrid(format!("sigma must be positive, got {sigma}")));
        }
        Ok(OccupancyField {
            mu,
            sigma,
            flip_facing: false,
            generation: 0,
        })
    }

    /// Field over `bounds` initialized to the constant `mu0` (in units of
    /// sigma), with sigma set to `sigma_voxels` node spacings.
    pub fn with_constant_init(
        resolution: [usize; 3],
        bounds: Aabb,
        sigma_voxels: f64,
        mu0_sigmas: f64,
    ) -> Result<Self> {
        let grid = ScalarGrid::new(resolution, bounds, 0.0)?;
        let h = grid.spacing();
        let sigma = sigma_voxels * (h.x + h.y + h.z) / 3.0;
        let mut field = OccupancyField::new(grid, sigma)?;
        let mu0 = mu0_sigmas * sigma;
        field.mu.values.fill(mu0);
        Ok(field)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn bounds(&self) -> Aabb {
        self.mu.bounds
    }

    pub fn mark_updated(&mut self) {
        self.generation += 1;
    }

    pub fn mu_at(&self, p: Vec3) -> f64 {
        self.mu.value_at(p)
    }

    /// Occupancy in [0,1]; strictly decreasing in mu.
    pub fn alpha_at(&self, p: Vec3) -> f64 {
        self.alpha_of_mu(self.mu.value_at(p))
    }

    pub fn alpha_of_mu(&self, mu: f64) -> f64 {
        0.5 * (1.0 - libm::erf(mu / (std::f64::consts::SQRT_2 * self.sigma)))
    }

    /// d alpha / d mu, always negative.
    pub fn dalpha_dmu(&self, mu: f64) -> f64 {
        -(-mu * mu / (2.0 * self.sigma * self.sigma)).exp()
            / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    /// Orientation field: normalized mu gradient, or `None` where degenerate.
    pub fn beta_at(&self, p: Vec3) -> Option<Vec3> {
        self.mu.gradient_at(p).try_normalized(DEGENERATE_GRAD_NORM)
    }

    /// Facing-classified occupancy for a ray travelling along `d`. A surface
    /// hypothesis interacts when its orientation opposes the travel direction
    /// (beta . d < 0), i.e. it faces the ray origin.
    pub fn facing_at(&self, p: Vec3, d: Vec3) -> Facing {
        match self.beta_at(p) {
            None => Facing::Degenerate,
            Some(beta) => {
                let s = beta.dot(d);
                let front = if self.flip_facing { s > 0.0 } else { s < 0.0 };
                if front {
                    Facing::Front {
                        alpha: self.alpha_at(p),
                        normal: beta,
                    }
                } else {
                    Facing::Back
                }
            }
        }
    }

    /// Facing-masked occupancy: alpha where the facing test passes, else 0.
    pub fn alpha_plus(&self, p: Vec3, d: Vec3) -> f64 {
        match self.facing_at(p, d) {
            Facing::Front { alpha, .. } => alpha,
            _ => 0.0,
        }
    }
}

/// RGB albedo on a regular grid, trilinearly interpolated with clamping.
#[derive(Debug, Clone)]
pub struct AlbedoGrid {
    nx: usize,
    ny: usize,
    nz: usize,
    pub bounds: Aabb,
    pub values: Vec<[f64; 3]>,
}

impl AlbedoGrid {
    pub fn new(resolution: [usize; 3], bounds: Aabb, fill: [f64; 3]) -> Result<Self> {
        let [nx, ny, nz] = resolution;
        if nx < 2 || ny < 2 || nz < 2 {
            return Err(Error::InvalidGrid(format!(
                "albedo resolution must be >= 2 per axis, got {nx}x{ny}x{nz}"
            )));
        }
        if fill.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidGrid("albedo outside [0,1]".into()));
        }
        Ok(AlbedoGrid {
            nx,
            ny,
            nz,
            bounds,
            values: vec![fill; nx * ny * nz],
        })
    }

    pub fn resolution(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn stencils(&self, p: Vec3) -> [AxisStencil<2>; 3] {
        let e = self.bounds.extent();
        let u = Vec3::new(
            (p.x - self.bounds.min.x) / e.x * (self.nx - 1) as f64,
            (p.y - self.bounds.min.y) / e.y * (self.ny - 1) as f64,
            (p.z - self.bounds.min.z) / e.z * (self.nz - 1) as f64,
        );
        [
            linear_stencil(u.x, self.nx),
            linear_stencil(u.y, self.ny),
            linear_stencil(u.z, self.nz),
        ]
    }

    pub fn albedo_at(&self, p: Vec3) -> [f64; 3] {
        let [sx, sy, sz] = self.stencils(p);
        let mut acc = [0.0; 3];
        for kz in 0..2 {
            for ky in 0..2 {
                for kx in 0..2 {
                    let w = sx.w[kx] * sy.w[ky] * sz.w[kz];
                    let v =
                        self.values[sx.idx[kx] + self.nx * (sy.idx[ky] + self.ny * sz.idx[kz])];
                    for c in 0..3 {
                        acc[c] += w * v[c];
                    }
                }
            }
        }
        acc
    }

    /// Clamps every channel into [lo, 1]; used after optimizer steps.
    pub fn clamp_channels(&mut self, lo: f64) {
        for v in &mut self.values {
            for c in v.iter_mut() {
                *c = c.clamp(lo, 1.0);
            }
        }
    }
}

/// Per-node accumulators for d loss / d mu and d loss / d albedo.
#[derive(Debug, Clone)]
pub struct GradientBuffer {
    pub d_mu: Vec<f64>,
    mu_resolution: [usize; 3],
    pub d_albedo: Vec<[f64; 3]>,
    albedo_resolution: Option<[usize; 3]>,
}

impl GradientBuffer {
    pub fn for_field(field: &OccupancyField, albedo: Option<&AlbedoGrid>) -> Self {
        GradientBuffer {
            d_mu: vec![0.0; field.mu.len()],
            mu_resolution: field.mu.resolution(),
            d_albedo: albedo.map(|a| vec![[0.0; 3]; a.len()]).unwrap_or_default(),
            albedo_resolution: albedo.map(|a| a.resolution()),
        }
    }

    pub fn clear(&mut self) {
        self.d_mu.fill(0.0);
        self.d_albedo.fill([0.0; 3]);
    }

    /// Commutative merge; reduce per-worker buffers in worker order for a
    /// fixed accumulation order.
    pub fn merge(&mut self, other: &GradientBuffer) {
        debug_assert_eq!(self.mu_resolution, other.mu_resolution);
        for (a, b) in self.d_mu.iter_mut().zip(&other.d_mu) {
            *a += b;
        }
        for (a, b) in self.d_albedo.iter_mut().zip(&other.d_albedo) {
            for c in 0..3 {
                a[c] += b[c];
            }
        }
    }

    pub fn mu_norm(&self) -> f64 {
        self.d_mu.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn mu_resolution(&self) -> [usize; 3] {
        self.mu_resolution
    }

    pub fn albedo_resolution(&self) -> Option<[usize; 3]> {
        self.albedo_resolution
    }
}

/// Adds g * (d alpha / d mu)(x) * w_i to every mu node in the interpolation
/// stencil at `x`. The occupancy derivative is applied directly, with no
/// normalization by the alpha gradient norm.
pub fn scatter_alpha_gradient(
    buf: &mut GradientBuffer,
    field: &OccupancyField,
    x: Vec3,
    g: f64,
) -> Result<()> {
    if !g.is_finite() {
        return Err(Error::NonFiniteGradient(format!("alpha gradient at {x:?}")));
    }
    if g == 0.0 {
        return Ok(());
    }
    debug_assert_eq!(buf.mu_resolution, field.mu.resolution());
    let mu = field.mu.value_at(x);
    let scale = g * field.dalpha_dmu(mu);
    let [sx, sy, sz] = field.mu.cubic_stencils(x);
    let nx = field.mu.nx;
    let ny = field.mu.ny;
    for (kz, &wz) in sz.w.iter().enumerate() {
        for (ky, &wy) in sy.w.iter().enumerate() {
            let row = nx * (sy.idx[ky] + ny * sz.idx[kz]);
            let wyz = wy * wz;
            for (kx, &wx) in sx.w.iter().enumerate() {
                buf.d_mu[row + sx.idx[kx]] += scale * wx * wyz;
            }
        }
    }
    Ok(())
}

/// Chain rule from an orientation-space gradient into the mu nodes, through
/// the normalization beta = grad mu / |grad mu| and the analytic interpolant
/// gradient. No-op where the orientation is degenerate.
pub fn scatter_beta_gradient(
    buf: &mut GradientBuffer,
    field: &OccupancyField,
    x: Vec3,
    g: Vec3,
) -> Result<()> {
    if !g.is_finite() {
        return Err(Error::NonFiniteGradient(format!("beta gradient at {x:?}")));
    }
    let v = field.mu.gradient_at(x);
    let norm = v.norm();
    if norm < DEGENERATE_GRAD_NORM {
        return Ok(());
    }
    let beta = v / norm;
    // Normalization Jacobian: (I - beta beta^T) / |v|, killing the radial part.
    let pg = (g - beta * beta.dot(g)) / norm;
    if pg == Vec3::ZERO {
        return Ok(());
    }
    let [sx, sy, sz] = field.mu.cubic_stencils(x);
    let h = field.mu.spacing();
    let nx = field.mu.nx;
    let ny = field.mu.ny;
    for kz in 0..4 {
        for ky in 0..4 {
            let row = nx * (sy.idx[ky] + ny * sz.idx[kz]);
            for kx in 0..4 {
                let dv_dc = Vec3::new(
                    sx.dw[kx] * sy.w[ky] * sz.w[kz] / h.x,
                    sx.w[kx] * sy.dw[ky] * sz.w[kz] / h.y,
                    sx.w[kx] * sy.w[ky] * sz.dw[kz] / h.z,
                );
                buf.d_mu[row + sx.idx[kx]] += pg.dot(dv_dc);
            }
        }
    }
    Ok(())
}

/// Transpose of the trilinear albedo lookup.
pub fn scatter_albedo_gradient(
    buf: &mut GradientBuffer,
    grid: &AlbedoGrid,
    x: Vec3,
    g: [f64; 3],
) -> Result<()> {
    if g.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteGradient(format!("albedo gradient at {x:?}")));
    }
    debug_assert_eq!(buf.albedo_resolution, Some(grid.resolution()));
    let [sx, sy, sz] = grid.stencils(x);
    for kz in 0..2 {
        for ky in 0..2 {
            for kx in 0..2 {
                let w = sx.w[kx] * sy.w[ky] * sz.w[kz];
                let slot =
                    &mut buf.d_albedo[sx.idx[kx] + grid.nx * (sy.idx[ky] + grid.ny * sz.idx[kz])];
                for c in 0..3 {
                    slot[c] += w * g[c];
                }
            }
        }
    }
    Ok(())
}

/// Per-model gradient schedule knobs shared with serialization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SigmaInit {
    /// Sigma expressed in node spacings.
    pub sigma_voxels: f64,
    /// Initial constant mu in units of sigma.
    pub mu0_sigmas: f64,
}

impl Default for SigmaInit {
    fn default() -> Self {
        SigmaInit {
            sigma_voxels: 2.0,
            mu0_sigmas: 2.0,
        }
    }
}

#[cfg(test)]
mod tests;

//! Grid checkpoint format.
//!
//! A `.mwgrid` file is a 64-byte header followed by a flat blob of 64-bit
//! little-endian reals in x-fastest order. Header layout:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "MWGRID1\0"
//! 8       12    resolution nx, ny, nz (u32 LE)
//! 20      8     sigma (f64 LE)
//! 28      24    bounds min.xyz, max.xyz (f32 LE)
//! 52      12    zero padding
//! ```
//!
//! A JSON sidecar at `<path>.json` duplicates the header for inspection.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{OccupancyField, ScalarGrid};
use crate::geometry::{Aabb, Vec3};

pub const MAGIC: &[u8; 8] = b"MWGRID1\0";
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridHeader {
    pub magic: String,
    pub resolution: [u32; 3],
    pub sigma: f64,
    pub bounds_min: [f32; 3],
    pub bounds_max: [f32; 3],
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes the grid blob plus its JSON sidecar.
pub fn save_grid(grid: &ScalarGrid, sigma: f64, path: &Path) -> Result<()> {
    let [nx, ny, nz] = grid.resolution();
    let mut header = [0u8; HEADER_LEN];
    header[..8].copy_from_slice(MAGIC);
    header[8..12].copy_from_slice(&(nx as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(ny as u32).to_le_bytes());
    header[16..20].copy_from_slice(&(nz as u32).to_le_bytes());
    header[20..28].copy_from_slice(&sigma.to_le_bytes());
    let b = grid.bounds;
    for (i, v) in [b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z]
        .iter()
        .enumerate()
    {
        header[28 + 4 * i..32 + 4 * i].copy_from_slice(&(*v as f32).to_le_bytes());
    }

    let ctx = || format!("write {}", path.display());
    let mut file = fs::File::create(path).map_err(|e| Error::io(ctx(), e))?;
    file.write_all(&header).map_err(|e| Error::io(ctx(), e))?;
    let mut blob = Vec::with_capacity(grid.values.len() * 8);
    for v in &grid.values {
        blob.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&blob).map_err(|e| Error::io(ctx(), e))?;

    let side = GridHeader {
        magic: "MWGRID1".into(),
        resolution: [nx as u32, ny as u32, nz as u32],
        sigma,
        bounds_min: [b.min.x as f32, b.min.y as f32, b.min.z as f32],
        bounds_max: [b.max.x as f32, b.max.y as f32, b.max.z as f32],
    };
    let json = serde_json::to_string_pretty(&side)
        .map_err(|e| Error::json("encode grid sidecar", e))?;
    fs::write(sidecar_path(path), json)
        .map_err(|e| Error::io(format!("write {}", sidecar_path(path).display()), e))?;
    Ok(())
}

/// Reads a grid blob; returns the grid and its sigma.
pub fn load_grid(path: &Path) -> Result<(ScalarGrid, f64)> {
    let ctx = || format!("read {}", path.display());
    let mut file = fs::File::open(path).map_err(|e| Error::io(ctx(), e))?;
    let mut header = [0u8; HEADER_LEN];
    file.read_exact(&mut header).map_err(|e| Error::io(ctx(), e))?;
    if &header[..8] != MAGIC {
        return Err(Error::BadFormat {
            path: path.to_path_buf(),
            reason: "bad magic, not a MWGRID1 file".into(),
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let f32_at = |o: usize| f32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let nx = u32_at(8) as usize;
    let ny = u32_at(12) as usize;
    let nz = u32_at(16) as usize;
    let sigma = f64::from_le_bytes(header[20..28].try_into().unwrap());
    let min = Vec3::new(f32_at(28) as f64, f32_at(32) as f64, f32_at(36) as f64);
    let max = Vec3::new(f32_at(40) as f64, f32_at(44) as f64, f32_at(48) as f64);

    let count = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(nz))
        .ok_or_else(|| Error::BadFormat {
            path: path.to_path_buf(),
            reason: "resolution overflow".into(),
        })?;
    let mut blob = vec![0u8; count * 8];
    file.read_exact(&mut blob).map_err(|e| Error::io(ctx(), e))?;
    let values = blob
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let grid = ScalarGrid::from_values([nx, ny, nz], Aabb::new(min, max), values)?;
    Ok((grid, sigma))
}

impl OccupancyField {
    pub fn save(&self, path: &Path) -> Result<()> {
        save_grid(&self.mu, self.sigma(), path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (mu, sigma) = load_grid(path)?;
        OccupancyField::new(mu, sigma)
    }
}

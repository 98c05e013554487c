//! HDR pixel buffers with PFM storage and PNG previews.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::transport::Rgb;

/// Row-major HDR image; pixel (0,0) is the top-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Image {
            width,
            height,
            pixels: vec![Rgb::BLACK; (width * height) as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y * self.width + x) as usize
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[self.index(x, y)]
    }

    pub fn set(&mut self, x: u32, y: u32, v: Rgb) {
        let i = self.index(x, y);
        self.pixels[i] = v;
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn same_dimensions(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn mean(&self) -> Rgb {
        let mut acc = Rgb::BLACK;
        for p in &self.pixels {
            acc += *p;
        }
        acc / self.pixels.len() as f64
    }

    pub fn max_channel(&self) -> f64 {
        self.pixels
            .iter()
            .map(|p| p.max_channel())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// PFM color file, 32-bit little-endian floats, bottom-to-top rows.
    pub fn write_pfm(&self, path: &Path) -> Result<()> {
        let ctx = || format!("write {}", path.display());
        let file = fs::File::create(path).map_err(|e| Error::io(ctx(), e))?;
        let mut w = BufWriter::new(file);
        write!(w, "PF\n{} {}\n-1.0\n", self.width, self.height)
            .map_err(|e| Error::io(ctx(), e))?;
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                let p = self.get(x, y);
                for c in [p.r, p.g, p.b] {
                    w.write_all(&(c as f32).to_le_bytes())
                        .map_err(|e| Error::io(ctx(), e))?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(ctx(), e))?;
        Ok(())
    }

    pub fn read_pfm(path: &Path) -> Result<Image> {
        let ctx = || format!("read {}", path.display());
        let bad = |reason: &str| Error::BadFormat {
            path: path.to_path_buf(),
            reason: reason.into(),
        };
        let file = fs::File::open(path).map_err(|e| Error::io(ctx(), e))?;
        let mut r = BufReader::new(file);

        let mut line = String::new();
        r.read_line(&mut line).map_err(|e| Error::io(ctx(), e))?;
        if line.trim() != "PF" {
            return Err(bad("expected color PFM magic 'PF'"));
        }
        line.clear();
        r.read_line(&mut line).map_err(|e| Error::io(ctx(), e))?;
        let mut dims = line.split_whitespace();
        let width: u32 = dims
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad width"))?;
        let height: u32 = dims
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad height"))?;
        line.clear();
        r.read_line(&mut line).map_err(|e| Error::io(ctx(), e))?;
        let scale: f32 = line.trim().parse().map_err(|_| bad("bad scale"))?;
        if scale >= 0.0 {
            return Err(bad("big-endian PFM not supported"));
        }

        let mut blob = vec![0u8; (width * height * 12) as usize];
        r.read_exact(&mut blob).map_err(|e| Error::io(ctx(), e))?;
        let mut img = Image::new(width, height);
        let mut off = 0;
        for y in (0..height).rev() {
            for x in 0..width {
                let mut ch = [0.0f64; 3];
                for c in ch.iter_mut() {
                    *c = f32::from_le_bytes(blob[off..off + 4].try_into().unwrap()) as f64;
                    off += 4;
                }
                img.set(x, y, Rgb::new(ch[0], ch[1], ch[2]));
            }
        }
        Ok(img)
    }

    /// 8-bit PNG preview with a 1/2.2 tone curve.
    pub fn write_png_preview(&self, path: &Path) -> Result<()> {
        let mut out = ::image::RgbImage::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let p = self.get(x, y);
                let tone = |v: f64| (v.clamp(0.0, 1.0).powf(1.0 / 2.2) * 255.0).round() as u8;
                out.put_pixel(x, y, ::image::Rgb([tone(p.r), tone(p.g), tone(p.b)]));
            }
        }
        out.save(path).map_err(|e| Error::BadFormat {
            path: path.to_path_buf(),
            reason: format!("png encode failed: {e}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pfm_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pfm");
        let mut img = Image::new(7, 5);
        for y in 0..5 {
            for x in 0..7 {
                img.set(x, y, Rgb::new(x as f64 * 0.5, y as f64 * 0.25, 3.75));
            }
        }
        img.write_pfm(&path).unwrap();
        let back = Image::read_pfm(&path).unwrap();
        assert!(back.same_dimensions(&img));
        // All values here are exactly representable in f32.
        assert_eq!(back, img);
    }

    #[test]
    fn pfm_write_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.pfm");
        let b = dir.path().join("b.pfm");
        let mut img = Image::new(3, 3);
        img.set(1, 2, Rgb::new(0.1, 0.7, 1e3));
        img.write_pfm(&a).unwrap();
        img.write_pfm(&b).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }
}

//! Density rasters in portable pixmap format.

use super::{JuliaCloud, VertexSelector};
use crate::error::Result;
use crate::ratmap::SpherePoint;
use std::io::Write;
use std::path::Path;

/// Axis-aligned rectangle of the z-chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Viewport {
    pub fn square(center_re: f64, center_im: f64, half: f64) -> Self {
        Self {
            re_min: center_re - half,
            re_max: center_re + half,
            im_min: center_im - half,
            im_max: center_im + half,
        }
    }

    /// Pixel containing `p`, row 0 at the top (largest imaginary part).
    pub fn pixel(&self, p: &SpherePoint, width: usize, height: usize) -> Option<(usize, usize)> {
        let z = p.finite()?;
        let u = (z.re - self.re_min) / (self.re_max - self.re_min);
        let v = (self.im_max - z.im) / (self.im_max - self.im_min);
        if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
            return None;
        }
        Some(((u * width as f64) as usize, (v * height as f64) as usize))
    }

    /// Chart coordinates of a pixel centre.
    pub fn center_of(&self, col: usize, row: usize, width: usize, height: usize) -> (f64, f64) {
        (
            self.re_min + (col as f64 + 0.5) / width as f64 * (self.re_max - self.re_min),
            self.im_max - (row as f64 + 0.5) / height as f64 * (self.im_max - self.im_min),
        )
    }
}

/// In-memory raster; `channels` is 1 (gray) or 3 (RGB).
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Raster {
    pub fn pixel(&self, col: usize, row: usize) -> &[u8] {
        let k = (row * self.width + col) * self.channels;
        &self.data[k..k + self.channels]
    }

    pub fn encode(&self) -> Vec<u8> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.encode())?;
        Ok(())
    }
}

fn density(points: &[SpherePoint], view: &Viewport, width: usize, height: usize) -> Vec<u32> {
    let mut hits = vec![0u32; width * height];
    for p in points {
        if let Some((c, r)) = view.pixel(p, width, height) {
            hits[r * width + c] += 1;
        }
    }
    hits
}

// log-scaled so sparse regions stay visible; any hit maps to at least 1
fn shade(h: u32, max: u32) -> u8 {
    if h == 0 {
        return 0;
    }
    let s = (1.0 + h as f64).ln() / (1.0 + max as f64).ln();
    (s * 255.0).round().clamp(1.0, 255.0) as u8
}

/// Grayscale sample density.
pub fn render(cloud: &JuliaCloud, selector: VertexSelector, view: &Viewport, width: usize, height: usize) -> Raster {
    let hits = density(&selector.points(cloud), view, width, height);
    let max = hits.iter().copied().max().unwrap_or(0);
    Raster {
        width,
        height,
        channels: 1,
        data: hits.iter().map(|&h| shade(h, max)).collect(),
    }
}

const PALETTE: [[u8; 3]; 6] = [
    [230, 80, 60],
    [60, 160, 230],
    [90, 200, 90],
    [230, 190, 50],
    [180, 90, 220],
    [70, 210, 200],
];

/// One colour per vertex, brightness by density; overlapping vertices add.
pub fn render_colored(cloud: &JuliaCloud, view: &Viewport, width: usize, height: usize) -> Raster {
    let mut acc = vec![0f64; width * height * 3];
    for v in 0..cloud.vertex_count() {
        let hits = density(&cloud.points(v), view, width, height);
        let max = hits.iter().copied().max().unwrap_or(0);
        let colour = PALETTE[v % PALETTE.len()];
        for (k, &h) in hits.iter().enumerate() {
            let s = shade(h, max) as f64 / 255.0;
            for c in 0..3 {
                acc[3 * k + c] += s * colour[c] as f64;
            }
        }
    }
    Raster {
        width,
        height,
        channels: 3,
        data: acc.iter().map(|&x| x.round().clamp(0.0, 255.0) as u8).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_selection_renders_black() {
        let cloud = JuliaCloud::from_points(vec![vec![], vec![SpherePoint::ZERO]]);
        let img = render(&cloud, VertexSelector::Vertex(0), &Viewport::square(0.0, 0.0, 1.0), 16, 16);
        assert!(img.data.iter().all(|&b| b == 0));
        let img = render(&cloud, VertexSelector::All, &Viewport::square(0.0, 0.0, 1.0), 16, 16);
        assert_eq!(img.data.iter().filter(|&&b| b > 0).count(), 1);
    }

    #[test]
    fn encoding_has_header() {
        let cloud = JuliaCloud::from_points(vec![vec![SpherePoint::ZERO]]);
        let img = render_colored(&cloud, &Viewport::square(0.0, 0.0, 1.0), 4, 2);
        let bytes = img.encode();
        assert!(bytes.starts_with(b"P6\n4 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 24);
    }
}

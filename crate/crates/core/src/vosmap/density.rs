use serde::{Deserialize, Serialize};

use super::VosError;
use crate::layout::MapLayout;

/// Gaussian kernel density over a regular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at `min_y`.
    pub values: Vec<f64>,
    pub bandwidth: f64,
    /// `(min_x, min_y, max_x, max_y)` of the grid.
    pub bbox: [f64; 4],
}

impl DensityField {
    pub fn cell_size(&self) -> (f64, f64) {
        (
            (self.bbox[2] - self.bbox[0]) / self.width as f64,
            (self.bbox[3] - self.bbox[1]) / self.height as f64,
        )
    }

    pub fn value(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Riemann sum of the field over the grid.
    pub fn mass(&self) -> f64 {
        let (dx, dy) = self.cell_size();
        self.values.iter().sum::<f64>() * dx * dy
    }

    /// Grid cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let (dx, dy) = self.cell_size();
        let col = ((p[0] - self.bbox[0]) / dx).floor().clamp(0.0, (self.width - 1) as f64);
        let row = ((p[1] - self.bbox[1]) / dy).floor().clamp(0.0, (self.height - 1) as f64);
        (col as usize, row as usize)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// One CSV line per grid row, top row first (image order).
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in (0..self.height).rev() {
            let line: Vec<String> = (0..self.width).map(|c| self.value(c, row).to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Kernel density of the layout's node weights.
///
/// The grid spans the layout's bounding box padded by three bandwidths. Each
/// node's kernel is normalized on the grid itself, so the discrete mass of the
/// field equals the total node weight and the field is exactly linear in the
/// weights.
pub fn density_field(
    layout: &MapLayout,
    weights: &[f64],
    bandwidth: f64,
    grid: (usize, usize),
) -> Result<DensityField, VosError> {
    let (width, height) = grid;
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(VosError::InvalidParameter("bandwidth must be positive".into()));
    }
    if width == 0 || height == 0 {
        return Err(VosError::InvalidParameter("grid must be at least 1x1".into()));
    }
    if weights.len() != layout.len() {
        return Err(VosError::InvalidParameter(format!(
            "{} weights for {} nodes",
            weights.len(),
            layout.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(VosError::InvalidParameter("weights must be non-negative".into()));
    }

    let b = layout.bounds();
    let pad = 3.0 * bandwidth;
    let bbox = [b[0] - pad, b[1] - pad, b[2] + pad, b[3] + pad];
    let dx = (bbox[2] - bbox[0]) / width as f64;
    let dy = (bbox[3] - bbox[1]) / height as f64;
    let xs: Vec<f64> = (0..width).map(|c| bbox[0] + (c as f64 + 0.5) * dx).collect();
    let ys: Vec<f64> = (0..height).map(|r| bbox[1] + (r as f64 + 0.5) * dy).collect();

    let mut values = vec![0.0; width * height];
    let mut kernel = vec![0.0; width * height];
    let inv = 1.0 / (2.0 * bandwidth * bandwidth);
    for (p, &w) in layout.positions.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        // separable Gaussian
        let kx: Vec<f64> = xs.iter().map(|x| (-(x - p[0]).powi(2) * inv).exp()).collect();
        let ky: Vec<f64> = ys.iter().map(|y| (-(y - p[1]).powi(2) * inv).exp()).collect();
        let mut total = 0.0;
        for (r, &vy) in ky.iter().enumerate() {
            for (c, &vx) in kx.iter().enumerate() {
                let k = vx * vy;
                kernel[r * width + c] = k;
                total += k;
            }
        }
        let mass = total * dx * dy;
        if mass > 0.0 {
            let scale = w / mass;
            for (v, k) in values.iter_mut().zip(&kernel) {
                *v += scale * k;
            }
        } else {
            // bandwidth far below the cell size: all weight in the node's cell
            let col = (((p[0] - bbox[0]) / dx) as usize).min(width - 1);
            let row = (((p[1] - bbox[1]) / dy) as usize).min(height - 1);
            values[row * width + col] += w / (dx * dy);
        }
    }
    Ok(DensityField {
        width,
        height,
        values,
        bandwidth,
        bbox,
    })
}

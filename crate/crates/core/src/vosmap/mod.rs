//! Science map: similarity-weighted layout, resolution clustering and the
//! kernel density field drawn underneath.

mod cluster;
mod density;
mod mapping;

pub use cluster::{clustering_quality, vos_cluster, Clustering};
pub use density::{density_field, DensityField};
pub use mapping::{constrained_objective, vos_layout, vos_layout_traced, LayoutTrace};

use crate::layout::MapLayout;
use crate::svg::{heat_color, SvgDoc, Viewport, PALETTE};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum VosError {
    #[error("layout needs at least 2 nodes, got {0}")]
    Degenerate(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure in layout solver")]
    Numerical,
}

/// Tab-separated map file: `id label x y cluster weight`.
///
/// `cluster` and `labels` are optional; missing clusters are written as 0 and
/// missing labels repeat the id.
pub fn write_map_file<W: std::io::Write>(
    mut out: W,
    layout: &MapLayout,
    labels: Option<&[String]>,
    clustering: Option<&Clustering>,
    weights: &[f64],
) -> std::io::Result<()> {
    writeln!(out, "id\tlabel\tx\ty\tcluster\tweight")?;
    for (i, id) in layout.ids.iter().enumerate() {
        let label = labels.map_or(id.as_str(), |l| l[i].as_str());
        let cluster = clustering.map_or(0, |c| c.assignment[i]);
        let p = layout.positions[i];
        writeln!(
            out,
            "{id}\t{}\t{:.6}\t{:.6}\t{cluster}\t{}",
            label.replace(['\t', '\n'], " "),
            p[0],
            p[1],
            weights.get(i).copied().unwrap_or(0.0)
        )?;
    }
    Ok(())
}

/// Density heat layer with the nodes on top, colored by cluster.
pub fn render_density_svg(
    field: &DensityField,
    layout: &MapLayout,
    clustering: Option<&Clustering>,
    size: f64,
) -> String {
    let mut doc = SvgDoc::new(size, size);
    let view = Viewport::fit(field.bbox, size, 0.0);
    let (dx, dy) = field.cell_size();
    let max = field.max_value();
    for row in 0..field.height {
        for col in 0..field.width {
            let v = field.value(col, row);
            if max <= 0.0 || v <= max * 1e-3 {
                continue;
            }
            let x0 = field.bbox[0] + col as f64 * dx;
            let y1 = field.bbox[1] + (row + 1) as f64 * dy;
            let (px, py) = view.map([x0, y1]);
            doc.rect(px, py, dx * view.scale(), dy * view.scale(), &heat_color(v / max), 0.85);
        }
    }
    for (i, p) in layout.positions.iter().enumerate() {
        let (x, y) = view.map(*p);
        let fill = clustering.map_or("#333333", |c| PALETTE[(c.assignment[i] - 1) % PALETTE.len()]);
        doc.circle(x, y, 2.0, fill, 0.9, Some(&layout.ids[i]));
    }
    doc.finish()
}

#[cfg(test)]
mod tests;

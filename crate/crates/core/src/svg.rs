//! Minimal SVG writer used by the map, overlay and category graph renderers.
//!
//! Numbers are printed with fixed precision so identical inputs always give
//! byte-identical files.

use std::fmt::Write as _;

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Blue -> cyan -> green -> yellow -> red ramp for `t` in [0, 1].
pub fn heat_color(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [49.0, 54.0, 149.0]),
        (0.25, [69.0, 183.0, 205.0]),
        (0.5, [102.0, 189.0, 99.0]),
        (0.75, [254.0, 224.0, 70.0]),
        (1.0, [215.0, 48.0, 39.0]),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let mut k = 0;
    while k + 2 < STOPS.len() && t > STOPS[k + 1].0 {
        k += 1;
    }
    let (t0, c0) = STOPS[k];
    let (t1, c1) = STOPS[k + 1];
    let f = (t - t0) / (t1 - t0);
    let mix = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2]))
}

/// Categorical palette, cycled.
pub const PALETTE: [&str; 10] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6", "#bcf60c",
    "#008080", "#9a6324",
];

/// Maps layout coordinates into a `size x size` pixel canvas, y pointing up.
#[derive(Debug, Clone, Copy)]
pub struct Viewport {
    min: [f64; 2],
    scale: f64,
    size: f64,
    margin: f64,
}

impl Viewport {
    pub fn fit(bounds: [f64; 4], size: f64, margin: f64) -> Self {
        let span = (bounds[2] - bounds[0]).max(bounds[3] - bounds[1]);
        let scale = if span > 0.0 { (size - 2.0 * margin) / span } else { 1.0 };
        Viewport {
            min: [bounds[0], bounds[1]],
            scale,
            size,
            margin,
        }
    }

    pub fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (
            self.margin + (p[0] - self.min[0]) * self.scale,
            self.size - self.margin - (p[1] - self.min[1]) * self.scale,
        )
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

pub struct SvgDoc {
    buf: String,
}

impl SvgDoc {
    pub fn new(width: f64, height: f64) -> Self {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
        );
        let _ = writeln!(buf, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        SvgDoc { buf }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, opacity: f64) {
        let _ = writeln!(
            self.buf,
            "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{w:.3}\" height=\"{h:.3}\" fill=\"{fill}\" fill-opacity=\"{opacity:.3}\"/>"
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, opacity: f64, title: Option<&str>) {
        match title {
            Some(t) => {
                let _ = writeln!(
                    self.buf,
                    "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{r:.3}\" fill=\"{fill}\" fill-opacity=\"{opacity:.3}\"><title>{}</title></circle>",
                    escape(t)
                );
            }
            None => {
                let _ = writeln!(
                    self.buf,
                    "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{r:.3}\" fill=\"{fill}\" fill-opacity=\"{opacity:.3}\"/>"
                );
            }
        }
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64, opacity: f64) {
        let _ = writeln!(
            self.buf,
            "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"{stroke}\" stroke-width=\"{width:.3}\" stroke-opacity=\"{opacity:.3}\"/>",
            a.0, a.1, b.0, b.1
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, content: &str) {
        let _ = writeln!(
            self.buf,
            "<text x=\"{x:.3}\" y=\"{y:.3}\" font-family=\"sans-serif\" font-size=\"{size:.1}\" text-anchor=\"middle\">{}</text>",
            escape(content)
        );
    }

    pub fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

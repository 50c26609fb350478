//! Minimal SVG emitter: scatter, line, arrow-field and heatmap primitives,
//! enough to plot contingencies, phi fields and accuracy curves without an
//! external plotting dependency.

use std::fmt::Write as _;

pub struct SvgDoc {
    width: f64,
    height: f64,
    body: String,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

impl SvgDoc {
    pub fn new(width: f64, height: f64) -> SvgDoc {
        SvgDoc {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn finish(self, timestamp: bool) -> String {
        let stamp = if timestamp {
            format!(
                "<!-- generated {} -->\n",
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            )
        } else {
            String::new()
        };
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" \
             viewBox=\"0 0 {0} {1}\">\n{stamp}<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n{2}</svg>\n",
            self.width, self.height, self.body
        )
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" font-size=\"{size}\" font-family=\"sans-serif\">{}</text>",
            escape(content)
        );
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, color: &str, width: f64) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{color}\" stroke-width=\"{width}\"/>"
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, color: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{color}\"/>"
        );
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, color: &str) {
        let _ = writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{color}\"/>"
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], color: &str, width: f64) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"/>",
            coords.join(" ")
        );
    }

    pub fn arrow(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, color: &str) {
        self.line(x1, y1, x2, y2, color, 0.8);
        // a short head
        let (dx, dy) = (x2 - x1, y2 - y1);
        let len = (dx * dx + dy * dy).sqrt().max(1e-9);
        let (ux, uy) = (dx / len, dy / len);
        let size = 2.5;
        self.line(
            x2,
            y2,
            x2 - size * (ux - 0.5 * uy),
            y2 - size * (uy + 0.5 * ux),
            color,
            0.8,
        );
        self.line(
            x2,
            y2,
            x2 - size * (ux + 0.5 * uy),
            y2 - size * (uy - 0.5 * ux),
            color,
            0.8,
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Axis mapping from data space to a pixel frame.
#[derive(Clone, Copy)]
pub struct Frame {
    pub x0: f64,
    pub y0: f64,
    pub w: f64,
    pub h: f64,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Frame {
    pub fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xmin) / (self.xmax - self.xmin).max(1e-12) * self.w
    }

    pub fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.ymin) / (self.ymax - self.ymin).max(1e-12) * self.h
    }
}

/// Multi-series line chart over labeled bins.
pub fn line_chart(
    doc: &mut SvgDoc,
    frame: Frame,
    title: &str,
    bins: &[String],
    series: &[(String, Vec<f64>)],
) {
    doc.text(frame.x0, frame.y0 - 8.0, 13.0, title);
    // axes
    doc.line(
        frame.x0,
        frame.y0 + frame.h,
        frame.x0 + frame.w,
        frame.y0 + frame.h,
        "#333",
        1.0,
    );
    doc.line(frame.x0, frame.y0, frame.x0, frame.y0 + frame.h, "#333", 1.0);
    for (i, label) in bins.iter().enumerate() {
        let x = frame.x0 + frame.w * i as f64 / (bins.len().max(2) - 1) as f64;
        doc.text(x - 10.0, frame.y0 + frame.h + 14.0, 9.0, label);
    }
    for frac in [0.0, 0.5, 1.0] {
        let y = frame.py(frame.ymin + frac * (frame.ymax - frame.ymin));
        doc.text(
            frame.x0 - 30.0,
            y + 3.0,
            9.0,
            &format!("{:.1}", frame.ymin + frac * (frame.ymax - frame.ymin)),
        );
    }
    for (si, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let pts: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| {
                (
                    frame.x0 + frame.w * i as f64 / (bins.len().max(2) - 1) as f64,
                    frame.py(v),
                )
            })
            .collect();
        doc.polyline(&pts, color, 1.5);
        for &(x, y) in &pts {
            doc.circle(x, y, 2.0, color);
        }
        doc.text(
            frame.x0 + frame.w + 6.0,
            frame.y0 + 12.0 * si as f64 + 10.0,
            10.0,
            name,
        );
        doc.line(
            frame.x0 + frame.w + 46.0,
            frame.y0 + 12.0 * si as f64 + 7.0,
            frame.x0 + frame.w + 60.0,
            frame.y0 + 12.0 * si as f64 + 7.0,
            color,
            2.0,
        );
    }
}

/// Arrow field in data coordinates.
pub fn arrow_field(
    doc: &mut SvgDoc,
    frame: Frame,
    title: &str,
    arrows: &[(f64, f64, f64, f64)],
) {
    doc.text(frame.x0, frame.y0 - 8.0, 13.0, title);
    doc.rect(frame.x0, frame.y0, frame.w, frame.h, "#f8f8f8");
    for &(x, y, tx, ty) in arrows {
        doc.arrow(frame.px(x), frame.py(y), frame.px(tx), frame.py(ty), "#1f77b4");
    }
}

/// Row-major heatmap; values are normalized to the blue-red ramp.
pub fn heatmap(doc: &mut SvgDoc, frame: Frame, title: &str, nx: usize, ny: usize, values: &[f64]) {
    doc.text(frame.x0, frame.y0 - 8.0, 13.0, title);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = (hi - lo).max(1e-12);
    let cw = frame.w / nx as f64;
    let ch = frame.h / ny as f64;
    for iy in 0..ny {
        for ix in 0..nx {
            let v = (values[iy * nx + ix] - lo) / span;
            let r = (255.0 * v) as u8;
            let b = (255.0 * (1.0 - v)) as u8;
            let g = (128.0 * (1.0 - (2.0 * v - 1.0).abs())) as u8;
            doc.rect(
                frame.x0 + ix as f64 * cw,
                // row 0 at the bottom
                frame.y0 + frame.h - (iy + 1) as f64 * ch,
                cw + 0.5,
                ch + 0.5,
                &format!("#{r:02x}{g:02x}{b:02x}"),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_is_deterministic_without_timestamp() {
        let build = || {
            let mut doc = SvgDoc::new(100.0, 50.0);
            doc.circle(10.0, 10.0, 2.0, "#000");
            doc.finish(false)
        };
        assert_eq!(build(), build());
        assert!(!build().contains("generated"));
    }

    #[test]
    fn timestamp_appears_when_requested() {
        let doc = SvgDoc::new(10.0, 10.0);
        assert!(doc.finish(true).contains("generated"));
    }
}

//! Minimal SVG plot of a ray fan: range [km] across, depth down.

use std::fmt::Write;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;
const MAX_POINTS: usize = 2000;

pub struct FanRay {
    pub points: Vec<(f64, f64)>,
    pub caustics: Vec<(f64, f64)>,
}

struct Frame {
    r_min: f64,
    r_span: f64,
    z_min: f64,
    z_span: f64,
}

impl Frame {
    fn fit(rays: &[FanRay]) -> Self {
        let all = rays.iter().flat_map(|r| r.points.iter());
        let (mut r0, mut r1, mut z0, mut z1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(r, z) in all {
            r0 = r0.min(r);
            r1 = r1.max(r);
            z0 = z0.min(z);
            z1 = z1.max(z);
        }
        if !r0.is_finite() {
            (r0, r1, z0, z1) = (0.0, 1.0, 0.0, 1.0);
        }
        Self { r_min: r0, r_span: (r1 - r0).max(1.0), z_min: z0, z_span: (z1 - z0).max(1.0) }
    }

    fn map(&self, r: f64, z: f64) -> (f64, f64) {
        let x = MARGIN + (r - self.r_min) / self.r_span * (WIDTH - 2.0 * MARGIN);
        let y = MARGIN + (z - self.z_min) / self.z_span * (HEIGHT - 2.0 * MARGIN);
        (x, y)
    }
}

pub fn render_fan(rays: &[FanRay]) -> String {
    let frame = Frame::fit(rays);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0) = frame.map(frame.r_min, frame.z_min);
    let (x1, y1) = frame.map(frame.r_min + frame.r_span, frame.z_min + frame.z_span);
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">range {:.1}–{:.1} km</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        frame.r_min / 1e3,
        (frame.r_min + frame.r_span) / 1e3
    );
    let _ = writeln!(
        out,
        r#"<text x="12" y="{:.2}" font-size="12" transform="rotate(-90 12 {:.2})" text-anchor="middle">depth {:.0}–{:.0} m</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        frame.z_min,
        frame.z_min + frame.z_span
    );
    for ray in rays {
        let stride = ray.points.len().div_ceil(MAX_POINTS).max(1);
        let mut pts: Vec<(f64, f64)> = ray.points.iter().step_by(stride).copied().collect();
        if let Some(&last) = ray.points.last() {
            if pts.last() != Some(&last) {
                pts.push(last);
            }
        }
        let mut d = String::new();
        for (k, (r, z)) in pts.into_iter().enumerate() {
            let (x, y) = frame.map(r, z);
            let _ = write!(d, "{}{x:.2},{y:.2}", if k == 0 { "" } else { " " });
        }
        let _ = writeln!(out, r#"<polyline points="{d}" fill="none" stroke="steelblue" stroke-width="0.8"/>"#);
    }
    for &(r, z) in rays.iter().flat_map(|r| r.caustics.iter()) {
        let (x, y) = frame.map(r, z);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="crimson"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_ray_and_one_dot_per_caustic() {
        let rays = vec![
            FanRay { points: vec![(0.0, 100.0), (1000.0, 200.0)], caustics: vec![(500.0, 150.0)] },
            FanRay { points: vec![(0.0, 100.0), (1000.0, 0.0)], caustics: vec![] },
        ];
        let svg = render_fan(&rays);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg, render_fan(&rays));
    }
}

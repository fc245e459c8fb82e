//! Minimal SVG rendering of concentric conics and marked points.

use std::f64::consts::TAU;
use std::fmt::Write;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::{eig2, Conic2, Point2};

const SEGMENTS: usize = 128;
const MARGIN: f64 = 1.1;

/// What to draw. Both lists may be omitted in JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    #[serde(default)]
    pub conics: Vec<Conic2>,
    #[serde(default)]
    pub points: Vec<Point2>,
}

/// `Q^{-1/2}`, which maps the unit circle onto `E_Q`.
fn inverse_sqrt(q: &Conic2) -> Matrix2<f64> {
    let (lam, vecs) = eig2(&q.matrix());
    vecs * Matrix2::from_diagonal(&lam.map(|l| 1.0 / l.sqrt())) * vecs.transpose()
}

fn path_data(q: &Conic2) -> String {
    let h = inverse_sqrt(q);
    let mut d = String::new();
    for k in 0..SEGMENTS {
        let t = TAU * k as f64 / SEGMENTS as f64;
        let p = h * Vector2::new(t.cos(), t.sin());
        let cmd = if k == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{:.6},{:.6} ", p.x, -p.y);
    }
    d.push('Z');
    d
}

/// Half-width of a square centered at the origin holding everything.
fn extent(scene: &Scene) -> f64 {
    let conics = scene.conics.iter().map(|q| 1.0 / q.eigenvalues().0.sqrt());
    let points = scene.points.iter().map(|p| p[0].abs().max(p[1].abs()));
    let e = conics.chain(points).fold(0.0, f64::max);
    if e > 0.0 && e.is_finite() {
        e * MARGIN
    } else {
        1.0
    }
}

/// Deterministic SVG: one `<path>` per conic, one `<circle>` per point.
/// The y-axis points up.
pub fn render(scene: &Scene) -> String {
    let e = extent(scene);
    let stroke = e / 200.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
        -e,
        -e,
        2.0 * e,
        2.0 * e
    );
    for q in &scene.conics {
        let _ = writeln!(
            out,
            r#"  <path d="{}" fill="none" stroke="black" stroke-width="{stroke:.6}"/>"#,
            path_data(q)
        );
    }
    for p in &scene.points {
        let _ = writeln!(
            out,
            r#"  <circle cx="{:.6}" cy="{:.6}" r="{:.6}" fill="red"/>"#,
            p[0],
            -p[1],
            3.0 * stroke
        );
    }
    out.push_str("</svg>\n");
    out
}

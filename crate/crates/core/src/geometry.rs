//! Intervals and convex polygons: measures, quadrature points, translation and
//! intersection (Sutherland–Hodgman clipping).

use serde::Serialize;

use crate::quadrature::{gauss_interval, gauss_triangle, triangle_area};
use crate::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Region {
    Interval { a: f64, b: f64 },
    /// Convex polygon, counter-clockwise.
    Polygon(Vec<Vec2>),
}

impl Region {
    pub fn measure(&self) -> f64 {
        match self {
            Region::Interval { a, b } => b - a,
            Region::Polygon(v) => polygon_area(v),
        }
    }

    /// Gauss points covering the region (degree 9 on intervals, 5 on polygons).
    pub fn quadrature(&self) -> Vec<(Vec2, f64)> {
        match self {
            Region::Interval { a, b } => gauss_interval(*a, *b).map(|(x, w)| ([x, 0.0], w)).collect(),
            Region::Polygon(v) => {
                let mut out = Vec::with_capacity(7 * v.len());
                for k in 1..v.len().saturating_sub(1) {
                    if triangle_area(v[0], v[k], v[k + 1]).abs() > 0.0 {
                        out.extend(gauss_triangle(v[0], v[k], v[k + 1]));
                    }
                }
                out
            }
        }
    }

    pub fn centroid(&self) -> Vec2 {
        match self {
            Region::Interval { a, b } => [0.5 * (a + b), 0.0],
            Region::Polygon(v) => {
                let area = polygon_area(v);
                if area == 0.0 {
                    let n = v.len() as f64;
                    return [
                        v.iter().map(|p| p[0]).sum::<f64>() / n,
                        v.iter().map(|p| p[1]).sum::<f64>() / n,
                    ];
                }
                let (mut cx, mut cy) = (0.0, 0.0);
                for k in 1..v.len() - 1 {
                    let t = triangle_area(v[0], v[k], v[k + 1]);
                    cx += t * (v[0][0] + v[k][0] + v[k + 1][0]) / 3.0;
                    cy += t * (v[0][1] + v[k][1] + v[k + 1][1]) / 3.0;
                }
                [cx / area, cy / area]
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bbox(&self) -> (Vec2, Vec2) {
        match self {
            Region::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            Region::Polygon(v) => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for p in v {
                    for d in 0..2 {
                        lo[d] = lo[d].min(p[d]);
                        hi[d] = hi[d].max(p[d]);
                    }
                }
                (lo, hi)
            }
        }
    }

    pub fn translated(&self, shift: Vec2) -> Region {
        match self {
            Region::Interval { a, b } => Region::Interval {
                a: a + shift[0],
                b: b + shift[0],
            },
            Region::Polygon(v) => {
                Region::Polygon(v.iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect())
            }
        }
    }

    /// Measure of the intersection of two regions of the same kind.
    pub fn overlap(&self, other: &Region) -> f64 {
        match (self, other) {
            (Region::Interval { a, b }, Region::Interval { a: c, b: d }) => {
                (b.min(*d) - a.max(*c)).max(0.0)
            }
            (Region::Polygon(p), Region::Polygon(q)) => polygon_area(&clip_convex(p, q)),
            _ => 0.0,
        }
    }

    /// Point membership for closed regions, with a relative tolerance.
    pub fn contains(&self, x: Vec2) -> bool {
        match self {
            Region::Interval { a, b } => {
                let tol = 1e-14 * (1.0 + a.abs().max(b.abs()));
                x[0] >= a - tol && x[0] <= b + tol
            }
            Region::Polygon(v) => {
                let n = v.len();
                (0..n).all(|k| {
                    let (p, q) = (v[k], v[(k + 1) % n]);
                    let cross = (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0]);
                    cross >= -1e-14 * (1.0 + (q[0] - p[0]).abs() + (q[1] - p[1]).abs())
                })
            }
        }
    }
}

/// Shoelace area (positive for counter-clockwise polygons).
pub fn polygon_area(v: &[Vec2]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    let n = v.len();
    0.5 * (0..n)
        .map(|k| {
            let (p, q) = (v[k], v[(k + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

/// Intersection of `subject` with the convex counter-clockwise `clip` polygon.
pub fn clip_convex(subject: &[Vec2], clip: &[Vec2]) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = subject.to_vec();
    let n = clip.len();
    for k in 0..n {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[k], clip[(k + 1) % n]);
        let side = |p: Vec2| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut out);
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let prev = input[(j + m - 1) % m];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(intersect(prev, cur, sp, sc));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    out
}

fn intersect(p: Vec2, q: Vec2, sp: f64, sq: f64) -> Vec2 {
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_two_unit_squares() {
        let sq = |x: f64, y: f64| vec![[x, y], [x + 1.0, y], [x + 1.0, y + 1.0], [x, y + 1.0]];
        let a = Region::Polygon(sq(0.0, 0.0));
        let b = Region::Polygon(sq(0.5, 0.25));
        assert!((a.overlap(&b) - 0.375).abs() < 1e-15);
        assert_eq!(a.overlap(&Region::Polygon(sq(2.0, 0.0))), 0.0);
        assert!((a.overlap(&a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polygon_quadrature_integrates_area_and_moments() {
        let r = Region::Polygon(vec![[0.0, 0.0], [0.5, 0.0], [1.0 / 3.0, 1.0 / 3.0], [0.0, 0.5]]);
        let q = r.quadrature();
        let area: f64 = q.iter().map(|(_, w)| w).sum();
        assert!((area - r.measure()).abs() < 1e-15);
        let c = r.centroid();
        let mx: f64 = q.iter().map(|(p, w)| w * p[0]).sum::<f64>() / area;
        assert!((mx - c[0]).abs() < 1e-14);
        assert!(r.contains(c));
        assert!(!r.contains([0.6, 0.6]));
    }

    #[test]
    fn interval_overlap() {
        let a = Region::Interval { a: 0.0, b: 1.0 };
        assert!((a.overlap(&a.translated([0.25, 0.0])) - 0.75).abs() < 1e-15);
        assert_eq!(a.overlap(&a.translated([3.0, 0.0])), 0.0);
    }
}

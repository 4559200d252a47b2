//! Horizontal polygonal paths joining two points with length at most three
//! times their distance.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::group::{dist, left_quotient, Point};

/// `s ↦ start·(s cos θ, s sin θ, 0)` for `s ∈ [0, length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Point,
    pub angle: f64,
    pub length: f64,
}

impl Segment {
    pub fn increment(&self, s: f64) -> Point {
        Point::new(s * self.angle.cos(), s * self.angle.sin(), 0.0)
    }

    pub fn at(&self, s: f64) -> Point {
        self.start.mul(self.increment(s))
    }

    pub fn end(&self) -> Point {
        self.at(self.length)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalPath {
    pub start: Point,
    pub end: Point,
    pub segments: Vec<Segment>,
}

impl HorizontalPath {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Endpoint obtained by composing the segment increments from `start`.
    pub fn traced_end(&self) -> Point {
        self.segments.iter().fold(self.start, |p, s| p.mul(s.increment(s.length)))
    }

    /// Largest coordinate gap between consecutive segment endpoints.
    pub fn max_joint_gap(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].end(), w[1].start);
                (a.x - b.x).abs().max((a.y - b.y).abs()).max((a.t - b.t).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// One horizontal segment to the level of `z2`, then the boundary of a square
/// of side `√|t'|` whose enclosed area supplies the remaining vertical offset
/// `t'`. Zero-length segments are omitted, so `z1 = z2` gives an empty path.
pub fn horizontal_path(z1: Point, z2: Point) -> HorizontalPath {
    let z = left_quotient(z1, z2);
    let mut moves: Vec<(f64, f64)> = Vec::with_capacity(5);
    let planar = z.x.hypot(z.y);
    if planar > 0.0 {
        moves.push((z.y.atan2(z.x), planar));
    }
    // (x, y, 0)⁻¹·(x, y, t) = (0, 0, t)
    let side = z.t.abs().sqrt();
    if side > 0.0 {
        // A counter-clockwise loop raises t by its enclosed area.
        let turns = if z.t > 0.0 { [0.0, FRAC_PI_2, PI, -FRAC_PI_2] } else { [FRAC_PI_2, 0.0, -FRAC_PI_2, PI] };
        moves.extend(turns.iter().map(|&a| (a, side)));
    }
    let mut segments = Vec::with_capacity(moves.len());
    let mut at = z1;
    for (angle, length) in moves {
        let seg = Segment { start: at, angle, length };
        at = seg.end();
        segments.push(seg);
    }
    HorizontalPath { start: z1, end: z2, segments }
}

/// `length / d(z1, z2)`; `0` for coincident points.
pub fn length_ratio(path: &HorizontalPath) -> f64 {
    let d = dist(path.end, path.start);
    if d == 0.0 {
        0.0
    } else {
        path.length() / d
    }
}

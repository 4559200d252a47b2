//! Korányi-ball queries over point clouds.
//!
//! Both paths return the sorted index list of points with `d(c, p) ≤ r`, so
//! every sum taken over a query result is bit-identical between them.

use std::collections::HashMap;

use crate::group::{koranyi_norm, left_quotient, Point};

use super::measure::GraphMeasure;

/// Point clouds up to this size are queried by brute force.
pub const BRUTE_FORCE_LIMIT: usize = 1_000_000;

#[inline]
fn within(c: Point, p: Point, r: f64) -> bool {
    koranyi_norm(left_quotient(c, p)) <= r
}

pub fn ball_brute_force(points: &[Point], c: Point, r: f64) -> Vec<usize> {
    (0..points.len()).filter(|&i| within(c, points[i], r)).collect()
}

/// Uniform bucket grid. Buckets are `b × b × b_t` with `b_t = b²/4 + M·b/2`
/// and `M = max(|x|+|y|)`, so a ball of radius `r ≤ b` around a point of the
/// cloud meets at most the neighbouring buckets.
#[derive(Debug, Clone)]
pub struct SpatialHash {
    b: f64,
    bt: f64,
    m: f64,
    buckets: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl SpatialHash {
    /// Empty hash for points with `|x|+|y| ≤ m`, tuned to radius `b`.
    pub fn empty(b: f64, m: f64) -> Self {
        let b = b.max(1e-12);
        Self { b, bt: b * b / 4.0 + m * b / 2.0, m, buckets: HashMap::new() }
    }

    pub fn new(points: &[Point], b: f64) -> Self {
        let m = points.iter().map(|p| p.x.abs() + p.y.abs()).fold(0.0, f64::max);
        let mut h = Self::empty(b, m);
        for (i, &p) in points.iter().enumerate() {
            h.insert(i, p);
        }
        h
    }

    #[inline]
    fn key(&self, p: Point) -> (i64, i64, i64) {
        ((p.x / self.b).floor() as i64, (p.y / self.b).floor() as i64, (p.t / self.bt).floor() as i64)
    }

    /// Adds point `i`; it must satisfy the `|x|+|y| ≤ m` bound.
    pub fn insert(&mut self, i: usize, p: Point) {
        debug_assert!(p.x.abs() + p.y.abs() <= self.m * (1.0 + 1e-12) + 1e-300);
        self.buckets.entry(self.key(p)).or_default().push(i);
    }

    /// Candidate indices (unsorted, unfiltered) for a ball of radius `r`.
    fn candidates(&self, c: Point, r: f64, mut f: impl FnMut(usize)) {
        // |Δx|, |Δy| ≤ r and |Δt| ≤ r²/4 + r(|x_c|+|y_c|)/2 for q = c·z, ‖z‖ ≤ r.
        let mc = c.x.abs() + c.y.abs();
        let reach_t = r * r / 4.0 + r * mc / 2.0;
        let (x0, x1) = (((c.x - r) / self.b).floor() as i64, ((c.x + r) / self.b).floor() as i64);
        let (y0, y1) = (((c.y - r) / self.b).floor() as i64, ((c.y + r) / self.b).floor() as i64);
        let (t0, t1) = (((c.t - reach_t) / self.bt).floor() as i64, ((c.t + reach_t) / self.bt).floor() as i64);
        let count = (x1 - x0 + 1) as u128 * (y1 - y0 + 1) as u128 * (t1 - t0 + 1) as u128;
        if count > 4 * self.buckets.len() as u128 {
            for v in self.buckets.values() {
                v.iter().for_each(|&i| f(i));
            }
            return;
        }
        for ix in x0..=x1 {
            for iy in y0..=y1 {
                for it in t0..=t1 {
                    if let Some(v) = self.buckets.get(&(ix, iy, it)) {
                        v.iter().for_each(|&i| f(i));
                    }
                }
            }
        }
    }

    /// Sorted indices of `points` within distance `r` of `c`.
    pub fn query(&self, points: &[Point], c: Point, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.candidates(c, r, |i| {
            if within(c, points[i], r) {
                out.push(i)
            }
        });
        out.sort_unstable();
        out
    }

    /// Index of the nearest stored point to `c` among those within `r`,
    /// ties broken by lower index.
    pub fn nearest_within(&self, points: &[Point], c: Point, r: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.candidates(c, r, |i| {
            let d = koranyi_norm(left_quotient(c, points[i]));
            if d <= r {
                best = match best {
                    Some((j, e)) if e < d || (e == d && j < i) => Some((j, e)),
                    _ => Some((i, d)),
                };
            }
        });
        best
    }

    /// Whether any stored point lies within `r` of `c` and satisfies `pred`.
    pub fn any_within(&self, points: &[Point], c: Point, r: f64, mut pred: impl FnMut(usize) -> bool) -> bool {
        let mut hit = false;
        self.candidates(c, r, |i| {
            if !hit && pred(i) && within(c, points[i], r) {
                hit = true;
            }
        });
        hit
    }
}

/// Ball-query strategy chosen by cloud size.
#[derive(Debug, Clone)]
pub enum BallIndex {
    BruteForce,
    Hash(SpatialHash),
}

impl BallIndex {
    pub fn for_points(points: &[Point], typical_radius: f64) -> Self {
        if points.len() <= BRUTE_FORCE_LIMIT {
            BallIndex::BruteForce
        } else {
            BallIndex::Hash(SpatialHash::new(points, typical_radius))
        }
    }

    pub fn for_measure(mu: &GraphMeasure, typical_radius: f64) -> Self {
        Self::for_points(&mu.points, typical_radius)
    }

    pub fn query(&self, points: &[Point], c: Point, r: f64) -> Vec<usize> {
        match self {
            BallIndex::BruteForce => ball_brute_force(points, c, r),
            BallIndex::Hash(h) => h.query(points, c, r),
        }
    }
}

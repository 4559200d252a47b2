//! Monte Carlo area of the vertical projection of a Korányi ball.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{Point, VerticalSubgroup};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaEstimate {
    pub area: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl AreaEstimate {
    /// `area / r³` and its standard error.
    pub fn normalized(&self, r: f64) -> (f64, f64) {
        let r3 = r * r * r;
        (self.area / r3, self.std_err / r3)
    }
}

/// Whether `(w1, w2) ∈ π_W(B(z, r))` for the `(y,t)`-plane, i.e. whether
/// `min_v ‖z⁻¹·(v, w1, w2 − w1·v/2)‖ ≤ r`.
fn in_projection(z: Point, w1: f64, w2: f64, r: f64) -> bool {
    // ‖z⁻¹p(v)‖⁴ = ((v−x0)² + b²)² + 16(c + k·v)², convex in v.
    let b = w1 - z.y;
    let c = w2 - z.t - 0.5 * z.x * w1;
    let k = 0.5 * (z.y - w1);
    let g = |v: f64| {
        let a = (v - z.x) * (v - z.x) + b * b;
        a * a + 16.0 * (c + k * v) * (c + k * v)
    };
    let dg = |v: f64| {
        let a = (v - z.x) * (v - z.x) + b * b;
        4.0 * a * (v - z.x) + 32.0 * k * (c + k * v)
    };
    let r4 = r.powi(4);
    let (mut lo, mut hi) = (z.x - r, z.x + r);
    if dg(lo) >= 0.0 {
        return g(lo) <= r4;
    }
    if dg(hi) <= 0.0 {
        return g(hi) <= r4;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if dg(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if g(mid) <= r4 {
            return true;
        }
    }
    g(0.5 * (lo + hi)) <= r4
}

/// Rejection sampling in the box `|w1 − y0| ≤ r`,
/// `|w2 − t0 − x0y0/2| ≤ 3r²/4 + |x0|r` (coordinates of `z` in the
/// `θ = 0` frame).
pub fn projected_ball_area(w: &VerticalSubgroup, z: Point, r: f64, n_mc: usize, seed: u64) -> Result<AreaEstimate> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius {r}")));
    }
    if n_mc < 10_000 {
        return Err(Error::InvalidArgument(format!("n_mc = {n_mc} below 10^4")));
    }
    z.validate()?;
    let z = z.rotate(-w.theta());
    let c1 = z.y;
    let c2 = z.t + 0.5 * z.x * z.y;
    let h1 = r;
    let h2 = 0.75 * r * r + z.x.abs() * r;
    let box_area = 4.0 * h1 * h2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n_mc {
        let w1 = c1 + rng.gen_range(-h1..h1);
        let w2 = c2 + rng.gen_range(-h2..h2);
        if in_projection(z, w1, w2, r) {
            hits += 1;
        }
    }
    let p = hits as f64 / n_mc as f64;
    Ok(AreaEstimate {
        area: p * box_area,
        std_err: box_area * (p * (1.0 - p) / n_mc as f64).sqrt(),
        samples: n_mc,
    })
}

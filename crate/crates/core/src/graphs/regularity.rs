//! Sampling-based regularity statistics for intrinsic C^{1,α} functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{graph_map, recentre, IntrinsicFunction};
use crate::error::{Error, Result};
use crate::group::{left_quotient, WPoint};

/// Number of directions in the angular net of a Korányi ball in `W`.
pub const ANGULAR_NET: usize = 64;

/// Points of `{‖(y,t)‖ ≤ r}`: 64 directions on the unit sphere at radial
/// levels 1/4, 1/2, 3/4, 1, scaled anisotropically (`y ~ r`, `t ~ r²`).
pub fn ball_net(r: f64) -> Vec<WPoint> {
    let mut out = Vec::with_capacity(4 * ANGULAR_NET);
    for level in [0.25, 0.5, 0.75, 1.0] {
        let rho = level * r;
        for k in 0..ANGULAR_NET {
            let a = 2.0 * std::f64::consts::PI * k as f64 / ANGULAR_NET as f64;
            let c = a.cos();
            out.push(WPoint::new(rho * c.signum() * c.abs().sqrt(), rho * rho * a.sin() / 4.0));
        }
    }
    out
}

/// `max |φ(y0,t1) − φ(y0,t2)| / |t1 − t2|^{(1+α)/2}` over sample pairs.
pub fn vertical_line_hoelder_stat(phi: &IntrinsicFunction, y0: f64, t_samples: &[f64]) -> Result<f64> {
    let mut ts: Vec<f64> = t_samples.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts.len() < 2 {
        return Err(Error::InvalidArgument("need at least two distinct t samples".into()));
    }
    let e = (1.0 + phi.alpha) / 2.0;
    let vals: Vec<f64> = ts.iter().map(|&t| phi.eval(WPoint::new(y0, t))).collect();
    let mut best: f64 = 0.0;
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            best = best.max((vals[i] - vals[j]).abs() / (ts[j] - ts[i]).powf(e));
        }
    }
    Ok(best)
}

/// Decay of the affine approximation error `E(r)` against `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    /// Least-squares slope of `log E` against `log r`; `+∞` when exact.
    pub slope: f64,
    /// `E(r) = 0` at every scale.
    pub exact: bool,
    pub errors: Vec<(f64, f64)>,
}

/// `E(r) = sup_{‖(y,t)‖≤r} |φ^{(p⁻¹)}(y,t) − ∇^φφ(w)·y|` with `p = Φ(w)`,
/// fitted against `r` in log-log scale. Scales where `E` is at rounding
/// level are left out of the fit.
pub fn linear_approx_slope(phi: &IntrinsicFunction, w: WPoint, scales: &[f64]) -> SlopeFit {
    let psi = recentre(phi, w);
    let g = phi.jet(w).intrinsic_gradient();
    let errors: Vec<(f64, f64)> = scales
        .iter()
        .map(|&r| {
            let e = ball_net(r)
                .into_iter()
                .map(|q| (psi.eval(q) - g * q.w1).abs())
                .fold(0.0, f64::max);
            (r, e)
        })
        .collect();
    // Errors at rounding level count as zero.
    let floor = 1e-13 * (1.0 + psi.eval(WPoint::new(0.0, 0.0)).abs() + phi.eval(w).abs() + g.abs());
    let pts: Vec<(f64, f64)> = errors.iter().filter(|e| e.1 > floor).map(|&(r, e)| (r.ln(), e.ln())).collect();
    if pts.is_empty() {
        return SlopeFit { slope: f64::INFINITY, exact: true, errors };
    }
    SlopeFit { slope: ls_slope(&pts), exact: false, errors }
}

pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// Seeded `(base, displacement)` pairs: bases uniform in the function's
/// domain box, displacements with Korányi norm log-uniform in `[1e-3, r_max]`.
pub fn hoelder_samples(phi: &IntrinsicFunction, n: usize, r_max: f64, seed: u64) -> Vec<(WPoint, WPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [y0, y1, t0, t1] = phi.domain;
    (0..n)
        .map(|_| {
            let base = WPoint::new(rng.gen_range(y0..=y1), rng.gen_range(t0..=t1));
            let r = rng.gen_range((1e-3f64).ln()..=r_max.ln()).exp();
            let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let c = a.cos();
            (base, WPoint::new(r * c.signum() * c.abs().sqrt(), r * r * a.sin() / 4.0))
        })
        .collect()
}

/// Empirical `H`: sup of
/// `|∇^φφ(y+y0, t+t0+φ(y0,t0)y) − ∇^φφ(y0,t0)| / ‖(y,t)‖^α`.
pub fn estimate_hoelder_h(phi: &IntrinsicFunction, samples: &[(WPoint, WPoint)]) -> f64 {
    let mut best: f64 = 0.0;
    for &(b, d) in samples {
        let n = d.norm();
        if n == 0.0 {
            continue;
        }
        let j0 = phi.jet(b);
        let moved = WPoint::new(d.w1 + b.w1, d.w2 + b.w2 + j0.phi * d.w1);
        let diff = (phi.jet(moved).intrinsic_gradient() - j0.intrinsic_gradient()).abs();
        best = best.max(diff / n.powf(phi.alpha));
    }
    best
}

/// Counts random pairs `p, q ∈ Γ(φ)` violating
/// `‖π_V(p⁻¹q)‖ ≤ L·‖π_W(p⁻¹q)‖`.
pub fn cone_test(phi: &IntrinsicFunction, l: f64, n_pairs: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [y0, y1, t0, t1] = phi.domain;
    let mut violations = 0;
    for _ in 0..n_pairs {
        let a = WPoint::new(rng.gen_range(y0..=y1), rng.gen_range(t0..=t1));
        let b = WPoint::new(rng.gen_range(y0..=y1), rng.gen_range(t0..=t1));
        let z = left_quotient(graph_map(phi, a), graph_map(phi, b));
        let (w, v) = phi.w.split(z);
        if v.abs() > l * w.norm() {
            violations += 1;
        }
    }
    violations
}

/// `|∇^ψψ(y,0) − ∇^ψψ(0,0)| / |y|^α` for `ψ = φ^{(Φ(w)⁻¹)}`.
pub fn naive_hoelder_quotient(phi: &IntrinsicFunction, w: WPoint, y: f64) -> f64 {
    let psi = recentre(phi, w);
    let g = |q: WPoint| psi.jet(q).intrinsic_gradient();
    (g(WPoint::new(y, 0.0)) - g(WPoint::new(0.0, 0.0))).abs() / y.abs().powf(phi.alpha)
}

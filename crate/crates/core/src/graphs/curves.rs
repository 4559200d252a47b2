//! Characteristic curves `τ'(s) = φ(s, τ(s))` and the integral
//! representation of `φ` along them.

use super::IntrinsicFunction;
use crate::error::{Error, Result};
use crate::group::WPoint;

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub y0: f64,
    pub t0: f64,
    /// `(s, τ(s))`, strictly increasing in `s`.
    pub samples: Vec<(f64, f64)>,
    /// Index of `(y0, t0)` in `samples`.
    pub origin: usize,
    pub step: f64,
    /// Set when `|τ|` exceeded the bound and the curve was truncated.
    pub blown_up: bool,
    /// Half-step Richardson estimate of the global error.
    pub error_estimate: f64,
}

fn rk4_leg(phi: &IntrinsicFunction, y0: f64, t0: f64, s_end: f64, step: f64, bound: f64) -> (Vec<(f64, f64)>, bool) {
    let len = s_end - y0;
    let n = (len.abs() / step).ceil() as usize;
    let mut out = vec![(y0, t0)];
    if n == 0 {
        return (out, false);
    }
    let h = len / n as f64;
    let f = |s: f64, t: f64| phi.eval(WPoint::new(s, t));
    let mut t = t0;
    for i in 0..n {
        let s = y0 + i as f64 * h;
        let k1 = f(s, t);
        let k2 = f(s + h / 2.0, t + h / 2.0 * k1);
        let k3 = f(s + h / 2.0, t + h / 2.0 * k2);
        let k4 = f(s + h, t + h * k3);
        t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !t.is_finite() || t.abs() > bound {
            return (out, true);
        }
        let s_next = if i + 1 == n { s_end } else { y0 + (i + 1) as f64 * h };
        out.push((s_next, t));
    }
    (out, false)
}

fn integrate(phi: &IntrinsicFunction, y0: f64, t0: f64, s_range: (f64, f64), step: f64, bound: f64) -> (Vec<(f64, f64)>, usize, bool) {
    let (back, b1) = rk4_leg(phi, y0, t0, s_range.0, step, bound);
    let (fwd, b2) = rk4_leg(phi, y0, t0, s_range.1, step, bound);
    let origin = back.len() - 1;
    let mut samples: Vec<(f64, f64)> = back.into_iter().rev().collect();
    samples.extend_from_slice(&fwd[1..]);
    (samples, origin, b1 || b2)
}

/// Classical RK4 with fixed step from `(y0, t0)` over `s_range`, which must
/// contain `y0`. Integration stops once `|τ|` exceeds `blowup_bound`.
pub fn characteristic_curve(
    phi: &IntrinsicFunction,
    y0: f64,
    t0: f64,
    s_range: (f64, f64),
    step: f64,
    blowup_bound: f64,
) -> Result<Curve> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(s_range.0 <= y0 && y0 <= s_range.1) || !y0.is_finite() || !t0.is_finite() {
        return Err(Error::InvalidArgument(format!("y0 = {y0} outside s-range {s_range:?}")));
    }
    let (samples, origin, blown_up) = integrate(phi, y0, t0, s_range, step, blowup_bound);
    let (fine, fine_origin, _) = integrate(phi, y0, t0, s_range, step / 2.0, blowup_bound);
    let mut err: f64 = 0.0;
    for (k, &(s, t)) in samples.iter().enumerate() {
        let j = fine_origin as isize + 2 * (k as isize - origin as isize);
        if let Some(&(sf, tf)) = usize::try_from(j).ok().and_then(|j| fine.get(j)) {
            if (sf - s).abs() <= 1e-9 * step.max(s.abs()) {
                err = err.max((tf - t).abs() / 15.0);
            }
        }
    }
    Ok(Curve { y0, t0, samples, origin, step, blown_up, error_estimate: err })
}

/// Cumulative `∫_{x_0}^{x_k} g` on a uniform grid: composite Simpson, a 3/8
/// panel for odd counts, and a four-point rule on the first interval.
fn cumulative(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    let mut simpson = vec![0.0; n];
    for k in (2..n).step_by(2) {
        simpson[k] = simpson[k - 2] + h / 3.0 * (g[k - 2] + 4.0 * g[k - 1] + g[k]);
    }
    for k in 1..n {
        out[k] = if k % 2 == 0 {
            simpson[k]
        } else if k >= 3 {
            simpson[k - 3] + 3.0 * h / 8.0 * (g[k - 3] + 3.0 * g[k - 2] + 3.0 * g[k - 1] + g[k])
        } else if n >= 4 {
            h / 24.0 * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3])
        } else {
            h / 2.0 * (g[0] + g[1])
        };
    }
    out
}

/// Residuals along one leg starting at the base point. Legs are uniform by
/// construction.
fn leg_residuals(phi: &IntrinsicFunction, pts: &[(f64, f64)], phi0: f64) -> Vec<f64> {
    if pts.len() < 2 {
        return vec![0.0; pts.len()];
    }
    let h = pts[1].0 - pts[0].0;
    let g: Vec<f64> = pts.iter().map(|&(s, t)| phi.jet(WPoint::new(s, t)).intrinsic_gradient()).collect();
    let integral = cumulative(&g, h);
    pts.iter().zip(integral).map(|(&(s, t), i)| (phi.eval(WPoint::new(s, t)) - phi0 - i).abs()).collect()
}

/// `|φ(s,τ(s)) − φ(y0,t0) − ∫_{y0}^s ∇^φφ(r,τ(r)) dr|` per sample, aligned with
/// `curve.samples`.
pub fn integral_residuals(phi: &IntrinsicFunction, curve: &Curve) -> Vec<f64> {
    let phi0 = phi.eval(WPoint::new(curve.y0, curve.t0));
    let back: Vec<(f64, f64)> = curve.samples[..=curve.origin].iter().rev().copied().collect();
    let mut out: Vec<f64> = leg_residuals(phi, &back, phi0).into_iter().rev().collect();
    out.extend(leg_residuals(phi, &curve.samples[curve.origin..], phi0).into_iter().skip(1));
    out
}

/// Maximum of [`integral_residuals`].
pub fn check_integral_representation(phi: &IntrinsicFunction, curve: &Curve) -> f64 {
    integral_residuals(phi, curve).into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_family_is_exact() {
        let f = IntrinsicFunction::constant(0.7);
        let c = characteristic_curve(&f, 0.2, -0.1, (-1.0, 1.0), 0.01, 1e6).unwrap();
        for &(s, t) in &c.samples {
            assert!((t - (-0.1 + 0.7 * (s - 0.2))).abs() < 1e-13);
        }
        assert!(c.samples.windows(2).all(|w| w[1].0 > w[0].0));
        assert_eq!(c.samples[c.origin], (0.2, -0.1));
        assert_eq!(check_integral_representation(&f, &c), 0.0);
    }

    #[test]
    fn linear_family_closed_form() {
        let b = 1.3;
        let f = IntrinsicFunction::linear(b);
        let c = characteristic_curve(&f, -0.3, 0.5, (-1.0, 2.0), 0.05, 1e6).unwrap();
        for &(s, t) in &c.samples {
            assert!((t - (0.5 + b * (s * s - 0.09) / 2.0)).abs() < 1e-12);
        }
        assert!(check_integral_representation(&f, &c) < 1e-12);
    }

    #[test]
    fn zero_family_is_flat() {
        let f = IntrinsicFunction::zero();
        let c = characteristic_curve(&f, 0.0, 0.3, (0.0, 1.0), 0.1, 1e6).unwrap();
        assert!(c.samples.iter().all(|&(_, t)| t == 0.3));
    }

    #[test]
    fn cubic_right_hand_side_is_exact() {
        // φ(s, τ) = s³ gives τ = t0 + (s⁴ − y0⁴)/4.
        let f = IntrinsicFunction::polynomial(vec![(3, 0, 1.0)]).unwrap();
        let c = characteristic_curve(&f, 0.0, 1.0, (-1.0, 1.0), 0.125, 1e6).unwrap();
        for &(s, t) in &c.samples {
            assert!((t - (1.0 + s.powi(4) / 4.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn ex1_integral_representation_converges() {
        let f = IntrinsicFunction::ex1(1.0).unwrap();
        let mut prev = f64::INFINITY;
        for &h in &[0.1, 0.05, 0.025] {
            let c = characteristic_curve(&f, 0.0, 0.5, (0.0, 1.0), h, 1e6).unwrap();
            assert!(!c.blown_up);
            let r = check_integral_representation(&f, &c);
            assert!(r < prev / 4.0, "h={h} residual {r} prev {prev}");
            prev = r;
        }
        let c = characteristic_curve(&f, 0.0, 0.5, (0.0, 1.0), 1e-3, 1e6).unwrap();
        assert!(check_integral_representation(&f, &c) < 1e-5);
        assert!(c.error_estimate < 1e-10);
    }

    #[test]
    fn residuals_align_with_samples() {
        let f = IntrinsicFunction::ex1(1.0).unwrap();
        let c = characteristic_curve(&f, 0.1, 0.5, (-0.5, 0.73), 0.1, 1e6).unwrap();
        let r = integral_residuals(&f, &c);
        assert_eq!(r.len(), c.samples.len());
        assert_eq!(r[c.origin], 0.0);
        assert!(r.iter().all(|x| x.is_finite()) && r[0] > 0.0);
    }

    #[test]
    fn blow_up_is_flagged() {
        // τ' = τ² from τ(0) = 1 blows up at s = 1.
        let f = IntrinsicFunction::polynomial(vec![(0, 2, 1.0)]).unwrap();
        let c = characteristic_curve(&f, 0.0, 1.0, (0.0, 2.0), 1e-3, 1e3).unwrap();
        assert!(c.blown_up);
        assert!(c.samples.last().unwrap().0 < 1.0);
    }

    #[test]
    fn quadratic_bound_on_recentred_bump() {
        let b = IntrinsicFunction::bump(1.0, 0.3).unwrap();
        let l = b.l.unwrap();
        let psi = super::super::recentre(&b, WPoint::new(0.2, 0.05));
        let c = characteristic_curve(&psi, 0.0, 0.0, (-0.5, 0.5), 1e-3, 1e6).unwrap();
        for &(s, t) in &c.samples {
            assert!(t.abs() <= 10.0 * l * s * s + 1e-15);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let f = IntrinsicFunction::zero();
        assert!(characteristic_curve(&f, 0.0, 0.0, (0.0, 1.0), 0.0, 1.0).is_err());
        assert!(characteristic_curve(&f, 2.0, 0.0, (0.0, 1.0), 0.1, 1.0).is_err());
    }
}

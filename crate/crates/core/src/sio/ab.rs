//! Cancellation integrals and operator norms on vertical planes.

use crate::error::{Error, Result};
use crate::group::{VerticalSubgroup, WPoint};
use crate::kernels::{BumpProfile, CZKernel};
use crate::summation::Neumaier;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbValue {
    pub value: f64,
    /// `Σ |term|`, the scale against which the value is judged.
    pub abs_sum: f64,
}

/// `∫_W [ψ^R(w) − ψ^r(w)] K(w) dw` with `ψ^R(w) = ψ(‖w‖/R)` for a scalar
/// kernel, by the midpoint rule on `|w1| ≤ 2R`, `|w2| ≤ 4R²`.
///
/// The grid is symmetric under both `w1 ↦ −w1` and `w2 ↦ −w2`, and terms are
/// added in groups `((w1,w2) + (−w1,w2)) + ((w1,−w2) + (−w1,−w2))`. For a
/// horizontally antisymmetric or antisymmetric kernel every group is exactly
/// zero in floating point.
pub fn ab_integral(k: &CZKernel, w: &VerticalSubgroup, psi: BumpProfile, r: f64, big_r: f64, quad_n: usize) -> Result<AbValue> {
    if k.dim() != 1 {
        return Err(Error::InvalidArgument(format!("ab_integral needs a scalar kernel, got dimension {}", k.dim())));
    }
    if !(0.0 < r && r < big_r && big_r.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < r < R, got r = {r}, R = {big_r}")));
    }
    let half = (quad_n / 2).max(1);
    let (a1, a2) = (2.0 * big_r, 4.0 * big_r * big_r);
    let (h1, h2) = (a1 / half as f64, a2 / half as f64);
    let cell = h1 * h2;
    let term = |w1: f64, w2: f64| {
        let q = WPoint::new(w1, w2);
        let n = q.norm();
        let weight = psi.eval(n / big_r) - psi.eval(n / r);
        if weight == 0.0 {
            0.0
        } else {
            weight * k.eval_raw(w.embed_w(q))[0] * cell
        }
    };
    let (mut total, mut abs) = (Neumaier::new(), Neumaier::new());
    for i in 0..half {
        let w1 = (i as f64 + 0.5) * h1;
        for l in 0..half {
            let w2 = (l as f64 + 0.5) * h2;
            let t = [term(w1, w2), term(-w1, w2), term(w1, -w2), term(-w1, -w2)];
            total.add((t[0] + t[1]) + (t[2] + t[3]));
            t.iter().for_each(|v| abs.add(v.abs()));
        }
    }
    Ok(AbValue { value: total.value(), abs_sum: abs.value() })
}

/// Centred midpoint grid on a rectangle of `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneGrid {
    pub n1: usize,
    pub n2: usize,
    /// Half-widths of the rectangle in `w1` and `w2`.
    pub a1: f64,
    pub a2: f64,
}

impl PlaneGrid {
    fn steps(&self) -> (f64, f64) {
        (2.0 * self.a1 / self.n1 as f64, 2.0 * self.a2 / self.n2 as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneNorm {
    pub estimate: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on `T*T` for the truncated convolution
/// `Tf(w) = Σ_{‖w−w'‖>ε} K(w − w') f(w') dA` on the grid. `W` is abelian, so
/// the kernel only depends on grid offsets and is tabulated once.
pub fn ubvp_plane_norm(k: &CZKernel, w: &VerticalSubgroup, grid: PlaneGrid, eps: f64) -> Result<PlaneNorm> {
    if grid.n1 == 0 || grid.n2 == 0 || !(grid.a1 > 0.0 && grid.a2 > 0.0) {
        return Err(Error::InvalidArgument(format!("degenerate plane grid {grid:?}")));
    }
    let (h1, h2) = grid.steps();
    let (n1, n2) = (grid.n1 as isize, grid.n2 as isize);
    let dim = k.dim();
    let (m1, m2) = (2 * n1 - 1, 2 * n2 - 1);
    let area = h1 * h2;
    let mut table = vec![[0.0f64; 3]; (m1 * m2) as usize];
    for d1 in -(n1 - 1)..n1 {
        for d2 in -(n2 - 1)..n2 {
            let q = WPoint::new(d1 as f64 * h1, d2 as f64 * h2);
            if q.norm() > eps {
                let v = k.eval_raw(w.embed_w(q));
                table[((d1 + n1 - 1) * m2 + d2 + n2 - 1) as usize] = v.map(|c| c * area);
            }
        }
    }
    let tab = |d1: isize, d2: isize| &table[((d1 + n1 - 1) * m2 + d2 + n2 - 1) as usize];
    let nn = (n1 * n2) as usize;
    let apply_ttt = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; nn];
        for c in 0..dim {
            // y = T_c x
            let mut y = vec![0.0; nn];
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    let mut acc = Neumaier::new();
                    for k1 in 0..n1 {
                        for k2 in 0..n2 {
                            acc.add(tab(i1 - k1, i2 - k2)[c] * x[(k1 * n2 + k2) as usize]);
                        }
                    }
                    y[(i1 * n2 + i2) as usize] = acc.value();
                }
            }
            // out += T_c* y
            for k1 in 0..n1 {
                for k2 in 0..n2 {
                    let mut acc = Neumaier::new();
                    for i1 in 0..n1 {
                        for i2 in 0..n2 {
                            acc.add(tab(i1 - k1, i2 - k2)[c] * y[(i1 * n2 + i2) as usize]);
                        }
                    }
                    out[(k1 * n2 + k2) as usize] += acc.value();
                }
            }
        }
        out
    };
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut x: Vec<f64> = (0..nn).map(|i| 1.0 + 0.1 * ((i * 7) % 11) as f64).collect();
    let n0 = norm(&x);
    x.iter_mut().for_each(|v| *v /= n0);
    let mut lambda = 0.0;
    for it in 1..=30 {
        let y = apply_ttt(&x);
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok(PlaneNorm { estimate: 0.0, iterations: it, converged: true });
        }
        let prev = lambda;
        lambda = ny;
        x = y.into_iter().map(|v| v / ny).collect();
        if it > 1 && (lambda - prev).abs() <= 1e-6 * lambda {
            return Ok(PlaneNorm { estimate: lambda.sqrt(), iterations: it, converged: true });
        }
    }
    Ok(PlaneNorm { estimate: lambda.sqrt(), iterations: 30, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn builtins_cancel_exactly() {
        let psi = BumpProfile::default();
        for k in [CZKernel::riesz(), CZKernel::quasi_riesz()] {
            for c in 0..k.dim() {
                let kc = k.component(c).unwrap();
                for theta in [0.0, PI / 6.0, PI / 4.0, PI / 2.0] {
                    let w = VerticalSubgroup::new(theta).unwrap();
                    let v = ab_integral(&kc, &w, psi, 0.5, 2.0, 128).unwrap();
                    assert!(v.value.abs() <= 1e-12 * v.abs_sum, "{} θ={theta}: {v:?}", kc.name);
                    if k.name == "riesz" {
                        assert!(v.abs_sum > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn radial_kernel_does_not_cancel() {
        let psi = BumpProfile::default();
        let w = VerticalSubgroup::YT_PLANE;
        let a = ab_integral(&CZKernel::radial(), &w, psi, 0.5, 2.0, 256).unwrap();
        let b = ab_integral(&CZKernel::radial(), &w, psi, 0.25, 4.0, 512).unwrap();
        assert!(a.value > 1e-2 && b.value > 1.5 * a.value, "{a:?} {b:?}");
        assert!(ab_integral(&CZKernel::riesz(), &w, psi, 0.5, 2.0, 64).is_err());
        assert!(ab_integral(&CZKernel::radial(), &w, psi, 2.0, 0.5, 64).is_err());
    }

    #[test]
    fn plane_norm_examples() {
        let g = PlaneGrid { n1: 12, n2: 12, a1: 1.0, a2: 0.25 };
        let z = ubvp_plane_norm(&CZKernel::zero(2), &VerticalSubgroup::YT_PLANE, g, 0.2).unwrap();
        assert_eq!(z.estimate, 0.0);
        let est: Vec<f64> = [0.0, PI / 4.0, PI / 2.0]
            .iter()
            .map(|&t| ubvp_plane_norm(&CZKernel::riesz(), &VerticalSubgroup::new(t).unwrap(), g, 0.2).unwrap().estimate)
            .collect();
        assert!(est[0] > 0.0);
        for e in &est {
            assert!((e - est[0]).abs() <= 0.1 * est[0]);
        }
    }
}

//! `⟨Δ_H f, g⟩ = ∫ f Δ_H g` for a separable plateau test function `g`.

use rayon::prelude::*;

use super::potential::Charges;
use crate::error::{Error, Result};
use crate::group::Point;
use crate::summation::Neumaier;

/// `S(u) = 6u⁵ − 15u⁴ + 10u³`, a `C²` step from 0 to 1.
fn step(u: f64) -> (f64, f64, f64) {
    let u = u.clamp(0.0, 1.0);
    let u2 = u * u;
    (u2 * u * (10.0 + u * (6.0 * u - 15.0)), 30.0 * u2 * (u - 1.0) * (u - 1.0), 60.0 * u * (u - 1.0) * (2.0 * u - 1.0))
}

/// `β(s)`, `β'(s)`, `β''(s)` for the profile equal to 1 on `|s| ≤ a` and 0 on
/// `|s| ≥ b`.
fn plateau_1d(s: f64, a: f64, b: f64) -> (f64, f64, f64) {
    let r = s.abs();
    if r <= a {
        return (1.0, 0.0, 0.0);
    }
    if r >= b {
        return (0.0, 0.0, 0.0);
    }
    let w = b - a;
    let (v, d1, d2) = step((b - r) / w);
    (v, -s.signum() * d1 / w, d2 / (w * w))
}

/// `g(x, y, t) = β_x(x) β_y(y) β_t(t)` centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauBox {
    /// Half-widths of the region where `g = 1`.
    pub plateau: [f64; 3],
    /// Half-widths of the support of `g`.
    pub outer: [f64; 3],
}

impl PlateauBox {
    pub fn new(plateau: [f64; 3], outer: [f64; 3]) -> Result<Self> {
        if (0..3).any(|i| !(plateau[i] > 0.0 && plateau[i] < outer[i] && outer[i].is_finite())) {
            return Err(Error::InvalidArgument(format!("need 0 < plateau < outer, got {plateau:?} and {outer:?}")));
        }
        Ok(Self { plateau, outer })
    }

    pub fn g(&self, p: Point) -> f64 {
        let f = |s, i: usize| plateau_1d(s, self.plateau[i], self.outer[i]).0;
        f(p.x, 0) * f(p.y, 1) * f(p.t, 2)
    }

    /// `Δ_H g = g_xx + g_yy − y g_xt + x g_yt + (x² + y²)/4 · g_tt`.
    pub fn sub_laplacian(&self, p: Point) -> f64 {
        let (bx, dx, ddx) = plateau_1d(p.x, self.plateau[0], self.outer[0]);
        let (by, dy, ddy) = plateau_1d(p.y, self.plateau[1], self.outer[1]);
        let (bt, dt, ddt) = plateau_1d(p.t, self.plateau[2], self.outer[2]);
        ddx * by * bt + bx * ddy * bt - p.y * dx * by * dt + p.x * bx * dy * dt
            + 0.25 * (p.x * p.x + p.y * p.y) * bx * by * ddt
    }

    /// Whether every charge of nonzero mass lies inside the plateau with a
    /// margin of `margin` times the transition width in each coordinate.
    pub fn covers(&self, charges: &Charges, margin: f64) -> bool {
        let lim: Vec<f64> = (0..3).map(|i| self.plateau[i] - margin * (self.outer[i] - self.plateau[i])).collect();
        charges
            .points
            .iter()
            .zip(&charges.masses)
            .filter(|(_, &m)| m != 0.0)
            .all(|(q, _)| q.x.abs() <= lim[0] && q.y.abs() <= lim[1] && q.t.abs() <= lim[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pairing {
    /// `∫ f Δ_H g dL³`.
    pub value: f64,
    /// `ν(ℍ)`.
    pub mass: f64,
    /// `−value / mass`; the normalising constant of `Φ`.
    pub constant: f64,
    pub evaluations: usize,
}

/// Plateau margin, as a fraction of the transition width, required around the
/// charges.
pub const PLATEAU_MARGIN: f64 = 0.05;

/// Midpoint rule with `n` cells per axis over the support of `g`; cells where
/// `Δ_H g` vanishes are skipped. Slices are summed in parallel and combined in
/// order.
pub fn nonharmonicity_pairing(charges: &Charges, test: &PlateauBox, n: usize) -> Result<Pairing> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 cells per axis, got {n}")));
    }
    if !test.covers(charges, PLATEAU_MARGIN) {
        return Err(Error::InvalidArgument("test function is not identically 1 around the support".into()));
    }
    let h: Vec<f64> = test.outer.iter().map(|b| 2.0 * b / n as f64).collect();
    let coord = |i: usize, k: usize| -test.outer[i] + (k as f64 + 0.5) * h[i];
    let slices: Vec<Result<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|kt| {
            let mut acc = Neumaier::new();
            let mut evals = 0;
            for ky in 0..n {
                for kx in 0..n {
                    let p = Point::new(coord(0, kx), coord(1, ky), coord(2, kt));
                    let lg = test.sub_laplacian(p);
                    if lg == 0.0 {
                        continue;
                    }
                    acc.add(charges.potential(p)? * lg);
                    evals += 1;
                }
            }
            Ok((acc.value(), evals))
        })
        .collect();
    let mut acc = Neumaier::new();
    let mut evaluations = 0;
    for s in slices {
        let (v, e) = s?;
        acc.add(v);
        evaluations += e;
    }
    let value = acc.value() * h[0] * h[1] * h[2];
    let mass = charges.total_mass();
    Ok(Pairing { value, mass, constant: if mass == 0.0 { 0.0 } else { -value / mass }, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::IntrinsicFunction;
    use crate::group::sub_laplacian_fd;
    use crate::quadrature::{build_graph_measure, Domain};

    fn boxed() -> PlateauBox {
        PlateauBox::new([0.6, 0.7, 0.3], [1.2, 1.4, 0.6]).unwrap()
    }

    #[test]
    fn step_is_c2() {
        assert_eq!(step(0.0), (0.0, 0.0, 0.0));
        assert_eq!(step(1.0), (1.0, 0.0, 0.0));
        let (v, d1, d2) = step(0.3);
        let h = 1e-5;
        assert!(((step(0.3 + h).0 - step(0.3 - h).0) / (2.0 * h) - d1).abs() < 1e-8);
        assert!(((step(0.3 + h).1 - step(0.3 - h).1) / (2.0 * h) - d2).abs() < 1e-7);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn analytic_sub_laplacian_matches_fd() {
        let b = boxed();
        for p in [Point::new(0.9, 0.2, 0.1), Point::new(-0.7, 1.0, -0.45), Point::new(0.1, -0.2, 0.5), Point::new(0.8, -0.9, 0.4)] {
            let fd = sub_laplacian_fd(|q| b.g(q), p, 1e-4).unwrap();
            assert!((fd - b.sub_laplacian(p)).abs() < 1e-5 * (1.0 + fd.abs()), "{fd} vs {}", b.sub_laplacian(p));
        }
        assert_eq!(b.sub_laplacian(Point::new(0.1, 0.1, 0.1)), 0.0);
        assert_eq!(b.g(Point::new(2.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn point_mass_pairing_is_negative_and_position_independent() {
        let b = boxed();
        let a = nonharmonicity_pairing(&Charges::point_mass(Point::IDENTITY, 1.0), &b, 40).unwrap();
        let c = nonharmonicity_pairing(&Charges::point_mass(Point::new(0.2, -0.3, 0.1), 2.0), &b, 40).unwrap();
        assert!(a.value < 0.0);
        assert!((a.constant / c.constant - 1.0).abs() < 0.02, "{} {}", a.constant, c.constant);
    }

    #[test]
    fn graph_pairing_is_linear_in_density() {
        let mu = build_graph_measure(&IntrinsicFunction::bump(0.4, 0.3).unwrap(), Domain::new(-0.5, 0.5, -0.1, 0.1).unwrap(), 16, 32).unwrap();
        let ones = vec![1.0; mu.len()];
        let half: Vec<f64> = mu.nodes.iter().map(|w| 0.5 * (1.0 + w.w1)).collect();
        let b = boxed();
        let p1 = nonharmonicity_pairing(&Charges::from_measure(&mu, &ones).unwrap(), &b, 32).unwrap();
        let p2 = nonharmonicity_pairing(&Charges::from_measure(&mu, &half).unwrap(), &b, 32).unwrap();
        assert!(p1.value < 0.0 && p2.value < 0.0);
        assert!((p1.constant / p2.constant - 1.0).abs() < 0.1);
        let zero = nonharmonicity_pairing(&Charges::from_measure(&mu, &vec![0.0; mu.len()]).unwrap(), &b, 8).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn rejects_uncovered_support() {
        let b = PlateauBox::new([0.1, 0.1, 0.1], [0.2, 0.2, 0.2]).unwrap();
        assert!(nonharmonicity_pairing(&Charges::point_mass(Point::new(0.5, 0.0, 0.0), 1.0), &b, 8).is_err());
        assert!(PlateauBox::new([0.3, 0.1, 0.1], [0.2, 0.2, 0.2]).is_err());
    }
}

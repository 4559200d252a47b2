//! Potentials `f(p) = ∫ Φ(q⁻¹p) dν(q)` of the fundamental solution
//! `Φ = ‖·‖⁻²` and the diagnostics run on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{dist, horizontal_derivatives_fd, koranyi_norm4, left_quotient, sub_laplacian_fd4, Point};
use crate::quadrature::GraphMeasure;
use crate::summation::Neumaier;

/// `‖p‖⁻²`, the fundamental solution of the sub-Laplacian up to a constant.
pub fn fundamental_solution(p: Point) -> Result<f64> {
    p.validate()?;
    if p.is_identity() {
        return Err(Error::AtIdentity);
    }
    Ok(1.0 / koranyi_norm4(p).sqrt())
}

/// Finite measure `ν = Σ m_i δ_{q_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Charges {
    pub points: Vec<Point>,
    pub masses: Vec<f64>,
}

impl Charges {
    /// `ν = h·μ` with `h` given per node and valued in `[0, 1]`.
    pub fn from_measure(mu: &GraphMeasure, density: &[f64]) -> Result<Self> {
        if density.len() != mu.len() {
            return Err(Error::InvalidArgument(format!("density has {} values for {} nodes", density.len(), mu.len())));
        }
        if let Some(i) = density.iter().position(|h| !(0.0..=1.0).contains(h)) {
            return Err(Error::InvalidArgument(format!("density {} at node {i} is outside [0, 1]", density[i])));
        }
        Ok(Self {
            points: mu.points.clone(),
            masses: mu.weights.iter().zip(density).map(|(w, h)| w * h).collect(),
        })
    }

    pub fn point_mass(q: Point, mass: f64) -> Self {
        Self { points: vec![q], masses: vec![mass] }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        crate::summation::sum(self.masses.iter().copied())
    }

    /// Distance from `p` to the charges of nonzero mass; `∞` if there are none.
    pub fn support_distance(&self, p: Point) -> f64 {
        self.points
            .iter()
            .zip(&self.masses)
            .filter(|(_, &m)| m != 0.0)
            .map(|(&q, _)| koranyi_norm4(left_quotient(q, p)))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
            .sqrt()
    }

    /// `Σ m_i ‖q_i⁻¹p‖⁻²`, summed in node order.
    pub fn potential(&self, p: Point) -> Result<f64> {
        p.validate()?;
        let mut acc = Neumaier::new();
        for (i, (&q, &m)) in self.points.iter().zip(&self.masses).enumerate() {
            if m == 0.0 {
                continue;
            }
            let n4 = koranyi_norm4(left_quotient(q, p));
            if n4 == 0.0 {
                return Err(Error::CoincidesWithNode(i));
            }
            acc.add(m / n4.sqrt());
        }
        Ok(acc.value())
    }

    /// As [`Charges::potential`], returning `+∞` at a charge.
    pub fn potential_raw(&self, p: Point) -> f64 {
        self.potential(p).unwrap_or(f64::INFINITY)
    }

    /// Potential at many targets, in parallel and in target order.
    pub fn potential_field(&self, targets: &[Point]) -> Result<Vec<f64>> {
        targets.par_iter().map(|&p| self.potential(p)).collect()
    }
}

/// `f(p)` for `ν = h·μ`.
pub fn potential(mu: &GraphMeasure, density: &[f64], p: Point) -> Result<f64> {
    Charges::from_measure(mu, density)?.potential(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicRow {
    pub point: Point,
    pub support_distance: f64,
    /// `|Δ_H f(p)|` by the fourth-order stencil; `None` for rejected points.
    pub residual: Option<f64>,
    pub rejected: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicReport {
    pub h_fd: f64,
    pub rows: Vec<HarmonicRow>,
    pub max_residual: f64,
}

impl HarmonicReport {
    pub fn rejected(&self) -> usize {
        self.rows.iter().filter(|r| r.rejected.is_some()).count()
    }
}

/// Fourth-order FD sub-Laplacian residuals of the potential; points closer
/// than `10·h_fd` to the support are rejected individually.
pub fn check_harmonic_off_support(charges: &Charges, points: &[Point], h_fd: f64) -> Result<HarmonicReport> {
    if !(h_fd > 0.0 && h_fd.is_finite()) {
        return Err(Error::InvalidArgument(format!("fd step must be positive, got {h_fd}")));
    }
    let rows: Vec<HarmonicRow> = points
        .par_iter()
        .map(|&p| {
            let d = charges.support_distance(p);
            if d < 10.0 * h_fd {
                return HarmonicRow {
                    point: p,
                    support_distance: d,
                    residual: None,
                    rejected: Some(format!("distance {d:.3e} to support is below 10·h")),
                };
            }
            match sub_laplacian_fd4(|q| charges.potential_raw(q), p, h_fd) {
                Ok(r) => HarmonicRow { point: p, support_distance: d, residual: Some(r.abs()), rejected: None },
                Err(e) => HarmonicRow { point: p, support_distance: d, residual: None, rejected: Some(e.to_string()) },
            }
        })
        .collect();
    let max_residual = rows.iter().filter_map(|r| r.residual).fold(0.0, f64::max);
    Ok(HarmonicReport { h_fd, rows, max_residual })
}

/// `log₂` of the ratio of maximal residuals at `h` and `h/2`.
pub fn observed_order(coarse: &HarmonicReport, fine: &HarmonicReport) -> f64 {
    (coarse.max_residual / fine.max_residual).log2() / (coarse.h_fd / fine.h_fd).log2()
}

/// Points with Korányi norm log-uniform in `[r_min, r_max]`.
pub fn shell_points(n: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<Point> {
    crate::kernels::log_uniform_samples(n, r_min, r_max, seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzStat {
    pub quotient: f64,
    pub pairs: usize,
    pub skipped: usize,
}

/// `max |f(p) − f(q)| / d(p, q)` over the pairs; coincident pairs are skipped.
pub fn lipschitz_stat<F: Fn(Point) -> f64>(f: F, pairs: &[(Point, Point)]) -> LipschitzStat {
    let mut out = LipschitzStat { quotient: 0.0, pairs: 0, skipped: 0 };
    for &(p, q) in pairs {
        let d = dist(p, q);
        if d == 0.0 {
            out.skipped += 1;
            continue;
        }
        out.pairs += 1;
        out.quotient = out.quotient.max((f(p) - f(q)).abs() / d);
    }
    out
}

/// `max |∇_H f|` over `points` by central differences with step `h`.
pub fn fd_gradient_sup<F: Fn(Point) -> f64 + Sync>(f: F, points: &[Point], h: f64) -> Result<f64> {
    let g: Vec<f64> =
        points.par_iter().map(|&p| horizontal_derivatives_fd(&f, p, h).map(|d| d.gradient_norm())).collect::<Result<_>>()?;
    Ok(g.into_iter().fold(0.0, f64::max))
}

/// For each point `p`: a short horizontal pair `(p, p·(s cos θ, s sin θ, 0))`
/// with random `θ`, and a pair with another randomly chosen point.
pub fn sample_pairs(points: &[Point], step: f64, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * points.len());
    for &p in points {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        out.push((p, p.mul(Point::new(step * a.cos(), step * a.sin(), 0.0))));
        let j = rng.gen_range(0..points.len());
        out.push((p, points[j]));
    }
    out
}

/// A cubic lattice `origin + (i·dx, j·dy, k·dt)`, `x` varying fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub origin: Point,
    pub spacing: [f64; 3],
    pub dims: [usize; 3],
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> Point {
        let [nx, ny, _] = self.dims;
        let (i, j, k) = (index % nx, (index / nx) % ny, index / (nx * ny));
        Point::new(
            self.origin.x + i as f64 * self.spacing[0],
            self.origin.y + j as f64 * self.spacing[1],
            self.origin.t + k as f64 * self.spacing[2],
        )
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Potential on a lattice; lattice points on a charge hold `+∞`.
pub fn potential_lattice(charges: &Charges, lattice: &Lattice) -> Vec<f64> {
    lattice.points().par_iter().map(|&p| charges.potential_raw(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::IntrinsicFunction;
    use crate::quadrature::{build_graph_measure, Domain};

    fn bump_measure() -> GraphMeasure {
        build_graph_measure(&IntrinsicFunction::bump(0.4, 0.3).unwrap(), Domain::new(-0.5, 0.5, -0.1, 0.1).unwrap(), 20, 40).unwrap()
    }

    #[test]
    fn fundamental_solution_values() {
        assert_eq!(fundamental_solution(Point::new(0.0, 0.0, 1.0)).unwrap(), 0.25);
        assert_eq!(fundamental_solution(Point::new(1.0, 0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(fundamental_solution(Point::IDENTITY), Err(Error::AtIdentity));
    }

    #[test]
    fn fundamental_solution_is_harmonic_to_fd_accuracy() {
        let pts = shell_points(50, 0.5, 5.0, 3);
        let c = Charges::point_mass(Point::IDENTITY, 1.0);
        let a = check_harmonic_off_support(&c, &pts, 2e-3).unwrap();
        let b = check_harmonic_off_support(&c, &pts, 1e-3).unwrap();
        assert_eq!(b.rejected(), 0);
        assert!(b.max_residual <= 1e-4, "{}", b.max_residual);
        assert!(observed_order(&a, &b) >= 1.8, "{}", observed_order(&a, &b));
    }

    #[test]
    fn single_node_potential_matches_kernel() {
        let q = Point::new(0.2, -0.1, 0.3);
        let c = Charges::point_mass(q, 1.0);
        let p = Point::new(1.0, 0.5, -0.2);
        assert_eq!(c.potential(p).unwrap(), fundamental_solution(left_quotient(q, p)).unwrap());
        assert_eq!(c.potential(q), Err(Error::CoincidesWithNode(0)));
        assert_eq!(c.potential_raw(q), f64::INFINITY);
    }

    #[test]
    fn zero_density_gives_zero() {
        let mu = bump_measure();
        let zero = vec![0.0; mu.len()];
        assert_eq!(potential(&mu, &zero, Point::new(0.1, 0.0, 0.0)).unwrap(), 0.0);
        let c = Charges::from_measure(&mu, &zero).unwrap();
        let r = check_harmonic_off_support(&c, &[Point::new(1.0, 0.0, 0.0)], 1e-3).unwrap();
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn potential_is_linear_in_density() {
        let mu = bump_measure();
        let h1: Vec<f64> = (0..mu.len()).map(|i| (i % 7) as f64 / 7.0).collect();
        let h2: Vec<f64> = (0..mu.len()).map(|i| mu.nodes[i].w1.abs()).collect();
        let mix: Vec<f64> = h1.iter().zip(&h2).map(|(a, b)| 0.25 * a + 0.5 * b).collect();
        let p = Point::new(0.6, 0.1, -0.05);
        let (f1, f2, fm) = (potential(&mu, &h1, p).unwrap(), potential(&mu, &h2, p).unwrap(), potential(&mu, &mix, p).unwrap());
        assert!((fm - (0.25 * f1 + 0.5 * f2)).abs() <= 1e-13 * fm);
        assert!(Charges::from_measure(&mu, &vec![1.5; mu.len()]).is_err());
        assert!(Charges::from_measure(&mu, &[1.0]).is_err());
    }

    #[test]
    fn far_field_tends_to_total_mass() {
        let mu = bump_measure();
        let c = Charges::from_measure(&mu, &vec![1.0; mu.len()]).unwrap();
        let diam = mu.domain_diameter();
        for dir in [Point::new(1.0, 0.0, 0.0), Point::new(0.0, 0.6, 0.8), Point::new(0.0, 0.0, 1.0)] {
            let p = crate::group::dilate(100.0 * diam / dir.norm(), dir).unwrap();
            let v = c.potential(p).unwrap() * p.norm().powi(2);
            assert!((v / c.total_mass() - 1.0).abs() < 0.05, "{v}");
        }
    }

    #[test]
    fn discrete_potential_is_harmonic_off_support() {
        let mu = bump_measure();
        let c = Charges::from_measure(&mu, &vec![1.0; mu.len()]).unwrap();
        let pts: Vec<Point> = (0..12)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 12.0;
                Point::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        let a = check_harmonic_off_support(&c, &pts, 1e-2).unwrap();
        let b = check_harmonic_off_support(&c, &pts, 5e-3).unwrap();
        assert!(observed_order(&a, &b) > 1.8);
        let near = check_harmonic_off_support(&c, &[mu.points[0]], 1e-3).unwrap();
        assert_eq!(near.rejected(), 1);
    }

    #[test]
    fn lipschitz_of_coordinate_and_constant() {
        let pts = shell_points(200, 0.1, 3.0, 5);
        let pairs = sample_pairs(&pts, 0.01, 6);
        assert_eq!(lipschitz_stat(|_| 2.0, &pairs).quotient, 0.0);
        let s = lipschitz_stat(|p| p.x, &pairs);
        assert!(s.quotient <= 1.0 + 1e-12 && s.quotient > 0.5);
        let same = [(pts[0], pts[0])];
        assert_eq!(lipschitz_stat(|p| p.x, &same).skipped, 1);
    }

    #[test]
    fn lattice_indexing() {
        let l = Lattice { origin: Point::new(-1.0, 0.0, 2.0), spacing: [0.5, 1.0, 0.25], dims: [3, 2, 2] };
        assert_eq!(l.len(), 12);
        assert_eq!(l.point(0), Point::new(-1.0, 0.0, 2.0));
        assert_eq!(l.point(11), Point::new(0.0, 1.0, 2.25));
        let c = Charges::point_mass(Point::new(-1.0, 0.0, 2.0), 1.0);
        let v = potential_lattice(&c, &l);
        assert_eq!(v[0], f64::INFINITY);
        assert!(v[1..].iter().all(|x| x.is_finite()));
    }
}

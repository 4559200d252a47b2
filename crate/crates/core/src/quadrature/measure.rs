use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ball::BallIndex;
use crate::error::{Error, Result};
use crate::graphs::{graph_map, IntrinsicFunction};
use crate::group::{Point, WPoint};
use crate::summation::Neumaier;

/// Rectangle `[y_min, y_max] × [t_min, t_max]` in `W` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub y_min: f64,
    pub y_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Domain {
    pub fn new(y_min: f64, y_max: f64, t_min: f64, t_max: f64) -> Result<Self> {
        let ok = [y_min, y_max, t_min, t_max].iter().all(|v| v.is_finite()) && y_min < y_max && t_min < t_max;
        if !ok {
            return Err(Error::InvalidArgument(format!("degenerate domain [{y_min},{y_max}]x[{t_min},{t_max}]")));
        }
        Ok(Self { y_min, y_max, t_min, t_max })
    }

    pub fn area(&self) -> f64 {
        (self.y_max - self.y_min) * (self.t_max - self.t_min)
    }

    pub fn contains(&self, w: WPoint) -> bool {
        (self.y_min..=self.y_max).contains(&w.w1) && (self.t_min..=self.t_max).contains(&w.w2)
    }

    /// Resolution of an `n_y × n_t` grid on this domain; see
    /// [`GraphMeasure::resolution`].
    pub fn grid_resolution(&self, n_y: usize, n_t: usize) -> f64 {
        let dy = (self.y_max - self.y_min) / n_y as f64;
        let dt = (self.t_max - self.t_min) / n_t as f64;
        (dy.powi(4) + 16.0 * dt * dt).sqrt().sqrt()
    }

    /// Korányi diameter of the rectangle.
    pub fn diameter(&self) -> f64 {
        WPoint::new(self.y_max - self.y_min, self.t_max - self.t_min).norm()
    }
}

/// Midpoint-rule discretisation of `S³|_Γ` over a rectangle of `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMeasure {
    pub phi: IntrinsicFunction,
    pub domain: Domain,
    pub n_y: usize,
    pub n_t: usize,
    /// Cell centres in lexicographic `(w1, w2)` order.
    pub nodes: Vec<WPoint>,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub total_mass: f64,
}

pub fn build_graph_measure(phi: &IntrinsicFunction, domain: Domain, n_y: usize, n_t: usize) -> Result<GraphMeasure> {
    if n_y < 2 || n_t < 2 {
        return Err(Error::InvalidArgument(format!("grid {n_y}x{n_t} needs at least 2 cells per axis")));
    }
    let dy = (domain.y_max - domain.y_min) / n_y as f64;
    let dt = (domain.t_max - domain.t_min) / n_t as f64;
    let cell = dy * dt;
    let rows: Vec<Result<Vec<(WPoint, Point, f64)>>> = (0..n_y)
        .into_par_iter()
        .map(|i| {
            let y = domain.y_min + (i as f64 + 0.5) * dy;
            (0..n_t)
                .map(|k| {
                    let w = WPoint::new(y, domain.t_min + (k as f64 + 0.5) * dt);
                    let g = crate::graphs::intrinsic_gradient(phi, w).value;
                    let p = graph_map(phi, w);
                    if !g.is_finite() || !p.is_finite() {
                        return Err(Error::Evaluation {
                            what: "graph or intrinsic gradient".into(),
                            x: f64::NAN,
                            y: w.w1,
                            t: w.w2,
                        });
                    }
                    Ok((w, p, cell * (1.0 + g * g).sqrt()))
                })
                .collect()
        })
        .collect();
    let n = n_y * n_t;
    let (mut nodes, mut points, mut weights) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for row in rows {
        for (w, p, m) in row? {
            nodes.push(w);
            points.push(p);
            weights.push(m);
        }
    }
    let total_mass = weights.iter().copied().collect::<Neumaier>().value();
    Ok(GraphMeasure { phi: phi.clone(), domain, n_y, n_t, nodes, points, weights, total_mass })
}

impl GraphMeasure {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cell(&self) -> (f64, f64) {
        (
            (self.domain.y_max - self.domain.y_min) / self.n_y as f64,
            (self.domain.t_max - self.domain.t_min) / self.n_t as f64,
        )
    }

    /// Korányi length of a grid-cell diagonal, `(Δy⁴ + 16Δt²)^{1/4}`.
    pub fn resolution(&self) -> f64 {
        self.domain.grid_resolution(self.n_y, self.n_t)
    }

    /// Korányi diameter of the parameter rectangle.
    pub fn domain_diameter(&self) -> f64 {
        self.domain.diameter()
    }

    /// `Σ h(p_i)·w_i` in node order.
    pub fn integrate<F: Fn(Point) -> f64>(&self, h: F) -> Result<f64> {
        let mut acc = Neumaier::new();
        for (i, (&p, &w)) in self.points.iter().zip(&self.weights).enumerate() {
            let v = h(p);
            if !v.is_finite() {
                return Err(Error::Evaluation { what: format!("integrand at node {i}"), x: p.x, y: p.y, t: p.t });
            }
            acc.add(v * w);
        }
        Ok(acc.value())
    }

    /// `μ` of a set of node indices, summed in the given order.
    pub fn mass_of(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.weights[i]).collect::<Neumaier>().value()
    }
}

/// `∫ h dμ`.
pub fn integrate<F: Fn(Point) -> f64>(h: F, mu: &GraphMeasure) -> Result<f64> {
    mu.integrate(h)
}

/// Extremes of `μ(B(p,r))/r³` over sampled balls.
#[derive(Debug, Clone, PartialEq)]
pub struct AdrReport {
    pub c_min: f64,
    pub c_max: f64,
    pub balls: usize,
    pub r_range: (f64, f64),
}

impl AdrReport {
    pub fn spread(&self) -> f64 {
        self.c_max / self.c_min
    }
}

/// Samples `n_balls` centres among the nodes and radii log-uniformly in
/// `r_range`. With `interior`, centres are restricted to nodes whose
/// parameter neighbourhood `|Δy| ≤ r`, `|Δt| ≤ r²/4 + r(|x|+|y|)/2` stays in
/// the domain, so balls are not clipped by its edges.
pub fn adr_ratios(mu: &GraphMeasure, n_balls: usize, r_range: (f64, f64), interior: bool, seed: u64) -> Result<AdrReport> {
    let (r0, r1) = r_range;
    let res = mu.resolution();
    if !(r0 > 0.0 && r0 <= r1) {
        return Err(Error::InvalidArgument(format!("radius range {r_range:?}")));
    }
    if r0 < 4.0 * res {
        return Err(Error::Resolution(format!("radius {r0} below 4x grid resolution {res}")));
    }
    if r1 > mu.domain_diameter() / 4.0 {
        return Err(Error::Resolution(format!("radius {r1} above a quarter of the domain diameter")));
    }
    let index = BallIndex::for_measure(mu, r1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = mu.domain;
    let mut samples = Vec::with_capacity(n_balls);
    let mut attempts = 0usize;
    while samples.len() < n_balls {
        attempts += 1;
        if attempts > 1000 * n_balls.max(1) {
            return Err(Error::InvalidArgument("no interior centres for this radius range".into()));
        }
        let r = rng.gen_range(r0.ln()..=r1.ln()).exp();
        let i = rng.gen_range(0..mu.len());
        if interior {
            let (w, p) = (mu.nodes[i], mu.points[i]);
            let mt = r * r / 4.0 + r * (p.x.abs() + p.y.abs()) / 2.0;
            if w.w1 - r < d.y_min || w.w1 + r > d.y_max || w.w2 - mt < d.t_min || w.w2 + mt > d.t_max {
                continue;
            }
        }
        samples.push((i, r));
    }
    let ratios: Vec<f64> = samples
        .par_iter()
        .map(|&(i, r)| mu.mass_of(&index.query(&mu.points, mu.points[i], r)) / (r * r * r))
        .collect();
    Ok(AdrReport {
        c_min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        c_max: ratios.iter().copied().fold(0.0, f64::max),
        balls: ratios.len(),
        r_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Domain {
        Domain::new(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn zero_graph_mass_is_area() {
        for (ny, nt) in [(2, 2), (17, 33), (100, 100)] {
            let mu = build_graph_measure(&IntrinsicFunction::zero(), unit(), ny, nt).unwrap();
            assert!((mu.total_mass - 1.0).abs() < 1e-12);
            assert!(mu.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn linear_graph_mass() {
        let b = 2.5;
        let mu = build_graph_measure(&IntrinsicFunction::linear(b), unit(), 64, 64).unwrap();
        assert!((mu.total_mass - (1.0f64 + b * b).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn integrate_examples() {
        let b = 1.5;
        let sym = Domain::new(-1.0, 1.0, 0.0, 1.0).unwrap();
        let mu = build_graph_measure(&IntrinsicFunction::linear(b), sym, 64, 32).unwrap();
        assert_eq!(mu.integrate(|_| 1.0).unwrap(), mu.total_mass);
        assert!(mu.integrate(|p| p.x).unwrap().abs() < 1e-12);
        let z = build_graph_measure(&IntrinsicFunction::zero(), unit(), 40, 40).unwrap();
        let sub = z.integrate(|p| ((0.2..=0.5).contains(&p.y) && (0.1..=0.7).contains(&p.t)) as u8 as f64).unwrap();
        assert!((sub - 0.18).abs() <= 2.0 * (0.3 + 0.6) / 40.0);
        assert!(z.integrate(|_| f64::NAN).is_err());
    }

    #[test]
    fn rejects_tiny_grid_and_radius() {
        assert!(build_graph_measure(&IntrinsicFunction::zero(), unit(), 1, 5).is_err());
        let mu = build_graph_measure(&IntrinsicFunction::zero(), unit(), 20, 20).unwrap();
        assert!(matches!(adr_ratios(&mu, 10, (1e-3, 0.1), false, 1), Err(Error::Resolution(_))));
    }

    #[test]
    fn zero_graph_adr_is_tight_in_the_interior() {
        let d = Domain::new(-0.5, 0.5, -0.125, 0.125).unwrap();
        let mu = build_graph_measure(&IntrinsicFunction::zero(), d, 200, 400).unwrap();
        let r = adr_ratios(&mu, 200, (4.0 * mu.resolution(), 0.25), true, 3).unwrap();
        assert!(r.spread() <= 3.0, "{r:?}");
    }
}

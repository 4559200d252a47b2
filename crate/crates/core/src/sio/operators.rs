use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{koranyi_norm, koranyi_norm4, left_quotient, Point};
use crate::kernels::{lp_piece, smoothed_kernel, BumpProfile, CZKernel};
use crate::quadrature::GraphMeasure;
use crate::summation::Neumaier;

/// Operator value with its resolution flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SioValue {
    pub v: [f64; 3],
    pub dim: usize,
    /// The truncation scale is below twice the grid resolution.
    pub resolution_limited: bool,
}

impl SioValue {
    pub fn as_slice(&self) -> &[f64] {
        &self.v[..self.dim]
    }

    pub fn norm(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn check_density(mu: &GraphMeasure, f: &[f64]) -> Result<()> {
    if f.len() != mu.len() {
        return Err(Error::InvalidArgument(format!("density has {} entries for {} nodes", f.len(), mu.len())));
    }
    Ok(())
}

/// `Σ_i K(q_i⁻¹·p) f_i w_i` over nodes selected by `keep(‖q_i⁻¹·p‖⁴)`.
fn kernel_sum(k: &CZKernel, mu: &GraphMeasure, f: &[f64], p: Point, keep: impl Fn(f64) -> bool) -> [f64; 3] {
    let mut acc = [Neumaier::new(); 3];
    let dim = k.dim();
    for (i, &q) in mu.points.iter().enumerate() {
        if f[i] == 0.0 {
            continue;
        }
        let z = left_quotient(q, p);
        let n4 = koranyi_norm4(z);
        if n4 == 0.0 || !keep(n4) {
            continue;
        }
        let kv = k.eval_raw(z);
        let c = f[i] * mu.weights[i];
        for d in 0..dim {
            acc[d].add(kv[d] * c);
        }
    }
    [acc[0].value(), acc[1].value(), acc[2].value()]
}

/// `T_{μ,ε}f(p) = Σ_{‖q_i⁻¹p‖ > ε} K(q_i⁻¹·p) f_i w_i`.
pub fn truncated_sio(k: &CZKernel, mu: &GraphMeasure, f: &[f64], p: Point, eps: f64) -> Result<SioValue> {
    check_density(mu, f)?;
    p.validate()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    let e4 = eps.powi(4);
    Ok(SioValue {
        v: kernel_sum(k, mu, f, p, |n4| n4 > e4),
        dim: k.dim(),
        resolution_limited: eps < 2.0 * mu.resolution(),
    })
}

/// `T_{μ,ε}f` at every node.
pub fn apply_truncated(k: &CZKernel, mu: &GraphMeasure, f: &[f64], eps: f64) -> Result<Vec<[f64; 3]>> {
    check_density(mu, f)?;
    let e4 = eps.powi(4);
    Ok(mu.points.par_iter().map(|&p| kernel_sum(k, mu, f, p, |n4| n4 > e4)).collect())
}

/// `S_N f(p) = Σ_{j≤N} T_(j)f(p)`, evaluated with the kernel `K·(1−ψ_{N+1})`.
pub fn smooth_sio(k: &CZKernel, mu: &GraphMeasure, f: &[f64], p: Point, psi: BumpProfile, n: i32) -> Result<SioValue> {
    check_density(mu, f)?;
    p.validate()?;
    let ks = smoothed_kernel(k, n, psi);
    Ok(SioValue {
        v: kernel_sum(&ks, mu, f, p, |_| true),
        dim: k.dim(),
        resolution_limited: 2f64.powi(-n) < 2.0 * mu.resolution(),
    })
}

/// `S_N f(p)` as an explicit sum of the pieces `T_(j)`, starting from the
/// first `j` at which `ψ_j ≡ 1` on the support.
pub fn smooth_sio_by_pieces(k: &CZKernel, mu: &GraphMeasure, f: &[f64], p: Point, psi: BumpProfile, n: i32) -> Result<SioValue> {
    check_density(mu, f)?;
    let reach = mu.points.iter().map(|&q| koranyi_norm(left_quotient(q, p))).fold(0.0, f64::max);
    let j0 = (psi.inner() / reach).log2().floor() as i32 - 1;
    let mut acc = [Neumaier::new(); 3];
    for j in j0.min(n)..=n {
        let v = kernel_sum(&lp_piece(k, j, psi), mu, f, p, |_| true);
        for d in 0..3 {
            acc[d].add(v[d]);
        }
    }
    Ok(SioValue {
        v: [acc[0].value(), acc[1].value(), acc[2].value()],
        dim: k.dim(),
        resolution_limited: 2f64.powi(-n) < 2.0 * mu.resolution(),
    })
}

/// `sup_j |T_(j)𝟙(p)|` over the given pieces and points.
pub fn lp_piece_sup(k: &CZKernel, mu: &GraphMeasure, points: &[Point], js: &[i32], psi: BumpProfile) -> f64 {
    let ones = vec![1.0; mu.len()];
    js.iter()
        .flat_map(|&j| {
            let kj = lp_piece(k, j, psi);
            let ones = &ones;
            points
                .par_iter()
                .map(move |&p| {
                    let v = kernel_sum(&kj, mu, ones, p, |_| true);
                    v.iter().map(|c| c * c).sum::<f64>().sqrt()
                })
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Geometric radii from the grid resolution to the domain diameter.
pub fn default_radii(mu: &GraphMeasure, count: usize) -> Vec<f64> {
    let (a, b) = (mu.resolution(), mu.domain_diameter());
    let count = count.max(2);
    (0..count).map(|i| a * (b / a).powf(i as f64 / (count - 1) as f64)).collect()
}

/// Centred maximal function `max_r μ(B(p,r))⁻¹ ∫_{B(p,r)} |f| dμ`; radii
/// whose ball carries no mass are skipped.
pub fn maximal_function(mu: &GraphMeasure, f: &[f64], p: Point, radii: &[f64]) -> Result<f64> {
    check_density(mu, f)?;
    let mut by_dist: Vec<(f64, usize)> = mu.points.iter().enumerate().map(|(i, &q)| (koranyi_norm(left_quotient(p, q)), i)).collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut rs = radii.to_vec();
    rs.sort_by(f64::total_cmp);
    let (mut mass, mut integral) = (Neumaier::new(), Neumaier::new());
    let mut k = 0;
    let mut best: f64 = 0.0;
    for r in rs {
        while k < by_dist.len() && by_dist[k].0 <= r {
            let i = by_dist[k].1;
            mass.add(mu.weights[i]);
            integral.add(f[i].abs() * mu.weights[i]);
            k += 1;
        }
        if mass.value() > 0.0 {
            best = best.max(integral.value() / mass.value());
        }
    }
    Ok(best)
}

/// `sup_p |S_N f(p) − T_{μ,ε}f(p)| / M_μf(p)` over `points`.
pub fn smooth_vs_truncated(
    k: &CZKernel,
    mu: &GraphMeasure,
    f: &[f64],
    points: &[Point],
    n: i32,
    eps: f64,
    psi: BumpProfile,
    radii: &[f64],
) -> Result<f64> {
    let vals: Vec<Result<f64>> = points
        .par_iter()
        .map(|&p| {
            let s = smooth_sio(k, mu, f, p, psi, n)?;
            let t = truncated_sio(k, mu, f, p, eps)?;
            let m = maximal_function(mu, f, p, radii)?;
            let diff = s.v.iter().zip(t.v.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            Ok(if m > 0.0 { diff / m } else if diff == 0.0 { 0.0 } else { f64::INFINITY })
        })
        .collect();
    let mut best: f64 = 0.0;
    for v in vals {
        best = best.max(v?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::IntrinsicFunction;
    use crate::kernels::adjoint_kernel;
    use crate::quadrature::{build_graph_measure, Domain};

    fn measure(f: &IntrinsicFunction, n: usize) -> GraphMeasure {
        build_graph_measure(f, Domain::new(-0.5, 0.5, -0.125, 0.125).unwrap(), n, n * n).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let mu = measure(&IntrinsicFunction::zero(), 12);
        let k = CZKernel::riesz();
        let zero = vec![0.0; mu.len()];
        assert_eq!(truncated_sio(&k, &mu, &zero, Point::new(0.0, 0.1, 0.0), 0.2).unwrap().v, [0.0; 3]);
        let ones = vec![1.0; mu.len()];
        assert_eq!(truncated_sio(&k, &mu, &ones, Point::IDENTITY, 10.0).unwrap().v, [0.0; 3]);
        assert_eq!(smooth_sio(&k, &mu, &zero, Point::IDENTITY, BumpProfile::default(), 2).unwrap().v, [0.0; 3]);
        assert!(truncated_sio(&k, &mu, &ones, Point::IDENTITY, 1e-3).unwrap().resolution_limited);
        assert!(truncated_sio(&k, &mu, &ones[1..], Point::IDENTITY, 0.3).is_err());
    }

    #[test]
    fn truncated_matches_plain_double_sum() {
        let mu = measure(&IntrinsicFunction::zero(), 16);
        let k = CZKernel::riesz();
        let ones = vec![1.0; mu.len()];
        let p = Point::new(0.0, 0.013, 0.002);
        let got = truncated_sio(&k, &mu, &ones, p, 0.25).unwrap();
        let (mut a, mut b) = (0.0, 0.0);
        for (i, &q) in mu.points.iter().enumerate() {
            let z = left_quotient(q, p);
            if koranyi_norm(z) > 0.25 {
                let v = k.eval_raw(z);
                a += v[0] * mu.weights[i];
                b += v[1] * mu.weights[i];
            }
        }
        let scale = mu.total_mass * k.growth_const / 0.25f64.powi(3);
        assert!((got.v[0] - a).abs() < 1e-12 * scale && (got.v[1] - b).abs() < 1e-12 * scale);
    }

    #[test]
    fn discrete_adjoint_identity() {
        let mu = measure(&IntrinsicFunction::bump(0.4, 0.3).unwrap(), 10);
        let k = CZKernel::quasi_riesz();
        let ka = adjoint_kernel(&k);
        let f: Vec<f64> = (0..mu.len()).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.4).collect();
        let g: Vec<f64> = (0..mu.len()).map(|i| ((i * 104729) % 17) as f64 / 17.0 - 0.5).collect();
        let tf = apply_truncated(&k, &mu, &f, 0.2).unwrap();
        let tg = apply_truncated(&ka, &mu, &g, 0.2).unwrap();
        for d in 0..3 {
            let lhs: f64 = (0..mu.len()).map(|i| tf[i][d] * g[i] * mu.weights[i]).collect::<Neumaier>().value();
            let rhs: f64 = (0..mu.len()).map(|i| tg[i][d] * f[i] * mu.weights[i]).collect::<Neumaier>().value();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0), "{lhs} {rhs}");
        }
    }

    #[test]
    fn telescoping_matches_closed_form() {
        let mu = measure(&IntrinsicFunction::bump(0.4, 0.3).unwrap(), 10);
        let k = CZKernel::riesz();
        let f: Vec<f64> = (0..mu.len()).map(|i| (i % 5) as f64).collect();
        for n in [1, 3] {
            let p = mu.points[mu.len() / 3];
            let a = smooth_sio(&k, &mu, &f, p, BumpProfile::default(), n).unwrap();
            let b = smooth_sio_by_pieces(&k, &mu, &f, p, BumpProfile::default(), n).unwrap();
            for d in 0..2 {
                assert!((a.v[d] - b.v[d]).abs() < 1e-10 * a.v[d].abs().max(1.0));
            }
        }
    }

    #[test]
    fn maximal_function_examples() {
        let mu = measure(&IntrinsicFunction::zero(), 12);
        let radii = default_radii(&mu, 12);
        let c = vec![-2.5; mu.len()];
        let p = mu.points[100];
        assert!((maximal_function(&mu, &c, p, &radii).unwrap() - 2.5).abs() < 1e-12);
        let r0 = radii[5];
        let chi: Vec<f64> = mu.points.iter().map(|&q| (koranyi_norm(left_quotient(p, q)) <= r0) as u8 as f64).collect();
        assert!((maximal_function(&mu, &chi, p, &radii).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn piece_bound_is_finite() {
        let mu = measure(&IntrinsicFunction::zero(), 12);
        let pts: Vec<Point> = mu.points.iter().step_by(97).copied().collect();
        let s = lp_piece_sup(&CZKernel::riesz(), &mu, &pts, &[-1, 0, 1, 2], BumpProfile::default());
        assert!(s.is_finite() && s > 0.0);
    }
}

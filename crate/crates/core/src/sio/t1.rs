//! Testing quantities `‖T_{μ,ε}χ_R‖²_{L²(μ|_R)} / μ(R)` over Christ cubes.
//!
//! One pass per cube evaluates every unordered pair once, bins it by the
//! ε-shell it falls into and feeds both `K` and its adjoint. Cubes run in
//! parallel; sums inside a cube are sequential, so reports do not depend on
//! thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{koranyi_norm4, left_quotient, Point};
use crate::kernels::{adjoint_kernel, CZKernel};
use crate::quadrature::{ChristCubeTree, GraphMeasure};
use crate::summation::Neumaier;

#[derive(Debug, Clone, PartialEq)]
pub struct T1Row {
    pub cube: usize,
    pub j: i32,
    pub eps: f64,
    /// `Σ_{p_i∈R} |T_{μ,ε}χ_R(p_i)|² w_i`.
    pub norm_sq: f64,
    pub mass: f64,
    pub ratio: f64,
    /// `ε < 2·resolution`.
    pub resolution_limited: bool,
    /// First-order near-diagonal error estimate: `max_i μ(shell_i)·C/ε³` for
    /// the shell `ε < d ≤ ε + resolution`.
    pub shell_error: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct T1Report {
    pub kernel: String,
    pub rows: Vec<T1Row>,
    /// `(ε, max ratio)` in the order of the ε grid.
    pub max_ratio_per_eps: Vec<(f64, f64)>,
    pub max_ratio: f64,
}

impl T1Report {
    fn from_rows(kernel: String, rows: Vec<T1Row>, eps: &[f64]) -> Self {
        let max_ratio_per_eps: Vec<(f64, f64)> = eps
            .iter()
            .map(|&e| {
                let m = rows.iter().filter(|r| r.eps == e && r.error.is_none()).map(|r| r.ratio).fold(0.0, f64::max);
                (e, m)
            })
            .collect();
        let max_ratio = max_ratio_per_eps.iter().map(|x| x.1).fold(0.0, f64::max);
        Self { kernel, rows, max_ratio_per_eps, max_ratio }
    }

    /// `max/min` over ε of the per-ε maximal ratio.
    pub fn eps_spread(&self) -> f64 {
        let v: Vec<f64> = self.max_ratio_per_eps.iter().map(|x| x.1).collect();
        let hi = v.iter().copied().fold(0.0, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }

    /// Same spread restricted to ε columns at or above twice the resolution.
    pub fn resolved_eps_spread(&self) -> f64 {
        let resolved: Vec<f64> = self
            .max_ratio_per_eps
            .iter()
            .filter(|(e, _)| self.rows.iter().any(|r| r.eps == *e && !r.resolution_limited))
            .map(|x| x.1)
            .collect();
        let hi = resolved.iter().copied().fold(0.0, f64::max);
        let lo = resolved.iter().copied().fold(f64::INFINITY, f64::min);
        if hi == 0.0 || resolved.is_empty() {
            1.0
        } else {
            hi / lo
        }
    }
}

/// Reports for `K` and for its adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct T1Pair {
    pub direct: T1Report,
    pub adjoint: T1Report,
}

struct CubeSums {
    /// `[kernel][eps] → Σ_i |T χ_R(p_i)|² w_i`.
    norm_sq: [Vec<f64>; 2],
    shell: Vec<f64>,
    finite: bool,
}

/// Each unordered pair `{p, q}` is evaluated once: with `z = q⁻¹p`, the values
/// `K(z)` and `K(z⁻¹)` feed `Tχ(p)`, `Tχ(q)`, `T*χ(p)` and `T*χ(q)`. Every
/// point still receives its partners in increasing node order.
fn cube_sums(k: &CZKernel, mu_w: &[f64], pts: &[Point], nodes: &[usize], eps: &[f64], res: f64) -> CubeSums {
    let m = eps.len();
    let dim = k.dim();
    let n = nodes.len();
    let e4: Vec<f64> = eps.iter().map(|e| e.powi(4)).collect();
    let outer4: Vec<f64> = eps.iter().map(|e| (e + res).powi(4)).collect();
    // acc[((i·m + b)·2 + s)·3 + d], s = 0 for K and 1 for K*.
    let stride = m * 6;
    let mut acc = vec![Neumaier::new(); n * stride];
    let mut shell = vec![Neumaier::new(); n * m];
    let local_w: Vec<f64> = nodes.iter().map(|&i| mu_w[i]).collect();
    let local_p: Vec<Point> = nodes.iter().map(|&i| pts[i]).collect();
    for r in 0..n {
        let p = local_p[r];
        let wr = local_w[r];
        for s in r + 1..n {
            let z = left_quotient(local_p[s], p);
            let n4 = koranyi_norm4(z);
            let Some(b) = e4.iter().position(|&e| n4 > e) else { continue };
            let ws = local_w[s];
            let v1 = k.eval_raw(z);
            let v2 = k.eval_raw(z.inv());
            let (lo, hi) = acc.split_at_mut(s * stride);
            let ar = &mut lo[r * stride + b * 6..r * stride + b * 6 + 6];
            let as_ = &mut hi[b * 6..b * 6 + 6];
            for d in 0..dim {
                ar[d].add(v1[d] * ws);
                ar[3 + d].add(v2[d] * ws);
                as_[d].add(v2[d] * wr);
                as_[3 + d].add(v1[d] * wr);
            }
            for t in b..m {
                if n4 <= outer4[t] {
                    shell[r * m + t].add(ws);
                    shell[s * m + t].add(wr);
                }
            }
        }
    }
    let mut norm_sq = [vec![Neumaier::new(); m], vec![Neumaier::new(); m]];
    let mut shell_max = vec![0.0f64; m];
    let mut finite = true;
    for i in 0..n {
        for (ks, ns) in norm_sq.iter_mut().enumerate() {
            let mut run = [0.0f64; 3];
            for b in 0..m {
                let cell = &acc[i * stride + b * 6 + ks * 3..];
                let mut sq = 0.0;
                for d in 0..dim {
                    run[d] += cell[d].value();
                    sq += run[d] * run[d];
                }
                finite &= sq.is_finite();
                ns[b].add(sq * local_w[i]);
            }
        }
        for b in 0..m {
            shell_max[b] = shell_max[b].max(shell[i * m + b].value());
        }
    }
    CubeSums { norm_sq: norm_sq.map(|v| v.iter().map(Neumaier::value).collect()), shell: shell_max, finite }
}

/// Runs the testing quantities for `K` and `K*` on every cube of the tree.
/// The ε grid is processed in decreasing order; rows follow cube-id order.
pub fn t1_test(k: &CZKernel, mu: &GraphMeasure, tree: &ChristCubeTree, eps_grid: &[f64]) -> Result<T1Pair> {
    if eps_grid.is_empty() || eps_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("bad epsilon grid {eps_grid:?}")));
    }
    if tree.points.len() != mu.len() {
        return Err(Error::InvalidArgument("cube tree was built on a different measure".into()));
    }
    let mut eps = eps_grid.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let res = mu.resolution();
    let ka = adjoint_kernel(k);
    let all: Vec<CubeSums> =
        tree.cubes.par_iter().map(|cube| cube_sums(k, &mu.weights, &mu.points, &cube.nodes, &eps, res)).collect();
    let mut rows: [Vec<T1Row>; 2] = [Vec::new(), Vec::new()];
    for (cube, sums) in tree.cubes.iter().zip(all) {
        for s in 0..2 {
            for (b, &e) in eps.iter().enumerate() {
                let ns = sums.norm_sq[s][b];
                rows[s].push(T1Row {
                    cube: cube.id,
                    j: cube.j,
                    eps: e,
                    norm_sq: ns,
                    mass: cube.mass,
                    ratio: ns / cube.mass,
                    resolution_limited: e < 2.0 * res,
                    shell_error: sums.shell[b] * k.growth_const / (e * e * e),
                    error: (!sums.finite).then(|| "non-finite operator value".to_string()),
                });
            }
        }
    }
    let [rd, ra] = rows;
    Ok(T1Pair {
        direct: T1Report::from_rows(k.name.clone(), rd, &eps),
        adjoint: T1Report::from_rows(ka.name.clone(), ra, &eps),
    })
}

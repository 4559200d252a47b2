//! Christ dyadic cubes on a graph measure.
//!
//! Nets are nested top-down: the net of generation `j` starts from the net of
//! generation `j+1` and is completed greedily to a maximal `2^j`-separated
//! set, visiting nodes in lexicographic `(w2, w1)` order. Cubes are built bottom-up. The finest generation
//! holds the Voronoi cells of its net (ties go to the lower net index). A
//! cube of generation `j+1` is the union of the children whose centres lie
//! in its Voronoi cell. Partition and nesting then hold by construction.

use rayon::prelude::*;

use super::ball::SpatialHash;
use super::measure::GraphMeasure;
use crate::error::{Error, Result};
use crate::group::{koranyi_norm, left_quotient, Point};
use crate::summation::Neumaier;

#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    pub id: usize,
    pub j: i32,
    /// Node index of the centre `z_Q`.
    pub center: usize,
    /// Sorted node indices.
    pub nodes: Vec<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub mass: f64,
    /// Exact Korányi diameter of the node set.
    pub diameter: f64,
    /// Distance from `z_Q` to the nearest node outside the cube (`∞` if none).
    pub inner_radius: f64,
}

impl Cube {
    pub fn side(&self) -> f64 {
        2f64.powi(self.j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub j: i32,
    /// Cube ids in this generation, in net order.
    pub cubes: Vec<usize>,
    /// Node index → cube id.
    pub label: Vec<usize>,
}

/// Empirical constants of the tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeConstants {
    /// `max diam(Q)/ℓ(Q)`.
    pub a0: f64,
    /// `min inner_radius(Q)/ℓ(Q)` over cubes that are not the whole set.
    pub c0: f64,
    /// `min μ(Q)/ℓ(Q)³`.
    pub kappa1: f64,
    /// `max μ(Q)/ℓ(Q)³`.
    pub kappa2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChristCubeTree {
    pub j_min: i32,
    pub j_max: i32,
    pub cubes: Vec<Cube>,
    /// Generations from coarsest (`j_max`) to finest.
    pub generations: Vec<Generation>,
    pub constants: CubeConstants,
    /// Each generation partitions the nodes (checked independently).
    pub partition_ok: bool,
    /// Each cube lies inside its parent (checked independently).
    pub nesting_ok: bool,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub resolution: f64,
}

impl ChristCubeTree {
    pub fn generation(&self, j: i32) -> Option<&Generation> {
        self.generations.iter().find(|g| g.j == j)
    }

    /// Cubes of generation `j`.
    pub fn cubes_of(&self, j: i32) -> impl Iterator<Item = &Cube> {
        self.generation(j).into_iter().flat_map(move |g| g.cubes.iter().map(move |&id| &self.cubes[id]))
    }

    /// `max/min` of `μ(Q)/ℓ(Q)³`.
    pub fn mass_band(&self) -> f64 {
        self.constants.kappa2 / self.constants.kappa1
    }
}

fn max_abs_xy(points: &[Point]) -> f64 {
    points.iter().map(|p| p.x.abs() + p.y.abs()).fold(0.0, f64::max)
}

/// Greedy maximal `s`-separated net extending `seed` (node indices),
/// visiting nodes in `order`.
fn extend_net(points: &[Point], order: &[usize], seed: &[usize], s: f64, m: f64) -> Vec<usize> {
    let mut net = seed.to_vec();
    let mut net_pts: Vec<Point> = seed.iter().map(|&i| points[i]).collect();
    let mut hash = SpatialHash::empty(s, m);
    for (k, &p) in net_pts.iter().enumerate() {
        hash.insert(k, p);
    }
    let mut in_net = vec![false; points.len()];
    seed.iter().for_each(|&i| in_net[i] = true);
    for &i in order {
        let p = points[i];
        if in_net[i] {
            continue;
        }
        let close = hash.nearest_within(&net_pts, p, s).is_some_and(|(_, d)| d < s);
        if !close {
            hash.insert(net_pts.len(), p);
            net_pts.push(p);
            net.push(i);
            in_net[i] = true;
        }
    }
    net
}

/// For each query point, the position in `net` of its nearest net point.
fn nearest_net(points: &[Point], net: &[usize], queries: &[usize], s: f64, m: f64) -> Vec<usize> {
    let net_pts: Vec<Point> = net.iter().map(|&i| points[i]).collect();
    let mut hash = SpatialHash::empty(s, m);
    for (k, &p) in net_pts.iter().enumerate() {
        hash.insert(k, p);
    }
    queries
        .par_iter()
        .map(|&q| {
            hash.nearest_within(&net_pts, points[q], s)
                .map(|(k, _)| k)
                .expect("maximal net covers every node")
        })
        .collect()
}

/// Exact diameter: distances to the centre bound pair distances by the
/// triangle inequality, which prunes most pairs.
fn exact_diameter(points: &[Point], nodes: &[usize], center: usize) -> f64 {
    let c = points[center];
    let mut radial: Vec<(f64, usize)> = nodes.iter().map(|&i| (koranyi_norm(left_quotient(c, points[i])), i)).collect();
    radial.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best: f64 = 0.0;
    for a in 0..radial.len() {
        let (ra, ia) = radial[a];
        if a + 1 < radial.len() && ra + radial[a + 1].0 <= best {
            break;
        }
        for &(rb, ib) in &radial[a + 1..] {
            if ra + rb <= best {
                break;
            }
            best = best.max(koranyi_norm(left_quotient(points[ia], points[ib])));
        }
    }
    best
}

/// Distance from `points[center]` to the nearest node whose label differs.
fn inner_radius(points: &[Point], hash: &SpatialHash, label: &[usize], center: usize, start: f64, limit: f64) -> f64 {
    let id = label[center];
    let c = points[center];
    let mut r = start;
    loop {
        let best = hash
            .query(points, c, r)
            .into_iter()
            .filter(|&i| label[i] != id)
            .map(|i| koranyi_norm(left_quotient(c, points[i])))
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            return best;
        }
        if r > limit {
            return f64::INFINITY;
        }
        r *= 2.0;
    }
}

/// Builds generations `j_min..=j_max` (side `2^j`).
pub fn build_christ_cubes(mu: &GraphMeasure, j_min: i32, j_max: i32) -> Result<ChristCubeTree> {
    if j_min > j_max || mu.is_empty() {
        return Err(Error::InvalidArgument(format!("empty generation range {j_min}..={j_max}")));
    }
    let res = mu.resolution();
    if 2f64.powi(j_min) < 4.0 * res {
        return Err(Error::Resolution(format!("2^{j_min} below 4x grid resolution {res}")));
    }
    let points = &mu.points;
    let m = max_abs_xy(points);
    let n = points.len();
    // diam ≤ 2·max_i d(p_0, p_i)
    let reach = points.iter().map(|&p| koranyi_norm(left_quotient(points[0], p))).fold(0.0, f64::max);
    if 2f64.powi(j_max) > 2.0 * reach {
        return Err(Error::InvalidArgument(format!("2^{j_max} exceeds the diameter of the point set")));
    }

    // Nested nets, coarsest first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (mu.nodes[a], mu.nodes[b]);
        p.w2.total_cmp(&q.w2).then(p.w1.total_cmp(&q.w1)).then(a.cmp(&b))
    });
    let mut nets: Vec<Vec<usize>> = Vec::new();
    for j in (j_min..=j_max).rev() {
        let seed = nets.last().cloned().unwrap_or_default();
        nets.push(extend_net(points, &order, &seed, 2f64.powi(j), m));
    }

    // Finest generation: Voronoi cells.
    let all: Vec<usize> = (0..n).collect();
    let fine = nets.last().unwrap();
    let owner = nearest_net(points, fine, &all, 2f64.powi(j_min), m);
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); fine.len()];
    for (i, &k) in owner.iter().enumerate() {
        sets[k].push(i);
    }
    // levels[g] = (j, net, node sets), finest first.
    let mut levels: Vec<(i32, Vec<usize>, Vec<Vec<usize>>, Vec<usize>)> = vec![(j_min, fine.clone(), sets, vec![])];
    for (g, j) in (j_min + 1..=j_max).enumerate() {
        let net = &nets[nets.len() - 2 - g];
        let child_net = &levels.last().unwrap().1;
        let parent_of = nearest_net(points, net, child_net, 2f64.powi(j), m);
        let mut sets: Vec<Vec<usize>> = vec![Vec::new(); net.len()];
        for (c, &k) in parent_of.iter().enumerate() {
            sets[k].extend_from_slice(&levels.last().unwrap().2[c]);
        }
        sets.iter_mut().for_each(|s| s.sort_unstable());
        levels.last_mut().unwrap().3 = parent_of;
        levels.push((j, net.clone(), sets, vec![]));
    }

    // Assign ids coarsest first.
    let mut cubes: Vec<Cube> = Vec::new();
    let mut generations: Vec<Generation> = Vec::new();
    let mut first_id: Vec<usize> = vec![0; levels.len()];
    for (lvl, (j, net, sets, _)) in levels.iter().enumerate().rev() {
        first_id[lvl] = cubes.len();
        let mut label = vec![usize::MAX; n];
        let mut ids = Vec::with_capacity(net.len());
        for (k, nodes) in sets.iter().enumerate() {
            let id = cubes.len();
            nodes.iter().for_each(|&i| label[i] = id);
            ids.push(id);
            cubes.push(Cube {
                id,
                j: *j,
                center: net[k],
                nodes: nodes.clone(),
                parent: None,
                children: vec![],
                mass: mu.mass_of(nodes),
                diameter: 0.0,
                inner_radius: f64::INFINITY,
            });
        }
        generations.push(Generation { j: *j, cubes: ids, label });
    }
    for lvl in 0..levels.len() - 1 {
        for (c, &k) in levels[lvl].3.iter().enumerate() {
            let (child, parent) = (first_id[lvl] + c, first_id[lvl + 1] + k);
            cubes[child].parent = Some(parent);
            cubes[parent].children.push(child);
        }
    }

    // Geometry per cube.
    let geo: Vec<(f64, f64)> = generations
        .iter()
        .flat_map(|g| {
            let s = 2f64.powi(g.j);
            let hash = SpatialHash::new(points, s);
            let limit = 4.0 * mu.domain_diameter() + 4.0 * m;
            g.cubes
                .par_iter()
                .map(|&id| {
                    let q = &cubes[id];
                    let d = exact_diameter(points, &q.nodes, q.center);
                    let ir = inner_radius(points, &hash, &g.label, q.center, s / 4.0, limit);
                    (d, ir)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    for (q, (d, ir)) in cubes.iter_mut().zip(geo) {
        q.diameter = d;
        q.inner_radius = ir;
    }

    let partition_ok = generations.iter().all(|g| {
        let mut count = vec![0u32; n];
        g.cubes.iter().for_each(|&id| cubes[id].nodes.iter().for_each(|&i| count[i] += 1));
        count.iter().all(|&c| c == 1)
    });
    let nesting_ok = cubes.iter().all(|q| match q.parent {
        None => q.j == j_max,
        Some(p) => {
            let parent = &cubes[p];
            parent.j == q.j + 1 && q.nodes.iter().all(|i| parent.nodes.binary_search(i).is_ok())
        }
    });

    let mut k = CubeConstants { a0: 0.0, c0: f64::INFINITY, kappa1: f64::INFINITY, kappa2: 0.0 };
    for q in &cubes {
        let s = q.side();
        k.a0 = k.a0.max(q.diameter / s);
        if q.inner_radius.is_finite() {
            k.c0 = k.c0.min(q.inner_radius / s);
        }
        let kap = q.mass / (s * s * s);
        k.kappa1 = k.kappa1.min(kap);
        k.kappa2 = k.kappa2.max(kap);
    }

    Ok(ChristCubeTree {
        j_min,
        j_max,
        cubes,
        generations,
        constants: k,
        partition_ok,
        nesting_ok,
        points: mu.points.clone(),
        weights: mu.weights.clone(),
        resolution: res,
    })
}

/// Mass of the inner boundary layer `∂_ρQ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub rho: f64,
    pub mass: f64,
    /// `ρ·ℓ(Q)` is below the grid resolution.
    pub resolution_limited: bool,
}

fn layer_with(tree: &ChristCubeTree, hash: Option<&SpatialHash>, q: usize, rho: f64) -> Layer {
    let cube = &tree.cubes[q];
    let width = rho * cube.side();
    let resolution_limited = width < tree.resolution;
    if rho > 2.0 {
        return Layer { rho, mass: cube.mass, resolution_limited };
    }
    let label = &tree.generation(cube.j).expect("cube generation exists").label;
    let owned;
    let hash = match hash {
        Some(h) => h,
        None => {
            owned = SpatialHash::new(&tree.points, width);
            &owned
        }
    };
    let mut acc = Neumaier::new();
    for &i in &cube.nodes {
        if hash.any_within(&tree.points, tree.points[i], width, |k| label[k] != cube.id) {
            acc.add(tree.weights[i]);
        }
    }
    Layer { rho, mass: acc.value(), resolution_limited }
}

/// `μ{q ∈ Q : dist(q, nodes ∖ Q) ≤ ρ·ℓ(Q)}`; for `ρ > 2` this is `μ(Q)`.
pub fn boundary_layer(tree: &ChristCubeTree, q: usize, rho: f64) -> Result<Layer> {
    if !(rho > 0.0) || q >= tree.cubes.len() {
        return Err(Error::InvalidArgument(format!("boundary layer for cube {q} at rho {rho}")));
    }
    Ok(layer_with(tree, None, q, rho))
}

/// Log-log fit of `μ(∂_ρQ)/μ(Q)` against `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    pub layers: Vec<Layer>,
}

/// Fits over the layers that are resolved and non-empty.
pub fn boundary_exponent(tree: &ChristCubeTree, q: usize, rhos: &[f64]) -> Result<ExponentFit> {
    let cube = tree.cubes.get(q).ok_or_else(|| Error::InvalidArgument(format!("no cube {q}")))?;
    let rmax = rhos.iter().copied().fold(0.0, f64::max);
    let hash = SpatialHash::new(&tree.points, rmax.min(2.0) * cube.side());
    let layers: Vec<Layer> = rhos.iter().map(|&r| layer_with(tree, Some(&hash), q, r)).collect();
    let pts: Vec<(f64, f64)> = layers
        .iter()
        .filter(|l| !l.resolution_limited && l.mass > 0.0 && l.rho <= 2.0)
        .map(|l| (l.rho.ln(), (l.mass / cube.mass).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Resolution(format!("cube {q}: fewer than two resolved boundary layers")));
    }
    Ok(ExponentFit { exponent: crate::graphs::regularity::ls_slope(&pts), layers })
}

//! Experiment commands. Each validates the config, runs the library, and
//! writes CSV/JSON artifacts into the output directory.

use std::fs;
use std::path::Path;

use anyhow::Context;
use heis_sio::graphs::{characteristic_curve, integral_residuals};
use heis_sio::group::Point;
use heis_sio::kernels::CZKernel;
use heis_sio::quadrature::{boundary_exponent, build_christ_cubes, build_graph_measure, ChristCubeTree, GraphMeasure};
use heis_sio::removability::{
    check_harmonic_off_support, fd_gradient_sup, lipschitz_stat, nonharmonicity_pairing, potential_lattice,
    sample_pairs, write_hpt1, Charges, Lattice, PlateauBox,
};
use heis_sio::sio::{ab_integral, t1_test, T1Report};
use heis_sio::{BumpProfile, VerticalSubgroup};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{num, write_json, Csv};

fn prepare(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<()> {
    cfg.validate()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn measure(cfg: &ExperimentConfig) -> anyhow::Result<GraphMeasure> {
    Ok(build_graph_measure(&cfg.function()?, cfg.domain()?, cfg.graph.n_y, cfg.graph.n_t)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsRow {
    pub eps: f64,
    pub direct: f64,
    pub adjoint: f64,
    pub resolution_limited: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct T1Summary {
    pub kernel: String,
    pub adjoint_kernel: String,
    pub nodes: usize,
    pub cubes: usize,
    pub resolution: f64,
    pub max_ratio_per_eps: Vec<EpsRow>,
    pub spread_direct: f64,
    pub spread_adjoint: f64,
    pub spread_limit: f64,
    pub stable: bool,
}

fn t1_rows(csv: &mut Csv, op: &str, rep: &T1Report) {
    for r in &rep.rows {
        csv.row(&[
            op.into(),
            rep.kernel.clone(),
            r.cube.to_string(),
            r.j.to_string(),
            num(r.eps),
            num(r.norm_sq),
            num(r.mass),
            num(r.ratio),
            r.resolution_limited.to_string(),
            num(r.shell_error),
            r.error.clone().unwrap_or_default(),
        ]);
    }
}

pub fn cmd_t1(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<T1Summary> {
    prepare(cfg, out)?;
    let mu = measure(cfg)?;
    let tree = build_christ_cubes(&mu, cfg.cubes.j_min, cfg.cubes.j_max)?;
    let pair = t1_test(&cfg.kernel()?, &mu, &tree, &cfg.t1.eps)?;
    let mut csv = Csv::new(&[
        "operator",
        "kernel",
        "cube",
        "j",
        "eps",
        "norm_sq",
        "mass",
        "ratio",
        "resolution_limited",
        "shell_error",
        "error",
    ]);
    t1_rows(&mut csv, "direct", &pair.direct);
    t1_rows(&mut csv, "adjoint", &pair.adjoint);
    csv.write(&out.join("t1_report.csv"))?;
    let res = mu.resolution();
    let rows: Vec<EpsRow> = pair
        .direct
        .max_ratio_per_eps
        .iter()
        .zip(&pair.adjoint.max_ratio_per_eps)
        .map(|(&(eps, d), &(_, a))| EpsRow { eps, direct: d, adjoint: a, resolution_limited: eps < 2.0 * res })
        .collect();
    let (sd, sa) = (pair.direct.eps_spread(), pair.adjoint.eps_spread());
    let limit = cfg.tolerances.t1_spread;
    let summary = T1Summary {
        kernel: pair.direct.kernel.clone(),
        adjoint_kernel: pair.adjoint.kernel.clone(),
        nodes: mu.len(),
        cubes: tree.cubes.len(),
        resolution: res,
        max_ratio_per_eps: rows,
        spread_direct: sd,
        spread_adjoint: sa,
        spread_limit: limit,
        stable: sd < limit && sa < limit,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct AbSummary {
    pub integrals: usize,
    pub max_relative: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn cmd_ab(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<AbSummary> {
    prepare(cfg, out)?;
    let a = &cfg.ab;
    let psi = BumpProfile::new(a.profile[0], a.profile[1])?;
    let mut csv = Csv::new(&["kernel", "component", "theta", "r", "R", "value", "abs_sum", "relative"]);
    let (mut count, mut worst) = (0, 0.0f64);
    for name in &a.kernels {
        let k = CZKernel::by_name(name)?;
        for c in 0..k.dim() {
            let kc = k.component(c)?;
            for &theta in &a.thetas {
                let w = VerticalSubgroup::new(theta)?;
                for &[r, big] in &a.radii {
                    let v = ab_integral(&kc, &w, psi, r, big, a.quad_n)?;
                    let rel = if v.abs_sum > 0.0 { v.value.abs() / v.abs_sum } else { v.value.abs() };
                    worst = worst.max(rel);
                    count += 1;
                    csv.row(&[name.clone(), c.to_string(), num(theta), num(r), num(big), num(v.value), num(v.abs_sum), num(rel)]);
                }
            }
        }
    }
    csv.write(&out.join("ab.csv"))?;
    let tol = cfg.tolerances.ab_relative;
    let summary = AbSummary { integrals: count, max_relative: worst, tolerance: tol, pass: worst <= tol };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    pub y0: f64,
    pub t0: f64,
    pub samples: usize,
    pub blown_up: bool,
    pub error_estimate: f64,
    pub max_residual: f64,
}

pub fn cmd_curves(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<CurveSummary>> {
    prepare(cfg, out)?;
    let phi = cfg.function()?;
    let c = &cfg.curves;
    let mut csv = Csv::new(&["curve", "s", "tau", "phi", "residual"]);
    let mut summaries = Vec::new();
    for (id, &[y0, t0]) in c.starts.iter().enumerate() {
        let curve = characteristic_curve(&phi, y0, t0, (c.s_range[0], c.s_range[1]), c.step, c.blowup_bound)?;
        let res = integral_residuals(&phi, &curve);
        for (&(s, t), r) in curve.samples.iter().zip(&res) {
            csv.row(&[id.to_string(), num(s), num(t), num(phi.eval(heis_sio::WPoint::new(s, t))), num(*r)]);
        }
        summaries.push(CurveSummary {
            y0,
            t0,
            samples: curve.samples.len(),
            blown_up: curve.blown_up,
            error_estimate: curve.error_estimate,
            max_residual: res.iter().copied().fold(0.0, f64::max),
        });
    }
    csv.write(&out.join("curves.csv"))?;
    write_json(&out.join("summary.json"), &summaries)?;
    Ok(summaries)
}

#[derive(Debug, Clone, Serialize)]
pub struct PotentialSummary {
    pub nodes: usize,
    pub total_mass: f64,
    pub h_fd: f64,
    pub max_residual: f64,
    pub rejected: usize,
    pub residual_limit: f64,
    pub lipschitz_quotient: f64,
    pub gradient_sup: f64,
    pub pairing: f64,
    pub pairing_constant: f64,
    pub lattice_points: usize,
    pub pass: bool,
}

/// Points on horizontal circles `(r cos a, r sin a, 0)`.
pub fn circle_points(radii: &[f64], per_radius: usize) -> Vec<Point> {
    radii
        .iter()
        .flat_map(|&r| {
            (0..per_radius).map(move |k| {
                let a = std::f64::consts::TAU * (k as f64 + 0.5) / per_radius as f64;
                Point::new(r * a.cos(), r * a.sin(), 0.0)
            })
        })
        .collect()
}

pub fn cmd_potential(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<PotentialSummary> {
    prepare(cfg, out)?;
    let p = &cfg.potential;
    let mu = measure(cfg)?;
    let charges = Charges::from_measure(&mu, &vec![p.density; mu.len()])?;
    let pts = circle_points(&p.radii, p.points_per_radius);
    let report = check_harmonic_off_support(&charges, &pts, p.h_fd)?;
    let mut csv = Csv::new(&["x", "y", "t", "support_distance", "residual", "rejected"]);
    for r in &report.rows {
        csv.row(&[
            num(r.point.x),
            num(r.point.y),
            num(r.point.t),
            num(r.support_distance),
            r.residual.map(num).unwrap_or_default(),
            r.rejected.clone().unwrap_or_default(),
        ]);
    }
    csv.write(&out.join("residuals.csv"))?;
    let accepted: Vec<Point> = report.rows.iter().filter(|r| r.residual.is_some()).map(|r| r.point).collect();
    let f = |q: Point| charges.potential_raw(q);
    let lip = lipschitz_stat(f, &sample_pairs(&accepted, 1e-3, cfg.seed));
    let grad = if accepted.is_empty() { 0.0 } else { fd_gradient_sup(f, &accepted, 1e-4)? };
    let pairing = nonharmonicity_pairing(&charges, &PlateauBox::new(p.plateau, p.outer)?, p.pairing_n)?;
    let lattice = Lattice {
        origin: Point::new(p.lattice_origin[0], p.lattice_origin[1], p.lattice_origin[2]),
        spacing: p.lattice_spacing,
        dims: p.lattice_dims,
    };
    if !lattice.is_empty() {
        let values = potential_lattice(&charges, &lattice);
        let file = fs::File::create(out.join("potential.hpt1"))?;
        write_hpt1(&lattice, &values, std::io::BufWriter::new(file))?;
    }
    let summary = PotentialSummary {
        nodes: mu.len(),
        total_mass: charges.total_mass(),
        h_fd: p.h_fd,
        max_residual: report.max_residual,
        rejected: report.rejected(),
        residual_limit: cfg.tolerances.harmonic_residual,
        lipschitz_quotient: lip.quotient,
        gradient_sup: grad,
        pairing: pairing.value,
        pairing_constant: pairing.constant,
        lattice_points: lattice.len(),
        pass: report.max_residual <= cfg.tolerances.harmonic_residual && pairing.value < 0.0,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationSummary {
    pub j: i32,
    pub cubes: usize,
    pub min_density: f64,
    pub max_density: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeVerdicts {
    pub c0_partition: bool,
    pub c1_nesting: bool,
    pub c2_diameter: bool,
    pub c3_inner_ball: bool,
    pub mass_band: bool,
    /// `None` when no finest-generation cube has resolvable boundary layers.
    pub thin_boundary: Option<bool>,
}

impl CubeVerdicts {
    pub fn all(&self) -> bool {
        self.c0_partition && self.c1_nesting && self.c2_diameter && self.c3_inner_ball && self.mass_band && self.thin_boundary != Some(false)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeSummary {
    pub nodes: usize,
    pub resolution: f64,
    pub generations: Vec<GenerationSummary>,
    pub a0: f64,
    pub c0: f64,
    pub mass_band: f64,
    pub boundary_cube: Option<usize>,
    pub boundary_exponent: Option<f64>,
    pub verdicts: CubeVerdicts,
}

/// Heaviest cube of the finest generation whose boundary layers can be fitted.
fn boundary_fit(tree: &ChristCubeTree, rhos: &[f64]) -> Option<(usize, f64)> {
    let mut cands: Vec<&heis_sio::quadrature::Cube> = tree.cubes_of(tree.j_min).collect();
    cands.sort_by(|a, b| b.mass.total_cmp(&a.mass).then(a.id.cmp(&b.id)));
    cands.iter().find_map(|c| boundary_exponent(tree, c.id, rhos).ok().map(|f| (c.id, f.exponent)))
}

pub fn cmd_cubes(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<CubeSummary> {
    prepare(cfg, out)?;
    let mu = measure(cfg)?;
    let tree = build_christ_cubes(&mu, cfg.cubes.j_min, cfg.cubes.j_max)?;
    let mut csv = Csv::new(&["id", "j", "center", "nodes", "mass", "diameter", "inner_radius", "parent"]);
    for c in &tree.cubes {
        csv.row(&[
            c.id.to_string(),
            c.j.to_string(),
            c.center.to_string(),
            c.nodes.len().to_string(),
            num(c.mass),
            num(c.diameter),
            num(c.inner_radius),
            c.parent.map(|p| p.to_string()).unwrap_or_default(),
        ]);
    }
    csv.write(&out.join("cubes.csv"))?;
    let generations = tree
        .generations
        .iter()
        .map(|g| {
            let d: Vec<f64> = g.cubes.iter().map(|&id| tree.cubes[id].mass / tree.cubes[id].side().powi(3)).collect();
            GenerationSummary {
                j: g.j,
                cubes: g.cubes.len(),
                min_density: d.iter().copied().fold(f64::INFINITY, f64::min),
                max_density: d.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect();
    let fit = boundary_fit(&tree, &cfg.cubes.layer_rhos);
    let tol = &cfg.tolerances;
    let k = tree.constants;
    let summary = CubeSummary {
        nodes: mu.len(),
        resolution: mu.resolution(),
        generations,
        a0: k.a0,
        c0: k.c0,
        mass_band: tree.mass_band(),
        boundary_cube: fit.map(|f| f.0),
        boundary_exponent: fit.map(|f| f.1),
        verdicts: CubeVerdicts {
            c0_partition: tree.partition_ok,
            c1_nesting: tree.nesting_ok,
            c2_diameter: k.a0 <= tol.cube_a0,
            c3_inner_ball: k.c0 > 0.0,
            mass_band: tree.mass_band() < tol.cube_mass_band,
            thin_boundary: fit.map(|f| f.1 > 0.0),
        },
    };
    write_json(&out.join("cubes.json"), &summary)?;
    Ok(summary)
}

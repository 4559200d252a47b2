//! Experiment configuration, read from TOML.

use std::path::Path;

use anyhow::{bail, Context};
use heis_sio::graphs::{builtin, IntrinsicFunction};
use heis_sio::kernels::CZKernel;
use heis_sio::quadrature::Domain;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "defaults::out")]
    pub out: String,
    pub graph: GraphSpec,
    #[serde(default)]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub cubes: CubeSpec,
    #[serde(default)]
    pub t1: T1Spec,
    #[serde(default)]
    pub ab: AbSpec,
    #[serde(default)]
    pub curves: CurveSpec,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
    /// `[y_min, y_max, t_min, t_max]`.
    pub domain: [f64; 4],
    pub n_y: usize,
    pub n_t: usize,
    /// Angle of the vertical plane carrying the graph.
    #[serde(default)]
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeSpec {
    pub j_min: i32,
    pub j_max: i32,
    /// Boundary-layer widths relative to the cube side.
    pub layer_rhos: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct T1Spec {
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbSpec {
    pub kernels: Vec<String>,
    pub thetas: Vec<f64>,
    /// `(r, R)` pairs.
    pub radii: Vec<[f64; 2]>,
    pub quad_n: usize,
    /// Inner and outer radius of the bump profile.
    pub profile: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    /// `(y0, t0)` starting points.
    pub starts: Vec<[f64; 2]>,
    pub s_range: [f64; 2],
    pub step: f64,
    pub blowup_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// Constant density `h` on the graph, in `[0, 1]`.
    pub density: f64,
    pub h_fd: f64,
    /// Harmonicity sample points on horizontal circles of these radii.
    pub radii: Vec<f64>,
    pub points_per_radius: usize,
    /// Half-widths of the plateau and of the support of the test function.
    pub plateau: [f64; 3],
    pub outer: [f64; 3],
    pub pairing_n: usize,
    /// Optional lattice export: `dims` of 0 disables it.
    pub lattice_origin: [f64; 3],
    pub lattice_spacing: [f64; 3],
    pub lattice_dims: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted `max/min` spread of the T1 ratios across ε.
    pub t1_spread: f64,
    /// `|value| ≤ ab_relative · Σ|terms|` for cancellation integrals.
    pub ab_relative: f64,
    pub harmonic_residual: f64,
    /// Comparison constant between `d` and the path length in the
    /// quasiconvexity check.
    pub quasiconvexity: f64,
    /// Upper bound for the cube constant `A₀`.
    pub cube_a0: f64,
    /// Largest accepted band `max/min μ(Q)/ℓ(Q)³`.
    pub cube_mass_band: f64,
}

mod defaults {
    pub fn out() -> String {
        "out".into()
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { name: "riesz".into() }
    }
}

impl Default for CubeSpec {
    fn default() -> Self {
        Self { j_min: -1, j_max: 1, layer_rhos: vec![0.4, 0.2, 0.1] }
    }
}

impl Default for T1Spec {
    fn default() -> Self {
        Self { eps: vec![0.5, 0.25, 0.125] }
    }
}

impl Default for AbSpec {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            kernels: vec!["riesz".into(), "quasi_riesz".into()],
            thetas: vec![0.0, PI / 6.0, PI / 4.0, PI / 2.0],
            radii: vec![[0.5, 2.0], [0.1, 10.0]],
            quad_n: 400,
            profile: [1.0, 2.0],
        }
    }
}

impl Default for CurveSpec {
    fn default() -> Self {
        Self { starts: vec![[0.0, 0.0], [0.0, 0.5]], s_range: [-1.0, 1.0], step: 1e-3, blowup_bound: 1e6 }
    }
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            density: 1.0,
            h_fd: 1e-3,
            radii: vec![1.0, 2.0],
            points_per_radius: 12,
            plateau: [1.2, 1.2, 0.4],
            outer: [2.4, 2.4, 0.8],
            pairing_n: 32,
            lattice_origin: [0.0; 3],
            lattice_spacing: [0.0; 3],
            lattice_dims: [0; 3],
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            t1_spread: 4.0,
            ab_relative: 1e-12,
            harmonic_residual: 1e-4,
            quasiconvexity: 3.0,
            cube_a0: 8.0,
            cube_mass_band: 20.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn domain(&self) -> anyhow::Result<Domain> {
        let [a, b, c, d] = self.graph.domain;
        Ok(Domain::new(a, b, c, d)?)
    }

    pub fn function(&self) -> anyhow::Result<IntrinsicFunction> {
        let plane = heis_sio::VerticalSubgroup::new(self.graph.theta)?;
        Ok(builtin(&self.graph.name, &self.graph.params)?.on_plane(plane))
    }

    pub fn kernel(&self) -> anyhow::Result<CZKernel> {
        Ok(CZKernel::by_name(&self.kernel.name)?)
    }

    pub fn resolution(&self) -> anyhow::Result<f64> {
        Ok(self.domain()?.grid_resolution(self.graph.n_y, self.graph.n_t))
    }

    /// Every violated guard, each naming the offending field.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Err(e) = self.function() {
            v.push(format!("graph: {e}"));
        }
        if self.graph.n_y < 2 || self.graph.n_t < 2 {
            v.push(format!("graph.n_y/n_t: need at least 2 cells per axis, got {}x{}", self.graph.n_y, self.graph.n_t));
        }
        let res = match self.resolution() {
            Ok(r) if r.is_finite() => Some(r),
            Ok(_) => None,
            Err(e) => {
                v.push(format!("graph.domain: {e}"));
                None
            }
        };
        if let Err(e) = self.kernel() {
            v.push(format!("kernel.name: {e}"));
        }
        let c = &self.cubes;
        if c.j_min > c.j_max {
            v.push(format!("cubes: j_min {} exceeds j_max {}", c.j_min, c.j_max));
        }
        if let Some(res) = res {
            if 2f64.powi(c.j_min) < 4.0 * res {
                v.push(format!(
                    "cubes.j_min: resolution guard 2^j_min >= 4*resolution violated (2^{} < 4*{res:.4e})",
                    c.j_min
                ));
            }
            for &e in &self.t1.eps {
                if e < res {
                    v.push(format!("t1.eps: resolution guard eps >= resolution violated ({e} < {res:.4e})"));
                }
            }
        }
        if let Ok(d) = self.domain() {
            if 2f64.powi(c.j_max) > 2.0 * d.diameter() {
                v.push(format!("cubes.j_max: 2^{} exceeds twice the domain diameter {:.4}", c.j_max, d.diameter()));
            }
        }
        if c.layer_rhos.iter().any(|r| !(*r > 0.0)) {
            v.push("cubes.layer_rhos: widths must be positive".into());
        }
        if self.t1.eps.is_empty() || self.t1.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            v.push(format!("t1.eps: need a non-empty list of positive values, got {:?}", self.t1.eps));
        }
        let ab = &self.ab;
        for name in &ab.kernels {
            if CZKernel::by_name(name).is_err() {
                v.push(format!("ab.kernels: unknown kernel {name}"));
            }
        }
        if ab.radii.iter().any(|[r, big]| !(0.0 < *r && r < big && big.is_finite())) {
            v.push(format!("ab.radii: need 0 < r < R, got {:?}", ab.radii));
        }
        if ab.quad_n < 2 {
            v.push("ab.quad_n: need at least 2".into());
        }
        if heis_sio::BumpProfile::new(ab.profile[0], ab.profile[1]).is_err() {
            v.push(format!("ab.profile: invalid bump profile {:?}", ab.profile));
        }
        let cv = &self.curves;
        if !(cv.step > 0.0 && cv.step.is_finite()) {
            v.push(format!("curves.step: must be positive, got {}", cv.step));
        }
        for s in &cv.starts {
            if !(cv.s_range[0] <= s[0] && s[0] <= cv.s_range[1]) {
                v.push(format!("curves.starts: y0 = {} outside s_range {:?}", s[0], cv.s_range));
            }
        }
        let p = &self.potential;
        if !(0.0..=1.0).contains(&p.density) {
            v.push(format!("potential.density: must lie in [0, 1], got {}", p.density));
        }
        if !(p.h_fd > 0.0) {
            v.push(format!("potential.h_fd: must be positive, got {}", p.h_fd));
        }
        if heis_sio::removability::PlateauBox::new(p.plateau, p.outer).is_err() {
            v.push(format!("potential.plateau/outer: need 0 < plateau < outer, got {:?} {:?}", p.plateau, p.outer));
        }
        if p.pairing_n < 2 {
            v.push("potential.pairing_n: need at least 2".into());
        }
        v
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            bail!("invalid configuration:\n  {}", v.join("\n  "))
        }
    }
}

//! Invariant suites run by `heis-sio verify`.

use heis_sio::graphs::{
    characteristic_curve, check_integral_representation, estimate_hoelder_h, hoelder_samples, linear_approx_slope,
    naive_hoelder_quotient, vertical_line_hoelder_stat, IntrinsicFunction,
};
use heis_sio::group::{dilate, dist, horizontal_derivatives_fd, inv, koranyi_norm, koranyi_norm4, mul, Point};
use heis_sio::kernels::{adjoint_kernel, check_symmetry_as, log_uniform_samples, CZKernel};
use heis_sio::quadrature::{build_christ_cubes, build_graph_measure, Domain};
use heis_sio::removability::{
    check_harmonic_off_support, horizontal_path, nonharmonicity_pairing, observed_order, shell_points, Charges,
    PlateauBox,
};
use heis_sio::sio::{ab_integral, smooth_sio, smooth_sio_by_pieces, t1_test};
use heis_sio::{BumpProfile, Symmetry, VerticalSubgroup, WPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SUITES: [&str; 6] = ["core", "kernels", "graphs", "cubes", "sio", "removability"];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

struct Suite {
    name: &'static str,
    checks: Vec<Check>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self { name, checks: Vec::new() }
    }

    fn check(&mut self, name: &'static str, pass: bool, detail: String) {
        self.checks.push(Check { suite: self.name, name, pass, detail });
    }

    /// Records `value ≤ limit`.
    fn bound(&mut self, name: &'static str, value: f64, limit: f64) {
        self.check(name, value <= limit, format!("{value:.3e} <= {limit:.1e}"));
    }
}

fn rel_gap(a: Point, b: Point) -> f64 {
    let scale = 1.0 + a.x.abs().max(a.y.abs()).max(a.t.abs());
    (a.x - b.x).abs().max((a.y - b.y).abs()).max((a.t - b.t).abs()) / scale
}

fn random_points(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Point::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))).collect()
}

fn core(seed: u64) -> Vec<Check> {
    let mut s = Suite::new("core");
    let p = random_points(3000, seed);
    let (a, b, c) = (&p[..1000], &p[1000..2000], &p[2000..]);
    let mut worst = [0.0f64; 6];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for i in 0..1000 {
        worst[0] = worst[0].max(rel_gap(mul(mul(a[i], b[i]), c[i]), mul(a[i], mul(b[i], c[i]))));
        worst[1] = worst[1].max(rel_gap(mul(a[i], inv(a[i])), Point::IDENTITY));
        let d = dist(a[i], b[i]);
        worst[2] = worst[2].max((dist(mul(c[i], a[i]), mul(c[i], b[i])) - d).abs() / d);
        let r: f64 = rng.gen_range(0.01..100.0);
        let n = koranyi_norm(a[i]);
        worst[3] = worst[3].max((koranyi_norm(dilate(r, a[i]).unwrap()) - r * n).abs() / (r * n));
        worst[4] = worst[4].max((koranyi_norm(inv(a[i])) - n).abs() / n);
        let w = VerticalSubgroup::new(rng.gen_range(-3.2..3.2)).unwrap();
        let (pw, v) = w.split(a[i]);
        worst[5] = worst[5].max(rel_gap(mul(w.embed_w(pw), w.embed_v(v)), a[i]));
    }
    let names = ["associativity", "inverse", "left invariance", "dilation", "norm symmetry", "projection recomposition"];
    for (name, w) in names.into_iter().zip(worst) {
        s.bound(name, w, 1e-10);
    }
    s.checks
}

fn kernels(seed: u64) -> Vec<Check> {
    let mut s = Suite::new("kernels");
    let k = CZKernel::riesz();
    let v = |p: Point| k.eval(p).unwrap().v;
    let closed = [(Point::new(1.0, 0.0, 0.0), [-2.0, 0.0]), (Point::new(0.0, 1.0, 0.0), [0.0, -2.0]), (Point::new(0.0, 0.0, 0.7), [0.0, 0.0])];
    let gap = closed.iter().map(|(p, want)| (v(*p)[0] - want[0]).abs().max((v(*p)[1] - want[1]).abs())).fold(0.0, f64::max);
    s.bound("riesz closed forms", gap, 1e-15);
    let fd = log_uniform_samples(200, 0.5, 2.0, seed)
        .into_iter()
        .map(|p| {
            let d = horizontal_derivatives_fd(|q| 1.0 / koranyi_norm4(q).sqrt(), p, 1e-4).unwrap();
            let kv = v(p);
            (d.xu - kv[0]).abs().max((d.yu - kv[1]).abs()) / (1.0 + kv[0].abs().max(kv[1].abs()))
        })
        .fold(0.0, f64::max);
    s.bound("riesz = horizontal gradient (fd)", fd, 1e-5);
    s.check("riesz horizontal antisymmetry", check_symmetry_as(&k, Symmetry::HorizontallyAntisymmetric, 1000, seed), "1e-12 relative".into());
    let q = CZKernel::quasi_riesz();
    s.check("quasi-riesz antisymmetry", check_symmetry_as(&q, Symmetry::Antisymmetric, 1000, seed), "1e-12 relative".into());
    let growth = heis_sio::kernels::check_growth(&k, &log_uniform_samples(1000, 1e-3, 1e3, seed));
    s.bound("riesz growth constant", growth.max_growth, k.growth_const * (1.0 + 1e-12));
    let back = adjoint_kernel(&adjoint_kernel(&k));
    s.check("adjoint involution", back == k, back.name);
    s.checks
}

fn graphs(_seed: u64) -> Vec<Check> {
    let mut s = Suite::new("graphs");
    let c = IntrinsicFunction::constant(0.7);
    let curve = characteristic_curve(&c, 0.2, -0.1, (-1.0, 1.0), 0.01, 1e6).unwrap();
    let gap = curve.samples.iter().map(|&(y, t)| (t - (-0.1 + 0.7 * (y - 0.2))).abs()).fold(0.0, f64::max);
    s.bound("rk4 constant family", gap, 1e-12);
    let b = 1.3;
    let l = IntrinsicFunction::linear(b);
    let curve = characteristic_curve(&l, -0.3, 0.5, (-1.0, 2.0), 0.05, 1e6).unwrap();
    let gap = curve.samples.iter().map(|&(y, t)| (t - (0.5 + b * (y * y - 0.09) / 2.0)).abs()).fold(0.0, f64::max);
    s.bound("rk4 linear family", gap, 1e-12);
    let e = IntrinsicFunction::ex1(1.0).unwrap();
    let curve = characteristic_curve(&e, 0.0, 0.5, (0.0, 1.0), 1e-3, 1e6).unwrap();
    s.bound("ex1 integral representation", check_integral_representation(&e, &curve), 1e-5);
    let bump = IntrinsicFunction::bump(1.0, 0.3).unwrap();
    let scales: Vec<f64> = (1..=10).map(|k| 2f64.powi(-k)).collect();
    let slope = linear_approx_slope(&bump, WPoint::new(0.0, 0.0), &scales).slope;
    s.check("bump linear approximation slope", slope >= 1.85, format!("{slope:.3} >= 1.85"));
    let q: Vec<f64> = (1..=5).map(|k| naive_hoelder_quotient(&e, WPoint::new(0.0, 0.0), 10f64.powi(-k))).collect();
    let growth = q.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    s.check("ex1 naive quotient diverges", growth >= 1.3, format!("min growth {growth:.3} >= 1.3"));
    let h = estimate_hoelder_h(&bump, &hoelder_samples(&bump, 20_000, 1.0, 1));
    let ts: Vec<f64> = (0..200).map(|i| -0.25 + i as f64 * 0.0025).collect();
    let v = vertical_line_hoelder_stat(&bump, 0.0, &ts).unwrap();
    s.bound("vertical-line hoelder quotient", v, (2000.0 * h).sqrt());
    s.checks
}

fn cubes(_seed: u64) -> Vec<Check> {
    let mut s = Suite::new("cubes");
    let d = Domain::new(-0.25, 0.25, -0.03125, 0.03125).unwrap();
    let mu = build_graph_measure(&IntrinsicFunction::zero(), d, 24, 576).unwrap();
    s.bound("zero graph mass", (mu.total_mass - d.area()).abs() / d.area(), 1e-12);
    let b = 0.6;
    let lin = build_graph_measure(&IntrinsicFunction::linear(b), d, 24, 64).unwrap();
    s.bound("linear graph mass", (lin.total_mass / (d.area() * (1.0 + b * b).sqrt()) - 1.0).abs(), 1e-10);
    let t = build_christ_cubes(&mu, -3, -1).unwrap();
    s.check("(C0) partition", t.partition_ok, format!("{} generations", t.generations.len()));
    s.check("(C1) nesting", t.nesting_ok, format!("{} cubes", t.cubes.len()));
    s.bound("(C2) diameter constant", t.constants.a0, 8.0);
    s.check("(C3) inner ball constant", t.constants.c0 > 0.0, format!("{:.3e} > 0", t.constants.c0));
    s.bound("mass band", t.mass_band(), 20.0);
    s.checks
}

fn sio(seed: u64) -> Vec<Check> {
    let mut s = Suite::new("sio");
    let psi = BumpProfile::default();
    let mut worst = 0.0f64;
    for k in [CZKernel::riesz(), CZKernel::quasi_riesz()] {
        for c in 0..k.dim() {
            let kc = k.component(c).unwrap();
            for theta in [0.0, std::f64::consts::FRAC_PI_6, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
                let v = ab_integral(&kc, &VerticalSubgroup::new(theta).unwrap(), psi, 0.5, 2.0, 200).unwrap();
                worst = worst.max(if v.abs_sum > 0.0 { v.value.abs() / v.abs_sum } else { v.value.abs() });
            }
        }
    }
    s.bound("ab cancellation", worst, 1e-12);
    let f = IntrinsicFunction::bump(0.4, 0.3).unwrap();
    let mu = build_graph_measure(&f, Domain::new(-0.5, 0.5, -0.125, 0.125).unwrap(), 12, 72).unwrap();
    let ones = vec![1.0; mu.len()];
    let k = CZKernel::riesz();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tele = 0.0f64;
    for _ in 0..5 {
        let p = mu.points[rng.gen_range(0..mu.len())].mul(Point::new(0.05, 0.0, 0.0));
        let (a, b) = (smooth_sio(&k, &mu, &ones, p, psi, 3).unwrap(), smooth_sio_by_pieces(&k, &mu, &ones, p, psi, 3).unwrap());
        tele = tele.max((0..2).map(|i| (a.v[i] - b.v[i]).abs() / (1.0 + a.v[i].abs())).fold(0.0, f64::max));
    }
    s.bound("smoothed kernel telescopes", tele, 1e-10);
    let tree = build_christ_cubes(&mu, -1, 0).unwrap();
    let t1 = t1_test(&k, &mu, &tree, &[0.5, 0.25]).unwrap();
    let fin = t1.direct.max_ratio.is_finite() && t1.adjoint.max_ratio.is_finite();
    s.check("t1 ratios finite", fin, format!("max {:.3e} / {:.3e}", t1.direct.max_ratio, t1.adjoint.max_ratio));
    s.checks
}

fn removability(seed: u64) -> Vec<Check> {
    let mut s = Suite::new("removability");
    let pts = shell_points(50, 0.5, 5.0, seed);
    let c = Charges::point_mass(Point::IDENTITY, 1.0);
    let coarse = check_harmonic_off_support(&c, &pts, 2e-3).unwrap();
    let fine = check_harmonic_off_support(&c, &pts, 1e-3).unwrap();
    s.bound("fundamental solution harmonic", fine.max_residual, 1e-4);
    let order = observed_order(&coarse, &fine);
    s.check("fd convergence order", order >= 1.8, format!("{order:.2} >= 1.8"));
    let p = random_points(2000, seed ^ 0x9a7);
    let (mut end, mut ratio) = (0.0f64, 0.0f64);
    for w in p.chunks(2) {
        let path = horizontal_path(w[0], w[1]);
        end = end.max(rel_gap(path.traced_end(), w[1]));
        ratio = ratio.max(path.length() / dist(w[1], w[0]));
    }
    s.bound("path endpoint", end, 1e-10);
    s.bound("path length / d", ratio, 3.0);
    let v = horizontal_path(Point::IDENTITY, Point::new(0.0, 0.0, 1.0));
    s.check("vertical pair length 2d", (v.length() - 4.0).abs() < 1e-14, format!("{:.15}", v.length()));
    let b = PlateauBox::new([0.6, 0.7, 0.3], [1.2, 1.4, 0.6]).unwrap();
    let pair = nonharmonicity_pairing(&c, &b, 24).unwrap();
    s.check("pairing negative", pair.value < 0.0, format!("{:.4e}", pair.value));
    s.checks
}

/// Runs one suite, or every suite for `"all"`; `None` for an unknown name.
pub fn run(suite: &str, seed: u64) -> Option<Vec<Check>> {
    let one = |name: &str| -> Option<Vec<Check>> {
        Some(match name {
            "core" => core(seed),
            "kernels" => kernels(seed),
            "graphs" => graphs(seed),
            "cubes" => cubes(seed),
            "sio" => sio(seed),
            "removability" => removability(seed),
            _ => return None,
        })
    };
    if suite == "all" {
        Some(SUITES.iter().flat_map(|s| one(s).unwrap_or_default()).collect())
    } else {
        one(suite)
    }
}

pub fn table(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!("{:<13} {:<36} {:<4} {}\n", c.suite, c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    out.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    out
}

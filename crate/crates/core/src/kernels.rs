//! Calderón–Zygmund kernels on ℍ.
//!
//! Kernels are vector valued (up to three components) and evaluated at the
//! group quotient `q⁻¹·p`. Only built-in parametric families are supported;
//! derived kernels (adjoints, Littlewood–Paley pieces, smooth truncations,
//! single components) wrap a base form.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::group::{inv, koranyi_norm, koranyi_norm4, left_quotient, mul, Point};

/// Cancellation class a kernel claims to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// `K(x,y,t) = −K(−x,−y,t)`.
    HorizontallyAntisymmetric,
    /// `K(p⁻¹) = −K(p)`.
    Antisymmetric,
    None,
}

/// Smooth even cut-off `ψ` with `ψ = 1` on `[0, inner]` and `ψ = 0` on
/// `[outer, ∞)`, glued with `e^{−1/s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    inner: f64,
    outer: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self { inner: 1.0, outer: 2.0 }
    }
}

#[inline]
fn glue(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

impl BumpProfile {
    /// Requires `1/2 ≤ inner < outer ≤ 2`, which gives
    /// `χ_[−1/2,1/2] ≤ ψ ≤ χ_[−2,2]`.
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(0.5..2.0).contains(&inner) || !(outer > inner && outer <= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "bump profile needs 1/2 <= inner < outer <= 2, got ({inner}, {outer})"
            )));
        }
        Ok(Self { inner, outer })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        let a = s.abs();
        if a <= self.inner {
            1.0
        } else if a >= self.outer {
            0.0
        } else {
            let u = (a - self.inner) / (self.outer - self.inner);
            let f0 = glue(1.0 - u);
            let f1 = glue(u);
            f0 / (f0 + f1)
        }
    }

    /// Bound for `|ψ'|`. The glued step has maximal slope 2 at its midpoint.
    pub fn derivative_bound(&self) -> f64 {
        2.0 / (self.outer - self.inner)
    }

    /// `ψ_j(p) = ψ(2^j ‖p‖)`.
    #[inline]
    pub fn dyadic(&self, j: i32, norm: f64) -> f64 {
        self.eval(2f64.powi(j) * norm)
    }

    /// `η_j = ψ_j − ψ_{j+1}`.
    #[inline]
    pub fn annulus(&self, j: i32, norm: f64) -> f64 {
        self.dyadic(j, norm) - self.dyadic(j + 1, norm)
    }
}

/// The concrete formula behind a kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelForm {
    /// `∇_H ‖·‖⁻²`, two components.
    Riesz,
    /// `(x/‖p‖⁴, y/‖p‖⁴, t/‖p‖⁵)`.
    QuasiRiesz,
    Zero { dim: usize },
    /// `‖p‖⁻³`: correct size, no cancellation.
    Radial,
    Component { inner: Box<KernelForm>, index: usize },
    /// `p ↦ K(p⁻¹)`.
    Adjoint(Box<KernelForm>),
    /// `η_j · K`.
    Piece { inner: Box<KernelForm>, j: i32, profile: BumpProfile },
    /// `(1 − ψ_{n+1}) · K`, the telescoped sum of the pieces with `j ≤ n`.
    Smoothed { inner: Box<KernelForm>, n: i32, profile: BumpProfile },
}

impl KernelForm {
    fn dim(&self) -> usize {
        match self {
            KernelForm::Riesz => 2,
            KernelForm::QuasiRiesz => 3,
            KernelForm::Zero { dim } => *dim,
            KernelForm::Radial => 1,
            KernelForm::Component { .. } => 1,
            KernelForm::Adjoint(k) => k.dim(),
            KernelForm::Piece { inner, .. } | KernelForm::Smoothed { inner, .. } => inner.dim(),
        }
    }

    #[inline]
    fn eval(&self, p: Point) -> [f64; 3] {
        match self {
            KernelForm::Riesz => {
                let h = p.x * p.x + p.y * p.y;
                let n4 = h * h + 16.0 * p.t * p.t;
                let n6 = n4 * n4.sqrt();
                [(-2.0 * p.x * h + 8.0 * p.y * p.t) / n6, (-2.0 * p.y * h - 8.0 * p.x * p.t) / n6, 0.0]
            }
            KernelForm::QuasiRiesz => {
                let n4 = koranyi_norm4(p);
                let n = n4.sqrt().sqrt();
                [p.x / n4, p.y / n4, p.t / (n4 * n)]
            }
            KernelForm::Zero { .. } => [0.0; 3],
            KernelForm::Radial => {
                let n = koranyi_norm(p);
                [1.0 / (n * n * n), 0.0, 0.0]
            }
            KernelForm::Component { inner, index } => [inner.eval(p)[*index], 0.0, 0.0],
            KernelForm::Adjoint(inner) => inner.eval(inv(p)),
            KernelForm::Piece { inner, j, profile } => {
                let w = profile.annulus(*j, koranyi_norm(p));
                if w == 0.0 {
                    [0.0; 3]
                } else {
                    inner.eval(p).map(|v| w * v)
                }
            }
            KernelForm::Smoothed { inner, n, profile } => {
                let w = 1.0 - profile.dyadic(n + 1, koranyi_norm(p));
                if w == 0.0 {
                    [0.0; 3]
                } else {
                    inner.eval(p).map(|v| w * v)
                }
            }
        }
    }
}

/// A vector-valued kernel with its CZ metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CZKernel {
    pub name: String,
    pub form: KernelForm,
    /// Hölder exponent in `(0, 1]`.
    pub beta: f64,
    /// Nominal constant in `|K(z)| ≤ C‖z‖⁻³`.
    pub growth_const: f64,
    pub symmetry: Symmetry,
}

/// Value of a kernel; only the first `dim` entries are meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub v: [f64; 3],
    pub dim: usize,
}

impl KernelValue {
    pub fn as_slice(&self) -> &[f64] {
        &self.v[..self.dim]
    }

    pub fn norm(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl CZKernel {
    pub fn riesz() -> Self {
        Self {
            name: "riesz".into(),
            form: KernelForm::Riesz,
            beta: 1.0,
            growth_const: 2.0,
            symmetry: Symmetry::HorizontallyAntisymmetric,
        }
    }

    pub fn quasi_riesz() -> Self {
        Self {
            name: "quasi-riesz".into(),
            form: KernelForm::QuasiRiesz,
            beta: 1.0,
            growth_const: (1.0f64 + 1.0 / 16.0).sqrt(),
            symmetry: Symmetry::Antisymmetric,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            name: "zero".into(),
            form: KernelForm::Zero { dim: dim.clamp(1, 3) },
            beta: 1.0,
            growth_const: 0.0,
            symmetry: Symmetry::HorizontallyAntisymmetric,
        }
    }

    /// `‖p‖⁻³`, a size-only kernel used as a negative control for cancellation.
    pub fn radial() -> Self {
        Self {
            name: "radial".into(),
            form: KernelForm::Radial,
            beta: 1.0,
            growth_const: 1.0,
            symmetry: Symmetry::None,
        }
    }

    /// Built-in kernels by name: `riesz`, `quasi-riesz`, `zero`, `radial`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "riesz" => Ok(Self::riesz()),
            "quasi-riesz" | "quasi_riesz" => Ok(Self::quasi_riesz()),
            "zero" => Ok(Self::zero(2)),
            "radial" => Ok(Self::radial()),
            other => Err(Error::UnknownName(format!("kernel '{other}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    /// Evaluates the kernel; the identity is outside its domain.
    pub fn eval(&self, p: Point) -> Result<KernelValue> {
        p.validate()?;
        if p.is_identity() {
            return Err(Error::AtIdentity);
        }
        Ok(KernelValue { v: self.form.eval(p), dim: self.dim() })
    }

    /// Evaluation without validation, for inner loops. `p` must not be the identity.
    #[inline]
    pub fn eval_raw(&self, p: Point) -> [f64; 3] {
        self.form.eval(p)
    }

    /// Scalar kernel formed by component `index`.
    pub fn component(&self, index: usize) -> Result<Self> {
        if index >= self.dim() {
            return Err(Error::InvalidArgument(format!(
                "component {index} of a {}-dimensional kernel",
                self.dim()
            )));
        }
        Ok(Self {
            name: format!("{}[{index}]", self.name),
            form: KernelForm::Component { inner: Box::new(self.form.clone()), index },
            beta: self.beta,
            growth_const: self.growth_const,
            symmetry: self.symmetry,
        })
    }
}

/// Kernel of the formal adjoint, `p ↦ K(p⁻¹)`. The recorded Hölder exponent is
/// halved; the symmetry class is preserved.
pub fn adjoint_kernel(k: &CZKernel) -> CZKernel {
    let form = match &k.form {
        KernelForm::Adjoint(inner) => (**inner).clone(),
        other => KernelForm::Adjoint(Box::new(other.clone())),
    };
    let (name, beta) = match k.name.strip_suffix('*') {
        Some(base) => (base.to_string(), (2.0 * k.beta).min(1.0)),
        None => (format!("{}*", k.name), k.beta / 2.0),
    };
    CZKernel { name, form, beta, growth_const: k.growth_const, symmetry: k.symmetry }
}

/// Littlewood–Paley piece `K_(j) = (ψ_j − ψ_{j+1}) K`, supported in
/// `2^{−2−j} ≤ ‖p‖ ≤ 2^{1−j}`.
pub fn lp_piece(k: &CZKernel, j: i32, profile: BumpProfile) -> CZKernel {
    CZKernel {
        name: format!("{}_({j})", k.name),
        form: KernelForm::Piece { inner: Box::new(k.form.clone()), j, profile },
        beta: k.beta,
        growth_const: k.growth_const,
        symmetry: k.symmetry,
    }
}

/// `K · (1 − ψ_{n+1})`, equal to `Σ_{j ≤ n} K_(j)`.
pub fn smoothed_kernel(k: &CZKernel, n: i32, profile: BumpProfile) -> CZKernel {
    CZKernel {
        name: format!("{}~{n}", k.name),
        form: KernelForm::Smoothed { inner: Box::new(k.form.clone()), n, profile },
        beta: k.beta,
        growth_const: k.growth_const,
        symmetry: k.symmetry,
    }
}

/// Closed-form Riesz kernel.
pub fn riesz_kernel(p: Point) -> Result<(f64, f64)> {
    let v = CZKernel::riesz().eval(p)?;
    Ok((v.v[0], v.v[1]))
}

/// Closed-form quasi-Riesz kernel.
pub fn quasi_riesz_kernel(p: Point) -> Result<(f64, f64, f64)> {
    let v = CZKernel::quasi_riesz().eval(p)?;
    Ok((v.v[0], v.v[1], v.v[2]))
}

/// Deterministic random point with Korányi norm exactly `r` (up to rounding).
pub fn random_point_with_norm<R: Rng>(rng: &mut R, r: f64) -> Point {
    loop {
        let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5));
        let n = koranyi_norm(p);
        if n > 1e-3 {
            return Point::new(p.x * r / n, p.y * r / n, p.t * r * r / (n * n));
        }
    }
}

/// `n` points with `log ‖p‖` uniform on `[ln r_min, ln r_max]`.
pub fn log_uniform_samples(n: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..n)
        .map(|_| {
            let r = rng.gen_range(a..=b).exp();
            random_point_with_norm(&mut rng, r)
        })
        .collect()
}

/// Pairs `(z1, z2)` with `d(z1, z2) = s ‖z1‖ / 2`, `s` log-uniform in `[1e-4, 1]`.
pub fn admissible_pairs(n: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..n)
        .map(|_| {
            let r = rng.gen_range(a..=b).exp();
            let z1 = random_point_with_norm(&mut rng, r);
            let s = rng.gen_range((1e-4f64).ln()..=0.0).exp();
            let u = random_point_with_norm(&mut rng, s * r / 2.0);
            (z1, mul(z1, u))
        })
        .collect()
}

/// Empirical growth constant, overall and per decade of `‖z‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub samples: usize,
    pub skipped: usize,
    /// `max |K(z)| ‖z‖³`.
    pub max_growth: f64,
    /// `(floor(log10 ‖z‖), max |K(z)| ‖z‖³)` in increasing decade order.
    pub per_decade: Vec<(i32, f64)>,
}

impl GrowthReport {
    /// Ratio of the largest to the smallest non-empty per-decade maximum.
    pub fn decade_spread(&self) -> f64 {
        let vals: Vec<f64> = self.per_decade.iter().map(|d| d.1).collect();
        let max = vals.iter().cloned().fold(0.0, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            1.0
        } else {
            max / min
        }
    }

    pub fn passed(&self) -> bool {
        self.max_growth.is_finite()
    }
}

pub fn check_growth(k: &CZKernel, samples: &[Point]) -> GrowthReport {
    let mut skipped = 0;
    let mut max_growth: f64 = 0.0;
    let mut decades: std::collections::BTreeMap<i32, f64> = Default::default();
    for &z in samples {
        let Ok(v) = k.eval(z) else {
            skipped += 1;
            continue;
        };
        let n = koranyi_norm(z);
        let g = v.norm() * n * n * n;
        max_growth = max_growth.max(g);
        let d = n.log10().floor() as i32;
        let e = decades.entry(d).or_insert(0.0);
        *e = e.max(g);
    }
    GrowthReport { samples: samples.len(), skipped, max_growth, per_decade: decades.into_iter().collect() }
}

/// Empirical Hölder constants.
#[derive(Debug, Clone, PartialEq)]
pub struct HoelderReport {
    pub pairs: usize,
    /// Pairs with `z1 = 0`, `z1 = z2`, or `d(z1,z2) > ‖z1‖/2`.
    pub skipped: usize,
    /// `max |K(z1)−K(z2)| ‖z1‖^{3+β} / ‖z2⁻¹z1‖^β`.
    pub max_hoelder: f64,
    /// `max |K(z1⁻¹)−K(z2⁻¹)| ‖z1‖^{3+β/2} / ‖z2⁻¹z1‖^{β/2}`.
    pub max_inverse_hoelder: f64,
}

impl HoelderReport {
    pub fn passed(&self) -> bool {
        self.max_hoelder.is_finite() && self.max_inverse_hoelder.is_finite()
    }
}

pub fn check_hoelder(k: &CZKernel, pairs: &[(Point, Point)]) -> HoelderReport {
    let beta = k.beta;
    let mut skipped = 0;
    let (mut mh, mut mi): (f64, f64) = (0.0, 0.0);
    let diff = |a: [f64; 3], b: [f64; 3]| {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    for &(z1, z2) in pairs {
        let n1 = koranyi_norm(z1);
        let d = koranyi_norm(left_quotient(z2, z1));
        if z1.is_identity() || d == 0.0 || d > n1 / 2.0 || !z1.is_finite() || !z2.is_finite() {
            skipped += 1;
            continue;
        }
        let dk = diff(k.eval_raw(z1), k.eval_raw(z2));
        mh = mh.max(dk * n1.powf(3.0 + beta) / d.powf(beta));
        let dki = diff(k.eval_raw(inv(z1)), k.eval_raw(inv(z2)));
        mi = mi.max(dki * n1.powf(3.0 + beta / 2.0) / d.powf(beta / 2.0));
    }
    HoelderReport { pairs: pairs.len(), skipped, max_hoelder: mh, max_inverse_hoelder: mi }
}

/// Checks the declared symmetry on `n` seeded random points.
pub fn check_symmetry(k: &CZKernel, n: usize, seed: u64) -> bool {
    check_symmetry_as(k, k.symmetry, n, seed)
}

/// Checks whether `k` has symmetry class `sym`, to relative tolerance 1e-12.
pub fn check_symmetry_as(k: &CZKernel, sym: Symmetry, n: usize, seed: u64) -> bool {
    let reflect: fn(Point) -> Point = match sym {
        Symmetry::None => return true,
        Symmetry::HorizontallyAntisymmetric => |p| Point::new(-p.x, -p.y, p.t),
        Symmetry::Antisymmetric => inv,
    };
    log_uniform_samples(n, 1e-2, 1e2, seed).into_iter().all(|p| {
        let a = k.eval_raw(p);
        let b = k.eval_raw(reflect(p));
        let scale = a.iter().chain(b.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        a.iter().zip(b.iter()).all(|(x, y)| (x + y).abs() <= 1e-12 * scale)
    })
}

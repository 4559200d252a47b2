//! Intrinsic C^{1,α} functions `φ: W → ℝ` and their graphs
//! `Γ(φ) = {w · φ(w)}`.
//!
//! Functions are written in the `(w1, w2)` coordinates of their vertical
//! subgroup. For `θ = 0` these are `(y, t)`. Other planes are reduced to the
//! `θ = 0` formulas by rotating about the t-axis, which preserves the `W`
//! coordinates and the metric.

pub mod curves;
pub mod regularity;

pub use curves::{characteristic_curve, check_integral_representation, integral_residuals, Curve};
pub use regularity::{
    cone_test, estimate_hoelder_h, hoelder_samples, linear_approx_slope, naive_hoelder_quotient,
    vertical_line_hoelder_stat, SlopeFit,
};

use crate::error::{Error, Result};
use crate::group::{embed_v, embed_w, mul, Point, VerticalSubgroup, WPoint};

/// Step used when a family has no analytic partials.
pub const FD_STEP: f64 = 1e-6;

/// Built-in function families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Zero,
    Constant(f64),
    /// `φ(y,t) = b·y`.
    Linear(f64),
    /// `φ(y,t) = 1 + |t|^{1+α/2}`.
    Ex1 { alpha: f64 },
    /// `h·β((y⁴+16t²)/ρ⁴)` with `β(u) = exp(1 − 1/(1−u))` on `u < 1`.
    Bump { radius: f64, height: f64 },
    /// `Σ c·y^i·t^k` over `(i, k, c)`.
    Polynomial(Vec<(u32, u32, f64)>),
    /// `φ^{p0}` in the `θ = 0` frame.
    Translated { base: Box<IntrinsicFunction>, p0: Point },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicFunction {
    pub family: Family,
    pub alpha: f64,
    /// Intrinsic Hölder constant of `∇^φφ`, where known.
    pub h: Option<f64>,
    /// Bound for `|∇^φφ|`, where known.
    pub l: Option<f64>,
    pub support_radius: Option<f64>,
    pub w: VerticalSubgroup,
    /// Box `[y0, y1] × [t0, t1]` that sampling-based checks restrict to.
    pub domain: [f64; 4],
}

/// Value, partials and intrinsic gradient at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub phi: f64,
    pub dy: f64,
    pub dt: f64,
}

impl Jet {
    pub fn intrinsic_gradient(&self) -> f64 {
        self.dy + self.phi * self.dt
    }
}

fn bump_jet(radius: f64, height: f64, y: f64, t: f64) -> Jet {
    let r4 = radius.powi(4);
    let u = (y.powi(4) + 16.0 * t * t) / r4;
    if u >= 1.0 {
        return Jet { phi: 0.0, dy: 0.0, dt: 0.0 };
    }
    let b = (1.0 - 1.0 / (1.0 - u)).exp();
    let db = -b / ((1.0 - u) * (1.0 - u));
    Jet { phi: height * b, dy: height * db * 4.0 * y.powi(3) / r4, dt: height * db * 32.0 * t / r4 }
}

fn poly_jet(terms: &[(u32, u32, f64)], y: f64, t: f64) -> Jet {
    let mut j = Jet { phi: 0.0, dy: 0.0, dt: 0.0 };
    for &(i, k, c) in terms {
        let (yi, tk) = (y.powi(i as i32), t.powi(k as i32));
        j.phi += c * yi * tk;
        if i > 0 {
            j.dy += c * i as f64 * y.powi(i as i32 - 1) * tk;
        }
        if k > 0 {
            j.dt += c * k as f64 * yi * t.powi(k as i32 - 1);
        }
    }
    j
}

impl IntrinsicFunction {
    fn plain(family: Family, alpha: f64, h: Option<f64>, l: Option<f64>) -> Self {
        Self {
            family,
            alpha,
            h,
            l,
            support_radius: None,
            w: VerticalSubgroup::YT_PLANE,
            domain: [-1.0, 1.0, -1.0, 1.0],
        }
    }

    pub fn zero() -> Self {
        Self::plain(Family::Zero, 1.0, Some(0.0), Some(0.0))
    }

    pub fn constant(c: f64) -> Self {
        Self::plain(Family::Constant(c), 1.0, Some(0.0), Some(0.0))
    }

    pub fn linear(b: f64) -> Self {
        Self::plain(Family::Linear(b), 1.0, Some(0.0), Some(b.abs()))
    }

    pub fn ex1(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("ex1 needs 0 < alpha <= 1, got {alpha}")));
        }
        Ok(Self::plain(Family::Ex1 { alpha }, alpha, None, None))
    }

    /// Smooth bump supported in the Korányi ball of radius `radius` in `W`.
    pub fn bump(radius: f64, height: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && height.is_finite()) {
            return Err(Error::InvalidArgument(format!("bump({radius}, {height})")));
        }
        let mut f = Self::plain(Family::Bump { radius, height }, 1.0, None, None);
        f.support_radius = Some(radius);
        f.domain = [-radius, radius, -radius * radius / 4.0, radius * radius / 4.0];
        f.l = Some(f.sup_gradient_on_domain(400) * 1.01);
        Ok(f)
    }

    pub fn polynomial(terms: Vec<(u32, u32, f64)>) -> Result<Self> {
        if terms.iter().any(|t| !t.2.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficient".into()));
        }
        Ok(Self::plain(Family::Polynomial(terms), 1.0, None, None))
    }

    /// Built-in family by name. Parameters: `constant [c]`, `linear [b]`,
    /// `ex1 [α]`, `bump [radius, height]`, `polynomial [i, k, c, i, k, c, ...]`.
    pub fn builtin(name: &str, params: &[f64]) -> Result<Self> {
        let p = |i: usize, d: f64| params.get(i).copied().unwrap_or(d);
        match name {
            "zero" => Ok(Self::zero()),
            "constant" => Ok(Self::constant(p(0, 1.0))),
            "linear" => Ok(Self::linear(p(0, 1.0))),
            "ex1" => Self::ex1(p(0, 1.0)),
            "bump" => Self::bump(p(0, 1.0), p(1, 0.25)),
            "polynomial" | "custom-polynomial" => {
                if !params.len().is_multiple_of(3) {
                    return Err(Error::InvalidArgument("polynomial needs (i, k, c) triples".into()));
                }
                let terms = params
                    .chunks(3)
                    .map(|c| {
                        if c[0] < 0.0 || c[1] < 0.0 || c[0].fract() != 0.0 || c[1].fract() != 0.0 {
                            Err(Error::InvalidArgument(format!("bad exponents ({}, {})", c[0], c[1])))
                        } else {
                            Ok((c[0] as u32, c[1] as u32, c[2]))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::polynomial(terms)
            }
            other => Err(Error::UnknownName(format!("graph family '{other}'"))),
        }
    }

    /// Same function, read on the vertical subgroup `w`.
    pub fn on_plane(mut self, w: VerticalSubgroup) -> Self {
        self.w = w;
        self
    }

    pub fn with_domain(mut self, domain: [f64; 4]) -> Self {
        self.domain = domain;
        self
    }

    pub fn has_analytic_partials(&self) -> bool {
        match &self.family {
            Family::Translated { base, .. } => base.has_analytic_partials(),
            _ => true,
        }
    }

    /// `φ` together with its partials in `(w1, w2)`.
    pub fn jet(&self, w: WPoint) -> Jet {
        let (y, t) = (w.w1, w.w2);
        match &self.family {
            Family::Zero => Jet { phi: 0.0, dy: 0.0, dt: 0.0 },
            Family::Constant(c) => Jet { phi: *c, dy: 0.0, dt: 0.0 },
            Family::Linear(b) => Jet { phi: b * y, dy: *b, dt: 0.0 },
            Family::Ex1 { alpha } => {
                let e = 1.0 + alpha / 2.0;
                let a = t.abs();
                Jet { phi: 1.0 + a.powf(e), dy: 0.0, dt: t.signum() * e * a.powf(alpha / 2.0) }
            }
            Family::Bump { radius, height } => bump_jet(*radius, *height, y, t),
            Family::Polynomial(terms) => poly_jet(terms, y, t),
            Family::Translated { base, p0 } => {
                let inner = WPoint::new(y - p0.y, t - p0.t + 0.5 * p0.x * p0.y - y * p0.x);
                let j = base.jet(inner);
                Jet { phi: j.phi + p0.x, dy: j.dy - p0.x * j.dt, dt: j.dt }
            }
        }
    }

    #[inline]
    pub fn eval(&self, w: WPoint) -> f64 {
        self.jet(w).phi
    }

    /// Checked evaluation.
    pub fn try_eval(&self, w: WPoint) -> Result<f64> {
        if !w.is_finite() {
            return Err(Error::NonFinite(format!("w = ({}, {})", w.w1, w.w2)));
        }
        let v = self.eval(w);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("phi({}, {})", w.w1, w.w2)))
        }
    }

    fn sup_gradient_on_domain(&self, n: usize) -> f64 {
        let [y0, y1, t0, t1] = self.domain;
        let mut m: f64 = 0.0;
        for i in 0..=n {
            for k in 0..=n {
                let w = WPoint::new(y0 + (y1 - y0) * i as f64 / n as f64, t0 + (t1 - t0) * k as f64 / n as f64);
                m = m.max(self.jet(w).intrinsic_gradient().abs());
            }
        }
        m
    }
}

/// Named constructor, see [`IntrinsicFunction::builtin`].
pub fn builtin(name: &str, params: &[f64]) -> Result<IntrinsicFunction> {
    IntrinsicFunction::builtin(name, params)
}

/// `Φ(w) = w · φ(w)`.
pub fn graph_map(phi: &IntrinsicFunction, w: WPoint) -> Point {
    if phi.w.theta() == 0.0 {
        let v = phi.eval(w);
        return Point::new(v, w.w1, w.w2 - 0.5 * w.w1 * v);
    }
    mul(embed_w(&phi.w, w), embed_v(&phi.w, phi.eval(w)))
}

/// `φ^{p0}`, whose graph is `p0 · Γ(φ)`.
pub fn translate_function(phi: &IntrinsicFunction, p0: Point) -> IntrinsicFunction {
    if p0.is_identity() {
        return phi.clone();
    }
    let p0 = p0.rotate(-phi.w.theta());
    let mut inner = phi.clone();
    inner.w = VerticalSubgroup::YT_PLANE;
    IntrinsicFunction {
        family: Family::Translated { base: Box::new(inner), p0 },
        alpha: phi.alpha,
        h: phi.h,
        l: phi.l,
        support_radius: None,
        w: phi.w,
        domain: phi.domain,
    }
}

/// `φ^{(p⁻¹)}` for `p = Φ(w)`; it vanishes at the origin of `W`.
pub fn recentre(phi: &IntrinsicFunction, w: WPoint) -> IntrinsicFunction {
    translate_function(phi, graph_map(phi, w).inv())
}

/// Intrinsic gradient and the finite-difference step if one was used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientValue {
    pub value: f64,
    pub fd_step: Option<f64>,
}

/// `∇^φφ = φ_y + φ·φ_t`.
pub fn intrinsic_gradient(phi: &IntrinsicFunction, w: WPoint) -> GradientValue {
    if phi.has_analytic_partials() {
        GradientValue { value: phi.jet(w).intrinsic_gradient(), fd_step: None }
    } else {
        GradientValue { value: intrinsic_gradient_fd(phi, w, FD_STEP), fd_step: Some(FD_STEP) }
    }
}

/// Burgers form with central-difference partials.
pub fn intrinsic_gradient_fd(phi: &IntrinsicFunction, w: WPoint, h: f64) -> f64 {
    let f = |a: f64, b: f64| phi.eval(WPoint::new(a, b));
    let dy = (f(w.w1 + h, w.w2) - f(w.w1 - h, w.w2)) / (2.0 * h);
    let dt = (f(w.w1, w.w2 + h) - f(w.w1, w.w2 - h)) / (2.0 * h);
    dy + phi.eval(w) * dt
}

/// Difference-quotient definition: `φ^{(p⁻¹)}(y,0)/y` at small `y`.
pub fn intrinsic_gradient_quotient(phi: &IntrinsicFunction, w: WPoint, y: f64) -> f64 {
    let psi = recentre(phi, w);
    (psi.eval(WPoint::new(y, 0.0)) - psi.eval(WPoint::new(-y, 0.0))) / (2.0 * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{koranyi_norm, proj_vertical};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_w(rng: &mut ChaCha8Rng, s: f64) -> WPoint {
        WPoint::new(rng.gen_range(-s..s), rng.gen_range(-s..s))
    }

    fn families() -> Vec<IntrinsicFunction> {
        vec![
            IntrinsicFunction::zero(),
            IntrinsicFunction::constant(2.0),
            IntrinsicFunction::linear(-1.5),
            IntrinsicFunction::ex1(1.0).unwrap(),
            IntrinsicFunction::ex1(0.5).unwrap(),
            IntrinsicFunction::bump(1.0, 0.3).unwrap(),
            IntrinsicFunction::polynomial(vec![(2, 1, 0.5), (0, 2, -1.0), (1, 0, 0.2)]).unwrap(),
        ]
    }

    #[test]
    fn builtin_examples() {
        let l = builtin("linear", &[0.7]).unwrap();
        assert_eq!(intrinsic_gradient(&l, WPoint::new(3.0, -2.0)).value, 0.7);
        let e = builtin("ex1", &[1.0]).unwrap();
        assert_eq!(intrinsic_gradient(&e, WPoint::new(0.0, 1.0)).value, 3.0);
        let z = builtin("zero", &[]).unwrap();
        assert_eq!(graph_map(&z, WPoint::new(0.3, 0.4)), Point::new(0.0, 0.3, 0.4));
        assert!(builtin("spline", &[]).is_err());
        assert!(builtin("polynomial", &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ex1_gradient_closed_form() {
        for &alpha in &[0.25, 0.5, 1.0] {
            let e = IntrinsicFunction::ex1(alpha).unwrap();
            for &(y, t) in &[(0.0, 1.0), (0.3, -0.4), (-2.0, 0.01), (1.0, 0.0)] {
                let a: f64 = f64::abs(t);
                let want = t.signum() * (1.0 + alpha / 2.0) * (a.powf(alpha / 2.0) + a.powf(1.0 + alpha));
                let got = intrinsic_gradient(&e, WPoint::new(y, t)).value;
                assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn graph_map_examples() {
        let c = IntrinsicFunction::constant(2.0);
        assert_eq!(graph_map(&c, WPoint::new(1.0, 0.0)), Point::new(2.0, 1.0, -1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for f in families() {
            for &theta in &[0.0, 0.4, std::f64::consts::FRAC_PI_2] {
                let f = f.clone().on_plane(VerticalSubgroup::new(theta).unwrap());
                for _ in 0..100 {
                    let w = rand_w(&mut rng, 1.0);
                    let p = graph_map(&f, w);
                    let oracle = mul(embed_w(&f.w, w), embed_v(&f.w, f.eval(w)));
                    assert!(koranyi_norm(p.inv() * oracle) < 1e-12);
                    let back = proj_vertical(p, &f.w);
                    assert!((back.w1 - w.w1).abs() < 1e-12 && (back.w2 - w.w2).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn analytic_partials_match_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for f in families() {
            for _ in 0..200 {
                let w = rand_w(&mut rng, 0.9);
                if matches!(f.family, Family::Ex1 { .. }) && w.w2.abs() < 1e-3 {
                    continue;
                }
                let j = f.jet(w);
                let h = 1e-6;
                let dy = (f.eval(WPoint::new(w.w1 + h, w.w2)) - f.eval(WPoint::new(w.w1 - h, w.w2))) / (2.0 * h);
                let dt = (f.eval(WPoint::new(w.w1, w.w2 + h)) - f.eval(WPoint::new(w.w1, w.w2 - h))) / (2.0 * h);
                assert!((j.dy - dy).abs() < 1e-6 && (j.dt - dt).abs() < 1e-6, "{:?} at {:?}", f.family, w);
            }
        }
    }

    #[test]
    fn translation_examples() {
        let z = IntrinsicFunction::zero();
        let t = translate_function(&z, Point::new(0.7, 0.0, 0.0));
        for w in [WPoint::new(0.1, 0.2), WPoint::new(-3.0, 5.0)] {
            assert_eq!(t.eval(w), 0.7);
        }
        let b = IntrinsicFunction::bump(1.0, 0.3).unwrap();
        assert_eq!(translate_function(&b, Point::IDENTITY), b);
    }

    #[test]
    fn translated_graph_is_left_translate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for f in families() {
            for &theta in &[0.0, 1.1] {
                let f = f.clone().on_plane(VerticalSubgroup::new(theta).unwrap());
                for _ in 0..100 {
                    let p0 = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let g = translate_function(&f, p0);
                    let w = rand_w(&mut rng, 0.8);
                    let q = p0.inv() * graph_map(&g, w);
                    let w2 = proj_vertical(q, &f.w);
                    let g = graph_map(&f, w2);
                    let r = (g.x - q.x).abs().max((g.y - q.y).abs()).max((g.t - q.t).abs());
                    assert!(r < 1e-9, "{:?} residual {r}", f.family);
                }
            }
        }
    }

    #[test]
    fn recentred_function_vanishes_at_origin() {
        let b = IntrinsicFunction::bump(1.0, 0.3).unwrap();
        for w in [WPoint::new(0.2, 0.05), WPoint::new(-0.5, -0.1)] {
            let psi = recentre(&b, w);
            assert!(psi.eval(WPoint::new(0.0, 0.0)).abs() < 1e-15);
            let g0 = intrinsic_gradient(&b, w).value;
            let g1 = intrinsic_gradient(&psi, WPoint::new(0.0, 0.0)).value;
            assert!((g0 - g1).abs() < 1e-12);
        }
    }

    #[test]
    fn burgers_matches_difference_quotient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for f in families() {
            for _ in 0..50 {
                let w = rand_w(&mut rng, 0.8);
                if matches!(f.family, Family::Ex1 { .. }) && w.w2.abs() < 0.05 {
                    continue;
                }
                let g = intrinsic_gradient(&f, w).value;
                let q = intrinsic_gradient_quotient(&f, w, 1e-5);
                assert!((g - q).abs() < 1e-4, "{:?} {g} {q}", f.family);
            }
        }
    }

    #[test]
    fn bump_support_and_bound() {
        let b = IntrinsicFunction::bump(0.5, 0.2).unwrap();
        assert_eq!(b.eval(WPoint::new(0.5, 0.0)), 0.0);
        assert_eq!(b.eval(WPoint::new(0.0, 0.0625)), 0.0);
        assert!((b.eval(WPoint::new(0.0, 0.0)) - 0.2).abs() < 1e-15);
        assert!(b.l.unwrap() > 0.0);
        assert!(IntrinsicFunction::bump(-1.0, 0.1).is_err());
        assert!(IntrinsicFunction::ex1(0.0).is_err());
    }
}

//! Arithmetic of the first Heisenberg group in exponential coordinates.
//!
//! The group law is
//! `(x1,y1,t1)·(x2,y2,t2) = (x1+x2, y1+y2, t1+t2+½(x1 y2 − x2 y1))`,
//! the homogeneous norm is the Korányi gauge `((x²+y²)² + 16t²)^{1/4}`, and
//! `d(p,q) = ‖q⁻¹·p‖` is the associated left-invariant metric.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// A point of ℍ in exponential coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Point {
    pub const IDENTITY: Point = Point { x: 0.0, y: 0.0, t: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    /// Validating constructor: rejects NaN and infinite coordinates.
    pub fn try_new(x: f64, y: f64, t: f64) -> Result<Self> {
        let p = Self { x, y, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(format!("point {self}")))
        }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.t == 0.0
    }

    /// Group product `self · other`.
    #[inline]
    pub fn mul(self, other: Point) -> Point {
        mul(self, other)
    }

    #[inline]
    pub fn inv(self) -> Point {
        inv(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        koranyi_norm(self)
    }

    /// Rotation by `angle` about the t-axis. This is a group automorphism and an
    /// isometry of `d`.
    #[inline]
    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y, self.t)
    }

    /// Squared Euclidean length of the horizontal part.
    #[inline]
    pub fn horizontal_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.t)
    }
}

impl std::ops::Mul for Point {
    type Output = Point;
    #[inline]
    fn mul(self, rhs: Point) -> Point {
        mul(self, rhs)
    }
}

/// `p · q`.
#[inline]
pub fn mul(p: Point, q: Point) -> Point {
    Point {
        x: p.x + q.x,
        y: p.y + q.y,
        t: p.t + q.t + 0.5 * (p.x * q.y - q.x * p.y),
    }
}

#[inline]
pub fn inv(p: Point) -> Point {
    Point { x: -p.x, y: -p.y, t: -p.t }
}

/// `q⁻¹ · p`, the argument of every convolution kernel in this crate.
#[inline]
pub fn left_quotient(q: Point, p: Point) -> Point {
    mul(inv(q), p)
}

/// Fourth power of the Korányi norm; cheaper than the norm and exact for
/// comparisons against `r⁴`.
#[inline]
pub fn koranyi_norm4(p: Point) -> f64 {
    let h = p.x * p.x + p.y * p.y;
    h * h + 16.0 * p.t * p.t
}

#[inline]
pub fn koranyi_norm(p: Point) -> f64 {
    koranyi_norm4(p).sqrt().sqrt()
}

/// `d(p,q) = ‖q⁻¹·p‖`.
#[inline]
pub fn dist(p: Point, q: Point) -> f64 {
    koranyi_norm(left_quotient(q, p))
}

/// Heisenberg dilation `δ_r(x,y,t) = (rx, ry, r²t)`.
pub fn dilate(r: f64, p: Point) -> Result<Point> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {r}")));
    }
    Ok(dilate_unchecked(r, p))
}

#[inline]
pub(crate) fn dilate_unchecked(r: f64, p: Point) -> Point {
    Point::new(r * p.x, r * p.y, r * r * p.t)
}

/// Coordinates `(w1, w2)` on a vertical subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WPoint {
    pub w1: f64,
    pub w2: f64,
}

impl WPoint {
    #[inline]
    pub const fn new(w1: f64, w2: f64) -> Self {
        Self { w1, w2 }
    }

    /// Korányi norm of the point of ℍ this represents; independent of θ.
    #[inline]
    pub fn norm(self) -> f64 {
        let a = self.w1 * self.w1;
        (a * a + 16.0 * self.w2 * self.w2).sqrt().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.w1.is_finite() && self.w2.is_finite()
    }
}

/// A vertical subgroup `W_θ = {(−w1 sin θ, w1 cos θ, w2)}` together with its
/// complementary horizontal subgroup `V_θ = {(v cos θ, v sin θ, 0)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalSubgroup {
    theta: f64,
}

impl Default for VerticalSubgroup {
    fn default() -> Self {
        Self::YT_PLANE
    }
}

impl VerticalSubgroup {
    /// The `(y,t)`-plane, θ = 0.
    pub const YT_PLANE: VerticalSubgroup = VerticalSubgroup { theta: 0.0 };

    /// Angles outside `[0, π)` are reduced mod π; the subgroup is the same set.
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite(format!("theta = {theta}")));
        }
        let mut th = theta.rem_euclid(PI);
        if th >= PI {
            th = 0.0;
        }
        Ok(Self { theta: th })
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn embed_w(&self, w: WPoint) -> Point {
        if self.theta == 0.0 {
            return Point::new(0.0, w.w1, w.w2);
        }
        let (s, c) = self.theta.sin_cos();
        Point::new(-w.w1 * s, w.w1 * c, w.w2)
    }

    #[inline]
    pub fn embed_v(&self, v: f64) -> Point {
        if self.theta == 0.0 {
            return Point::new(v, 0.0, 0.0);
        }
        let (s, c) = self.theta.sin_cos();
        Point::new(v * c, v * s, 0.0)
    }

    /// Splits `p = embed_w(w) · embed_v(v)` and returns `(w, v)`.
    #[inline]
    pub fn split(&self, p: Point) -> (WPoint, f64) {
        let (s, c) = if self.theta == 0.0 { (0.0, 1.0) } else { self.theta.sin_cos() };
        let w1 = -p.x * s + p.y * c;
        let v = p.x * c + p.y * s;
        (WPoint::new(w1, p.t + 0.5 * w1 * v), v)
    }

    #[inline]
    pub fn proj_vertical(&self, p: Point) -> WPoint {
        self.split(p).0
    }

    #[inline]
    pub fn proj_horizontal(&self, p: Point) -> f64 {
        self.split(p).1
    }
}

/// `π_W(p)` in `(w1, w2)` coordinates.
pub fn proj_vertical(p: Point, w: &VerticalSubgroup) -> WPoint {
    w.proj_vertical(p)
}

/// `π_V(p)` as the signed coordinate `v`.
pub fn proj_horizontal(p: Point, w: &VerticalSubgroup) -> f64 {
    w.proj_horizontal(p)
}

pub fn embed_w(w: &VerticalSubgroup, pt: WPoint) -> Point {
    w.embed_w(pt)
}

pub fn embed_v(w: &VerticalSubgroup, v: f64) -> Point {
    w.embed_v(v)
}

/// Finite-difference horizontal derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizontalDerivatives {
    pub xu: f64,
    pub yu: f64,
    pub sub_laplacian: f64,
}

impl HorizontalDerivatives {
    pub fn gradient_norm(&self) -> f64 {
        self.xu.hypot(self.yu)
    }
}

/// Default step for first derivatives.
pub const FD_STEP_FIRST: f64 = 1e-4;
/// Default step for second derivatives.
pub const FD_STEP_SECOND: f64 = 1e-3;

fn eval_checked<F: Fn(Point) -> f64>(u: &F, p: Point, what: &str) -> Result<f64> {
    let v = u(p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { what: what.to_string(), x: p.x, y: p.y, t: p.t })
    }
}

/// Central differences along the flows `s ↦ p·(s,0,0)` and `s ↦ p·(0,s,0)` of
/// the left-invariant fields X and Y; `h` is used for all three quantities.
pub fn horizontal_derivatives_fd<F: Fn(Point) -> f64>(
    u: F,
    p: Point,
    h: f64,
) -> Result<HorizontalDerivatives> {
    horizontal_derivatives_fd_steps(u, p, h, h)
}

/// As [`horizontal_derivatives_fd`], with separate steps for the gradient and
/// the sub-Laplacian.
pub fn horizontal_derivatives_fd_steps<F: Fn(Point) -> f64>(
    u: F,
    p: Point,
    h_first: f64,
    h_second: f64,
) -> Result<HorizontalDerivatives> {
    p.validate()?;
    for h in [h_first, h_second] {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("fd step must be positive, got {h}")));
        }
    }
    let u0 = eval_checked(&u, p, "u")?;
    let along = |h: f64, dx: f64, dy: f64| -> Result<(f64, f64)> {
        let plus = eval_checked(&u, mul(p, Point::new(h * dx, h * dy, 0.0)), "u")?;
        let minus = eval_checked(&u, mul(p, Point::new(-h * dx, -h * dy, 0.0)), "u")?;
        Ok((plus, minus))
    };
    let (xp, xm) = along(h_first, 1.0, 0.0)?;
    let (yp, ym) = along(h_first, 0.0, 1.0)?;
    let xu = (xp - xm) / (2.0 * h_first);
    let yu = (yp - ym) / (2.0 * h_first);
    let (xp2, xm2) = if h_second == h_first { (xp, xm) } else { along(h_second, 1.0, 0.0)? };
    let (yp2, ym2) = if h_second == h_first { (yp, ym) } else { along(h_second, 0.0, 1.0)? };
    let h2 = h_second * h_second;
    let sub_laplacian = ((xp2 - 2.0 * u0 + xm2) + (yp2 - 2.0 * u0 + ym2)) / h2;
    Ok(HorizontalDerivatives { xu, yu, sub_laplacian })
}

/// Horizontal derivatives with the default steps.
pub fn horizontal_derivatives<F: Fn(Point) -> f64>(u: F, p: Point) -> Result<HorizontalDerivatives> {
    horizontal_derivatives_fd_steps(u, p, FD_STEP_FIRST, FD_STEP_SECOND)
}

/// FD sub-Laplacian only (five evaluations).
pub fn sub_laplacian_fd<F: Fn(Point) -> f64>(u: F, p: Point, h: f64) -> Result<f64> {
    Ok(horizontal_derivatives_fd(u, p, h)?.sub_laplacian)
}

/// Fourth-order sub-Laplacian from five points along each horizontal line,
/// `(−u₂ + 16u₁ − 30u₀ + 16u₋₁ − u₋₂) / 12h²`.
pub fn sub_laplacian_fd4<F: Fn(Point) -> f64>(u: F, p: Point, h: f64) -> Result<f64> {
    p.validate()?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("fd step must be positive, got {h}")));
    }
    let u0 = eval_checked(&u, p, "u")?;
    let mut acc = 0.0;
    for (dx, dy) in [(1.0, 0.0), (0.0, 1.0)] {
        let at = |k: f64| eval_checked(&u, mul(p, Point::new(k * h * dx, k * h * dy, 0.0)), "u");
        acc += -at(2.0)? + 16.0 * at(1.0)? - 30.0 * u0 + 16.0 * at(-1.0)? - at(-2.0)?;
    }
    Ok(acc / (12.0 * h * h))
}

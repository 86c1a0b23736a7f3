//! Small fixed-size linear algebra on the plane.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A vector of the ambient plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector of angle `theta`.
    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: c, y: s }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn det(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Rotation by +π/2.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Rotation by `theta` (counter-clockwise).
    #[inline]
    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Oriented angle from `self` to `o`, in (-π, π].
    pub fn angle_to(self, o: Vec2) -> f64 {
        self.det(o).atan2(self.dot(o))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// Symmetric 2×2 matrix `[[a, b], [b, c]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SymMat2 {
    pub const IDENTITY: SymMat2 = SymMat2 { a: 1.0, b: 0.0, c: 1.0 };

    #[inline]
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        SymMat2 { a, b, c }
    }

    #[inline]
    pub const fn diag(a: f64, c: f64) -> Self {
        SymMat2 { a, b: 0.0, c }
    }

    /// `λ e eᵀ` for a unit vector `e`.
    pub fn outer(e: Vec2, lambda: f64) -> Self {
        SymMat2::new(lambda * e.x * e.x, lambda * e.x * e.y, lambda * e.y * e.y)
    }

    /// Matrix with eigenvalue `l1` along the unit vector `e1` and `l2` along its perpendicular.
    pub fn from_eigen(e1: Vec2, l1: f64, l2: f64) -> Self {
        SymMat2::outer(e1, l1) + SymMat2::outer(e1.perp(), l2)
    }

    #[inline]
    pub fn apply(&self, u: Vec2) -> Vec2 {
        Vec2::new(self.a * u.x + self.b * u.y, self.b * u.x + self.c * u.y)
    }

    /// `uᵀ M v`
    #[inline]
    pub fn inner(&self, u: Vec2, v: Vec2) -> f64 {
        u.dot(self.apply(v))
    }

    #[inline]
    pub fn quad(&self, u: Vec2) -> f64 {
        self.a * u.x * u.x + 2.0 * self.b * u.x * u.y + self.c * u.y * u.y
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0.0 && self.det() > 0.0 && self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }

    /// Inverse, or `None` if singular.
    pub fn inverse(&self) -> Option<SymMat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(SymMat2::new(self.c / d, -self.b / d, self.a / d))
    }

    pub fn scale(&self, s: f64) -> SymMat2 {
        SymMat2::new(self.a * s, self.b * s, self.c * s)
    }

    /// `R_θ M R_θᵀ`
    pub fn rotate(&self, theta: f64) -> SymMat2 {
        let (s, c) = theta.sin_cos();
        // columns of R M
        let (p, q) = (c * self.a - s * self.b, c * self.b - s * self.c);
        let (r, t) = (s * self.a + c * self.b, s * self.b + c * self.c);
        SymMat2::new(p * c - q * s, p * s + q * c, r * s + t * c)
    }

    /// Eigenvalues `(λ_min, λ_max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_tr = 0.5 * self.trace();
        let disc = (0.25 * (self.a - self.c) * (self.a - self.c) + self.b * self.b).sqrt();
        (half_tr - disc, half_tr + disc)
    }

    /// Unit eigenvector for the smallest eigenvalue.
    pub fn min_eigenvector(&self) -> Vec2 {
        let (lmin, _) = self.eigenvalues();
        // rows of (M - λ I) annihilate the eigenvector
        let r1 = Vec2::new(self.a - lmin, self.b);
        let r2 = Vec2::new(self.b, self.c - lmin);
        let r = if r1.norm_sq() >= r2.norm_sq() { r1 } else { r2 };
        if r.norm_sq() == 0.0 {
            return Vec2::new(1.0, 0.0);
        }
        let e = r.perp();
        e * (1.0 / e.norm())
    }

    /// Positive square root.
    pub fn sqrt(&self) -> SymMat2 {
        // Cayley-Hamilton for 2x2: √M = (M + √det I) / √(tr + 2√det)
        let sd = self.det().sqrt();
        let t = (self.trace() + 2.0 * sd).sqrt();
        SymMat2::new((self.a + sd) / t, self.b / t, (self.c + sd) / t)
    }
}

impl Add for SymMat2 {
    type Output = SymMat2;
    fn add(self, o: SymMat2) -> SymMat2 {
        SymMat2::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

/// Closed axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub const fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    /// The square `[-r, r]²`.
    pub const fn centered_square(r: f64) -> Self {
        Rect {
            min: Vec2::new(-r, -r),
            max: Vec2::new(r, r),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.max.x > self.min.x && self.max.y > self.min.y) || !self.min.is_finite() || !self.max.is_finite()
    }

    /// Membership with an absolute slack `tol` on every side.
    #[inline]
    pub fn contains_with(&self, p: Vec2, tol: f64) -> bool {
        p.x >= self.min.x - tol && p.x <= self.max.x + tol && p.y >= self.min.y - tol && p.y <= self.max.y + tol
    }

    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        self.contains_with(p, 0.0)
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

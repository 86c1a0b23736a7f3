//! Asymmetric norms of the form `F(u) = √(uᵀMu) − ⟨ω, Mu⟩` and Finsler metrics built from them.
//!
//! The family is closed under duality and rotation, is smooth away from the origin, and
//! contains the euclidean, Riemannian and "drifted euclidean" norms used by every test case.
//! Acuteness of a vector pair is decided by the gradient criterion
//! `⟨u, ∇F(v)⟩ ≥ 0` and `⟨v, ∇F(u)⟩ ≥ 0`.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{Rect, SymMat2, Vec2};

/// Values of the acuteness scalar products in `[-ACUTE_SLACK, 0)` count as zero.
pub const ACUTE_SLACK: f64 = 1e-12;

const RATIO_SAMPLES: usize = 1024;
const RATIO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error("matrix is not symmetric positive definite: {0:?}")]
    NotPositiveDefinite(SymMat2),
    #[error("not a norm: <omega, M omega> = {0} >= 1")]
    NotANorm(f64),
    #[error("gradient undefined at origin")]
    GradientAtOrigin,
    #[error("acuteness undefined for the zero vector")]
    ZeroVector,
}

/// Asymmetric norm `F(u) = √(uᵀMu) − ⟨ω, Mu⟩` with `M` positive definite and `⟨ω, Mω⟩ < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffsetNorm {
    m: SymMat2,
    omega: Vec2,
}

impl OffsetNorm {
    pub fn new(m: SymMat2, omega: Vec2) -> Result<Self, NormError> {
        if !m.is_positive_definite() {
            return Err(NormError::NotPositiveDefinite(m));
        }
        let q = m.quad(omega);
        if !(q < 1.0) {
            return Err(NormError::NotANorm(q));
        }
        Ok(OffsetNorm { m, omega })
    }

    pub const EUCLIDEAN: OffsetNorm = OffsetNorm {
        m: SymMat2::IDENTITY,
        omega: Vec2::ZERO,
    };

    /// Riemannian norm `√(uᵀMu)`.
    pub fn riemannian(m: SymMat2) -> Result<Self, NormError> {
        OffsetNorm::new(m, Vec2::ZERO)
    }

    /// `‖u‖ − ⟨ω, u⟩`.
    pub fn drifted(omega: Vec2) -> Result<Self, NormError> {
        OffsetNorm::new(SymMat2::IDENTITY, omega)
    }

    #[inline]
    pub fn matrix(&self) -> SymMat2 {
        self.m
    }

    #[inline]
    pub fn omega(&self) -> Vec2 {
        self.omega
    }

    /// The linear part `Mω`, so that `F(u) = √(uᵀMu) − ⟨Mω, u⟩`.
    #[inline]
    pub fn drift(&self) -> Vec2 {
        self.m.apply(self.omega)
    }

    /// `δ = 1 − ⟨ω, Mω⟩`, positive for a valid norm.
    pub fn delta(&self) -> f64 {
        1.0 - self.m.quad(self.omega)
    }

    #[inline]
    pub fn eval(&self, u: Vec2) -> f64 {
        self.m.quad(u).max(0.0).sqrt() - self.drift().dot(u)
    }

    /// `∇F(u) = Mu / √(uᵀMu) − Mω`.
    pub fn grad(&self, u: Vec2) -> Result<Vec2, NormError> {
        if u.is_zero() {
            return Err(NormError::GradientAtOrigin);
        }
        Ok(self.grad_unchecked(u))
    }

    #[inline]
    fn grad_unchecked(&self, u: Vec2) -> Vec2 {
        let mu = self.m.apply(u);
        mu * (1.0 / u.dot(mu).sqrt()) - self.drift()
    }

    /// Dual norm `F*(u) = max_v ⟨u,v⟩ / F(v)`, which is again an offset norm.
    pub fn dual(&self) -> Result<OffsetNorm, NormError> {
        let delta = self.delta();
        if !(delta > 0.0) {
            return Err(NormError::NotANorm(1.0 - delta));
        }
        let m_inv = self.m.inverse().ok_or(NormError::NotPositiveDefinite(self.m))?;
        let w = self.omega;
        let m_star = (SymMat2::new(w.x * w.x, w.x * w.y, w.y * w.y) + m_inv.scale(delta)).scale(1.0 / (delta * delta));
        let m_star_inv = m_star.inverse().ok_or(NormError::NotPositiveDefinite(m_star))?;
        let omega_star = m_star_inv.apply(w) * (-1.0 / delta);
        OffsetNorm::new(m_star, omega_star)
    }

    /// Whether `u` and `v` form an F-acute angle.
    pub fn is_acute(&self, u: Vec2, v: Vec2) -> Result<bool, NormError> {
        if u.is_zero() || v.is_zero() {
            return Err(NormError::ZeroVector);
        }
        Ok(self.is_acute_unchecked(u, v))
    }

    #[inline]
    pub(crate) fn is_acute_unchecked(&self, u: Vec2, v: Vec2) -> bool {
        u.dot(self.grad_unchecked(v)) >= -ACUTE_SLACK && v.dot(self.grad_unchecked(u)) >= -ACUTE_SLACK
    }

    /// `F^θ(u) = F(R_θᵀ u)`.
    pub fn rotate(&self, theta: f64) -> OffsetNorm {
        OffsetNorm {
            m: self.m.rotate(theta),
            omega: self.omega.rotate(theta),
        }
    }

    /// Anisotropy ratio `κ(F) = max_{|u|=|v|=1} F(u)/F(v)`.
    ///
    /// Found by sampling the unit circle and polishing the extremal samples with a
    /// golden-section search.
    pub fn anisotropy_ratio(&self) -> f64 {
        let step = std::f64::consts::TAU / RATIO_SAMPLES as f64;
        let f = |t: f64| self.eval(Vec2::from_angle(t));
        let (mut kmax, mut kmin) = (0, 0);
        let (mut vmax, mut vmin) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..RATIO_SAMPLES {
            let v = f(k as f64 * step);
            if v > vmax {
                vmax = v;
                kmax = k;
            }
            if v < vmin {
                vmin = v;
                kmin = k;
            }
        }
        let centre = |k: usize| k as f64 * step;
        let hi = golden_min(|t| -f(t), centre(kmax) - step, centre(kmax) + step, RATIO_TOL);
        let lo = golden_min(f, centre(kmin) - step, centre(kmin) + step, RATIO_TOL);
        let fmax = vmax.max(-hi.1);
        let fmin = vmin.min(lo.1);
        (fmax / fmin).max(1.0)
    }
}

impl Default for OffsetNorm {
    fn default() -> Self {
        OffsetNorm::EUCLIDEAN
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`, stopping when the
/// bracket is narrower than `tol`. Returns `(argmin, min)`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

type NormFn = dyn Fn(Vec2) -> OffsetNorm + Send + Sync;

/// A continuous field of offset norms over a rectangle.
#[derive(Clone)]
pub struct MetricField {
    eval: Arc<NormFn>,
    domain: Rect,
    kappa_bound: f64,
}

impl MetricField {
    pub fn new<F>(domain: Rect, kappa_bound: f64, eval: F) -> Self
    where
        F: Fn(Vec2) -> OffsetNorm + Send + Sync + 'static,
    {
        MetricField {
            eval: Arc::new(eval),
            domain,
            kappa_bound: kappa_bound.max(1.0),
        }
    }

    /// The same norm at every point.
    pub fn constant(domain: Rect, norm: OffsetNorm) -> Self {
        let kappa = norm.anisotropy_ratio();
        MetricField::new(domain, kappa, move |_| norm)
    }

    #[inline]
    pub fn at(&self, z: Vec2) -> OffsetNorm {
        (self.eval)(z)
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    /// Declared upper bound on `κ(𝓕_z)` over the domain.
    pub fn kappa_bound(&self) -> f64 {
        self.kappa_bound
    }
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("domain", &self.domain)
            .field("kappa_bound", &self.kappa_bound)
            .finish_non_exhaustive()
    }
}

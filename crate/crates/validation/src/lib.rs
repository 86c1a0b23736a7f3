//! Randomized problem instances and brute-force oracles shared by the acceptance suite.
//!
//! Nothing here calls the closed-form routines it is meant to check.

use std::f64::consts::TAU;

use fmasr::norms::golden_min;
use fmasr::{OffsetNorm, SymMat2, Vec2};
use rand::Rng;

pub fn random_vec(rng: &mut impl Rng) -> Vec2 {
    loop {
        let v = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if v.norm() > 1e-3 {
            return v;
        }
    }
}

/// Offset norm with quadratic anisotropy at most `aniso` and `⟨ω, Mω⟩ < drift²`.
pub fn random_norm(rng: &mut impl Rng, aniso: f64, drift: f64) -> OffsetNorm {
    let ratio = aniso.max(1.0).powf(rng.gen_range(0.0..1.0));
    let scale = 2f64.powf(rng.gen_range(-2.0..2.0));
    let m = SymMat2::from_eigen(Vec2::from_angle(rng.gen_range(0.0..TAU)), scale / ratio, scale * ratio);
    let xi = Vec2::from_angle(rng.gen_range(0.0..TAU)) * rng.gen_range(0.0..drift);
    let omega = m.inverse().unwrap().sqrt().apply(xi);
    OffsetNorm::new(m, omega).unwrap()
}

/// `min_{t∈[0,1]} t d_p + (1-t) d_q + F(t p + (1-t) q)` by golden section.
pub fn edge_oracle(f: &OffsetNorm, p: Vec2, q: Vec2, d_p: f64, d_q: f64) -> f64 {
    let objective = |t: f64| t * d_p + (1.0 - t) * d_q + f.eval(q + (p - q) * t);
    let (_, v) = golden_min(objective, 0.0, 1.0, 1e-12);
    v.min(objective(0.0)).min(objective(1.0))
}

/// `max_k ⟨u, v_k⟩ / F(v_k)` over `samples` unit directions, with the maximising angle.
pub fn sampled_dual(f: &OffsetNorm, u: Vec2, samples: usize) -> (f64, f64) {
    let step = TAU / samples as f64;
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for k in 0..samples {
        let t = k as f64 * step;
        let v = Vec2::from_angle(t);
        let r = u.dot(v) / f.eval(v);
        if r > best {
            best = r;
            arg = t;
        }
    }
    (best, arg)
}

/// [`sampled_dual`] followed by golden-section refinement around the best sample.
pub fn refined_dual(f: &OffsetNorm, u: Vec2, samples: usize) -> f64 {
    let (best, arg) = sampled_dual(f, u, samples);
    let step = TAU / samples as f64;
    let ratio = |t: f64| {
        let v = Vec2::from_angle(t);
        -(u.dot(v) / f.eval(v))
    };
    let (_, v) = golden_min(ratio, arg - step, arg + step, 1e-13);
    best.max(-v)
}

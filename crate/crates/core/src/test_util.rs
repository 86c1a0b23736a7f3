use rand::Rng;

use crate::linalg::{SymMat2, Vec2};
use crate::norms::OffsetNorm;

pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn random_vec(rng: &mut impl Rng) -> Vec2 {
    loop {
        let v = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if v.norm() > 1e-3 {
            return v;
        }
    }
}

/// Offset norm whose quadratic part has eigenvalue ratio at most `aniso²` and whose drift
/// satisfies `⟨ω, Mω⟩ ≤ 0.64`.
pub fn random_norm(rng: &mut impl Rng, aniso: f64) -> OffsetNorm {
    let ratio = aniso.max(1.0).powf(rng.gen_range(0.0..1.0));
    let scale = 2f64.powf(rng.gen_range(-2.0..2.0));
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let m = SymMat2::from_eigen(Vec2::from_angle(theta), scale / ratio, scale * ratio);
    let xi = Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.0..0.8);
    let omega = m.inverse().unwrap().sqrt().apply(xi);
    OffsetNorm::new(m, omega).unwrap()
}

//! Hopf-Lax updates and the single-pass fast marching execution.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::grid::{DiscreteDomain, PointKind, StencilTable, OUTSIDE};
use crate::linalg::Vec2;
use crate::norms::OffsetNorm;

const DEGENERATE_REL: f64 = 1e-14;
const GOLDEN_ITERATIONS: usize = 60;

/// Result of `min_{t∈[0,1]} t d_p + (1-t) d_q + F(t p + (1-t) q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSolveResult {
    pub value: f64,
    /// Weight on `p`.
    pub t_star: f64,
    /// The minimiser lies strictly inside `(0, 1)`.
    pub interior: bool,
}

impl EdgeSolveResult {
    const UNREACHED: EdgeSolveResult = EdgeSolveResult {
        value: f64::INFINITY,
        t_star: 0.0,
        interior: false,
    };
}

/// Minimises the Hopf-Lax functional on the segment `[p, q]` of offsets from the updated
/// point.
pub fn hopf_lax_edge(f: &OffsetNorm, p: Vec2, q: Vec2, d_p: f64, d_q: f64) -> EdgeSolveResult {
    match (d_p.is_finite(), d_q.is_finite()) {
        (false, false) => return EdgeSolveResult::UNREACHED,
        (true, false) => return endpoint(d_p + f.eval(p), 1.0),
        (false, true) => return endpoint(d_q + f.eval(q), 0.0),
        (true, true) => {}
    }
    let at_p = d_p + f.eval(p);
    let at_q = d_q + f.eval(q);
    let (mut best, mut t_best) = if at_p <= at_q { (at_p, 1.0) } else { (at_q, 0.0) };

    // the linear part of F moves into the data
    let drift = f.drift();
    let a = (d_p - drift.dot(p)) - (d_q - drift.dot(q));
    let m = f.matrix();
    let e = p - q;
    let big_a = m.quad(e);
    let big_b = m.inner(e, q);
    let big_c = m.quad(q);
    let objective = |t: f64| t * d_p + (1.0 - t) * d_q + f.eval(q + e * t);

    let gap = big_a - a * a;
    let t = if gap.abs() <= DEGENERATE_REL * big_a {
        Some(golden_fixed(objective))
    } else if gap > 0.0 {
        let disc = (big_a * big_c - big_b * big_b).max(0.0);
        let s = -a.signum() * a.abs() * (disc / gap).sqrt();
        Some((s - big_b) / big_a)
    } else {
        None
    };
    if let Some(t) = t {
        if t > 0.0 && t < 1.0 {
            let v = objective(t);
            if v < best {
                best = v;
                t_best = t;
            }
        }
    }
    EdgeSolveResult {
        value: best,
        t_star: t_best,
        interior: t_best > 0.0 && t_best < 1.0,
    }
}

fn endpoint(value: f64, t_star: f64) -> EdgeSolveResult {
    EdgeSolveResult {
        value,
        t_star,
        interior: false,
    }
}

fn golden_fixed<F: Fn(f64) -> f64>(f: F) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Final values and acceptance bookkeeping of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub values: Vec<f64>,
    pub accepted: Vec<bool>,
    /// Points in acceptance order; empty for iterative solvers.
    pub acceptance_order: Vec<u32>,
}

impl DistanceField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The field after relabeling old point `k` as `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> DistanceField {
        let mut values = vec![0.0; self.len()];
        let mut accepted = vec![false; self.len()];
        for (k, &p) in perm.iter().enumerate() {
            values[p] = self.values[k];
            accepted[p] = self.accepted[k];
        }
        DistanceField {
            values,
            accepted,
            acceptance_order: self.acceptance_order.iter().map(|&k| perm[k as usize] as u32).collect(),
        }
    }
}

#[inline]
fn value_of(values: &[f64], y: u32) -> f64 {
    if y == OUTSIDE {
        f64::INFINITY
    } else {
        values[y as usize]
    }
}

#[inline]
fn offset(domain: &DiscreteDomain, x: usize, y: u32) -> Vec2 {
    if y == OUTSIDE {
        Vec2::ZERO
    } else {
        domain.position(y as usize) - domain.position(x)
    }
}

/// `Λ d(x)`: the minimum over every boundary segment of the stencil of `x`.
pub fn hopf_lax_full(values: &[f64], x: usize, domain: &DiscreteDomain, table: &StencilTable) -> f64 {
    let stencil = table.stencil(x);
    let f = table.norm(x);
    let k = stencil.len();
    let mut best = f64::INFINITY;
    for i in 0..k {
        let (p, q) = (stencil[i], stencil[(i + 1) % k]);
        let r = hopf_lax_edge(
            f,
            offset(domain, x, p),
            offset(domain, x, q),
            value_of(values, p),
            value_of(values, q),
        );
        best = best.min(r.value);
    }
    best
}

/// `Λ d(x; b, y)` for the vertex at `slot` of the stencil of `x`: segments through that
/// vertex whose other end is accepted, plus the vertex itself.
pub fn hopf_lax_partial(
    values: &[f64],
    accepted: &[bool],
    x: usize,
    slot: usize,
    domain: &DiscreteDomain,
    table: &StencilTable,
) -> f64 {
    let stencil = table.stencil(x);
    let f = table.norm(x);
    let k = stencil.len();
    let y = stencil[slot];
    let (py, dy) = (offset(domain, x, y), value_of(values, y));
    let mut best = dy + f.eval(py);
    for z in [stencil[(slot + k - 1) % k], stencil[(slot + 1) % k]] {
        if z != OUTSIDE && accepted[z as usize] {
            let r = hopf_lax_edge(f, py, offset(domain, x, z), dy, values[z as usize]);
            best = best.min(r.value);
        }
    }
    best
}

/// Single-pass solve of `d = Λ d` with zero data on the Dirichlet and escape points.
///
/// Tentative values are clamped below by the value of the point being accepted, so the
/// acceptance order is monotone even under roundoff.
pub fn fast_march(domain: &DiscreteDomain, table: &StencilTable) -> DistanceField {
    let n = domain.len();
    let mut values = vec![f64::INFINITY; n];
    let mut accepted = vec![false; n];
    let mut order = Vec::with_capacity(n);
    // values are non-negative, so their bit patterns sort like the values
    let mut heap = BinaryHeap::new();
    for k in 0..n {
        if domain.kind(k) != PointKind::Interior {
            values[k] = 0.0;
            heap.push(Reverse((0u64, k as u32)));
        }
    }
    while let Some(Reverse((bits, y))) = heap.pop() {
        let yu = y as usize;
        if accepted[yu] || bits != values[yu].to_bits() {
            continue;
        }
        accepted[yu] = true;
        order.push(y);
        let dy = values[yu];
        for &(x, slot) in table.reversed(yu) {
            let xu = x as usize;
            if accepted[xu] {
                continue;
            }
            let lam = hopf_lax_partial(&values, &accepted, xu, slot as usize, domain, table).max(dy);
            if lam < values[xu] {
                values[xu] = lam;
                heap.push(Reverse((lam.to_bits(), x)));
            }
        }
    }
    for k in 0..n {
        if !accepted[k] {
            accepted[k] = true;
            order.push(k as u32);
        }
    }
    DistanceField {
        values,
        accepted,
        acceptance_order: order,
    }
}

/// `max_x |d(x) - Λ d(x)| / (1 + d(x))` over interior points, with `∞ - ∞ = 0`.
pub fn residual(field: &DistanceField, domain: &DiscreteDomain, table: &StencilTable) -> f64 {
    let mut worst: f64 = 0.0;
    for x in domain.interior() {
        let d = field.values[x];
        let l = hopf_lax_full(&field.values, x, domain, table);
        let r = if d == l {
            0.0
        } else if d.is_finite() && l.is_finite() {
            (d - l).abs() / (1.0 + d)
        } else {
            f64::INFINITY
        };
        worst = worst.max(r);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{assemble_stencils, discretize, GridSpec};
    use crate::linalg::{Rect, SymMat2};
    use crate::norms::{golden_min, MetricField};
    use crate::stencil::{build_mesh, DEFAULT_SAFETY_CAP};
    use crate::test_util::{random_norm, random_vec, uniform};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    const E: OffsetNorm = OffsetNorm::EUCLIDEAN;

    fn hopf_lax_edge_reference(f: &OffsetNorm, p: Vec2, q: Vec2, d_p: f64, d_q: f64) -> f64 {
        let objective = |t: f64| t * d_p + (1.0 - t) * d_q + f.eval(q + (p - q) * t);
        let (_, v) = golden_min(objective, 0.0, 1.0, 1e-12);
        v.min(objective(0.0)).min(objective(1.0))
    }

    #[test]
    fn symmetric_edge() {
        let r = hopf_lax_edge(&E, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), 0.0, 0.0);
        assert!((r.value - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((r.t_star - 0.5).abs() < 1e-15);
        assert!(r.interior);
    }

    #[test]
    fn dominated_endpoint() {
        let r = hopf_lax_edge(&E, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), 0.0, 10.0);
        assert_eq!((r.value, r.t_star, r.interior), (1.0, 1.0, false));
    }

    #[test]
    fn infinite_data() {
        let (p, q) = (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0));
        let r = hopf_lax_edge(&E, p, q, f64::INFINITY, 2.0);
        assert_eq!((r.value, r.t_star, r.interior), (3.0, 0.0, false));
        let r = hopf_lax_edge(&E, p, q, 2.0, f64::INFINITY);
        assert_eq!((r.value, r.t_star), (3.0, 1.0));
        let r = hopf_lax_edge(&E, p, q, f64::INFINITY, f64::INFINITY);
        assert!(r.value.is_infinite() && !r.interior);
    }

    #[test]
    fn degenerate_quadratic_uses_golden_section() {
        // a² = A for the euclidean norm when d_p - d_q = |p - q|
        let (p, q) = (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0));
        let r = hopf_lax_edge(&E, p, q, 1.0 + 2f64.sqrt(), 1.0);
        let oracle = hopf_lax_edge_reference(&E, p, q, 1.0 + 2f64.sqrt(), 1.0);
        assert!((r.value - oracle).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_golden_section() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10_000 {
            let f = random_norm(&mut rng, 30.0);
            let (p, q) = (random_vec(&mut rng), random_vec(&mut rng));
            let scale = f.eval(p).max(f.eval(q));
            let (dp, dq) = (uniform(&mut rng, 0.0, 2.0 * scale), uniform(&mut rng, 0.0, 2.0 * scale));
            let r = hopf_lax_edge(&f, p, q, dp, dq);
            let oracle = hopf_lax_edge_reference(&f, p, q, dp, dq);
            assert!(
                (r.value - oracle).abs() <= 1e-10 * (1.0 + oracle),
                "{} {}",
                r.value,
                oracle
            );
            assert!(r.value <= oracle + 1e-12 * (1.0 + oracle));
        }
    }

    #[test]
    fn interior_minimiser_is_causal() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mut interior = 0;
        for _ in 0..10_000 {
            let f = random_norm(&mut rng, 20.0);
            // consecutive stencil vertices form an acute pair
            let mesh = build_mesh(&f, DEFAULT_SAFETY_CAP).unwrap();
            let (u, v) = mesh.edges().nth(rng.gen_range(0..mesh.cardinality())).unwrap();
            let (p, q) = (u.to_vec2(), v.to_vec2());
            let dp = rng.gen_range(0.0..3.0);
            let dq = (dp + rng.gen_range(-1.0..1.0) * f.eval(p - q)).max(0.0);
            let r = hopf_lax_edge(&f, p, q, dp, dq);
            if r.interior {
                interior += 1;
                assert!(r.value > dp.max(dq) - 1e-12);
            }
        }
        assert!(interior > 1000, "{interior}");
    }

    fn euclidean_setup(n: usize, h: f64) -> (DiscreteDomain, StencilTable) {
        let r = 0.5 * h * (n - 1) as f64;
        let spec = GridSpec::square(Rect::centered_square(r), n);
        let mut d = discretize(&spec, &[Vec2::ZERO]).unwrap();
        let t = assemble_stencils(&mut d, &MetricField::constant(spec.bbox, E)).unwrap();
        (d, t)
    }

    #[test]
    fn full_update_examples() {
        let h = 0.1;
        let (d, t) = euclidean_setup(5, h);
        let c = d.index_of(0, 0).unwrap();
        let x = d.index_of(1, 0).unwrap();
        let mut values = vec![f64::INFINITY; d.len()];
        values[c] = 0.0;
        assert!((hopf_lax_full(&values, x, &d, &t) - h).abs() < 1e-15);
        // with every neighbour at zero the best point lies on a segment
        for k in [d.index_of(2, 0), d.index_of(1, 1), d.index_of(1, -1)] {
            values[k.unwrap()] = 0.0;
        }
        assert!((hopf_lax_full(&values, x, &d, &t) - h * FRAC_1_SQRT_2).abs() < 1e-15);

        let mut values = vec![f64::INFINITY; d.len()];
        values[d.index_of(1, 0).unwrap()] = h;
        values[d.index_of(0, 1).unwrap()] = h;
        let x = d.index_of(1, 1).unwrap();
        let v = hopf_lax_full(&values, x, &d, &t);
        assert!((v - h * (1.0 + FRAC_1_SQRT_2)).abs() < 1e-15);
        // independent of d(x)
        values[x] = -5.0;
        assert_eq!(hopf_lax_full(&values, x, &d, &t), v);
    }

    #[test]
    fn partial_update_examples() {
        let h = 1.0;
        let (d, t) = euclidean_setup(5, h);
        let x = d.index_of(1, 1).unwrap();
        let y = d.index_of(1, 0).unwrap();
        let z = d.index_of(0, 1).unwrap();
        let slot_y = t.stencil(x).iter().position(|&k| k as usize == y).unwrap();
        let mut values = vec![f64::INFINITY; d.len()];
        let mut accepted = vec![false; d.len()];
        values[y] = 1.0;
        values[z] = 1.0;
        accepted[y] = true;
        // z not accepted: vertex only
        assert_eq!(hopf_lax_partial(&values, &accepted, x, slot_y, &d, &t), 2.0);
        accepted[z] = true;
        let v = hopf_lax_partial(&values, &accepted, x, slot_y, &d, &t);
        assert!((v - (1.0 + FRAC_1_SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn three_by_three_march() {
        let (d, t) = euclidean_setup(3, 1.0);
        let field = fast_march(&d, &t);
        for k in 0..d.len() {
            let (i, j) = d.lattice(k);
            let expect = match i.abs() + j.abs() {
                0 => 0.0,
                1 => 1.0,
                _ => 1.0 + FRAC_1_SQRT_2,
            };
            assert!((field.values[k] - expect).abs() < 1e-15, "{i} {j}");
        }
        assert!(residual(&field, &d, &t) <= 1e-15);
        assert_eq!(field.acceptance_order.len(), d.len());
        assert_eq!(field.acceptance_order[0] as usize, d.index_of(0, 0).unwrap());
    }

    fn anisotropic_setup(n: usize) -> (DiscreteDomain, StencilTable) {
        let bbox = Rect::centered_square(0.5);
        let spec = GridSpec::square(bbox, n).with_rotation(0.2, Vec2::new(0.3, 0.0));
        let metric = MetricField::new(bbox, 40.0, |z: Vec2| {
            let m = SymMat2::from_eigen(Vec2::from_angle(4.0 * z.x), 1.0, 300.0);
            let omega = m.inverse().unwrap().sqrt().apply(Vec2::new(0.5 * z.y.cos(), 0.3));
            OffsetNorm::new(m, omega).unwrap()
        });
        let mut d = discretize(&spec, &[Vec2::new(0.1, -0.05)]).unwrap();
        let t = assemble_stencils(&mut d, &metric).unwrap();
        (d, t)
    }

    #[test]
    fn anisotropic_march_is_fixed_point_and_monotone() {
        let (d, t) = anisotropic_setup(41);
        let field = fast_march(&d, &t);
        assert!(residual(&field, &d, &t) <= 1e-10);
        let finite: Vec<f64> = field
            .acceptance_order
            .iter()
            .map(|&k| field.values[k as usize])
            .filter(|v| v.is_finite())
            .collect();
        assert!(finite.windows(2).all(|w| w[0] <= w[1]));
        assert!(field.accepted.iter().all(|&b| b));
    }

    #[test]
    fn perturbation_raises_residual() {
        let (d, t) = anisotropic_setup(31);
        let mut field = fast_march(&d, &t);
        let x = d.interior().nth(200).unwrap();
        field.values[x] += 0.1;
        assert!(residual(&field, &d, &t) >= 0.01);
    }

    #[test]
    fn no_sources_leaves_everything_unreached() {
        let spec = GridSpec::square(Rect::centered_square(0.5), 7);
        let mut d = discretize(&spec, &[]).unwrap();
        let t = assemble_stencils(&mut d, &MetricField::constant(spec.bbox, E)).unwrap();
        let field = fast_march(&d, &t);
        assert!(field.values.iter().all(|v| v.is_infinite()));
        assert_eq!(residual(&field, &d, &t), 0.0);
    }

    #[test]
    fn relabeling_does_not_change_values() {
        let (d, t) = anisotropic_setup(25);
        let field = fast_march(&d, &t);
        let n = d.len();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let (pd, pt) = (d.permuted(&perm), t.permuted(&perm));
        let relabeled = fast_march(&pd, &pt);
        assert_eq!(relabeled.values, field.permuted(&perm).values);
    }
}

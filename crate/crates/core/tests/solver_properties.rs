use fmasr::baselines::{fm8_solve, FixedStencil};
use fmasr::bench::{make_test_case, solve, SolverKind, TestId};
use fmasr::grid::{assemble_stencils, discretize, BoundaryMode, GridSpec};
use fmasr::solver::{fast_march, hopf_lax_edge, residual};
use fmasr::{MetricField, OffsetNorm, Rect, SymMat2, Vec2};
use fmasr_validation::{edge_oracle, random_norm, random_vec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn edge_solve_matches_oracle(seed in any::<u64>(), dp in 0.0..5.0f64, dq in 0.0..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_norm(&mut rng, 40.0, 0.9);
        let (p, q) = (random_vec(&mut rng), random_vec(&mut rng));
        let r = hopf_lax_edge(&f, p, q, dp, dq);
        let oracle = edge_oracle(&f, p, q, dp, dq);
        prop_assert!((r.value - oracle).abs() <= 1e-10 * (1.0 + oracle));
        let at_t = r.t_star * dp + (1.0 - r.t_star) * dq + f.eval(q + (p - q) * r.t_star);
        prop_assert!((at_t - r.value).abs() <= 1e-12 * (1.0 + r.value));
    }
}

#[test]
fn every_benchmark_is_a_fixed_point_at_n61() {
    for id in TestId::ALL {
        let test = make_test_case(id);
        let sol = solve(&test, SolverKind::FmAsr, &test.grid(61)).unwrap();
        assert!(residual(&sol.field, &sol.domain, &sol.table) <= 1e-10, "{id}");
        let order: Vec<f64> = sol
            .field
            .acceptance_order
            .iter()
            .map(|&k| sol.field.values[k as usize])
            .collect();
        assert!(order.windows(2).all(|w| w[0] <= w[1] || w[1].is_infinite()), "{id}");
    }
}

#[test]
fn rotated_and_offset_grids_solve() {
    let test = make_test_case(TestId::Seismic);
    let spec = test.grid(61).with_rotation(0.37, Vec2::new(0.25, -0.4));
    let mut d = discretize(&spec, &[test.source]).unwrap();
    let t = assemble_stencils(&mut d, &test.metric).unwrap();
    let field = fast_march(&d, &t);
    assert!(residual(&field, &d, &t) <= 1e-10);
    assert!(field.values.iter().all(|v| v.is_finite()));
}

#[test]
fn escape_mode_gives_distance_to_exit() {
    let n = 21;
    let spec = GridSpec::square(Rect::centered_square(1.0), n).with_boundary(BoundaryMode::Escape);
    let mut d = discretize(&spec, &[]).unwrap();
    let t = assemble_stencils(&mut d, &MetricField::constant(spec.bbox, OffsetNorm::EUCLIDEAN)).unwrap();
    let field = fast_march(&d, &t);
    let ((i0, i1), (j0, j1)) = d.lattice_range();
    for k in d.interior() {
        let (i, j) = d.lattice(k);
        let steps = (i - i0).min(i1 - i).min(j - j0).min(j1 - j) + 1;
        let line = spec.h * steps as f64;
        // exits on two sides pull the values near corners below the straight-line distance
        assert!(field.values[k] <= line + 1e-12);
        // the same happens along the diagonals, which meet the mid lines at the centre
        if (i == (i0 + i1) / 2 || j == (j0 + j1) / 2) && steps <= 5 {
            assert!((field.values[k] - line).abs() < 1e-12);
        }
    }
    let corner = d.index_of(i0, j0).unwrap();
    assert!((field.values[corner] - spec.h * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!(residual(&field, &d, &t) <= 1e-12);
}

#[test]
fn fm8_converges_for_mild_anisotropy() {
    // every norm of this field has anisotropy at most √2
    let bbox = Rect::centered_square(0.5);
    let metric = MetricField::new(bbox, 2f64.sqrt(), |z: Vec2| {
        let m = SymMat2::from_eigen(Vec2::from_angle(3.0 * z.x + 2.0 * z.y), 1.0, 2.0);
        OffsetNorm::riemannian(m).unwrap()
    });
    let gap = |n: usize| {
        let spec = GridSpec::square(bbox, n);
        let mut d = discretize(&spec, &[Vec2::ZERO]).unwrap();
        let (f8, t8) = fm8_solve(&mut d, &metric).unwrap();
        assert!(residual(&f8, &d, &t8) <= 1e-10);
        let t = assemble_stencils(&mut d, &metric).unwrap();
        let fa = fast_march(&d, &t);
        f8.values
            .iter()
            .zip(&fa.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let gaps = [gap(61), gap(121), gap(241)];
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}

#[test]
fn fm8_stalls_on_spiral() {
    let test = make_test_case(TestId::Spiral);
    let error = |solver, n| {
        let sol = solve(&test, solver, &test.grid(n)).unwrap();
        fmasr::bench::compute_errors(&sol.domain, &sol.field.values, fmasr::bench::exact_spiral, &test)
            .unwrap()
            .linf
    };
    let (e121, e241) = (error(SolverKind::Fm8, 121), error(SolverKind::Fm8, 241));
    assert!(e241 >= 0.5 * e121, "{e121} {e241}");
    assert!(error(SolverKind::FmAsr, 241) < error(SolverKind::FmAsr, 121));
}

#[test]
fn four_point_fixed_stencil_equals_fm_asr_for_euclidean() {
    let spec = GridSpec::square(Rect::centered_square(0.5), 31);
    let metric = MetricField::constant(spec.bbox, OffsetNorm::EUCLIDEAN);
    let mut d = discretize(&spec, &[Vec2::new(0.1, 0.2)]).unwrap();
    let t4 = FixedStencil::four().assemble(&mut d, &metric).unwrap();
    let t = assemble_stencils(&mut d, &metric).unwrap();
    assert_eq!(t4, t);
}

//! Benchmark problems, truth fields, error metrics and the timed benchmark loop.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::baselines::{agsi_iterate, BaselineError, FixedStencil, DEFAULT_AGSI_TOL};
use crate::grid::{
    assemble_stencils, discretize, BoundaryMode, DiscreteDomain, GridError, GridSpec, PointKind, StencilTable,
};
use crate::io::{GridFile, IoError};
use crate::linalg::{Rect, SymMat2, Vec2};
use crate::norms::{golden_min, MetricField, OffsetNorm};
use crate::solver::{fast_march, DistanceField};

/// Current strength of the boat problem.
pub const CURRENT_GAMMA: f64 = 0.9;
/// Radius of the disk on which the spiral problem is scored.
pub const SPIRAL_RADIUS: f64 = 10.0;
pub const SEISMIC_SLOW: f64 = 0.8;
pub const SEISMIC_FAST: f64 = 0.2;
pub const SEGMENTATION_KAPPA: f64 = 100.0;
pub const SEGMENTATION_TURNS: f64 = 3.0;
pub const SEGMENTATION_RADIUS: f64 = 0.45;
pub const SEGMENTATION_HALF_WIDTH: f64 = 1.0 / 200.0;
/// Error charged to a point of the scored region that was never reached.
pub const UNREACHED_ERROR: f64 = 1e3;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("unknown {kind} '{value}'")]
    Unknown { kind: &'static str, value: String },
    #[error("test '{0}' has no analytic solution")]
    NoExact(TestId),
    #[error("no grid point in the scored region")]
    EmptyValidRegion,
    #[error("reference resolution must be odd and at least 3, got {0}")]
    BadReferenceSize(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestId {
    Current,
    Spiral,
    Seismic,
    Segmentation,
}

impl TestId {
    pub const ALL: [TestId; 4] = [TestId::Current, TestId::Spiral, TestId::Seismic, TestId::Segmentation];

    pub fn name(self) -> &'static str {
        match self {
            TestId::Current => "current",
            TestId::Spiral => "spiral",
            TestId::Seismic => "seismic",
            TestId::Segmentation => "segmentation",
        }
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestId {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TestId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| BenchError::Unknown {
                kind: "test",
                value: s.to_string(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    FmAsr,
    Fm8,
    Agsi,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::FmAsr, SolverKind::Fm8, SolverKind::Agsi];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::FmAsr => "fm-asr",
            SolverKind::Fm8 => "fm-8",
            SolverKind::Agsi => "agsi",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| BenchError::Unknown {
                kind: "solver",
                value: s.to_string(),
            })
    }
}

#[derive(Clone, Debug)]
pub struct TestCase {
    pub id: TestId,
    pub bbox: Rect,
    pub source: Vec2,
    pub metric: MetricField,
    /// Errors are scored on the disk of this radius around the origin, or everywhere.
    pub valid_radius: Option<f64>,
    pub exact: Option<fn(Vec2) -> f64>,
}

impl TestCase {
    pub fn is_valid(&self, z: Vec2) -> bool {
        self.valid_radius.is_none_or(|r| z.norm() <= r)
    }

    pub fn grid(&self, n: usize) -> GridSpec {
        GridSpec::square(self.bbox, n)
    }
}

pub fn make_test_case(id: TestId) -> TestCase {
    match id {
        TestId::Current => current_case(Vec2::new(1.0, 0.0)),
        TestId::Spiral => spiral_case(),
        TestId::Seismic => seismic_case(),
        TestId::Segmentation => segmentation_case(),
    }
}

/// Boat in a current. The dual norm is `‖u‖ + ⟨ω(z), u⟩` with
/// `ω(z) = -γ sin(4πx) sin(4πy) e`.
pub fn current_case(e: Vec2) -> TestCase {
    let bbox = Rect::centered_square(0.5);
    let e = e * (1.0 / e.norm());
    let g = CURRENT_GAMMA;
    let metric = MetricField::new(bbox, (1.0 + g) / (1.0 - g), move |z: Vec2| {
        let w = -g * (4.0 * std::f64::consts::PI * z.x).sin() * (4.0 * std::f64::consts::PI * z.y).sin();
        // ‖u‖ + ⟨ω, u⟩ is the offset norm with drift -ω
        let dual = OffsetNorm::drifted(e * -w).expect("|ω| < 1");
        dual.dual().expect("valid dual")
    });
    TestCase {
        id: TestId::Current,
        bbox,
        source: Vec2::ZERO,
        metric,
        valid_radius: None,
        exact: None,
    }
}

fn spiral_case() -> TestCase {
    let bbox = Rect::centered_square(SPIRAL_RADIUS);
    let r = SPIRAL_RADIUS * std::f64::consts::SQRT_2;
    let kappa = (r + (1.0 + r * r).sqrt()).powi(2);
    let metric = MetricField::new(bbox, kappa, |z: Vec2| {
        let omega = z.perp() * (1.0 / (1.0 + z.norm_sq()).sqrt());
        OffsetNorm::drifted(omega).expect("|ω| < 1")
    });
    TestCase {
        id: TestId::Spiral,
        bbox,
        source: Vec2::ZERO,
        metric,
        valid_radius: Some(SPIRAL_RADIUS),
        exact: Some(exact_spiral),
    }
}

/// Analytic solution of the spiral problem.
pub fn exact_spiral(z: Vec2) -> f64 {
    z.norm().asinh()
}

fn seismic_case() -> TestCase {
    let bbox = Rect::centered_square(0.5);
    let (l1, l2) = (SEISMIC_SLOW.powi(-2), SEISMIC_FAST.powi(-2));
    let metric = MetricField::new(bbox, (l2 / l1).sqrt(), move |z: Vec2| {
        let e = Vec2::new(
            1.0,
            std::f64::consts::FRAC_PI_2 * (4.0 * std::f64::consts::PI * z.x).cos(),
        );
        let m = SymMat2::from_eigen(e * (1.0 / e.norm()), l1, l2);
        OffsetNorm::riemannian(m).expect("positive eigenvalues")
    });
    TestCase {
        id: TestId::Seismic,
        bbox,
        source: Vec2::ZERO,
        metric,
        valid_radius: None,
        exact: None,
    }
}

/// Archimedean spiral `r = aφ`, `φ ∈ [0, 2π·turns]`, used as the thin tube of the
/// segmentation problem.
#[derive(Clone, Copy, Debug)]
pub struct SpiralCurve {
    pub a: f64,
    pub phi_max: f64,
}

impl SpiralCurve {
    pub fn segmentation() -> Self {
        let phi_max = std::f64::consts::TAU * SEGMENTATION_TURNS;
        SpiralCurve {
            a: SEGMENTATION_RADIUS / phi_max,
            phi_max,
        }
    }

    pub fn point(&self, phi: f64) -> Vec2 {
        Vec2::from_angle(phi) * (self.a * phi)
    }

    pub fn tangent(&self, phi: f64) -> Vec2 {
        let (s, c) = phi.sin_cos();
        let t = Vec2::new(c - phi * s, s + phi * c);
        if t.is_zero() {
            return Vec2::new(1.0, 0.0);
        }
        t * (1.0 / t.norm())
    }

    /// `(distance, parameter)` of the closest curve point.
    pub fn nearest(&self, z: Vec2) -> (f64, f64) {
        let tau = std::f64::consts::TAU;
        let base = z.y.atan2(z.x).rem_euclid(tau);
        let mut best = (z.norm(), 0.0);
        let turns = (self.phi_max / tau).ceil() as i64;
        for k in 0..=turns {
            let centre = base + tau * k as f64;
            let lo = (centre - 0.5 * tau).max(0.0);
            let hi = (centre + 0.5 * tau).min(self.phi_max);
            if lo >= hi {
                continue;
            }
            let (phi, d2) = golden_min(|p| (self.point(p) - z).norm_sq(), lo, hi, 1e-12);
            for (p, d) in [
                (phi, d2),
                (lo, (self.point(lo) - z).norm_sq()),
                (hi, (self.point(hi) - z).norm_sq()),
            ] {
                let d = d.sqrt();
                if d < best.0 {
                    best = (d, p);
                }
            }
        }
        best
    }
}

fn segmentation_case() -> TestCase {
    let bbox = Rect::centered_square(0.5);
    let curve = SpiralCurve::segmentation();
    let log_min = (SEGMENTATION_KAPPA * SEGMENTATION_KAPPA).recip().ln();
    let metric = MetricField::new(bbox, SEGMENTATION_KAPPA, move |z: Vec2| {
        let (dist, phi) = curve.nearest(z);
        let s = dist / SEGMENTATION_HALF_WIDTH;
        // full strength inside the tube, fading to euclidean over one more half width
        let w = if s <= 1.0 {
            1.0
        } else if s >= 2.0 {
            0.0
        } else {
            let t = s - 1.0;
            1.0 - t * t * (3.0 - 2.0 * t)
        };
        let m = SymMat2::from_eigen(curve.tangent(phi), (w * log_min).exp(), 1.0);
        OffsetNorm::riemannian(m).expect("positive eigenvalues")
    });
    TestCase {
        id: TestId::Segmentation,
        bbox,
        source: Vec2::ZERO,
        metric,
        valid_radius: None,
        exact: None,
    }
}

/// A solved grid with timings.
#[derive(Clone, Debug)]
pub struct Solution {
    pub domain: DiscreteDomain,
    pub table: StencilTable,
    pub field: DistanceField,
    pub prep_seconds: f64,
    pub solve_seconds: f64,
}

impl Solution {
    pub fn stencil_size(&self) -> usize {
        self.table.total_size()
    }
}

pub fn solve(test: &TestCase, solver: SolverKind, spec: &GridSpec) -> Result<Solution, BenchError> {
    let start = Instant::now();
    let mut domain = discretize(spec, &[test.source])?;
    let table = match solver {
        SolverKind::FmAsr => assemble_stencils(&mut domain, &test.metric)?,
        SolverKind::Fm8 => FixedStencil::eight().assemble(&mut domain, &test.metric)?,
        SolverKind::Agsi => FixedStencil::six().assemble(&mut domain, &test.metric)?,
    };
    let prep_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let field = match solver {
        SolverKind::FmAsr | SolverKind::Fm8 => fast_march(&domain, &table),
        SolverKind::Agsi => agsi_iterate(&domain, &table, DEFAULT_AGSI_TOL)?,
    };
    let solve_seconds = start.elapsed().as_secs_f64();
    Ok(Solution {
        domain,
        table,
        field,
        prep_seconds,
        solve_seconds,
    })
}

/// A solved grid extended to the plane by bilinear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceField {
    grid: GridFile,
}

impl ReferenceField {
    pub fn new(grid: GridFile) -> Self {
        ReferenceField { grid }
    }

    pub fn grid(&self) -> &GridFile {
        &self.grid
    }

    /// Bilinear interpolation, clamped to the grid. `+∞` if any used node is unreached.
    pub fn interpolate(&self, z: Vec2) -> f64 {
        let g = &self.grid;
        let spec = GridSpec {
            h: g.h,
            theta: g.theta,
            offset: Vec2::new(g.ox, g.oy),
            bbox: Rect::centered_square(1.0),
            boundary: BoundaryMode::Source,
        };
        // snap to nodes so that grid points reproduce stored values exactly
        let snap = |c: f64| if (c - c.round()).abs() < 1e-9 { c.round() } else { c };
        let l = spec.lattice_coords(z);
        let l = Vec2::new(snap(l.x), snap(l.y));
        let fx = l.x.clamp(0.0, (g.nx - 1) as f64);
        let fy = l.y.clamp(0.0, (g.ny - 1) as f64);
        let (i, j) = (
            (fx.floor() as usize).min(g.nx.saturating_sub(2)),
            (fy.floor() as usize).min(g.ny.saturating_sub(2)),
        );
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let at = |a: usize, b: usize| g.values[b.min(g.ny - 1) * g.nx + a.min(g.nx - 1)];
        let corners = [
            (at(i, j), (1.0 - tx) * (1.0 - ty)),
            (at(i + 1, j), tx * (1.0 - ty)),
            (at(i, j + 1), (1.0 - tx) * ty),
            (at(i + 1, j + 1), tx * ty),
        ];
        let mut v = 0.0;
        for (value, weight) in corners {
            if weight == 0.0 {
                continue;
            }
            if !value.is_finite() {
                return f64::INFINITY;
            }
            v += weight * value;
        }
        v
    }
}

/// How the truth of a benchmark run is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    Analytic,
    Reference { n: usize, solver: SolverKind },
}

impl FromStr for Truth {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BenchError::Unknown {
            kind: "truth",
            value: s.to_string(),
        };
        if s == "analytic" {
            return Ok(Truth::Analytic);
        }
        let mut parts = s.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("reference"), Some(n), solver, None) => Ok(Truth::Reference {
                n: n.parse().map_err(|_| bad())?,
                solver: solver.map_or(Ok(SolverKind::FmAsr), str::parse)?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Solves the reference grid, or reloads it from `cache_dir` when present.
pub fn reference_solution(
    test: &TestCase,
    ref_n: usize,
    solver: SolverKind,
    cache_dir: Option<&Path>,
) -> Result<ReferenceField, BenchError> {
    if ref_n < 3 || ref_n.is_multiple_of(2) {
        return Err(BenchError::BadReferenceSize(ref_n));
    }
    let path = cache_dir.map(|d| reference_cache_path(d, test.id, ref_n, solver));
    if let Some(p) = path.as_deref().filter(|p| p.exists()) {
        return Ok(ReferenceField::new(GridFile::load(p)?));
    }
    let sol = solve(test, solver, &test.grid(ref_n))?;
    let grid = GridFile::from_field(&sol.domain, &sol.field.values);
    if let Some(p) = path {
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(IoError::from)?;
        }
        grid.save(&p)?;
    }
    Ok(ReferenceField::new(grid))
}

pub fn reference_cache_path(dir: &Path, test: TestId, ref_n: usize, solver: SolverKind) -> PathBuf {
    dir.join(format!("{test}-{solver}-{ref_n}.grid"))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    pub point_count: usize,
    pub prep_seconds: f64,
    pub solve_seconds: f64,
    pub linf: f64,
    pub l1_avg: f64,
    /// Scored points left at `+∞`, charged [`UNREACHED_ERROR`] each.
    pub unreached: usize,
}

impl ErrorReport {
    pub fn cpu_seconds(&self) -> f64 {
        self.prep_seconds + self.solve_seconds
    }
}

/// L∞ and mean L¹ error over the interior points of the scored region.
pub fn compute_errors<T: Fn(Vec2) -> f64>(
    domain: &DiscreteDomain,
    values: &[f64],
    truth: T,
    test: &TestCase,
) -> Result<ErrorReport, BenchError> {
    let (mut linf, mut sum, mut count, mut unreached) = (0.0f64, 0.0, 0usize, 0usize);
    for k in 0..domain.len() {
        let z = domain.position(k);
        if domain.kind(k) != PointKind::Interior || !test.is_valid(z) {
            continue;
        }
        let err = if values[k].is_finite() {
            (values[k] - truth(z)).abs()
        } else {
            unreached += 1;
            UNREACHED_ERROR
        };
        linf = linf.max(err);
        sum += err;
        count += 1;
    }
    if count == 0 {
        return Err(BenchError::EmptyValidRegion);
    }
    Ok(ErrorReport {
        n: 0,
        point_count: count,
        prep_seconds: 0.0,
        solve_seconds: 0.0,
        linf,
        l1_avg: sum / count as f64,
        unreached,
    })
}

/// One line of the benchmark table.
#[derive(Debug)]
pub struct BenchRow {
    pub test: TestId,
    pub solver: SolverKind,
    pub n: usize,
    pub result: Result<ErrorReport, BenchError>,
}

/// Runs every `(solver, n)` pair sequentially so that timings do not interfere.
pub fn run_benchmark(
    test: &TestCase,
    solvers: &[SolverKind],
    n_list: &[usize],
    truth: Truth,
    cache_dir: Option<&Path>,
) -> Result<Vec<BenchRow>, BenchError> {
    let reference = match truth {
        Truth::Analytic => {
            test.exact.ok_or(BenchError::NoExact(test.id))?;
            None
        }
        Truth::Reference { n, solver } => Some(reference_solution(test, n, solver, cache_dir)?),
    };
    let mut rows = Vec::new();
    for &solver in solvers {
        for &n in n_list {
            let result = solve(test, solver, &test.grid(n)).and_then(|sol| {
                let report = match &reference {
                    None => compute_errors(&sol.domain, &sol.field.values, test.exact.unwrap(), test),
                    Some(r) => compute_errors(&sol.domain, &sol.field.values, |z| r.interpolate(z), test),
                }?;
                Ok(ErrorReport {
                    n,
                    prep_seconds: sol.prep_seconds,
                    solve_seconds: sol.solve_seconds,
                    ..report
                })
            });
            rows.push(BenchRow {
                test: test.id,
                solver,
                n,
                result,
            });
        }
    }
    Ok(rows)
}

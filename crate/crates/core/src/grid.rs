//! Lattice discretization of a rectangle and per-point stencil assembly.
//!
//! Grid points are `z = h R_θ (offset + (i, j))`. Each interior point owns a stencil: the
//! boundary of `𝒯(𝓕_z ∘ R_θ)` mapped back to grid points. Stencil vertices that fall
//! outside the domain are either [`OUTSIDE`] (point-source problems) or extra zero-valued
//! escape points, depending on [`BoundaryMode`].

use std::collections::HashMap;

use thiserror::Error;

use crate::linalg::{Rect, Vec2};
use crate::norms::{MetricField, OffsetNorm};
use crate::par::{map_indexed, Parallelism};
use crate::stencil::{build_mesh, LatticeVec, StencilError, DEFAULT_SAFETY_CAP};

/// Neighbour slot that does not correspond to any grid point.
pub const OUTSIDE: u32 = u32::MAX;

const MAX_POINTS: usize = (u32::MAX - 1) as usize;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("degenerate bounding box {0:?}")]
    DegenerateBox(Rect),
    #[error("source {0:?} lies outside the domain")]
    SourceOutside(Vec2),
    #[error("discrete domain has no interior point")]
    EmptyInterior,
    #[error("grid has more than {MAX_POINTS} points")]
    TooManyPoints,
    #[error("stencil construction failed at ({}, {}): {source}", .point.x, .point.y)]
    Stencil { point: Vec2, source: StencilError },
}

/// What lattice points outside the domain represent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Unreachable, with permanent value `+∞`. Only the sources carry Dirichlet data.
    #[default]
    Source,
    /// Zero-valued exit points (escape-time problem).
    Escape,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub h: f64,
    pub theta: f64,
    /// In lattice units.
    pub offset: Vec2,
    pub bbox: Rect,
    pub boundary: BoundaryMode,
}

impl GridSpec {
    /// The usual `n × n` grid on `bbox` with spacing `width / (n - 1)`, axis aligned and
    /// containing the box centre.
    pub fn square(bbox: Rect, n: usize) -> Self {
        let h = bbox.width() / (n.max(2) - 1) as f64;
        let centre = (bbox.min + bbox.max) * 0.5;
        GridSpec {
            h,
            theta: 0.0,
            offset: centre * (1.0 / h),
            bbox,
            boundary: BoundaryMode::Source,
        }
    }

    pub fn with_rotation(mut self, theta: f64, offset: Vec2) -> Self {
        self.theta = theta;
        self.offset = offset;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryMode) -> Self {
        self.boundary = boundary;
        self
    }

    /// Physical position of lattice point `(i, j)`.
    #[inline]
    pub fn position(&self, i: i64, j: i64) -> Vec2 {
        (self.offset + Vec2::new(i as f64, j as f64)).rotate(self.theta) * self.h
    }

    /// Continuous lattice coordinates of `z`, the inverse of [`GridSpec::position`].
    pub fn lattice_coords(&self, z: Vec2) -> Vec2 {
        (z * (1.0 / self.h)).rotate(-self.theta) - self.offset
    }

    fn validate(&self) -> Result<(), GridError> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(GridError::InvalidScale(self.h));
        }
        if self.bbox.is_degenerate() {
            return Err(GridError::DegenerateBox(self.bbox));
        }
        Ok(())
    }

    #[inline]
    fn tol(&self) -> f64 {
        1e-9 * self.h
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointKind {
    Interior,
    /// Source point with value 0.
    Dirichlet,
    /// Lattice point outside the box acting as a zero-valued exit (escape mode only).
    Escape,
}

/// The grid points `Ω ∩ 𝒵` in row-major order, plus the Dirichlet set.
#[derive(Clone, Debug)]
pub struct DiscreteDomain {
    spec: GridSpec,
    positions: Vec<Vec2>,
    lattice: Vec<(i64, i64)>,
    kinds: Vec<PointKind>,
    i_range: (i64, i64),
    j_range: (i64, i64),
    // dense (i, j) -> index over the lattice bounding range
    index: Vec<u32>,
    interior_count: usize,
}

impl DiscreteDomain {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// All points, escape points included once stencils are assembled.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.interior_count
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn position(&self, k: usize) -> Vec2 {
        self.positions[k]
    }

    pub fn kind(&self, k: usize) -> PointKind {
        self.kinds[k]
    }

    pub fn kinds(&self) -> &[PointKind] {
        &self.kinds
    }

    pub fn lattice(&self, k: usize) -> (i64, i64) {
        self.lattice[k]
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices_of(PointKind::Interior)
    }

    /// The Dirichlet set.
    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices_of(PointKind::Dirichlet)
    }

    fn indices_of(&self, kind: PointKind) -> impl Iterator<Item = usize> + '_ {
        self.kinds
            .iter()
            .enumerate()
            .filter(move |(_, k)| **k == kind)
            .map(|(i, _)| i)
    }

    /// Lattice bounding range `((i_min, i_max), (j_min, j_max))` of the in-box points.
    pub fn lattice_range(&self) -> ((i64, i64), (i64, i64)) {
        (self.i_range, self.j_range)
    }

    /// Index of the in-box point with lattice coordinates `(i, j)`.
    pub fn index_of(&self, i: i64, j: i64) -> Option<usize> {
        let (i0, i1) = self.i_range;
        let (j0, j1) = self.j_range;
        if i < i0 || i > i1 || j < j0 || j > j1 {
            return None;
        }
        let w = (i1 - i0 + 1) as usize;
        let k = self.index[(j - j0) as usize * w + (i - i0) as usize];
        (k != OUTSIDE).then_some(k as usize)
    }

    /// Relabels points so that old point `k` becomes `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> DiscreteDomain {
        assert_eq!(perm.len(), self.len());
        let mut out = self.clone();
        for (k, &p) in perm.iter().enumerate() {
            out.positions[p] = self.positions[k];
            out.lattice[p] = self.lattice[k];
            out.kinds[p] = self.kinds[k];
        }
        for slot in out.index.iter_mut().filter(|s| **s != OUTSIDE) {
            *slot = perm[*slot as usize] as u32;
        }
        out
    }
}

/// Enumerates the grid points in `spec.bbox` and turns the points nearest to `sources`
/// into Dirichlet points.
pub fn discretize(spec: &GridSpec, sources: &[Vec2]) -> Result<DiscreteDomain, GridError> {
    spec.validate()?;
    let tol = spec.tol();
    if let Some(s) = sources.iter().find(|s| !spec.bbox.contains_with(**s, tol)) {
        return Err(GridError::SourceOutside(*s));
    }

    let corners = spec.bbox.corners().map(|c| spec.lattice_coords(c));
    let lo = |f: fn(&Vec2) -> f64| corners.iter().map(f).fold(f64::INFINITY, f64::min).floor() as i64 - 1;
    let hi = |f: fn(&Vec2) -> f64| corners.iter().map(f).fold(f64::NEG_INFINITY, f64::max).ceil() as i64 + 1;
    let (ia, ib) = (lo(|v| v.x), hi(|v| v.x));
    let (ja, jb) = (lo(|v| v.y), hi(|v| v.y));
    let span = (ib - ia + 1) as u128 * (jb - ja + 1) as u128;
    if span > MAX_POINTS as u128 {
        return Err(GridError::TooManyPoints);
    }

    let mut positions = Vec::new();
    let mut lattice = Vec::new();
    for j in ja..=jb {
        for i in ia..=ib {
            let z = spec.position(i, j);
            if spec.bbox.contains_with(z, tol) {
                positions.push(z);
                lattice.push((i, j));
            }
        }
    }
    if positions.is_empty() {
        return Err(GridError::EmptyInterior);
    }
    let i_range = (
        lattice.iter().map(|l| l.0).min().unwrap(),
        lattice.iter().map(|l| l.0).max().unwrap(),
    );
    let j_range = (
        lattice.iter().map(|l| l.1).min().unwrap(),
        lattice.iter().map(|l| l.1).max().unwrap(),
    );
    let w = (i_range.1 - i_range.0 + 1) as usize;
    let mut index = vec![OUTSIDE; w * (j_range.1 - j_range.0 + 1) as usize];
    for (k, &(i, j)) in lattice.iter().enumerate() {
        index[(j - j_range.0) as usize * w + (i - i_range.0) as usize] = k as u32;
    }

    let mut kinds = vec![PointKind::Interior; positions.len()];
    for &s in sources {
        let k = nearest_point(spec, &positions, &lattice, s);
        kinds[k] = PointKind::Dirichlet;
    }
    let interior_count = kinds.iter().filter(|k| **k == PointKind::Interior).count();
    if interior_count == 0 {
        return Err(GridError::EmptyInterior);
    }
    Ok(DiscreteDomain {
        spec: *spec,
        positions,
        lattice,
        kinds,
        i_range,
        j_range,
        index,
        interior_count,
    })
}

fn nearest_point(spec: &GridSpec, positions: &[Vec2], lattice: &[(i64, i64)], s: Vec2) -> usize {
    let l = spec.lattice_coords(s);
    let (i, j) = (l.x.round() as i64, l.y.round() as i64);
    if let Some(k) = lattice.iter().position(|&p| p == (i, j)) {
        return k;
    }
    // the rounded lattice point fell outside the box
    (0..positions.len())
        .min_by(|&a, &b| (positions[a] - s).norm().total_cmp(&(positions[b] - s).norm()))
        .unwrap()
}

/// Forward stencils, per-point norms and the reversed stencils.
///
/// Forward stencils are stored flat: the neighbours of `x` are
/// `ids[starts[x]..starts[x + 1]]`, a counter-clockwise cycle. Only interior points have
/// stencils. `reversed(y)` lists `(x, slot)` with `ids[starts[x] + slot] == y`.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilTable {
    starts: Vec<u32>,
    ids: Vec<u32>,
    norms: Vec<OffsetNorm>,
    rev_starts: Vec<u32>,
    rev: Vec<(u32, u32)>,
}

impl StencilTable {
    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    #[inline]
    pub fn stencil(&self, x: usize) -> &[u32] {
        &self.ids[self.starts[x] as usize..self.starts[x + 1] as usize]
    }

    /// The local norm at `x`, in physical coordinates.
    #[inline]
    pub fn norm(&self, x: usize) -> &OffsetNorm {
        &self.norms[x]
    }

    #[inline]
    pub fn reversed(&self, y: usize) -> &[(u32, u32)] {
        &self.rev[self.rev_starts[y] as usize..self.rev_starts[y + 1] as usize]
    }

    /// Total stencil size `N'`.
    pub fn total_size(&self) -> usize {
        self.ids.len()
    }

    /// The table of the same grid after relabeling old point `k` as `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> StencilTable {
        let n = self.len();
        assert_eq!(perm.len(), n);
        let mut inverse = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        let mut norms = Vec::with_capacity(n);
        let mut stencils = Vec::with_capacity(n);
        for &old in &inverse {
            norms.push(self.norms[old]);
            stencils.push(
                self.stencil(old)
                    .iter()
                    .map(|&y| if y == OUTSIDE { OUTSIDE } else { perm[y as usize] as u32 })
                    .collect::<Vec<_>>(),
            );
        }
        StencilTable::from_parts(stencils, norms)
    }

    fn from_parts(stencils: Vec<Vec<u32>>, norms: Vec<OffsetNorm>) -> StencilTable {
        let n = norms.len();
        let mut starts = Vec::with_capacity(n + 1);
        starts.push(0u32);
        let total: usize = stencils.iter().map(Vec::len).sum();
        let mut ids = Vec::with_capacity(total);
        for s in &stencils {
            ids.extend_from_slice(s);
            starts.push(ids.len() as u32);
        }
        drop(stencils);

        let mut counts = vec![0u32; n + 1];
        for &y in ids.iter().filter(|&&y| y != OUTSIDE) {
            counts[y as usize + 1] += 1;
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let rev_starts = counts.clone();
        let mut fill = counts;
        let mut rev = vec![(0u32, 0u32); rev_starts[n] as usize];
        for x in 0..n {
            let (a, b) = (starts[x] as usize, starts[x + 1] as usize);
            for (slot, &y) in ids[a..b].iter().enumerate() {
                if y != OUTSIDE {
                    rev[fill[y as usize] as usize] = (x as u32, slot as u32);
                    fill[y as usize] += 1;
                }
            }
        }
        StencilTable {
            starts,
            ids,
            norms,
            rev_starts,
            rev,
        }
    }
}

/// Assembles the FM-ASR stencils. In escape mode the domain gains one escape point per
/// distinct outside stencil vertex.
pub fn assemble_stencils(domain: &mut DiscreteDomain, metric: &MetricField) -> Result<StencilTable, GridError> {
    assemble_stencils_with(domain, metric, Parallelism::available())
}

pub fn assemble_stencils_with(
    domain: &mut DiscreteDomain,
    metric: &MetricField,
    mode: Parallelism,
) -> Result<StencilTable, GridError> {
    let theta = domain.spec.theta;
    assemble(domain, metric, mode, |norm| {
        build_mesh(&norm.rotate(-theta), DEFAULT_SAFETY_CAP).map(|m| m.into_boundary())
    })
}

/// Assembles the same fixed lattice cycle at every interior point.
pub fn assemble_fixed(
    domain: &mut DiscreteDomain,
    metric: &MetricField,
    offsets: &[LatticeVec],
    mode: Parallelism,
) -> Result<StencilTable, GridError> {
    assemble(domain, metric, mode, |_| Ok(offsets.to_vec()))
}

type PointStencil = (Vec<u32>, Vec<(usize, i64, i64)>);

fn assemble<B>(
    domain: &mut DiscreteDomain,
    metric: &MetricField,
    mode: Parallelism,
    build: B,
) -> Result<StencilTable, GridError>
where
    B: Fn(&OffsetNorm) -> Result<Vec<LatticeVec>, StencilError> + Sync + Send,
{
    let n = domain.len();
    let dom: &DiscreteDomain = domain;
    let per_point: Vec<Result<(OffsetNorm, PointStencil), GridError>> = map_indexed(n, mode, |k| {
        if dom.kinds[k] != PointKind::Interior {
            return Ok((OffsetNorm::EUCLIDEAN, (Vec::new(), Vec::new())));
        }
        let z = dom.positions[k];
        let norm = metric.at(z);
        let boundary = build(&norm).map_err(|source| GridError::Stencil { point: z, source })?;
        let (i, j) = dom.lattice[k];
        let mut ids = Vec::with_capacity(boundary.len());
        let mut outside = Vec::new();
        for (slot, w) in boundary.iter().enumerate() {
            let (a, b) = (i + w.x, j + w.y);
            match dom.index_of(a, b) {
                Some(y) => ids.push(y as u32),
                None => {
                    ids.push(OUTSIDE);
                    outside.push((slot, a, b));
                }
            }
        }
        Ok((norm, (ids, outside)))
    });

    let mut norms = Vec::with_capacity(n);
    let mut stencils = Vec::with_capacity(n);
    let mut escape: HashMap<(i64, i64), u32> = HashMap::new();
    for r in per_point {
        let (norm, (mut ids, outside)) = r?;
        if domain.spec.boundary == BoundaryMode::Escape {
            for (slot, a, b) in outside {
                let next = domain.positions.len();
                let id = *escape.entry((a, b)).or_insert_with(|| next as u32);
                if id as usize == next {
                    if next >= MAX_POINTS {
                        return Err(GridError::TooManyPoints);
                    }
                    domain.positions.push(domain.spec.position(a, b));
                    domain.lattice.push((a, b));
                    domain.kinds.push(PointKind::Escape);
                }
                ids[slot] = id;
            }
        }
        norms.push(norm);
        stencils.push(ids);
    }
    norms.resize(domain.len(), OffsetNorm::EUCLIDEAN);
    stencils.resize(domain.len(), Vec::new());
    Ok(StencilTable::from_parts(stencils, norms))
}

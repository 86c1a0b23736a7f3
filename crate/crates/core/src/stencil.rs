//! F-acute lattice meshes built by recursive refinement of the four unit triangles.
//!
//! A mesh is star shaped around the origin and is stored as the counter-clockwise cycle of
//! its boundary vertices, starting at `(1, 0)`. Consecutive vertices `v_i, v_{i+1}` are the
//! non-zero vertices of an elementary triangle: `det(v_i, v_{i+1}) = 1` and
//! `⟨v_i, v_{i+1}⟩ ≥ 0`.

use std::fmt;

use crate::linalg::Vec2;
use crate::norms::OffsetNorm;
use crate::par::{map_indexed, Parallelism};

/// Iteration cap of the construction loop.
pub const DEFAULT_SAFETY_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StencilError {
    #[error("norm violates ASC finiteness: no mesh after {0} iterations")]
    CapExceeded(usize),
    #[error("lattice coordinate overflow")]
    Overflow,
    #[error("safety cap must be at least 8, got {0}")]
    CapTooSmall(usize),
    #[error("not an elementary triangle: {0}, {1}")]
    NotElementary(LatticeVec, LatticeVec),
    #[error("at least one orientation sample is required")]
    NoSamples,
}

/// Point of `ℤ²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVec {
    pub x: i64,
    pub y: i64,
}

impl LatticeVec {
    pub const fn new(x: i64, y: i64) -> Self {
        LatticeVec { x, y }
    }

    pub fn checked_add(self, o: LatticeVec) -> Result<LatticeVec, StencilError> {
        Ok(LatticeVec {
            x: self.x.checked_add(o.x).ok_or(StencilError::Overflow)?,
            y: self.y.checked_add(o.y).ok_or(StencilError::Overflow)?,
        })
    }

    pub fn checked_sub(self, o: LatticeVec) -> Result<LatticeVec, StencilError> {
        Ok(LatticeVec {
            x: self.x.checked_sub(o.x).ok_or(StencilError::Overflow)?,
            y: self.y.checked_sub(o.y).ok_or(StencilError::Overflow)?,
        })
    }

    pub fn dot(self, o: LatticeVec) -> i128 {
        self.x as i128 * o.x as i128 + self.y as i128 * o.y as i128
    }

    pub fn det(self, o: LatticeVec) -> i128 {
        self.x as i128 * o.y as i128 - self.y as i128 * o.x as i128
    }

    pub fn norm_sq(self) -> i128 {
        self.dot(self)
    }

    #[inline]
    pub fn to_vec2(self) -> Vec2 {
        Vec2::new(self.x as f64, self.y as f64)
    }
}

impl fmt::Display for LatticeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Lattice triangle with vertices `0, u, v`, `|det(u,v)| = 1` and `⟨u,v⟩ ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ElementaryTriangle {
    u: LatticeVec,
    v: LatticeVec,
}

impl ElementaryTriangle {
    pub fn new(u: LatticeVec, v: LatticeVec) -> Result<Self, StencilError> {
        if u.det(v).abs() != 1 || u.dot(v) < 0 {
            return Err(StencilError::NotElementary(u, v));
        }
        Ok(ElementaryTriangle { u, v })
    }

    /// The four triangles of `𝒯₀`, counter-clockwise from the first quadrant.
    pub fn roots() -> [ElementaryTriangle; 4] {
        let e = [
            LatticeVec::new(1, 0),
            LatticeVec::new(0, 1),
            LatticeVec::new(-1, 0),
            LatticeVec::new(0, -1),
        ];
        std::array::from_fn(|i| ElementaryTriangle {
            u: e[i],
            v: e[(i + 1) % 4],
        })
    }

    pub fn u(&self) -> LatticeVec {
        self.u
    }

    pub fn v(&self) -> LatticeVec {
        self.v
    }

    /// `s(T) = ⟨u, v⟩`.
    pub fn scal(&self) -> i128 {
        self.u.dot(self.v)
    }

    pub fn is_root(&self) -> bool {
        self.u.norm_sq() == self.v.norm_sq()
    }

    /// `(u, u+v)` and `(u+v, v)`.
    pub fn children(&self) -> Result<(ElementaryTriangle, ElementaryTriangle), StencilError> {
        let w = self.u.checked_add(self.v)?;
        Ok((
            ElementaryTriangle { u: self.u, v: w },
            ElementaryTriangle { u: w, v: self.v },
        ))
    }

    /// The unique triangle that has `self` among its children, `None` for the roots.
    pub fn parent(&self) -> Option<ElementaryTriangle> {
        if self.is_root() {
            return None;
        }
        // the longer vertex is the sum of the parent's two vertices
        let (u, v) = (self.u, self.v);
        let parent = if u.norm_sq() < v.norm_sq() {
            ElementaryTriangle {
                u,
                v: v.checked_sub(u).ok()?,
            }
        } else {
            ElementaryTriangle {
                u: u.checked_sub(v).ok()?,
                v,
            }
        };
        Some(parent)
    }
}

/// Star-shaped lattice mesh given by its counter-clockwise boundary cycle.
///
/// The first vertex is `(1, 0)`, stored once; the last vertex connects back to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StencilMesh {
    boundary: Vec<LatticeVec>,
}

impl StencilMesh {
    pub fn boundary(&self) -> &[LatticeVec] {
        &self.boundary
    }

    /// Number of triangles, equal to the number of boundary vertices.
    pub fn cardinality(&self) -> usize {
        self.boundary.len()
    }

    /// Consecutive vertex pairs, including the closing one.
    pub fn edges(&self) -> impl Iterator<Item = (LatticeVec, LatticeVec)> + '_ {
        let n = self.boundary.len();
        (0..n).map(move |i| (self.boundary[i], self.boundary[(i + 1) % n]))
    }

    pub fn into_boundary(self) -> Vec<LatticeVec> {
        self.boundary
    }
}

/// Two-list construction: in-order traversal of the refinement trees, refining a pair
/// `(u, v)` as long as `accept(u, v)` is false.
fn two_list<P>(mut accept: P, safety_cap: usize) -> Result<StencilMesh, StencilError>
where
    P: FnMut(LatticeVec, LatticeVec) -> bool,
{
    if safety_cap < 8 {
        return Err(StencilError::CapTooSmall(safety_cap));
    }
    let mut done = vec![LatticeVec::new(1, 0)];
    let mut pending = vec![
        LatticeVec::new(1, 0),
        LatticeVec::new(0, -1),
        LatticeVec::new(-1, 0),
        LatticeVec::new(0, 1),
    ];
    let mut iterations = 0usize;
    while let Some(&v) = pending.last() {
        iterations += 1;
        if iterations > safety_cap {
            return Err(StencilError::CapExceeded(safety_cap));
        }
        let u = *done.last().expect("non-empty");
        if accept(u, v) {
            pending.pop();
            done.push(v);
        } else {
            pending.push(u.checked_add(v)?);
        }
    }
    // the loop closes the cycle by appending (1,0) a second time
    done.pop();
    Ok(StencilMesh { boundary: done })
}

/// The mesh `𝒯(F)`: every consecutive boundary pair forms an F-acute angle.
pub fn build_mesh(norm: &OffsetNorm, safety_cap: usize) -> Result<StencilMesh, StencilError> {
    two_list(|u, v| norm.is_acute_unchecked(u.to_vec2(), v.to_vec2()), safety_cap)
}

/// The mesh `𝒯_κ` obtained by refining until `s(T) ≥ kappa`. It is F-acute for every norm
/// with `κ(F) ≤ kappa`.
pub fn isotropic_mesh(kappa: f64) -> StencilMesh {
    two_list(|u, v| u.dot(v) as f64 >= kappa, usize::MAX).expect("refinement by s(T) terminates")
}

/// `#𝒯(F^θ)` for `θ = 2πk / samples`, `k = 0..samples`.
pub fn mesh_cardinality_stats(norm: &OffsetNorm, theta_samples: usize) -> Result<Vec<(f64, usize)>, StencilError> {
    mesh_cardinality_stats_with(norm, theta_samples, Parallelism::available())
}

pub fn mesh_cardinality_stats_with(
    norm: &OffsetNorm,
    theta_samples: usize,
    mode: Parallelism,
) -> Result<Vec<(f64, usize)>, StencilError> {
    if theta_samples == 0 {
        return Err(StencilError::NoSamples);
    }
    map_indexed(theta_samples, mode, |k| {
        let theta = std::f64::consts::TAU * k as f64 / theta_samples as f64;
        build_mesh(&norm.rotate(theta), DEFAULT_SAFETY_CAP).map(|m| (theta, m.cardinality()))
    })
    .into_iter()
    .collect()
}

//! Reference solvers on fixed stencils: FM-8 and adaptive Gauss-Seidel iteration (AGSI).

use std::collections::VecDeque;

use thiserror::Error;

use crate::grid::{assemble_fixed, DiscreteDomain, GridError, PointKind, StencilTable};
use crate::norms::MetricField;
use crate::par::Parallelism;
use crate::solver::{fast_march, hopf_lax_full, DistanceField};
use crate::stencil::LatticeVec;

pub const DEFAULT_AGSI_TOL: f64 = 1e-8;
const AGSI_SWEEP_FACTOR: usize = 10_000;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("AGSI failed to converge after {0} updates")]
    NotConverged(usize),
    #[error("AGSI tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

/// A lattice cycle shared by every grid point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedStencil {
    offsets: Vec<LatticeVec>,
}

impl FixedStencil {
    pub fn four() -> Self {
        Self::from_pairs(&[(1, 0), (0, 1), (-1, 0), (0, -1)])
    }

    pub fn eight() -> Self {
        Self::from_pairs(&[(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)])
    }

    /// One-ring of the triangulation by translates of `(0,0), (1,0), (0,1)` and their point
    /// reflections, whose diagonals run along `(1, -1)`.
    pub fn six() -> Self {
        Self::from_pairs(&[(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)])
    }

    fn from_pairs(pairs: &[(i64, i64)]) -> Self {
        FixedStencil {
            offsets: pairs.iter().map(|&(x, y)| LatticeVec::new(x, y)).collect(),
        }
    }

    pub fn offsets(&self) -> &[LatticeVec] {
        &self.offsets
    }

    pub fn assemble(&self, domain: &mut DiscreteDomain, metric: &MetricField) -> Result<StencilTable, GridError> {
        assemble_fixed(domain, metric, &self.offsets, Parallelism::available())
    }
}

/// Fast marching on the 8-neighbour stencil. Returns the table so the scheme's own
/// residual can be checked.
pub fn fm8_solve(
    domain: &mut DiscreteDomain,
    metric: &MetricField,
) -> Result<(DistanceField, StencilTable), GridError> {
    let table = FixedStencil::eight().assemble(domain, metric)?;
    Ok((fast_march(domain, &table), table))
}

/// AGSI on the six-point triangulation stencil.
pub fn agsi_solve(
    domain: &mut DiscreteDomain,
    metric: &MetricField,
    tol: f64,
) -> Result<(DistanceField, StencilTable), BaselineError> {
    let table = FixedStencil::six().assemble(domain, metric)?;
    let field = agsi_iterate(domain, &table, tol)?;
    Ok((field, table))
}

/// Label-correcting Gauss-Seidel iteration of `d = Λ d` on an arbitrary table, with a FIFO
/// active list.
pub fn agsi_iterate(domain: &DiscreteDomain, table: &StencilTable, tol: f64) -> Result<DistanceField, BaselineError> {
    if !(tol > 0.0) {
        return Err(BaselineError::InvalidTolerance(tol));
    }
    let n = domain.len();
    let mut values = vec![f64::INFINITY; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    for y in 0..n {
        if domain.kind(y) != PointKind::Interior {
            values[y] = 0.0;
        }
    }
    for y in 0..n {
        if domain.kind(y) != PointKind::Interior {
            for &(x, _) in table.reversed(y) {
                if !queued[x as usize] {
                    queued[x as usize] = true;
                    queue.push_back(x);
                }
            }
        }
    }
    let cap = AGSI_SWEEP_FACTOR.saturating_mul(domain.interior_count());
    let mut updates = 0usize;
    while let Some(x) = queue.pop_front() {
        let xu = x as usize;
        queued[xu] = false;
        updates += 1;
        if updates > cap {
            return Err(BaselineError::NotConverged(cap));
        }
        let new = hopf_lax_full(&values, xu, domain, table);
        let old = values[xu];
        if new < old {
            values[xu] = new;
            if !(old - new <= tol) {
                for &(z, _) in table.reversed(xu) {
                    if !queued[z as usize] {
                        queued[z as usize] = true;
                        queue.push_back(z);
                    }
                }
            }
        }
    }
    Ok(DistanceField {
        values,
        accepted: vec![true; n],
        acceptance_order: Vec::new(),
    })
}

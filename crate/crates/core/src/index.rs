//! Essential codimension of pairs of projections.
//!
//! In finite dimensions `[P:Q] = rank P - rank Q`. The index is nevertheless
//! computed from the two intersection dimensions,
//! `dim(R(P) cap N(Q)) - dim(N(P) cap R(Q))`, read off principal angles, and
//! the rank difference is kept as an independent cross-check. A cosine that
//! is neither clearly 1 nor clearly below it is reported as an error instead
//! of being rounded.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{op_norm, principal_cosines, Projection};

/// Cosines at least this close to 1 count as shared directions.
pub const INTERSECTION_TOL: f64 = 1e-10;

/// Cosines in `[1 - AMBIGUITY_BAND, 1 - INTERSECTION_TOL)` are refused.
pub const AMBIGUITY_BAND: f64 = 1e-6;

/// Largest `||P1 P2||` accepted as orthogonality of summands.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ProjectionPair {
    pub p: Projection,
    pub q: Projection,
}

impl ProjectionPair {
    pub fn new(p: Projection, q: Projection) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("projections on C^{}", p.dim()),
                got: format!("C^{}", q.dim()),
            });
        }
        Ok(Self { p, q })
    }
}

/// Intersection dimensions behind an essential codimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionDims {
    /// `dim(R(P) cap N(Q))`.
    pub range_p_kernel_q: usize,
    /// `dim(N(P) cap R(Q))`.
    pub kernel_p_range_q: usize,
    pub rank_p: usize,
    pub rank_q: usize,
}

impl IntersectionDims {
    pub fn index(&self) -> i64 {
        self.range_p_kernel_q as i64 - self.kernel_p_range_q as i64
    }
}

fn shared_directions(cosines: &[f64]) -> Result<usize> {
    let mut count = 0;
    for &c in cosines {
        if c >= 1.0 - INTERSECTION_TOL {
            count += 1;
        } else if c >= 1.0 - AMBIGUITY_BAND {
            return Err(Error::AmbiguousRank(c));
        }
    }
    Ok(count)
}

pub fn intersection_dims(pp: &ProjectionPair) -> Result<IntersectionDims> {
    let (range_p, kernel_p) = pp.p.bases();
    let (range_q, kernel_q) = pp.q.bases();
    Ok(IntersectionDims {
        range_p_kernel_q: shared_directions(&principal_cosines(&range_p, &kernel_q))?,
        kernel_p_range_q: shared_directions(&principal_cosines(&kernel_p, &range_q))?,
        rank_p: range_p.ncols(),
        rank_q: range_q.ncols(),
    })
}

/// `[P:Q]`, from intersection dimensions and confirmed against `rank P - rank Q`.
pub fn essential_codimension(pp: &ProjectionPair) -> Result<i64> {
    let dims = intersection_dims(pp)?;
    let by_rank = dims.rank_p as i64 - dims.rank_q as i64;
    let index = dims.index();
    if index != by_rank {
        // Only possible when some principal angle sits right at the cutoff.
        return Err(Error::InvalidParameter(format!(
            "intersection dimensions give index {index}, ranks give {by_rank}"
        )));
    }
    Ok(index)
}

pub fn codimension(p: &Projection, q: &Projection) -> Result<i64> {
    essential_codimension(&ProjectionPair::new(p.clone(), q.clone())?)
}

/// `[P:R] = [P:Q] + [Q:R]`.
pub fn index_additivity_check(p: &Projection, q: &Projection, r: &Projection) -> Result<bool> {
    Ok(codimension(p, r)? == codimension(p, q)? + codimension(q, r)?)
}

/// `[P:Q] = -[Q:P]`.
pub fn antisymmetry_check(p: &Projection, q: &Projection) -> Result<bool> {
    Ok(codimension(p, q)? == -codimension(q, p)?)
}

/// `[P1+P2 : Q1+Q2] = [P1:Q1] + [P2:Q2]` for `P1 P2 = 0`, `Q1 Q2 = 0`.
pub fn orthogonal_sum_check(
    p1: &Projection,
    q1: &Projection,
    p2: &Projection,
    q2: &Projection,
) -> Result<bool> {
    let overlap = op_norm(&(p1.matrix() * p2.matrix())).max(op_norm(&(q1.matrix() * q2.matrix())));
    if overlap > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal(overlap));
    }
    let p = Projection::new(p1.operator() + p2.operator())?;
    let q = Projection::new(q1.operator() + q2.operator())?;
    Ok(codimension(&p, &q)? == codimension(p1, q1)? + codimension(p2, q2)?)
}

//! Explicit intertwiners between closed-range matrices.
//!
//! Each construction returns a [`Certificate`]: the witness matrices, the
//! residual of the relation they are meant to satisfy, and how far each
//! witness is from the identity in the chosen gauge. Whether that distance
//! is "small" is left to a [`GaugePredicate`](crate::GaugePredicate), so the
//! same certificate can be re-judged at another threshold.

mod align;
mod blocks;
pub(crate) mod competitors;
mod intertwine;
mod representatives;

use serde::{Deserialize, Serialize};

pub use align::{align_isometry_families, align_partial_isometries, align_projections, FamilyAlignment};
pub use blocks::{
    block_svd, classify_diagonal_modulus, construct_bi_unitary, Block, BlockSvd, BlockSvdResiduals, ClusterMatch,
    DiagonalModulusReport, DEFAULT_GROUPING_TOL,
};
pub use competitors::SamplingSummary;
pub use intertwine::{
    classify_orbits, construct_biorbit_intertwiners,
    construct_left_intertwiner, construct_left_unitary, null_space_relation, polar_split_check,
    Membership, NullSpaceRelation, OrbitReport, PolarSplitReport,
};
pub use representatives::{
    optimality_check, optimality_check_with, special_representatives, OptimalityReport,
    ProjectionRepresentative, SpecialRepresentatives,
};

use crate::error::{Error, Result};
use crate::gauges::SymmetricGauge;
use crate::linalg::{identity, op_norm, unitarity_residual, Mat, Operator};

/// Relation residuals must stay below `CERTIFICATE_TOL * (1 + ||B||)`.
pub const CERTIFICATE_TOL: f64 = 1e-8;

/// Largest `||U* U - I||` accepted for a unitary witness.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Largest sine between null spaces still read as equality.
pub const NULL_SPACE_TOL: f64 = 1e-8;

/// `|| |A| - |B| ||` slack, relative to `max(1, ||A||)`.
pub const MODULUS_TOL: f64 = 1e-9;

/// Which relation a certificate witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    /// `G A = B`, `G` invertible.
    Left,
    /// `G A K^-1 = B`, `G, K` invertible.
    Bi,
    /// `U A = B`, `U` unitary.
    LeftUnitary,
    /// `U A W* = B`, `U, W` unitary.
    BiUnitary,
    /// `U V1 = V2` between partial isometries.
    PartialIsometry,
    /// `U P U* = Q` between projections.
    Projection,
    /// `Z V_j = W_j` for a whole family; the residual is the worst pair.
    Family,
}

impl CertificateKind {
    pub fn is_unitary(&self) -> bool {
        !matches!(self, CertificateKind::Left | CertificateKind::Bi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    /// `G` or `U`.
    pub left: Operator,
    /// `K` or `W` for two-sided relations.
    pub right: Option<Operator>,
    pub residual: f64,
    pub tolerance: f64,
    /// `||left - I||_Phi`.
    pub left_dev: f64,
    /// `||right - I||_Phi`.
    pub right_dev: Option<f64>,
    /// Worst `||X* X - I||` over the unitary witnesses.
    pub unitarity: Option<f64>,
    pub gauge: SymmetricGauge,
    /// False when a non-unique fallback (rather than the canonical small-deviation
    /// choice) produced the witness.
    pub canonical: bool,
    pub satisfied: bool,
}

fn inverse(m: &Mat) -> Result<Mat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularIntertwiner(crate::linalg::singular_values(m).last().copied().unwrap_or(0.0)))
}

/// `||left A right^-1 - B||` for the relation of `kind`.
pub fn relation_residual(
    kind: CertificateKind,
    left: &Mat,
    right: Option<&Mat>,
    a: &Mat,
    b: &Mat,
) -> Result<f64> {
    let image = match (kind, right) {
        (CertificateKind::Bi, Some(k)) => left * a * inverse(k)?,
        (CertificateKind::BiUnitary | CertificateKind::Projection, Some(w)) => left * a * w.adjoint(),
        (CertificateKind::Family, _) => {
            return Err(Error::InvalidParameter(
                "family certificates relate lists of operators".into(),
            ))
        }
        (_, None) => left * a,
        (_, Some(_)) => {
            return Err(Error::InvalidParameter(format!(
                "{kind:?} certificate carries an unexpected right factor"
            )))
        }
    };
    if image.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", image.shape()),
            got: format!("{:?}", b.shape()),
        });
    }
    Ok(op_norm(&(image - b)))
}

pub(crate) fn same_shape(a: &Operator, b: &Operator) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", a.rows(), a.cols()),
            got: format!("{}x{}", b.rows(), b.cols()),
        });
    }
    Ok(())
}

impl Certificate {
    /// Evaluates residual, deviations and unitarity of the given witnesses.
    pub(crate) fn assemble(
        kind: CertificateKind,
        left: Mat,
        right: Option<Mat>,
        a: &Operator,
        b: &Operator,
        gauge: SymmetricGauge,
    ) -> Result<Self> {
        let residual = relation_residual(kind, &left, right.as_ref(), a.matrix(), b.matrix())?;
        Ok(Self::from_residual(kind, left, right, residual, b.norm(), a.rank_tol(), gauge))
    }

    pub(crate) fn from_residual(
        kind: CertificateKind,
        left: Mat,
        right: Option<Mat>,
        residual: f64,
        target_norm: f64,
        rank_tol: f64,
        gauge: SymmetricGauge,
    ) -> Self {
        let dev = |m: &Mat| gauge.norm(&(m - identity(m.nrows())));
        let left_dev = dev(&left);
        let right_dev = right.as_ref().map(dev);
        let unitarity = kind.is_unitary().then(|| {
            right
                .as_ref()
                .map(unitarity_residual)
                .unwrap_or(0.0)
                .max(unitarity_residual(&left))
        });
        let tolerance = CERTIFICATE_TOL * (1.0 + target_norm);
        let satisfied = residual <= tolerance && unitarity.is_none_or(|u| u <= UNITARITY_TOL);
        Self {
            kind,
            left: Operator::from_parts(left, rank_tol),
            right: right.map(|r| Operator::from_parts(r, rank_tol)),
            residual,
            tolerance,
            left_dev,
            right_dev,
            unitarity,
            gauge,
            canonical: true,
            satisfied,
        }
    }

    /// Recomputes the relation residual for `(a, b)` with the stored witnesses.
    pub fn verify(&self, a: &Operator, b: &Operator) -> Result<f64> {
        relation_residual(
            self.kind,
            self.left.matrix(),
            self.right.as_ref().map(|r| r.matrix()),
            a.matrix(),
            b.matrix(),
        )
    }

    /// `max(||left - I||_Phi, ||left^-1 - I||_Phi)`; the quantity inside the
    /// logarithmic distance between frames.
    pub fn inverse_dev(&self) -> Result<f64> {
        let inv = inverse(self.left.matrix())?;
        Ok(self.gauge.norm(&(inv - identity(self.left.rows()))))
    }
}

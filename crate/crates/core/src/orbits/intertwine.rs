//! Intertwiners for the left, two-sided and unitary orbits, and the
//! norm-based membership tests they are checked against.

use serde::Serialize;

use super::align::{align_partial_isometries, align_projections};
use super::blocks::{construct_bi_unitary, DEFAULT_GROUPING_TOL};
use super::{same_shape, Certificate, CertificateKind, MODULUS_TOL, NULL_SPACE_TOL};
use crate::error::{Error, Result};
use crate::gauges::{GaugePredicate, SymmetricGauge};
use crate::index::codimension;
use crate::linalg::{
    identity, null_projection, op_norm, pinv_from_svd, polar, polar_from_svd, range_projection,
    svd_mat, Mat, Operator,
};

/// How the null spaces of two operators with the same domain sit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NullSpaceRelation {
    pub nullity_a: usize,
    pub nullity_b: usize,
    /// Largest sine between the null spaces, in both directions.
    pub sine: f64,
    pub equal: bool,
}

pub fn null_space_relation(a: &Operator, b: &Operator) -> Result<NullSpaceRelation> {
    if a.cols() != b.cols() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} columns", a.cols()),
            got: format!("{} columns", b.cols()),
        });
    }
    let pa = null_projection(a)?;
    let pb = null_projection(b)?;
    let eye = identity(a.cols());
    let sine = op_norm(&((&eye - pb.matrix()) * pa.matrix()))
        .max(op_norm(&((&eye - pa.matrix()) * pb.matrix())));
    let nullity_a = a.nullity()?;
    let nullity_b = b.nullity()?;
    Ok(NullSpaceRelation {
        nullity_a,
        nullity_b,
        sine,
        equal: nullity_a == nullity_b && sine <= NULL_SPACE_TOL,
    })
}

fn require_equal_null_spaces(a: &Operator, b: &Operator) -> Result<()> {
    let rel = null_space_relation(a, b)?;
    if rel.equal {
        Ok(())
    } else {
        Err(Error::NullSpaceMismatch {
            nullity_a: rel.nullity_a,
            nullity_b: rel.nullity_b,
            sine: rel.sine,
        })
    }
}

/// Invertible `G` with `G A = B`, for `N(A) = N(B)`.
///
/// With `D = B A^+ = U_D |D|` and `P` the range projection of `A`, the
/// witness is `G = Z (|D| + I - P)` where `Z` is a unitary extending `U_D`
/// off `R(A)`. Both factors stay close to `I` when `B` is close to `A`.
pub fn construct_left_intertwiner(a: &Operator, b: &Operator, gauge: SymmetricGauge) -> Result<Certificate> {
    same_shape(a, b)?;
    require_equal_null_spaces(a, b)?;
    let m = a.rows();
    let sa = a.svd()?;
    let r = sa.rank;
    if r == 0 {
        return Certificate::assemble(CertificateKind::Left, identity(m), None, a, b, gauge);
    }
    let d = b.matrix() * pinv_from_svd(&sa);
    let sd = svd_mat(&d, a.rank_tol())?;
    if sd.rank != r {
        let smallest = sd.s.get(r - 1).copied().unwrap_or(0.0);
        return Err(Error::SingularIntertwiner(smallest));
    }
    let (iso, modulus) = polar_from_svd(&sd);
    let qa = sa.range_basis();
    let p = &qa * qa.adjoint();
    let rotation = align_partial_isometries(
        &Operator::with_rank_tol(p.clone(), a.rank_tol())?,
        &Operator::with_rank_tol(iso, a.rank_tol())?,
        gauge,
    )?;
    let g = rotation.left.matrix() * (modulus + identity(m) - p);
    let mut cert = Certificate::assemble(CertificateKind::Left, g, None, a, b, gauge)?;
    cert.canonical = rotation.canonical;
    Ok(cert)
}

/// Invertible `G, K` with `G A K^-1 = B`, for `[P_N(A) : P_N(B)] = 0`.
///
/// `K` rotates `N(A)` onto `N(B)`, after which the left construction applies
/// to `A K^-1` and `B`.
pub fn construct_biorbit_intertwiners(a: &Operator, b: &Operator, gauge: SymmetricGauge) -> Result<Certificate> {
    same_shape(a, b)?;
    let na = null_projection(a)?;
    let nb = null_projection(b)?;
    let index = codimension(&na, &nb)?;
    if index != 0 {
        return Err(Error::IndexMismatch { index });
    }
    let rotation = align_projections(&na, &nb, gauge)?;
    let k = rotation.left.into_matrix();
    let rotated = Operator::with_rank_tol(a.matrix() * k.adjoint(), a.rank_tol())?;
    let left = construct_left_intertwiner(&rotated, b, gauge)?;
    let mut cert = Certificate::assemble(
        CertificateKind::Bi,
        left.left.into_matrix(),
        Some(k),
        a,
        b,
        gauge,
    )?;
    cert.canonical = rotation.canonical && left.canonical;
    Ok(cert)
}

fn modulus_gap(a: &Mat, b: &Mat) -> f64 {
    op_norm(&(a - b))
}

/// Unitary `U` with `U A = B`, for `|A| = |B|`.
pub fn construct_left_unitary(a: &Operator, b: &Operator, gauge: SymmetricGauge) -> Result<Certificate> {
    same_shape(a, b)?;
    let pa = polar(a)?;
    let pb = polar(b)?;
    let gap = modulus_gap(pa.modulus.matrix(), pb.modulus.matrix());
    if gap > MODULUS_TOL * a.norm().max(1.0) {
        return Err(Error::ModulusMismatch(gap));
    }
    let rotation = align_partial_isometries(&pa.partial_isometry, &pb.partial_isometry, gauge)?;
    let mut cert = Certificate::assemble(
        CertificateKind::LeftUnitary,
        rotation.left.into_matrix(),
        None,
        a,
        b,
        gauge,
    )?;
    cert.canonical = rotation.canonical;
    Ok(cert)
}

/// Verdict of one orbit test plus the witness that backs it.
#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    /// The norm condition characterising the orbit.
    pub criterion: bool,
    /// Criterion holds and the constructed witness satisfies its relation.
    pub member: bool,
    pub certificate: Option<Certificate>,
    /// Why no witness could be built, when the criterion held.
    pub note: Option<String>,
}

impl Membership {
    pub(crate) fn judge(criterion: bool, build: impl FnOnce() -> Result<Certificate>) -> Self {
        if !criterion {
            return Self {
                criterion,
                member: false,
                certificate: None,
                note: None,
            };
        }
        match build() {
            Ok(c) => Self {
                criterion,
                member: c.satisfied,
                certificate: Some(c),
                note: None,
            },
            Err(e) => Self {
                criterion,
                member: false,
                certificate: None,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    pub gauge: SymmetricGauge,
    pub threshold: f64,
    /// `||A - B||_Phi`.
    pub distance: f64,
    /// `|| |A| - |B| ||`.
    pub modulus_gap: f64,
    /// `||V_A - V_B||_Phi`.
    pub isometry_gap: f64,
    /// Largest `|s_i(A) - s_i(B)|`.
    pub singular_gap: f64,
    pub null_space: NullSpaceRelation,
    /// `[P_N(A) : P_N(B)]`, absent when the principal angles are ambiguous.
    pub kernel_index: Option<i64>,
    /// `[P_R(A) : P_R(B)]`.
    pub range_index: Option<i64>,
    pub left: Membership,
    pub bi: Membership,
    pub left_unitary: Membership,
    pub unitary: Membership,
}

/// Tests `B` against the four orbits of `A` and builds a witness for every
/// orbit whose criterion holds.
pub fn classify_orbits(a: &Operator, b: &Operator, j: &GaugePredicate) -> Result<OrbitReport> {
    same_shape(a, b)?;
    let gauge = j.gauge;
    let scale = a.norm().max(b.norm()).max(1.0);
    let distance = gauge.norm(&(a.matrix() - b.matrix()));
    let pa = polar(a)?;
    let pb = polar(b)?;
    let modulus_gap = modulus_gap(pa.modulus.matrix(), pb.modulus.matrix());
    let isometry_gap = gauge.norm(&(pa.partial_isometry.matrix() - pb.partial_isometry.matrix()));
    let singular_gap = a
        .singular_values()
        .iter()
        .zip(b.singular_values())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let null_space = null_space_relation(a, b)?;
    let kernel_index = codimension(&null_projection(a)?, &null_projection(b)?).ok();
    let range_index = codimension(&range_projection(a)?, &range_projection(b)?).ok();
    let close = j.holds(distance);

    let left = Membership::judge(close && null_space.equal, || construct_left_intertwiner(a, b, gauge));
    let bi = Membership::judge(close && kernel_index == Some(0), || {
        construct_biorbit_intertwiners(a, b, gauge)
    });
    let left_unitary = Membership::judge(close && modulus_gap <= MODULUS_TOL * scale, || {
        construct_left_unitary(a, b, gauge)
    });
    let unitary = Membership::judge(
        singular_gap <= MODULUS_TOL * scale && j.holds(isometry_gap) && range_index == Some(0),
        || construct_bi_unitary(a, b, gauge, DEFAULT_GROUPING_TOL),
    );
    Ok(OrbitReport {
        gauge,
        threshold: j.threshold,
        distance,
        modulus_gap,
        isometry_gap,
        singular_gap,
        null_space,
        kernel_index,
        range_index,
        left,
        bi,
        left_unitary,
        unitary,
    })
}

/// Closeness of `A, B` against closeness of their polar parts.
#[derive(Clone, Debug, Serialize)]
pub struct PolarSplitReport {
    pub gauge: SymmetricGauge,
    pub threshold: f64,
    pub distance: f64,
    /// `|| |A| - |B| ||_Phi`.
    pub modulus_gap: f64,
    /// `||V_A - V_B||_Phi`.
    pub isometry_gap: f64,
    pub kernel_index: Option<i64>,
    /// `[P_N(A) : P_N(B)] = 0`, the standing hypothesis.
    pub hypothesis_met: bool,
    /// `||A - B - ((V_A - V_B)|A| + V_B(|A| - |B|))||`.
    pub identity_residual: f64,
    /// `||V_A - V_B||_Phi ||A|| + || |A| - |B| ||_Phi`, an upper bound for the distance.
    pub split_bound: f64,
    /// `A - B` small.
    pub joint_small: bool,
    /// Both polar differences small.
    pub parts_small: bool,
}

pub fn polar_split_check(a: &Operator, b: &Operator, j: &GaugePredicate) -> Result<PolarSplitReport> {
    same_shape(a, b)?;
    let gauge = j.gauge;
    let pa = polar(a)?;
    let pb = polar(b)?;
    let (va, ma) = (pa.partial_isometry.matrix(), pa.modulus.matrix());
    let (vb, mb) = (pb.partial_isometry.matrix(), pb.modulus.matrix());
    let diff = a.matrix() - b.matrix();
    let split = (va - vb) * ma + vb * (ma - mb);
    let distance = gauge.norm(&diff);
    let modulus_gap = gauge.norm(&(ma - mb));
    let isometry_gap = gauge.norm(&(va - vb));
    let kernel_index = codimension(&null_projection(a)?, &null_projection(b)?).ok();
    Ok(PolarSplitReport {
        gauge,
        threshold: j.threshold,
        distance,
        modulus_gap,
        isometry_gap,
        kernel_index,
        hypothesis_met: kernel_index == Some(0),
        identity_residual: op_norm(&(diff - split)),
        split_bound: isometry_gap * a.norm() + modulus_gap,
        joint_small: j.holds(distance),
        parts_small: j.holds(modulus_gap) && j.holds(isometry_gap),
    })
}

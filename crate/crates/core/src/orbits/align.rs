//! Unitaries that carry one partial isometry, projection or family onto another.

use serde::Serialize;

use super::intertwine::null_space_relation;
use super::{same_shape, Certificate, CertificateKind};
use crate::error::{Error, Result};
use crate::gauges::SymmetricGauge;
use crate::index::codimension;
use crate::linalg::{
    identity, op_norm, partial_isometry_residual, projection_bases, subspace_map, svd_mat,
    unitary_polar_factor, Mat, Operator, Projection, DEFAULT_RANK_TOL, PARTIAL_ISOMETRY_TOL,
    PROJECTION_TOL,
};

/// Projections closer than `1 - DIRECT_ROTATION_MARGIN` are rotated onto each
/// other directly; beyond that the rotation is not defined.
pub const DIRECT_ROTATION_MARGIN: f64 = 1e-8;

/// Cross-Gram singular values below this make the Procrustes map non-unique.
const UNIQUENESS_TOL: f64 = 1e-8;

fn final_space(v: &Mat) -> Result<(Mat, Mat)> {
    let q = svd_mat(v, DEFAULT_RANK_TOL)?.range_basis();
    Ok(projection_bases(&(&q * q.adjoint())))
}

/// `U = V2 V1* + X` with `X` carrying `R(V1)^perp` onto `R(V2)^perp`.
/// Assumes `V1* V1 = V2* V2`. The flag is false when `X` is not unique.
pub(crate) fn extend_partial_isometry(v1: &Mat, v2: &Mat) -> Result<(Mat, bool)> {
    let (_, c1) = final_space(v1)?;
    let (_, c2) = final_space(v2)?;
    if c1.ncols() != c2.ncols() {
        return Err(Error::FamilyHypothesis(format!(
            "final spaces have codimensions {} and {}",
            c1.ncols(),
            c2.ncols()
        )));
    }
    let (x, smallest) = subspace_map(&c1, &c2)?;
    Ok((v2 * v1.adjoint() + x, smallest > UNIQUENESS_TOL))
}

fn check_partial_isometry(v: &Mat) -> Result<()> {
    let r = partial_isometry_residual(v);
    if r > PARTIAL_ISOMETRY_TOL {
        return Err(Error::NotPartialIsometry(r));
    }
    Ok(())
}

/// Unitary `U` with `U V1 = V2`, for partial isometries with equal null spaces.
pub fn align_partial_isometries(
    v1: &Operator,
    v2: &Operator,
    gauge: SymmetricGauge,
) -> Result<Certificate> {
    same_shape(v1, v2)?;
    check_partial_isometry(v1.matrix())?;
    check_partial_isometry(v2.matrix())?;
    let rel = null_space_relation(v1, v2)?;
    if !rel.equal {
        return Err(Error::NullSpaceMismatch {
            nullity_a: rel.nullity_a,
            nullity_b: rel.nullity_b,
            sine: rel.sine,
        });
    }
    let (u, canonical) = extend_partial_isometry(v1.matrix(), v2.matrix())?;
    let mut cert = Certificate::assemble(CertificateKind::PartialIsometry, u, None, v1, v2, gauge)?;
    cert.canonical = canonical;
    Ok(cert)
}

/// Unitary `U` with `U P U* = Q`, for projections of index zero.
///
/// When `||P - Q|| < 1` this is the direct rotation, the unitary polar factor
/// of `QP + (I-Q)(I-P)`, which moves as little as possible. Otherwise the two
/// ranges and the two complements are matched separately.
pub fn align_projections(p: &Projection, q: &Projection, gauge: SymmetricGauge) -> Result<Certificate> {
    same_shape(p.operator(), q.operator())?;
    let index = codimension(p, q)?;
    if index != 0 {
        return Err(Error::IndexMismatch { index });
    }
    let (pm, qm) = (p.matrix(), q.matrix());
    let eye = identity(p.dim());
    let (u, canonical) = if op_norm(&(pm - qm)) < 1.0 - DIRECT_ROTATION_MARGIN {
        let m = qm * pm + (&eye - qm) * (&eye - pm);
        (unitary_polar_factor(&m)?, true)
    } else {
        let (rp, kp) = p.bases();
        let (rq, kq) = q.bases();
        let (x, _) = subspace_map(&rp, &rq)?;
        let (y, _) = subspace_map(&kp, &kq)?;
        (x + y, false)
    };
    let mut cert = Certificate::assemble(
        CertificateKind::Projection,
        u.clone(),
        Some(u),
        p.operator(),
        q.operator(),
        gauge,
    )?;
    cert.canonical = canonical;
    Ok(cert)
}

/// A single unitary carrying every `V_j` to `W_j`.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyAlignment {
    pub certificate: Certificate,
    /// `||sum (W_j - V_j) V_j*||_Phi`.
    pub forward: f64,
    /// `||sum (V_j - W_j) W_j*||_Phi`.
    pub backward: f64,
    /// `||Z V_j - W_j||` per pair.
    pub pair_residuals: Vec<f64>,
}

fn check_family(vs: &[Operator], ws: &[Operator]) -> Result<()> {
    let fail = |m: String| Err(Error::FamilyHypothesis(m));
    if vs.is_empty() || vs.len() != ws.len() {
        return fail(format!("families of lengths {} and {}", vs.len(), ws.len()));
    }
    let shape = vs[0].shape();
    for (j, (v, w)) in vs.iter().zip(ws).enumerate() {
        if v.shape() != shape || w.shape() != shape {
            return fail(format!("member {j} has shape {:?}, expected {:?}", w.shape(), shape));
        }
        check_partial_isometry(v.matrix())?;
        check_partial_isometry(w.matrix())?;
        let vi = v.matrix().adjoint() * v.matrix();
        let wi = w.matrix().adjoint() * w.matrix();
        let gap = op_norm(&(&vi - &wi));
        if gap > PARTIAL_ISOMETRY_TOL {
            return fail(format!("member {j}: initial projections differ by {gap:.3e}"));
        }
    }
    let overlap = |xs: &[Operator], initial: bool| -> f64 {
        let proj = |x: &Operator| {
            let m = x.matrix();
            if initial {
                m.adjoint() * m
            } else {
                m * m.adjoint()
            }
        };
        let mut worst = 0.0f64;
        for j in 0..xs.len() {
            for k in j + 1..xs.len() {
                worst = worst.max(op_norm(&(proj(&xs[j]) * proj(&xs[k]))));
            }
        }
        worst
    };
    let worst = overlap(vs, true).max(overlap(vs, false)).max(overlap(ws, false));
    if worst > PROJECTION_TOL {
        return fail(format!("members are not mutually orthogonal ({worst:.3e})"));
    }
    Ok(())
}

/// Unitary `Z` with `Z V_j = W_j` for all `j`, given partial isometries with
/// `V_j* V_j = W_j* W_j` and mutually orthogonal initial and final spaces.
pub fn align_isometry_families(
    vs: &[Operator],
    ws: &[Operator],
    gauge: SymmetricGauge,
) -> Result<FamilyAlignment> {
    check_family(vs, ws)?;
    let (m, _) = vs[0].shape();
    let mut p = Mat::zeros(m, m);
    let mut s = Mat::zeros(m, m);
    let mut back = Mat::zeros(m, m);
    for (v, w) in vs.iter().zip(ws) {
        let (v, w) = (v.matrix(), w.matrix());
        p += v * v.adjoint();
        s += w * v.adjoint();
        back += (v - w) * w.adjoint();
    }
    let (z, canonical) = extend_partial_isometry(&p, &s)?;
    let pair_residuals: Vec<f64> = vs
        .iter()
        .zip(ws)
        .map(|(v, w)| op_norm(&(&z * v.matrix() - w.matrix())))
        .collect();
    let worst = pair_residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut certificate = Certificate::from_residual(
        CertificateKind::Family,
        z,
        None,
        worst,
        1.0,
        vs[0].rank_tol(),
        gauge,
    );
    certificate.canonical = canonical;
    Ok(FamilyAlignment {
        certificate,
        forward: gauge.norm(&(s - p)),
        backward: gauge.norm(&back),
        pair_residuals,
    })
}

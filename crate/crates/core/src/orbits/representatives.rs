//! Distinguished members of the left orbit: the polar partial isometry, the
//! Moore-Penrose dual and (for square operators) a projection.

use serde::Serialize;

use super::competitors::{require_samples, Minimizers, SamplingSummary};
use super::intertwine::{construct_left_intertwiner, Membership};
use super::{Certificate, CertificateKind};
use crate::error::{Error, Result};
use crate::gauges::{GaugePredicate, SymmetricGauge};
use crate::linalg::{
    identity, null_projection, op_norm, pinv_from_svd, polar_from_svd, range_projection, Mat, Operator,
};
use crate::parallel::Execution;

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionRepresentative {
    /// `I - P_N(A)`.
    pub projection: Operator,
    /// `||(I - P_N(A)) - P_R(A*)||`; the two routes to the same projection.
    pub route_gap: f64,
    /// `||A - P||_Phi`.
    pub distance: f64,
    pub membership: Membership,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecialRepresentatives {
    pub gauge: SymmetricGauge,
    pub threshold: f64,
    /// `||A A* - P_R(A)||_Phi`.
    pub gram_gap: f64,
    /// `|| |A*| - P_R(A) ||_Phi`.
    pub modulus_gap: f64,
    pub gram_small: bool,
    pub modulus_small: bool,
    /// `G1 A = V_A` with `G1 = |A*|^+ + I - P_R(A)`.
    pub isometry_witness: Certificate,
    /// `G2 A = (A*)^+` with `G2 = (A A*)^+ + I - P_R(A)`.
    pub dual_witness: Certificate,
    pub isometry_small: bool,
    pub dual_small: bool,
    pub projection: Option<ProjectionRepresentative>,
}

/// Left-orbit witnesses for `V_A`, `(A*)^+` and, for square `A`, the
/// projection onto `N(A)^perp`.
pub fn special_representatives(a: &Operator, j: &GaugePredicate) -> Result<SpecialRepresentatives> {
    let gauge = j.gauge;
    let svd = a.svd()?;
    if svd.rank == 0 {
        return Err(Error::ZeroOperator);
    }
    let m = a.rows();
    let q = svd.range_basis();
    let p = &q * q.adjoint();
    let perp = identity(m) - &p;
    let (iso, _) = polar_from_svd(&svd);
    let dual = pinv_from_svd(&svd).adjoint();
    let scaled = |f: &dyn Fn(f64) -> f64| {
        let cols = Mat::from_fn(m, svd.rank, |i, k| q[(i, k)] * f(svd.s[k]));
        cols * q.adjoint()
    };
    let adjoint_modulus = scaled(&|s| s);
    let gram = a.matrix() * a.matrix().adjoint();
    let gram_gap = gauge.norm(&(&gram - &p));
    let modulus_gap = gauge.norm(&(&adjoint_modulus - &p));

    let g1 = scaled(&|s| 1.0 / s) + &perp;
    let g2 = scaled(&|s| 1.0 / (s * s)) + &perp;
    let isometry_witness =
        Certificate::assemble(CertificateKind::Left, g1, None, a, &a.like(iso), gauge)?;
    let dual_witness = Certificate::assemble(CertificateKind::Left, g2, None, a, &a.like(dual), gauge)?;

    let projection = if a.is_square() {
        let by_kernel = identity(m) - null_projection(a)?.matrix();
        let by_range = range_projection(&a.adjoint())?;
        let proj = a.like(by_kernel);
        let distance = gauge.norm(&(a.matrix() - proj.matrix()));
        Some(ProjectionRepresentative {
            route_gap: op_norm(&(proj.matrix() - by_range.matrix())),
            distance,
            membership: Membership::judge(j.holds(distance), || construct_left_intertwiner(a, &proj, gauge)),
            projection: proj,
        })
    } else {
        None
    };
    Ok(SpecialRepresentatives {
        gauge,
        threshold: j.threshold,
        gram_gap,
        modulus_gap,
        gram_small: j.holds(gram_gap),
        modulus_small: j.holds(modulus_gap),
        isometry_small: j.holds(isometry_witness.left_dev),
        dual_small: j.holds(dual_witness.left_dev),
        isometry_witness,
        dual_witness,
        projection,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimalityReport {
    pub gauge: SymmetricGauge,
    pub seed: u64,
    /// `||A - V_A||_Phi` against sampled partial isometries of the same rank.
    pub isometry: SamplingSummary,
    /// `||A - (A*)^+||_Phi` against sampled oblique duals.
    pub dual: SamplingSummary,
    pub ok: bool,
}

pub fn optimality_check(a: &Operator, gauge: SymmetricGauge, samples: usize, seed: u64) -> Result<OptimalityReport> {
    optimality_check_with(a, gauge, samples, seed, Execution::default())
}

pub fn optimality_check_with(
    a: &Operator,
    gauge: SymmetricGauge,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<OptimalityReport> {
    require_samples(samples)?;
    let mz = Minimizers::new(a)?;
    let isometry = mz.sample_isometries(gauge, samples, seed, true, exec);
    let dual = mz.sample_duals(gauge, samples, seed, exec);
    Ok(OptimalityReport {
        gauge,
        seed,
        ok: isometry.ok && dual.ok,
        isometry,
        dual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{self, InstanceSpec};

    #[test]
    fn witnesses_hit_their_targets() {
        let a = gen::random_closed_range(&InstanceSpec::square(5, 3, 2)).unwrap();
        let j = GaugePredicate::new(SymmetricGauge::FROBENIUS, 0.5).unwrap();
        let r = special_representatives(&a, &j).unwrap();
        assert!(r.isometry_witness.satisfied && r.dual_witness.satisfied);
        let proj = r.projection.unwrap();
        assert!(proj.route_gap < 1e-10);
    }

    #[test]
    fn partial_isometry_is_its_own_representative() {
        let v = gen::random_partial_isometry(4, 2, 5).unwrap();
        let j = GaugePredicate::new(SymmetricGauge::Operator, 1e-9).unwrap();
        let r = special_representatives(&v, &j).unwrap();
        assert!(r.gram_small && r.modulus_small && r.isometry_small && r.dual_small);
    }

    #[test]
    fn optimality_holds_and_is_reproducible() {
        let a = gen::random_closed_range(&InstanceSpec::square(4, 2, 9)).unwrap();
        let r = optimality_check(&a, SymmetricGauge::FROBENIUS, 32, 1).unwrap();
        assert!(r.ok, "{r:?}");
        let s = optimality_check_with(&a, SymmetricGauge::FROBENIUS, 32, 1, Execution::Sequential).unwrap();
        assert_eq!(r.isometry, s.isometry);
        assert_eq!(r.dual, s.dual);
        assert!(matches!(
            optimality_check(&Operator::zeros(2, 2), SymmetricGauge::Operator, 4, 0),
            Err(Error::ZeroOperator)
        ));
    }
}

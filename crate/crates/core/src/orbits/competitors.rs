//! Random competitors for the optimal-approximation checks.
//!
//! Sample `i` draws from its own ChaCha stream, so the outcome list is the
//! same whether it is computed in parallel or not.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauges::SymmetricGauge;
use crate::gen::{self, haar_unitary, near_identity_unitary};
use crate::linalg::{identity, null_projection, op_norm, pinv_from_svd, polar_from_svd, projection_bases, Mat, Operator};
use crate::parallel::{map_indexed, Execution};

/// A competitor must undercut the minimum by more than this (relative to
/// `max(1, minimum)`) to count as a violation.
pub const VIOLATION_SLACK: f64 = 1e-12;

/// Two distances closer than this (relative to `max(1, minimum)`) are equal.
pub const EQUALITY_TOL: f64 = 1e-9;

/// A near-equality farther than this from the minimizer breaks strictness.
pub const STRICTNESS_TOL: f64 = 1e-6;

/// Outcome of comparing a claimed minimizer against sampled competitors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingSummary {
    /// Distance from the operator to the claimed minimizer.
    pub minimum: f64,
    pub samples: usize,
    /// Smallest `competitor - minimum` seen.
    pub margin: f64,
    /// Competitors strictly closer than the minimizer.
    pub violations: usize,
    pub near_equalities: usize,
    /// Near-equalities attained away from the minimizer.
    pub off_minimizer: usize,
    /// Whether the gauge promises a unique minimizer.
    pub strict: bool,
    pub ok: bool,
}

/// One competitor: its distance to the operator and to the minimizer.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Outcome {
    pub value: f64,
    pub deviation: f64,
}

pub(crate) fn summarize(minimum: f64, outcomes: &[Outcome], strict: bool) -> SamplingSummary {
    let slack = VIOLATION_SLACK * minimum.max(1.0);
    let equal = EQUALITY_TOL * minimum.max(1.0);
    let mut summary = SamplingSummary {
        minimum,
        samples: outcomes.len(),
        margin: f64::INFINITY,
        violations: 0,
        near_equalities: 0,
        off_minimizer: 0,
        strict,
        ok: true,
    };
    for o in outcomes {
        let gap = o.value - minimum;
        summary.margin = summary.margin.min(gap);
        if gap < -slack {
            summary.violations += 1;
        } else if gap <= equal {
            summary.near_equalities += 1;
            if o.deviation > STRICTNESS_TOL {
                summary.off_minimizer += 1;
            }
        }
    }
    summary.ok = summary.violations == 0 && (!strict || summary.off_minimizer == 0);
    summary
}

/// The polar partial isometry and the Moore-Penrose dual of an operator,
/// with the subspaces used to perturb them.
pub(crate) struct Minimizers {
    pub operator: Mat,
    /// `V_A`.
    pub isometry: Mat,
    /// `(A*)^+`.
    pub dual: Mat,
    /// `I - P_R(A)`.
    range_perp: Mat,
    range_perp_basis: Mat,
    kernel_basis: Mat,
}

impl Minimizers {
    pub fn new(a: &Operator) -> Result<Self> {
        let svd = a.svd()?;
        if svd.rank == 0 {
            return Err(Error::ZeroOperator);
        }
        let (isometry, _) = polar_from_svd(&svd);
        let dual = pinv_from_svd(&svd).adjoint();
        let q = svd.range_basis();
        let range_perp = identity(a.rows()) - &q * q.adjoint();
        let (_, range_perp_basis) = projection_bases(&(&q * q.adjoint()));
        let (kernel_basis, _) = projection_bases(null_projection(a)?.matrix());
        Ok(Self {
            operator: a.matrix().clone(),
            isometry,
            dual,
            range_perp,
            range_perp_basis,
            kernel_basis,
        })
    }

    /// Unitary that is `I` off the span of `basis` and Haar on it.
    fn local_unitary<R: Rng>(rng: &mut R, basis: &Mat) -> Mat {
        let n = basis.nrows();
        let h = haar_unitary(rng, basis.ncols());
        identity(n) + basis * (h - identity(basis.ncols())) * basis.adjoint()
    }

    /// Partial isometry `U V_A W` (or `U V_A` when `two_sided` is false).
    ///
    /// Sample kinds cycle through: near-identity factors, one-sided
    /// near-identity, Haar factors, and factors fixing `V_A`.
    pub fn isometry_competitor(&self, seed: u64, index: usize, two_sided: bool) -> Mat {
        let mut rng = gen::sample_rng(seed, index as u64);
        let (m, n) = self.isometry.shape();
        let (u, w) = match index % 4 {
            0 => {
                let spread = rng.random_range(0.05..1.0);
                (near_identity_unitary(&mut rng, m, spread), near_identity_unitary(&mut rng, n, spread))
            }
            1 => {
                let spread = rng.random_range(0.05..1.0);
                (near_identity_unitary(&mut rng, m, spread), identity(n))
            }
            2 => (haar_unitary(&mut rng, m), haar_unitary(&mut rng, n)),
            _ => (
                Self::local_unitary(&mut rng, &self.range_perp_basis),
                Self::local_unitary(&mut rng, &self.kernel_basis),
            ),
        };
        if two_sided {
            u * &self.isometry * w
        } else {
            u * &self.isometry
        }
    }

    /// Dual `(A*)^+ + (I - P_R) Y (A*)^+`; every such matrix is an
    /// oblique dual of `A` for the same pair of subspaces.
    pub fn dual_competitor(&self, seed: u64, index: usize) -> Mat {
        let mut rng = gen::sample_rng(seed, index as u64);
        let m = self.dual.nrows();
        if index % 4 == 3 {
            return self.dual.clone();
        }
        let y = gen::gaussian(&mut rng, m, m);
        let scale = rng.random_range(0.05..2.0) / op_norm(&y).max(f64::MIN_POSITIVE);
        &self.dual + &self.range_perp * y.scale(scale) * &self.dual
    }

    pub fn sample_isometries(
        &self,
        gauge: SymmetricGauge,
        samples: usize,
        seed: u64,
        two_sided: bool,
        exec: Execution,
    ) -> SamplingSummary {
        let outcomes = map_indexed(exec, samples, |i| {
            let v = self.isometry_competitor(seed, i, two_sided);
            Outcome {
                value: gauge.norm(&(&self.operator - &v)),
                deviation: op_norm(&(&v - &self.isometry)),
            }
        });
        let minimum = gauge.norm(&(&self.operator - &self.isometry));
        summarize(minimum, &outcomes, gauge.is_strictly_schur_convex())
    }

    pub fn sample_duals(&self, gauge: SymmetricGauge, samples: usize, seed: u64, exec: Execution) -> SamplingSummary {
        let outcomes = map_indexed(exec, samples, |i| {
            let b = self.dual_competitor(seed, i);
            Outcome {
                value: gauge.norm(&(&self.operator - &b)),
                deviation: op_norm(&(&b - &self.dual)),
            }
        });
        let minimum = gauge.norm(&(&self.operator - &self.dual));
        summarize(minimum, &outcomes, gauge.is_strictly_schur_convex())
    }
}

pub(crate) fn require_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter("at least one sample is required".into()));
    }
    Ok(())
}

//! Finite frames for subspaces of `C^d`.
//!
//! Everything here is a statement about the synthesis operator `T_F`
//! (column `j` is `f_j`): equivalence of frames is the left orbit of `T_F`,
//! the canonical dual has synthesis `(T_F*)^+` and the associated Parseval
//! frame has synthesis `V_F`, the partial isometry of `T_F`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauges::{GaugePredicate, SymmetricGauge};
use crate::gen;
use crate::index::codimension;
use crate::linalg::{
    identity, op_norm, principal_cosines, range_projection, svd_mat, Mat, Operator, Projection, C64,
    DEFAULT_RANK_TOL,
};
use crate::orbits::competitors::{require_samples, Minimizers};
use crate::orbits::{
    align_partial_isometries, construct_left_intertwiner, construct_left_unitary, null_space_relation,
    Certificate, NullSpaceRelation, SamplingSummary, MODULUS_TOL,
};
use crate::parallel::Execution;

/// Restricted-identity residuals at or below this make two frames duals.
pub const DUALITY_TOL: f64 = 1e-9;

/// Smallest admissible cosine between the two subspaces of an oblique pair.
pub const ANGLE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::FrameFile", into = "crate::io::FrameFile")]
pub struct Frame {
    dim: usize,
    vectors: Vec<Vec<C64>>,
}

impl Frame {
    /// `n >= 1` vectors of length `dim >= 1`, all finite.
    pub fn new(dim: usize, vectors: Vec<Vec<C64>>) -> Result<Self> {
        if dim == 0 || vectors.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: "at least one vector in C^d, d >= 1".into(),
                got: format!("{} vectors in C^{dim}", vectors.len()),
            });
        }
        if let Some((j, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != dim) {
            return Err(Error::ShapeMismatch {
                expected: format!("vectors of length {dim}"),
                got: format!("vector {j} of length {}", v.len()),
            });
        }
        if vectors.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, vectors })
    }

    /// Frame whose vectors are the columns of `t`.
    pub fn from_synthesis(t: &Operator) -> Result<Self> {
        let m = t.matrix();
        let vectors = (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect();
        Self::new(m.nrows(), vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Always false; a frame has at least one vector.
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    /// `T_F`, `d x n`.
    pub fn synthesis(&self) -> Operator {
        let m = Mat::from_fn(self.dim, self.len(), |i, j| self.vectors[j][i]);
        Operator::from_parts(m, DEFAULT_RANK_TOL)
    }

    /// `S_F = T_F T_F*`.
    pub fn frame_operator(&self) -> Operator {
        let t = self.synthesis();
        &t * &t.adjoint()
    }

    /// Projection onto the span of the vectors.
    pub fn subspace_projection(&self) -> Result<Projection> {
        range_projection(&self.synthesis())
    }
}

pub fn synthesis(f: &Frame) -> Operator {
    f.synthesis()
}

pub fn frame_operator(f: &Frame) -> Operator {
    f.frame_operator()
}

/// Optimal bounds `(alpha, beta)`: extreme nonzero eigenvalues of `S_F`.
pub fn frame_bounds(f: &Frame) -> Result<(f64, f64)> {
    let svd = f.synthesis().svd()?;
    if svd.rank == 0 {
        return Err(Error::ZeroFrame);
    }
    let beta = svd.s[0] * svd.s[0];
    let alpha = svd.s[svd.rank - 1] * svd.s[svd.rank - 1];
    Ok((alpha, beta))
}

fn nonzero(f: &Frame) -> Result<Operator> {
    let t = f.synthesis();
    if t.rank()? == 0 {
        return Err(Error::ZeroFrame);
    }
    Ok(t)
}

/// `F#`, with synthesis `(T_F*)^+`, i.e. `f#_n = S_F^+ f_n`.
pub fn canonical_dual(f: &Frame) -> Result<Frame> {
    let t = nonzero(f)?;
    Frame::from_synthesis(&t.pinv()?.adjoint())
}

/// `F~`, with synthesis the partial isometry of `T_F`.
pub fn associated_parseval(f: &Frame) -> Result<Frame> {
    let t = nonzero(f)?;
    Frame::from_synthesis(&t.polar()?.partial_isometry)
}

fn same_size(f: &Frame, g: &Frame) -> Result<()> {
    if f.dim() != g.dim() || f.len() != g.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} vectors in C^{}", f.len(), f.dim()),
            got: format!("{} vectors in C^{}", g.len(), g.dim()),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObliqueDuality {
    pub dual: bool,
    /// `||(T_F T_G* - I) Q_S||` with `Q_S` a basis of the span of `F`.
    pub residual_first: f64,
    /// `||(T_G T_F* - I) Q_T||` with `Q_T` a basis of the span of `G`.
    pub residual_second: f64,
    /// Smallest cosine between the two spans.
    pub min_cosine: f64,
}

/// Whether `G` is an oblique dual of `F`: `T_F T_G*` is the identity on the
/// span of `F` and `T_G T_F*` on the span of `G`. The spans must be in
/// direct-sum position with each other's orthogonal complements.
pub fn is_oblique_dual(f: &Frame, g: &Frame) -> Result<ObliqueDuality> {
    same_size(f, g)?;
    let (tf, tg) = (f.synthesis(), g.synthesis());
    let qs = tf.svd()?.range_basis();
    let qt = tg.svd()?.range_basis();
    if qs.ncols() != qt.ncols() || qs.ncols() == 0 {
        return Err(Error::AngleCondition(format!(
            "spans have dimensions {} and {}",
            qs.ncols(),
            qt.ncols()
        )));
    }
    let min_cosine = principal_cosines(&qs, &qt).last().copied().unwrap_or(0.0);
    if min_cosine <= ANGLE_TOL {
        return Err(Error::AngleCondition(format!(
            "one span meets the orthogonal complement of the other (cosine {min_cosine:.3e})"
        )));
    }
    let (a, b) = (tf.matrix(), tg.matrix());
    let residual_first = op_norm(&(a * b.adjoint() * &qs - &qs));
    let residual_second = op_norm(&(b * a.adjoint() * &qt - &qt));
    Ok(ObliqueDuality {
        dual: residual_first <= DUALITY_TOL && residual_second <= DUALITY_TOL,
        residual_first,
        residual_second,
        min_cosine,
    })
}

/// One of several equivalent characterisations, evaluated on its own.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub holds: bool,
    /// The norm the verdict was read from.
    pub value: f64,
}

fn consistent(conditions: &[Condition]) -> bool {
    conditions.windows(2).all(|w| w[0].holds == w[1].holds)
}

#[derive(Clone, Debug, Serialize)]
pub struct FramePairReport {
    pub gauge: SymmetricGauge,
    pub threshold: f64,
    /// `||T_F - T_G||_Phi`.
    pub d_j: f64,
    /// `[P_S : P_T]` for the two spans.
    pub index: Option<i64>,
    /// `||P_S - P_T||_Phi`.
    pub projection_gap: f64,
    pub null_space: NullSpaceRelation,
    pub equivalent: bool,
    pub equivalence: Option<Certificate>,
    pub unitary_equivalence: Option<Certificate>,
    pub conditions: Vec<Condition>,
    /// All conditions returned the same verdict.
    pub consistent: bool,
    pub notes: Vec<String>,
}

struct PairData {
    a: Operator,
    b: Operator,
    d_j: f64,
    index: Option<i64>,
    projection_gap: f64,
    null_space: NullSpaceRelation,
}

fn pair_data(f: &Frame, g: &Frame, gauge: SymmetricGauge) -> Result<PairData> {
    same_size(f, g)?;
    let (a, b) = (f.synthesis(), g.synthesis());
    let ps = range_projection(&a)?;
    let pt = range_projection(&b)?;
    Ok(PairData {
        d_j: gauge.norm(&(a.matrix() - b.matrix())),
        index: codimension(&ps, &pt).ok(),
        projection_gap: gauge.norm(&(ps.matrix() - pt.matrix())),
        null_space: null_space_relation(&a, &b)?,
        a,
        b,
    })
}

fn partial_isometry(a: &Operator) -> Result<Operator> {
    Ok(a.polar()?.partial_isometry)
}

fn dual_synthesis(a: &Operator) -> Result<Operator> {
    Ok(a.pinv()?.adjoint())
}

/// Whether `g_n = G f_n` for an invertible `G` close to `I`, tested four ways:
/// the constructed `G`, the synthesis difference with the null spaces, the
/// canonical duals, and the associated Parseval frames with the frame
/// operators.
pub fn frames_equivalent(f: &Frame, g: &Frame, j: &GaugePredicate) -> Result<FramePairReport> {
    let gauge = j.gauge;
    let d = pair_data(f, g, gauge)?;
    let same_kernel = d.null_space.equal;
    let mut notes = Vec::new();

    let equivalence = if same_kernel {
        construct_left_intertwiner(&d.a, &d.b, gauge)
            .map_err(|e| notes.push(format!("intertwiner: {e}")))
            .ok()
    } else {
        notes.push(format!(
            "null spaces differ: nullities {} and {}, sine {:.3e}",
            d.null_space.nullity_a, d.null_space.nullity_b, d.null_space.sine
        ));
        None
    };
    let intertwiner_dev = equivalence
        .as_ref()
        .filter(|c| c.satisfied)
        .map_or(f64::INFINITY, |c| c.left_dev);

    let duals = gauge.norm(&(dual_synthesis(&d.a)?.into_matrix() - dual_synthesis(&d.b)?.into_matrix()));
    let parseval = gauge.norm(&(partial_isometry(&d.a)?.into_matrix() - partial_isometry(&d.b)?.into_matrix()));
    let operators = gauge.norm(&(f.frame_operator().into_matrix() - g.frame_operator().into_matrix()));
    let conditions = vec![
        Condition {
            name: "intertwiner",
            holds: j.holds(intertwiner_dev),
            value: intertwiner_dev,
        },
        Condition {
            name: "synthesis",
            holds: same_kernel && j.holds(d.d_j),
            value: d.d_j,
        },
        Condition {
            name: "canonical-duals",
            holds: same_kernel && j.holds(duals),
            value: duals,
        },
        Condition {
            name: "parseval-and-frame-operators",
            holds: same_kernel && j.holds(parseval) && j.holds(operators),
            value: parseval.max(operators),
        },
    ];
    Ok(FramePairReport {
        gauge,
        threshold: j.threshold,
        d_j: d.d_j,
        index: d.index,
        projection_gap: d.projection_gap,
        null_space: d.null_space,
        equivalent: conditions[1].holds,
        equivalence,
        unitary_equivalence: None,
        consistent: consistent(&conditions),
        conditions,
        notes,
    })
}

/// Whether `g_n = U f_n` for a unitary `U` close to `I`, tested on the
/// frames, on the associated Parseval frames (with equal Gram operators
/// `T_F* T_F = T_G* T_G`), and on the canonical duals.
pub fn frames_unitarily_equivalent(f: &Frame, g: &Frame, j: &GaugePredicate) -> Result<FramePairReport> {
    let gauge = j.gauge;
    let d = pair_data(f, g, gauge)?;
    let mut notes = Vec::new();
    let mut attempt = |label: &str, r: Result<Certificate>| -> Option<Certificate> {
        r.map_err(|e| notes.push(format!("{label}: {e}"))).ok()
    };
    let dev = |c: &Option<Certificate>| c.as_ref().filter(|c| c.satisfied).map_or(f64::INFINITY, |c| c.left_dev);

    let direct = attempt("frames", construct_left_unitary(&d.a, &d.b, gauge));
    let (a, b) = (d.a.matrix(), d.b.matrix());
    let gram_gap = op_norm(&(a.adjoint() * a - b.adjoint() * b));
    let gram_equal = gram_gap <= MODULUS_TOL * d.a.norm().max(d.b.norm()).max(1.0).powi(2);
    let parseval = attempt(
        "parseval frames",
        align_partial_isometries(&partial_isometry(&d.a)?, &partial_isometry(&d.b)?, gauge),
    );
    let duals = attempt(
        "canonical duals",
        construct_left_unitary(&dual_synthesis(&d.a)?, &dual_synthesis(&d.b)?, gauge),
    );
    let conditions = vec![
        Condition {
            name: "unitary",
            holds: j.holds(dev(&direct)),
            value: dev(&direct),
        },
        Condition {
            name: "parseval-and-gram",
            holds: gram_equal && j.holds(dev(&parseval)),
            value: if gram_equal { dev(&parseval) } else { f64::INFINITY },
        },
        Condition {
            name: "canonical-duals",
            holds: j.holds(dev(&duals)),
            value: dev(&duals),
        },
    ];
    Ok(FramePairReport {
        gauge,
        threshold: j.threshold,
        d_j: d.d_j,
        index: d.index,
        projection_gap: d.projection_gap,
        null_space: d.null_space,
        equivalent: conditions[0].holds,
        equivalence: None,
        unitary_equivalence: direct,
        consistent: consistent(&conditions),
        conditions,
        notes,
    })
}

/// `d_J(F, G) = ||T_F - T_G||_Phi`.
pub fn distance_dj(f: &Frame, g: &Frame, gauge: SymmetricGauge) -> Result<f64> {
    same_size(f, g)?;
    Ok(gauge.norm(&(f.synthesis().into_matrix() - g.synthesis().into_matrix())))
}

/// Upper bound on the logarithmic distance between equivalent frames.
#[derive(Clone, Debug, Serialize)]
pub struct DjlBound {
    /// `log(1 + max(||G - I||_Phi, ||G^-1 - I||_Phi))` at the returned witness.
    pub upper: f64,
    /// The same quantity at the constructed intertwiner, before refinement.
    pub initial: f64,
    pub refine: usize,
    /// Refinement steps that improved the bound.
    pub accepted: usize,
    pub witness: Certificate,
}

fn log_deviation(g: &Mat, gauge: SymmetricGauge) -> Option<f64> {
    let inv = g.clone().try_inverse()?;
    let eye = identity(g.nrows());
    let dev = gauge.norm(&(g - &eye)).max(gauge.norm(&(inv - eye)));
    dev.is_finite().then(|| dev.ln_1p())
}

const REFINE_SEED: u64 = 0x646a_6c72;

/// Evaluates the logarithmic deviation at the constructed intertwiner `G`,
/// then tries `refine` perturbations `G (I + Y (I - P))`, `P` the range
/// projection of `T_F`, keeping each one that lowers the value. Every such
/// `G'` still maps `F` to `G`, so the result stays an upper bound and never
/// increases with `refine`.
pub fn distance_djl_upper(f: &Frame, g: &Frame, gauge: SymmetricGauge, refine: usize) -> Result<DjlBound> {
    same_size(f, g)?;
    let (a, b) = (f.synthesis(), g.synthesis());
    let cert = construct_left_intertwiner(&a, &b, gauge)?;
    let mut best = cert.left.matrix().clone();
    let initial = log_deviation(&best, gauge).ok_or(Error::SingularIntertwiner(0.0))?;
    let mut upper = initial;
    let q = a.svd()?.range_basis();
    let d = a.rows();
    let free = identity(d) - &q * q.adjoint();
    let mut step = 0.5 * upper.exp_m1().max(1e-3);
    let mut accepted = 0;
    if free.iter().any(|z| z.norm() > 0.0) {
        for k in 0..refine {
            let mut rng = gen::sample_rng(REFINE_SEED, k as u64);
            let y = gen::gaussian(&mut rng, d, d);
            let scale = step * rng.random_range(0.5..1.0) / op_norm(&y).max(f64::MIN_POSITIVE);
            let trial = &best * (identity(d) + y.scale(scale) * &free);
            match log_deviation(&trial, gauge) {
                Some(v) if v < upper => {
                    upper = v;
                    best = trial;
                    accepted += 1;
                }
                _ => step *= 0.7,
            }
        }
    }
    let mut witness = Certificate::assemble(cert.kind, best, None, &a, &b, gauge)?;
    witness.canonical = accepted == 0 && cert.canonical;
    Ok(DjlBound {
        upper,
        initial,
        refine,
        accepted,
        witness,
    })
}

/// Claimed nearest frame of a class, its distance, and the sampling check.
#[derive(Clone, Debug, Serialize)]
pub struct NearestFrame {
    pub frame: Frame,
    pub distance: f64,
    pub report: SamplingSummary,
}

pub fn nearest_parseval(f: &Frame, gauge: SymmetricGauge, samples: usize, seed: u64) -> Result<NearestFrame> {
    nearest_parseval_with(f, gauge, samples, seed, Execution::default())
}

/// `F~` against Parseval frames `{U f~_n}` equivalent to `F`.
pub fn nearest_parseval_with(
    f: &Frame,
    gauge: SymmetricGauge,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<NearestFrame> {
    require_samples(samples)?;
    let mz = Minimizers::new(&nonzero(f)?)?;
    let report = mz.sample_isometries(gauge, samples, seed, false, exec);
    Ok(NearestFrame {
        frame: Frame::from_synthesis(&Operator::from_parts(mz.isometry.clone(), DEFAULT_RANK_TOL))?,
        distance: report.minimum,
        report,
    })
}

pub fn nearest_dual(f: &Frame, gauge: SymmetricGauge, samples: usize, seed: u64) -> Result<NearestFrame> {
    nearest_dual_with(f, gauge, samples, seed, Execution::default())
}

/// `F#` against oblique duals equivalent to `F`.
pub fn nearest_dual_with(
    f: &Frame,
    gauge: SymmetricGauge,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<NearestFrame> {
    require_samples(samples)?;
    let mz = Minimizers::new(&nonzero(f)?)?;
    let report = mz.sample_duals(gauge, samples, seed, exec);
    Ok(NearestFrame {
        frame: Frame::from_synthesis(&Operator::from_parts(mz.dual.clone(), DEFAULT_RANK_TOL))?,
        distance: report.minimum,
        report,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DeficiencyReport {
    pub gauge: SymmetricGauge,
    pub threshold: f64,
    /// `||S_F|_S - I_S||_Phi`.
    pub deficiency: f64,
    pub conditions: Vec<Condition>,
    pub consistent: bool,
}

/// How far `F` is from being equivalent to its own dual, checked five ways.
///
/// The "some dual" and "some Parseval frame" conditions are evaluated at the
/// canonical dual and the associated Parseval frame, the nearest members of
/// those classes.
pub fn self_dual_deficiency(f: &Frame, j: &GaugePredicate) -> Result<DeficiencyReport> {
    let t = nonzero(f)?;
    let svd = svd_mat(t.matrix(), t.rank_tol())?;
    let q = svd.range_basis();
    let compressed = q.adjoint() * f.frame_operator().matrix() * &q;
    let deficiency = j.gauge.norm(&(compressed - identity(q.ncols())));
    let dual = canonical_dual(f)?;
    let parseval = associated_parseval(f)?;
    let to_dual = frames_equivalent(f, &dual, j)?;
    let to_parseval = frames_equivalent(f, &parseval, j)?;
    let conditions = vec![
        Condition {
            name: "frame-operator",
            holds: j.holds(deficiency),
            value: deficiency,
        },
        Condition {
            name: "canonical-dual",
            holds: to_dual.equivalent,
            value: to_dual.d_j,
        },
        Condition {
            name: "some-dual",
            holds: to_dual.equivalent && is_oblique_dual(f, &dual)?.dual,
            value: to_dual.d_j,
        },
        Condition {
            name: "associated-parseval",
            holds: to_parseval.equivalent,
            value: to_parseval.d_j,
        },
        Condition {
            name: "some-parseval",
            holds: to_parseval.equivalent,
            value: to_parseval.d_j,
        },
    ];
    Ok(DeficiencyReport {
        gauge: j.gauge,
        threshold: j.threshold,
        deficiency,
        consistent: consistent(&conditions),
        conditions,
    })
}

//! Grouped singular value decomposition `A = sum lambda V_lambda` and the
//! unitary-orbit tests phrased through it.

use serde::Serialize;

use super::align::{align_isometry_families, align_projections};
use super::intertwine::Membership;
use super::{same_shape, Certificate, CertificateKind};
use crate::error::{Error, Result};
use crate::gauges::{GaugePredicate, SymmetricGauge};
use crate::index::codimension;
use crate::linalg::{
    identity, null_projection, op_norm, range_projection, Mat, Operator, Projection,
    PARTIAL_ISOMETRY_TOL,
};

/// Relative gap below which neighbouring singular values share a block.
pub const DEFAULT_GROUPING_TOL: f64 = 1e-6;

/// One distinct singular value and its partial isometry.
#[derive(Clone, Debug, Serialize)]
pub struct Block {
    /// Mean of the grouped singular values.
    pub value: f64,
    pub multiplicity: usize,
    /// `(max - min) / max` over the group.
    pub width: f64,
    /// `U_c V_c*` over the group's singular vectors.
    pub isometry: Operator,
}

impl Block {
    /// `V* V`.
    pub fn initial_projection(&self) -> Projection {
        let v = self.isometry.matrix();
        Projection::from_matrix(v.adjoint() * v, self.isometry.rank_tol())
    }

    /// `V V*`.
    pub fn final_projection(&self) -> Projection {
        let v = self.isometry.matrix();
        Projection::from_matrix(v * v.adjoint(), self.isometry.rank_tol())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockSvd {
    pub rows: usize,
    pub cols: usize,
    pub grouping_tol: f64,
    /// Decreasing values.
    pub blocks: Vec<Block>,
}

/// How well a [`BlockSvd`] reproduces its operator.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockSvdResiduals {
    /// `||A - sum lambda V_lambda||`.
    pub reconstruction: f64,
    /// Largest `||V_i* V_i V_j* V_j||`, `i != j`.
    pub initial_overlap: f64,
    /// Largest `||V_i V_i* V_j V_j*||`, `i != j`.
    pub final_overlap: f64,
    /// `||sum V* V - P_N(A)^perp||`.
    pub initial_sum: f64,
    /// `||sum V V* - P_R(A)||`.
    pub final_sum: f64,
}

impl BlockSvd {
    pub fn reconstruct(&self) -> Mat {
        self.blocks
            .iter()
            .fold(Mat::zeros(self.rows, self.cols), |acc, b| acc + b.isometry.matrix().scale(b.value))
    }

    pub fn residuals(&self, a: &Operator) -> Result<BlockSvdResiduals> {
        if a.shape() != (self.rows, self.cols) {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", a.rows(), a.cols()),
            });
        }
        let initial: Vec<Mat> = self.blocks.iter().map(|b| b.initial_projection().matrix().clone()).collect();
        let fin: Vec<Mat> = self.blocks.iter().map(|b| b.final_projection().matrix().clone()).collect();
        let overlap = |ps: &[Mat]| {
            let mut worst = 0.0f64;
            for i in 0..ps.len() {
                for j in i + 1..ps.len() {
                    worst = worst.max(op_norm(&(&ps[i] * &ps[j])));
                }
            }
            worst
        };
        let sum = |ps: &[Mat], n: usize| ps.iter().fold(Mat::zeros(n, n), |acc, p| acc + p);
        let corange = identity(self.cols) - null_projection(a)?.matrix();
        let range = range_projection(a)?;
        Ok(BlockSvdResiduals {
            reconstruction: op_norm(&(a.matrix() - self.reconstruct())),
            initial_overlap: overlap(&initial),
            final_overlap: overlap(&fin),
            initial_sum: op_norm(&(sum(&initial, self.cols) - corange)),
            final_sum: op_norm(&(sum(&fin, self.rows) - range.matrix())),
        })
    }
}

/// Groups the nonzero singular values of `A` into blocks.
///
/// Neighbours whose relative gap is at most `grouping_tol` are chained into
/// one block. A chain wider than `grouping_tol` overall has no honest
/// representative value and is refused.
pub fn block_svd(a: &Operator, grouping_tol: f64) -> Result<BlockSvd> {
    if !(grouping_tol > 0.0 && grouping_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "grouping tolerance must lie in (0, 1), got {grouping_tol}"
        )));
    }
    let svd = a.svd()?;
    let s = &svd.s[..svd.rank];
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < s.len() {
        let mut end = start + 1;
        while end < s.len() && s[end - 1] - s[end] <= grouping_tol * s[end - 1] {
            end += 1;
        }
        let width = (s[start] - s[end - 1]) / s[start];
        if width > grouping_tol {
            return Err(Error::ClusterGap {
                index: end - 1,
                gap: width,
                tol: grouping_tol,
            });
        }
        let u = svd.u.columns(start, end - start);
        let v = svd.v.columns(start, end - start);
        blocks.push(Block {
            value: s[start..end].iter().sum::<f64>() / (end - start) as f64,
            multiplicity: end - start,
            width,
            isometry: Operator::with_rank_tol(u * v.adjoint(), a.rank_tol())?,
        });
        start = end;
    }
    Ok(BlockSvd {
        rows: a.rows(),
        cols: a.cols(),
        grouping_tol,
        blocks,
    })
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.max(y)
}

/// Pairs of block indices with matching values and multiplicities.
fn match_blocks(ba: &BlockSvd, bb: &BlockSvd) -> Result<Vec<(usize, usize)>> {
    let tol = ba.grouping_tol.max(bb.grouping_tol);
    let describe = |b: &BlockSvd| {
        b.blocks
            .iter()
            .map(|x| format!("{:.6e}x{}", x.value, x.multiplicity))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let same = ba.blocks.len() == bb.blocks.len()
        && ba
            .blocks
            .iter()
            .zip(&bb.blocks)
            .all(|(x, y)| x.multiplicity == y.multiplicity && close(x.value, y.value, tol));
    if !same {
        return Err(Error::SpectrumMismatch(format!("[{}] vs [{}]", describe(ba), describe(bb))));
    }
    Ok((0..ba.blocks.len()).map(|i| (i, i)).collect())
}

/// Unitaries `U, W` with `U A W* = B`, for `A, B` with the same singular
/// values and multiplicities.
///
/// `W` rotates each spectral subspace of `|A|` (and the kernel) onto the
/// matching one of `|B|`; `U` then carries the rotated blocks of `A` onto
/// those of `B` as a single family.
pub fn construct_bi_unitary(
    a: &Operator,
    b: &Operator,
    gauge: SymmetricGauge,
    grouping_tol: f64,
) -> Result<Certificate> {
    same_shape(a, b)?;
    let ba = block_svd(a, grouping_tol)?;
    let bb = block_svd(b, grouping_tol)?;
    let pairs = match_blocks(&ba, &bb)?;
    let n = a.cols();
    let mut canonical = true;
    let mut w = Mat::zeros(n, n);
    let mut spaces: Vec<(Projection, Projection)> = pairs
        .iter()
        .map(|&(i, j)| (ba.blocks[i].initial_projection(), bb.blocks[j].initial_projection()))
        .collect();
    spaces.push((null_projection(a)?, null_projection(b)?));
    for (p, q) in &spaces {
        let rot = align_projections(p, q, gauge)?;
        canonical &= rot.canonical;
        w += rot.left.matrix() * p.matrix();
    }
    let u = if pairs.is_empty() {
        identity(a.rows())
    } else {
        let rotated: Vec<Operator> = pairs
            .iter()
            .map(|&(i, _)| Operator::with_rank_tol(ba.blocks[i].isometry.matrix() * w.adjoint(), a.rank_tol()))
            .collect::<Result<_>>()?;
        let targets: Vec<Operator> = pairs.iter().map(|&(_, j)| bb.blocks[j].isometry.clone()).collect();
        let fam = align_isometry_families(&rotated, &targets, gauge)?;
        canonical &= fam.certificate.canonical;
        fam.certificate.left.into_matrix()
    };
    let mut cert = Certificate::assemble(CertificateKind::BiUnitary, u, Some(w), a, b, gauge)?;
    cert.canonical = canonical;
    Ok(cert)
}

/// One matched (or unmatched) block of the two decompositions.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterMatch {
    pub value_a: Option<f64>,
    pub value_b: Option<f64>,
    pub rank_a: usize,
    pub rank_b: usize,
    /// Essential codimension of the initial projections.
    pub index: Option<i64>,
    /// `||P - Q||_Phi` between the initial projections.
    pub projection_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagonalModulusReport {
    pub gauge: SymmetricGauge,
    pub threshold: f64,
    pub clusters: Vec<ClusterMatch>,
    /// The kernels, treated as the block of value zero.
    pub kernel: ClusterMatch,
    /// Same values, multiplicities and zero indices everywhere.
    pub spectra_match: bool,
    /// Largest `||V_l* V_l - W_l* W_l||` over matched blocks.
    pub initial_gap: Option<f64>,
    /// `||sum (W_l - V_l) V_l*||_Phi`.
    pub family_forward: Option<f64>,
    /// `||sum (V_l - W_l) W_l*||_Phi`.
    pub family_backward: Option<f64>,
    /// `||sum P_l (I - Q_l)||_Phi`, kernel included.
    pub spectral_forward: f64,
    /// `||sum (I - P_l) Q_l||_Phi`, kernel included.
    pub spectral_backward: f64,
    /// `||V_A - V_B||_Phi`.
    pub isometry_gap: f64,
    pub left_unitary: Membership,
    pub bi_unitary: Membership,
    /// Spectral projections close and the blocks close as a family.
    pub bi_unitary_by_blocks: bool,
}

fn cluster_match(
    gauge: SymmetricGauge,
    value_a: Option<f64>,
    value_b: Option<f64>,
    p: &Projection,
    q: &Projection,
) -> ClusterMatch {
    ClusterMatch {
        value_a,
        value_b,
        rank_a: p.rank(),
        rank_b: q.rank(),
        index: codimension(p, q).ok(),
        projection_gap: gauge.norm(&(p.matrix() - q.matrix())),
    }
}

/// Unitary-orbit tests for operators given through their grouped SVDs.
pub fn classify_diagonal_modulus(
    a: &Operator,
    b: &Operator,
    j: &GaugePredicate,
    grouping_tol: f64,
) -> Result<DiagonalModulusReport> {
    same_shape(a, b)?;
    let gauge = j.gauge;
    let ba = block_svd(a, grouping_tol)?;
    let bb = block_svd(b, grouping_tol)?;
    let (m, n) = a.shape();
    let zero_n = Projection::zeros(n);

    // Merge the two decreasing lists of values.
    let mut clusters = Vec::new();
    let mut pairs = Vec::new();
    let (mut i, mut k) = (0, 0);
    while i < ba.blocks.len() || k < bb.blocks.len() {
        let x = ba.blocks.get(i);
        let y = bb.blocks.get(k);
        let (take_a, take_b) = match (x, y) {
            (Some(x), Some(y)) if close(x.value, y.value, grouping_tol) => (true, true),
            (Some(x), Some(y)) => (x.value > y.value, x.value < y.value),
            (Some(_), None) => (true, false),
            _ => (false, true),
        };
        let p = if take_a { ba.blocks[i].initial_projection() } else { zero_n.clone() };
        let q = if take_b { bb.blocks[k].initial_projection() } else { zero_n.clone() };
        clusters.push(cluster_match(
            gauge,
            take_a.then(|| ba.blocks[i].value),
            take_b.then(|| bb.blocks[k].value),
            &p,
            &q,
        ));
        if take_a && take_b {
            pairs.push((i, k));
        }
        i += take_a as usize;
        k += take_b as usize;
    }
    let na = null_projection(a)?;
    let nb = null_projection(b)?;
    let kernel = cluster_match(gauge, Some(0.0), Some(0.0), &na, &nb);
    let spectra_match = clusters
        .iter()
        .chain(std::iter::once(&kernel))
        .all(|c| c.value_a.is_some() && c.value_b.is_some() && c.rank_a == c.rank_b && c.index == Some(0));

    let eye = identity(n);
    let mut forward = (na.matrix()) * (&eye - nb.matrix());
    let mut backward = (&eye - na.matrix()) * nb.matrix();
    for &(x, y) in &pairs {
        let p = ba.blocks[x].initial_projection();
        let q = bb.blocks[y].initial_projection();
        forward += p.matrix() * (&eye - q.matrix());
        backward += (&eye - p.matrix()) * q.matrix();
    }
    let spectral_forward = gauge.norm(&forward);
    let spectral_backward = gauge.norm(&backward);
    let va = ba.blocks.iter().fold(Mat::zeros(m, n), |acc, x| acc + x.isometry.matrix());
    let vb = bb.blocks.iter().fold(Mat::zeros(m, n), |acc, x| acc + x.isometry.matrix());
    let isometry_gap = gauge.norm(&(va - vb));

    let (mut initial_gap, mut family_forward, mut family_backward) = (None, None, None);
    if spectra_match {
        let mut worst = 0.0f64;
        let mut fwd = Mat::zeros(m, m);
        let mut bwd = Mat::zeros(m, m);
        for &(x, y) in &pairs {
            let v = ba.blocks[x].isometry.matrix();
            let w = bb.blocks[y].isometry.matrix();
            worst = worst.max(op_norm(&(v.adjoint() * v - w.adjoint() * w)));
            fwd += (w - v) * v.adjoint();
            bwd += (v - w) * w.adjoint();
        }
        initial_gap = Some(worst);
        family_forward = Some(gauge.norm(&fwd));
        family_backward = Some(gauge.norm(&bwd));
    }
    let small = |x: Option<f64>| x.is_some_and(|v| j.holds(v));

    let left_unitary = Membership::judge(
        spectra_match
            && initial_gap.is_some_and(|g| g <= PARTIAL_ISOMETRY_TOL)
            && small(family_forward)
            && small(family_backward),
        || {
            let vs: Vec<Operator> = pairs.iter().map(|&(x, _)| ba.blocks[x].isometry.clone()).collect();
            let ws: Vec<Operator> = pairs.iter().map(|&(_, y)| bb.blocks[y].isometry.clone()).collect();
            let z = if vs.is_empty() {
                identity(m)
            } else {
                align_isometry_families(&vs, &ws, gauge)?.certificate.left.into_matrix()
            };
            Certificate::assemble(CertificateKind::LeftUnitary, z, None, a, b, gauge)
        },
    );
    let spectral_small = j.holds(spectral_forward) && j.holds(spectral_backward);
    let bi_unitary = Membership::judge(spectra_match && spectral_small && j.holds(isometry_gap), || {
        construct_bi_unitary(a, b, gauge, grouping_tol)
    });
    let bi_unitary_by_blocks =
        spectra_match && spectral_small && small(family_forward) && small(family_backward);
    Ok(DiagonalModulusReport {
        gauge,
        threshold: j.threshold,
        clusters,
        kernel,
        spectra_match,
        initial_gap,
        family_forward,
        family_backward,
        spectral_forward,
        spectral_backward,
        isometry_gap,
        left_unitary,
        bi_unitary,
        bi_unitary_by_blocks,
    })
}

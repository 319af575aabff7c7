//! Seeded random instances with prescribed structure.
//!
//! Every generator is a pure function of its seed. Loops that need many
//! independent samples use [`sample_rng`], which derives a separate ChaCha
//! stream per index so results do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::linalg::{self, hermitian_eigh, Mat, Operator, Projection, C64};

/// Default generator-norm scale for near-identity unitaries.
pub const DEFAULT_SPREAD: f64 = 0.3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = rng(seed);
    r.set_stream(index);
    r
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let qr = gaussian(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `n x k` matrix with orthonormal columns.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Mat {
    haar_unitary(rng, n).columns(0, k).into_owned()
}

/// `rows x cols` matrix with the given nonzero singular values and random
/// singular vectors.
pub fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, s: &[f64]) -> Mat {
    let u = isometry(rng, rows, s.len());
    let v = isometry(rng, cols, s.len());
    scaled_outer(&u, s, &v)
}

/// `U diag(s) V*`.
pub fn scaled_outer(u: &Mat, s: &[f64], v: &Mat) -> Mat {
    let us = Mat::from_fn(u.nrows(), s.len(), |i, j| u[(i, j)] * s[j]);
    us * v.adjoint()
}

/// `exp(spread * K)` for a random skew-Hermitian `K` with `||K|| = 1`, so
/// `||U - I|| <= spread`.
pub fn near_identity_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> Mat {
    let g = gaussian(rng, n, n);
    if spread == 0.0 || n == 0 {
        return linalg::identity(n);
    }
    let h = linalg::hermitize(&g);
    let (values, vectors) = hermitian_eigh(&h);
    let scale = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return linalg::identity(n);
    }
    let phased = Mat::from_fn(n, n, |r, c| {
        vectors[(r, c)] * C64::from_polar(1.0, spread * values[c] / scale)
    });
    phased * vectors.adjoint()
}

/// Invertible `I + E` with `||E|| = size` (random direction).
pub fn near_identity_invertible<R: Rng + ?Sized>(rng: &mut R, n: usize, size: f64) -> Mat {
    let e = gaussian(rng, n, n);
    let norm = linalg::op_norm(&e);
    let e = if norm > 0.0 { e.scale(size / norm) } else { e };
    linalg::identity(n) + e
}

/// Sorted nonincreasing sample from `[lo, hi]`.
pub fn spectrum<R: Rng + ?Sized>(rng: &mut R, k: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut s: Vec<f64> = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Structure requested from [`random_closed_range`].
#[derive(Clone, Debug, Default)]
pub struct InstanceSpec {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// Target nonzero singular values; drawn from `[0.5, 2]` when absent.
    pub spectrum: Option<Vec<f64>>,
    /// Basis (columns) of the prescribed null space, `cols - rank` columns.
    pub null_space: Option<Mat>,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn square(dim: usize, rank: usize, seed: u64) -> Self {
        Self {
            rows: dim,
            cols: dim,
            rank,
            seed,
            ..Self::default()
        }
    }

    pub fn with_spectrum(mut self, s: Vec<f64>) -> Self {
        self.spectrum = Some(s);
        self
    }

    pub fn with_null_space(mut self, basis: Mat) -> Self {
        self.null_space = Some(basis);
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.rank > self.rows.min(self.cols) {
            return bad(format!("rank {} exceeds {}x{}", self.rank, self.rows, self.cols));
        }
        if let Some(s) = &self.spectrum {
            if s.len() != self.rank {
                return bad(format!("spectrum has {} values for rank {}", s.len(), self.rank));
            }
            if s.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return bad("spectrum values must be positive".into());
            }
        }
        if let Some(n) = &self.null_space {
            if n.nrows() != self.cols || n.ncols() != self.cols - self.rank {
                return bad(format!(
                    "null space basis must be {}x{}, got {}x{}",
                    self.cols,
                    self.cols - self.rank,
                    n.nrows(),
                    n.ncols()
                ));
            }
        }
        Ok(())
    }
}

/// Operator with exactly the requested rank, spectrum and null space.
pub fn random_closed_range(spec: &InstanceSpec) -> Result<Operator> {
    spec.validate()?;
    let mut rng = rng(spec.seed);
    let s = match &spec.spectrum {
        Some(s) => s.clone(),
        None => spectrum(&mut rng, spec.rank, 0.5, 2.0),
    };
    let u = isometry(&mut rng, spec.rows, spec.rank);
    let v = match &spec.null_space {
        Some(basis) => {
            let svd = linalg::svd_mat(basis, linalg::DEFAULT_RANK_TOL)?;
            if svd.rank != basis.ncols() {
                return Err(Error::InvalidParameter("null space basis is rank deficient".into()));
            }
            let p = Projection::onto_basis(&svd.range_basis());
            let (_, complement) = p.bases();
            complement * haar_unitary(&mut rng, spec.rank)
        }
        None => isometry(&mut rng, spec.cols, spec.rank),
    };
    Operator::new(scaled_outer(&u, &s, &v))
}

pub fn random_partial_isometry(dim: usize, rank: usize, seed: u64) -> Result<Operator> {
    random_closed_range(&InstanceSpec::square(dim, rank, seed).with_spectrum(vec![1.0; rank]))
}

pub fn random_projection(dim: usize, rank: usize, seed: u64) -> Result<Projection> {
    if rank > dim {
        return Err(Error::InvalidParameter(format!("rank {rank} exceeds dimension {dim}")));
    }
    let q = isometry(&mut rng(seed), dim, rank);
    Ok(Projection::onto_basis(&q))
}

pub fn random_unitary(dim: usize, seed: u64) -> Operator {
    Operator::from_parts(haar_unitary(&mut rng(seed), dim), linalg::DEFAULT_RANK_TOL)
}

pub fn random_unitary_near_identity(dim: usize, spread: f64, seed: u64) -> Result<Operator> {
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::InvalidParameter(format!("spread must be >= 0, got {spread}")));
    }
    Ok(Operator::from_parts(
        near_identity_unitary(&mut rng(seed), dim, spread),
        linalg::DEFAULT_RANK_TOL,
    ))
}

/// `n` vectors in `C^dim` spanning a random subspace of dimension `rank`.
pub fn random_frame(dim: usize, n: usize, rank: usize, seed: u64) -> Result<Frame> {
    if rank == 0 || rank > dim.min(n) {
        return Err(Error::InvalidParameter(format!(
            "frame rank must lie in 1..={}, got {rank}",
            dim.min(n)
        )));
    }
    let t = random_closed_range(&InstanceSpec {
        rows: dim,
        cols: n,
        rank,
        seed,
        ..InstanceSpec::default()
    })?;
    Frame::from_synthesis(&t)
}

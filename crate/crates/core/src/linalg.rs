//! Rank-aware dense complex linear algebra.
//!
//! Every routine decides numerical rank the same way: a singular value
//! counts when it exceeds `rank_tol * s_1`. Range and co-kernel projections,
//! the Moore-Penrose inverse and the polar factors are all derived from one
//! SVD so they stay mutually consistent.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

/// Relative singular-value cutoff used when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Hermitian idempotency slack accepted by [`Projection::new`].
pub const PROJECTION_TOL: f64 = 1e-9;

/// `||V V* V - V||` slack accepted for partial isometries.
pub const PARTIAL_ISOMETRY_TOL: f64 = 1e-9;

/// Dense complex matrix with an attached relative rank tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::MatrixFile", into = "crate::io::MatrixFile")]
pub struct Operator {
    entries: Mat,
    rank_tol: f64,
}

impl Operator {
    /// Wraps `entries` with the default rank tolerance.
    pub fn new(entries: Mat) -> Result<Self> {
        Self::with_rank_tol(entries, DEFAULT_RANK_TOL)
    }

    pub fn with_rank_tol(entries: Mat, rank_tol: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rank_tol) {
            return Err(Error::InvalidRankTol(rank_tol));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { entries, rank_tol })
    }

    /// Internal constructor for matrices produced by our own arithmetic.
    pub(crate) fn from_parts(entries: Mat, rank_tol: f64) -> Self {
        Self { entries, rank_tol }
    }

    /// Real row-major data, promoted to complex.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Self::new(Mat::from_row_iterator(
            rows,
            cols,
            data.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Mat::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        Self::from_parts(m, DEFAULT_RANK_TOL)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(Mat::identity(n, n), DEFAULT_RANK_TOL)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(Mat::zeros(rows, cols), DEFAULT_RANK_TOL)
    }

    pub fn matrix(&self) -> &Mat {
        &self.entries
    }

    pub fn into_matrix(self) -> Mat {
        self.entries
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Same tolerance, new entries.
    pub fn like(&self, entries: Mat) -> Self {
        Self::from_parts(entries, self.rank_tol)
    }

    pub fn adjoint(&self) -> Self {
        self.like(self.entries.adjoint())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.like(self.entries.scale(c))
    }

    /// Operator (spectral) norm.
    pub fn norm(&self) -> f64 {
        op_norm(&self.entries)
    }

    pub fn svd(&self) -> Result<Svd> {
        svd_mat(&self.entries, self.rank_tol)
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.svd()?.rank)
    }

    pub fn nullity(&self) -> Result<usize> {
        Ok(self.cols() - self.rank()?)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.entries)
    }

    pub fn pinv(&self) -> Result<Operator> {
        moore_penrose(self)
    }

    pub fn polar(&self) -> Result<PolarDecomposition> {
        polar(self)
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.like(&self.entries * &rhs.entries)
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        self.like(&self.entries + &rhs.entries)
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        self.like(&self.entries - &rhs.entries)
    }
}

/// Thin SVD `A = U diag(s) V*` with `s` nonincreasing.
#[derive(Clone, Debug)]
pub struct Svd {
    /// `m x k` with orthonormal columns, `k = min(m, n)`.
    pub u: Mat,
    pub s: Vec<f64>,
    /// `n x k` with orthonormal columns.
    pub v: Mat,
    /// Number of singular values above `rank_tol * s_1`.
    pub rank: usize,
}

impl Svd {
    /// Left singular vectors spanning the range.
    pub fn range_basis(&self) -> Mat {
        self.u.columns(0, self.rank).into_owned()
    }

    /// Right singular vectors spanning the orthogonal complement of the kernel.
    pub fn corange_basis(&self) -> Mat {
        self.v.columns(0, self.rank).into_owned()
    }

    pub fn leading(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }
}

fn numerical_rank(s: &[f64], rank_tol: f64) -> usize {
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().take_while(|&&x| x > rank_tol * s1).count(),
        _ => 0,
    }
}

// Dense factorizations are delegated to faer; nalgebra's complex SVD loses
// accuracy on rank-deficient input.
fn to_faer(m: &Mat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> Mat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub(crate) fn check_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn svd_mat(m: &Mat, rank_tol: f64) -> Result<Svd> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: Mat::zeros(rows, 0),
            s: Vec::new(),
            v: Mat::zeros(cols, 0),
            rank: 0,
        });
    }
    let svd = to_faer(m).thin_svd().map_err(|_| Error::Decomposition)?;
    let u = from_faer(svd.U());
    let v = from_faer(svd.V());
    let s: Vec<f64> = (0..k).map(|i| svd.S()[i].re).collect();
    let rank = numerical_rank(&s, rank_tol);
    Ok(Svd { u, s, v, rank })
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Vec::new();
    }
    match to_faer(m).singular_values() {
        Ok(s) => s,
        Err(_) => vec![f64::NAN; k],
    }
}

pub fn op_norm(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn hermitize(m: &Mat) -> Mat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    match to_faer(&hermitize(m)).self_adjoint_eigen(faer::Side::Lower) {
        Ok(eig) => {
            let values: Vec<f64> = (0..n).map(|i| eig.S()[i].re).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let u = eig.U();
            let vectors = Mat::from_fn(n, n, |r, c| u[(r, order[c])]);
            (order.iter().map(|&i| values[i]).collect(), vectors)
        }
        Err(_) => (vec![f64::NAN; n], Mat::from_element(n, n, C64::new(f64::NAN, 0.0))),
    }
}

/// `V diag(f(lambda)) V*` for the Hermitian part of `m`.
pub fn hermitian_apply(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (values, vectors) = hermitian_eigh(m);
    let scaled = Mat::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * f(values[c])
    });
    hermitize(&(scaled * vectors.adjoint()))
}

/// Square root of a positive semidefinite matrix, negative eigenvalues clipped to 0.
pub fn psd_sqrt(m: &Mat) -> Mat {
    hermitian_apply(m, |x| x.max(0.0).sqrt())
}

/// Orthonormal bases of `R(P)` and `R(P)^perp` for a projection `P`.
pub fn projection_bases(p: &Mat) -> (Mat, Mat) {
    let (values, vectors) = hermitian_eigh(p);
    let split = values.iter().take_while(|&&x| x < 0.5).count();
    let n = vectors.ncols();
    let range = vectors.columns(split, n - split).into_owned();
    let complement = vectors.columns(0, split).into_owned();
    (range, complement)
}

/// Cosines of the principal angles between the column spans of two
/// orthonormal bases, nonincreasing.
pub fn principal_cosines(q1: &Mat, q2: &Mat) -> Vec<f64> {
    singular_values(&(q1.adjoint() * q2))
        .into_iter()
        .map(|c| c.min(1.0))
        .collect()
}

/// Unitary polar factor `X Y*` of `M = X S Y*`.
pub fn unitary_polar_factor(m: &Mat) -> Result<Mat> {
    let svd = svd_mat(m, 0.0)?;
    Ok(&svd.u * svd.v.adjoint())
}

/// Isometry from `span(from)` onto `span(to)` that is closest to the identity
/// in Frobenius norm (orthogonal Procrustes on the cross-Gram matrix).
///
/// Both bases must have the same number of orthonormal columns. Also returns
/// the smallest singular value of the cross-Gram matrix; when it is zero the
/// map is not unique.
pub fn subspace_map(from: &Mat, to: &Mat) -> Result<(Mat, f64)> {
    debug_assert_eq!(from.ncols(), to.ncols());
    let d = from.nrows();
    if from.ncols() == 0 {
        return Ok((Mat::zeros(d, d), 1.0));
    }
    let cross = to.adjoint() * from;
    let svd = svd_mat(&cross, 0.0)?;
    let smallest = svd.s.last().copied().unwrap_or(0.0);
    let rotation = &svd.u * svd.v.adjoint();
    Ok((to * rotation * from.adjoint(), smallest))
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Largest deviation from being a partial isometry, `||V V* V - V||`.
pub fn partial_isometry_residual(v: &Mat) -> f64 {
    op_norm(&(v * v.adjoint() * v - v))
}

/// `||U* U - I||` for square `U`.
pub fn unitarity_residual(u: &Mat) -> f64 {
    op_norm(&(u.adjoint() * u - identity(u.ncols())))
}

/// Orthogonal projection onto a closed subspace (Hermitian idempotent).
#[derive(Clone, Debug, PartialEq)]
pub struct Projection(Operator);

impl Projection {
    /// Validates `P = P* = P^2` within [`PROJECTION_TOL`].
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::ShapeMismatch {
                expected: "square projection".into(),
                got: format!("{}x{}", op.rows(), op.cols()),
            });
        }
        let p = op.matrix();
        let residual = op_norm(&(p - p.adjoint())).max(op_norm(&(p * p - p)));
        if residual > PROJECTION_TOL {
            return Err(Error::NotProjection(residual));
        }
        Ok(Self(op.like(hermitize(p))))
    }

    pub(crate) fn from_matrix(m: Mat, rank_tol: f64) -> Self {
        Self(Operator::from_parts(hermitize(&m), rank_tol))
    }

    /// Projection onto the column span of an orthonormal basis.
    pub fn onto_basis(q: &Mat) -> Self {
        Self::from_matrix(q * q.adjoint(), DEFAULT_RANK_TOL)
    }

    pub fn zeros(n: usize) -> Self {
        Self(Operator::zeros(n, n))
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn matrix(&self) -> &Mat {
        self.0.matrix()
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    /// Rank read off the spectrum (eigenvalues above 1/2).
    pub fn rank(&self) -> usize {
        hermitian_eigh(self.matrix())
            .0
            .iter()
            .filter(|&&x| x > 0.5)
            .count()
    }

    pub fn complement(&self) -> Self {
        Self(self.0.like(identity(self.dim()) - self.matrix()))
    }

    /// Orthonormal bases of the range and of its orthogonal complement.
    pub fn bases(&self) -> (Mat, Mat) {
        projection_bases(self.matrix())
    }
}

/// `A = V_A |A|` with `N(V_A) = N(A)`.
#[derive(Clone, Debug)]
pub struct PolarDecomposition {
    pub partial_isometry: Operator,
    pub modulus: Operator,
}

/// SVD with nonincreasing singular values; errors only on non-convergence.
pub fn svd(a: &Operator) -> Result<Svd> {
    a.svd()
}

/// Moore-Penrose inverse; rank is decided by the operator's tolerance.
pub fn moore_penrose(a: &Operator) -> Result<Operator> {
    let svd = a.svd()?;
    Ok(a.like(pinv_from_svd(&svd)))
}

pub(crate) fn pinv_from_svd(svd: &Svd) -> Mat {
    let r = svd.rank;
    let v = svd.corange_basis();
    let u = svd.range_basis();
    let scaled = Mat::from_fn(v.nrows(), r, |i, j| v[(i, j)] / svd.s[j]);
    scaled * u.adjoint()
}

pub fn polar(a: &Operator) -> Result<PolarDecomposition> {
    let svd = a.svd()?;
    let (iso, modulus) = polar_from_svd(&svd);
    Ok(PolarDecomposition {
        partial_isometry: a.like(iso),
        modulus: a.like(modulus),
    })
}

pub(crate) fn polar_from_svd(svd: &Svd) -> (Mat, Mat) {
    let u = svd.range_basis();
    let v = svd.corange_basis();
    let iso = &u * v.adjoint();
    let scaled = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * svd.s[j]);
    (iso, hermitize(&(scaled * v.adjoint())))
}

/// `|A*| = (A A*)^{1/2}`.
pub fn modulus_of_adjoint(a: &Operator) -> Result<Operator> {
    let svd = a.svd()?;
    let u = svd.range_basis();
    let scaled = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * svd.s[j]);
    Ok(a.like(hermitize(&(scaled * u.adjoint()))))
}

/// Smallest singular value above the rank cutoff; equals `1 / ||A^dagger||`.
pub fn reduced_min_modulus(a: &Operator) -> Result<f64> {
    let svd = a.svd()?;
    if svd.rank == 0 {
        return Err(Error::ZeroOperator);
    }
    Ok(svd.s[svd.rank - 1])
}

pub fn range_projection(a: &Operator) -> Result<Projection> {
    let u = a.svd()?.range_basis();
    Ok(Projection::from_matrix(&u * u.adjoint(), a.rank_tol()))
}

/// Projection onto `N(A)`.
pub fn null_projection(a: &Operator) -> Result<Projection> {
    let v = a.svd()?.corange_basis();
    Ok(Projection::from_matrix(
        identity(a.cols()) - &v * v.adjoint(),
        a.rank_tol(),
    ))
}

/// Operator-norm residual of the pseudo-inverse difference identity
/// `A^+ - B^+ = -A^+(A-B)B^+ + A^+(A*)^+(A*-B*)(I-BB^+) + (I-A^+A)(A*-B*)(B*)^+B^+`.
pub fn stewart_residual(a: &Operator, b: &Operator) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", a.shape()),
            got: format!("{:?}", b.shape()),
        });
    }
    let ap = moore_penrose(a)?.into_matrix();
    let bp = moore_penrose(b)?.into_matrix();
    let a_star_p = ap.adjoint();
    let b_star_p = bp.adjoint();
    let (am, bm) = (a.matrix(), b.matrix());
    let diff = am - bm;
    let diff_star = diff.adjoint();
    let (m, n) = a.shape();
    let rhs = -(&ap * &diff * &bp)
        + &ap * &a_star_p * &diff_star * (identity(m) - bm * &bp)
        + (identity(n) - &ap * am) * &diff_star * &b_star_p * &bp;
    Ok(op_norm(&(&ap - &bp - rhs)))
}

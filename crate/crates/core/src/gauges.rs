//! Symmetric norming functions and the threshold model of an operator ideal.
//!
//! A proper ideal `J` has no finite-dimensional analogue: every matrix lies in
//! every ideal. Membership `X in J` is therefore rendered as
//! `||X||_Phi <= tau` through a [`GaugePredicate`], and every report carries
//! the raw norms so a caller can re-threshold.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gen;
use crate::linalg::{self, hermitian_eigh, op_norm, psd_sqrt, singular_values, Mat, Operator};

/// Additive slack for partial-sum comparisons, relative to the dominating sum.
pub const SUBMAJORIZATION_SLACK: f64 = 1e-12;

/// Symmetric norming function applied to singular values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymmetricGauge {
    /// `(sum s_i^p)^(1/p)`, `p >= 1`; `p = inf` is the operator norm.
    Schatten(f64),
    /// Sum of the `k` largest singular values.
    KyFan(usize),
    /// Largest singular value.
    Operator,
}

impl SymmetricGauge {
    pub const TRACE: Self = SymmetricGauge::Schatten(1.0);
    pub const FROBENIUS: Self = SymmetricGauge::Schatten(2.0);

    pub fn schatten(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidGauge(format!("s{p}")));
        }
        Ok(SymmetricGauge::Schatten(p))
    }

    pub fn ky_fan(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidGauge("kf:0".into()));
        }
        Ok(SymmetricGauge::KyFan(k))
    }

    /// Evaluates the gauge on a sequence; entries are taken in absolute value.
    pub fn eval(&self, values: &[f64]) -> f64 {
        let mut x: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        x.sort_by(|a, b| b.total_cmp(a));
        let top = x.first().copied().unwrap_or(0.0);
        match *self {
            SymmetricGauge::Operator => top,
            SymmetricGauge::Schatten(p) if p.is_infinite() => top,
            SymmetricGauge::Schatten(p) => {
                if top == 0.0 {
                    return 0.0;
                }
                if p == 1.0 {
                    return x.iter().sum();
                }
                if p == 2.0 {
                    return x.iter().map(|v| v * v).sum::<f64>().sqrt();
                }
                top * x.iter().map(|v| (v / top).powf(p)).sum::<f64>().powf(1.0 / p)
            }
            SymmetricGauge::KyFan(k) => x.iter().take(k).sum(),
        }
    }

    /// `||M||_Phi` from the singular values of `m`.
    pub fn norm(&self, m: &Mat) -> f64 {
        match self {
            SymmetricGauge::Operator => op_norm(m),
            _ => self.eval(&singular_values(m)),
        }
    }

    /// Equality of norms under submajorization forces equal spectra.
    pub fn is_strictly_schur_convex(&self) -> bool {
        matches!(*self, SymmetricGauge::Schatten(p) if p > 1.0 && p.is_finite())
    }
}

impl fmt::Display for SymmetricGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SymmetricGauge::Operator => write!(f, "op"),
            SymmetricGauge::Schatten(p) if p.is_infinite() => write!(f, "sinf"),
            SymmetricGauge::Schatten(p) => write!(f, "s{p}"),
            SymmetricGauge::KyFan(k) => write!(f, "kf:{k}"),
        }
    }
}

impl FromStr for SymmetricGauge {
    type Err = Error;

    /// Accepts `op`, `sinf`, `s<p>` with real `p >= 1`, and `kf:<k>` with `k >= 1`.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = || Error::InvalidGauge(spec.to_string());
        match spec {
            "op" => return Ok(SymmetricGauge::Operator),
            "sinf" => return Ok(SymmetricGauge::Schatten(f64::INFINITY)),
            _ => {}
        }
        if let Some(k) = spec.strip_prefix("kf:") {
            if !k.bytes().all(|c| c.is_ascii_digit()) || k.is_empty() {
                return Err(bad());
            }
            let k: usize = k.parse().map_err(|_| bad())?;
            return SymmetricGauge::ky_fan(k).map_err(|_| bad());
        }
        if let Some(p) = spec.strip_prefix('s') {
            if p.is_empty() || !p.bytes().all(|c| c.is_ascii_digit() || c == b'.') {
                return Err(bad());
            }
            let p: f64 = p.parse().map_err(|_| bad())?;
            return SymmetricGauge::schatten(p).map_err(|_| bad());
        }
        Err(bad())
    }
}

impl Serialize for SymmetricGauge {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SymmetricGauge {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Desk-scale stand-in for a proper ideal: `X in J` iff `||X||_Phi <= tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugePredicate {
    pub gauge: SymmetricGauge,
    pub threshold: f64,
}

impl GaugePredicate {
    pub fn new(gauge: SymmetricGauge, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be positive, got {threshold}"
            )));
        }
        Ok(Self { gauge, threshold })
    }

    /// `(||m||_Phi <= tau, ||m||_Phi)`.
    pub fn test(&self, m: &Mat) -> (bool, f64) {
        let n = self.gauge.norm(m);
        (n <= self.threshold, n)
    }

    pub fn holds(&self, norm: f64) -> bool {
        norm <= self.threshold
    }
}

pub fn gauge_norm(a: &Operator, g: SymmetricGauge) -> f64 {
    g.norm(a.matrix())
}

pub fn is_small(x: &Operator, j: &GaugePredicate) -> (bool, f64) {
    j.test(x.matrix())
}

/// `b` is weakly submajorized by `a`: every partial sum of `b` sorted
/// decreasingly is at most the matching partial sum of `a`.
pub fn submajorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    if let Some(&neg) = a.iter().chain(b).find(|&&x| x < 0.0 || x.is_nan()) {
        return Err(Error::NegativeEntry(neg));
    }
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let slack = SUBMAJORIZATION_SLACK * a.iter().sum::<f64>();
    let n = a.len().max(b.len());
    let (mut sa, mut sb) = (0.0, 0.0);
    for i in 0..n {
        sa += a.get(i).copied().unwrap_or(0.0);
        sb += b.get(i).copied().unwrap_or(0.0);
        if sb > sa + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_psd(m: &Mat) -> Result<()> {
    let scale = op_norm(m).max(1.0);
    let herm = op_norm(&(m - m.adjoint()));
    if herm > 1e-10 * scale {
        return Err(Error::NotHermitian(herm));
    }
    let smallest = hermitian_eigh(m).0.first().copied().unwrap_or(0.0);
    if smallest < -1e-10 * scale {
        return Err(Error::NotPositive(smallest));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VanHemmenAndo {
    /// Smallest eigenvalue of `A^(1/2) + B^(1/2)`.
    pub mu: f64,
    /// `||A - B||_Phi`.
    pub lhs: f64,
    /// `mu ||A^(1/2) - B^(1/2)||_Phi`.
    pub rhs: f64,
    pub ok: bool,
}

/// Square-root perturbation inequality `||A-B||_Phi >= mu ||A^(1/2)-B^(1/2)||_Phi`
/// for positive semidefinite `A, B`.
pub fn vanhemmen_ando_check(a: &Operator, b: &Operator, g: SymmetricGauge) -> Result<VanHemmenAndo> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::ShapeMismatch {
            expected: format!("square {:?}", a.shape()),
            got: format!("{:?}", b.shape()),
        });
    }
    check_psd(a.matrix())?;
    check_psd(b.matrix())?;
    let (ra, rb) = (psd_sqrt(a.matrix()), psd_sqrt(b.matrix()));
    let mu = hermitian_eigh(&(&ra + &rb)).0.first().copied().unwrap_or(0.0).max(0.0);
    let lhs = g.norm(&(a.matrix() - b.matrix()));
    let rhs = mu * g.norm(&(ra - rb));
    Ok(VanHemmenAndo {
        mu,
        lhs,
        rhs,
        ok: lhs >= rhs - 1e-10 * lhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootPerturbation {
    /// `||D^2 - E^2||_Phi`.
    pub delta: f64,
    /// Smallest nonzero eigenvalue of `D + E` on the common range.
    pub mu: f64,
    /// `||D - E||_Phi`.
    pub gap: f64,
    pub ok: bool,
}

/// For positive `D, E` with a common range: `||D - E||_Phi <= ||D^2 - E^2||_Phi / mu`.
pub fn root_perturbation_check(d: &Operator, e: &Operator, g: SymmetricGauge) -> Result<RootPerturbation> {
    if d.shape() != e.shape() || !d.is_square() {
        return Err(Error::ShapeMismatch {
            expected: format!("square {:?}", d.shape()),
            got: format!("{:?}", e.shape()),
        });
    }
    check_psd(d.matrix())?;
    check_psd(e.matrix())?;
    let pd = linalg::range_projection(d)?;
    let pe = linalg::range_projection(e)?;
    let range_gap = op_norm(&(pd.matrix() - pe.matrix()));
    if range_gap > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "ranges differ (projection gap {range_gap:.3e})"
        )));
    }
    let sum = d + e;
    let svd = sum.svd()?;
    if svd.rank == 0 {
        return Ok(RootPerturbation { delta: 0.0, mu: 0.0, gap: 0.0, ok: true });
    }
    let mu = svd.s[svd.rank - 1];
    let (dm, em) = (d.matrix(), e.matrix());
    let delta = g.norm(&(dm * dm - em * em));
    let gap = g.norm(&(dm - em));
    let bound = delta / mu;
    Ok(RootPerturbation {
        delta,
        mu,
        gap,
        ok: gap <= bound + 1e-10 * bound.max(gap),
    })
}

/// Randomized check that `s(B) <w s(A)` implies `||B||_Phi <= ||A||_Phi`, and
/// for strictly Schur-convex gauges that equal norms force equal spectra.
///
/// Pairs are built from a random spectrum `a`, a doubly substochastic image
/// `b` of it, and independent random unitary frames; some trials use a
/// permuted copy of `a` so the equality branch is exercised.
pub fn schur_convexity_check(g: SymmetricGauge, trials: usize, seed: u64) -> bool {
    let mut rng = gen::rng(seed);
    (0..trials.max(1)).all(|t| {
        let n = rng.random_range(2..=6);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let mut b = a.clone();
        let equal_spectra = t % 5 == 4;
        if equal_spectra {
            b.reverse();
        } else {
            for _ in 0..n {
                let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
                let w: f64 = rng.random_range(0.05..0.95);
                let (x, y) = (b[i], b[j]);
                b[i] = w * x + (1.0 - w) * y;
                b[j] = (1.0 - w) * x + w * y;
            }
            let k = rng.random_range(0..n);
            b[k] *= rng.random_range(0.5..1.0);
        }
        let ma = gen::with_spectrum(&mut rng, n, n, &a);
        let mb = gen::with_spectrum(&mut rng, n, n, &b);
        let (sa, sb) = (singular_values(&ma), singular_values(&mb));
        if !submajorizes(&sa, &sb).unwrap_or(false) {
            return false;
        }
        let (na, nb) = (g.eval(&sa), g.eval(&sb));
        if nb > na * (1.0 + 1e-12) + 1e-14 {
            return false;
        }
        if g.is_strictly_schur_convex() && (na - nb).abs() <= 1e-12 * na.max(1.0) {
            return sa.iter().zip(&sb).all(|(x, y)| (x - y).abs() <= 1e-8);
        }
        true
    })
}

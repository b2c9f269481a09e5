//! Dense Hermitian matrices and the handful of spectral tools built on them.
//!
//! Everything here works on `d x d` complex matrices stored densely. Inputs
//! that are Hermitian only up to rounding are symmetrized on construction so
//! that the Hermitian eigensolver always sees an exactly self-adjoint matrix.

use std::ops::{Add, Sub};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex dense matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Largest tolerated `|A_ij - conj(A_ji)|` before an input is rejected.
pub const TOL_HERM: f64 = 1e-10;

/// Relative factor for the default eigenvalue clustering gap.
pub const CLUSTER_REL: f64 = 1e-8;

const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    /// Accepts `m` if it is square and Hermitian within [`TOL_HERM`].
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, TOL_HERM)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let deviation = hermiticity_deviation(&m);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        let sym = (&m + m.adjoint()).scale(0.5);
        Ok(Self { m: sym })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { m }
    }

    /// Builds a real symmetric operator from row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        Self::new(m)
    }

    /// Rank-one projector `|v><v| / <v,v>`.
    pub fn rank_one(v: &nalgebra::DVector<Complex64>) -> Self {
        let n = v.norm();
        let u = v.unscale(n);
        Self {
            m: hermitian_part(&(&u * u.adjoint())),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: self.m.scale(s) }
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = hermitian_eigen(&self.m)?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    /// `self * other` as a general (not necessarily Hermitian) matrix.
    pub fn product(&self, other: &HermitianOperator) -> CMatrix {
        &self.m * &other.m
    }

    /// Max-entry distance, used for cheap equality checks in tests.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        (&self.m - &other.m)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Add<&HermitianOperator> for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { m: &self.m + &rhs.m }
    }
}

impl Sub<&HermitianOperator> for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { m: &self.m - &rhs.m }
    }
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn hermitian_eigen(m: &CMatrix) -> Result<SymmetricEigen<Complex64, nalgebra::Dyn>> {
    if m.nrows() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or(Error::EigenSolver)
}

/// Largest singular value of an arbitrary square matrix.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenSolver)?;
    Ok(svd.singular_values.iter().copied().fold(0.0, f64::max))
}

/// Operator norm of a Hermitian matrix, `max |eigenvalue|`.
pub fn operator_norm(a: &HermitianOperator) -> f64 {
    if a.dim() == 0 {
        return 0.0;
    }
    match hermitian_eigen(a.matrix()) {
        Ok(eig) => eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max),
        // The SVD route is slower but independent of the eigensolver.
        Err(_) => spectral_norm(a.matrix()).unwrap_or(f64::NAN),
    }
}

/// `||AB - BA||`, the largest singular value of the commutator.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let c = a.product(b) - b.product(a);
    // i[A,B] is Hermitian, so its eigenvalues give the singular values of [A,B].
    let ic = c.map(|z| Complex64::new(-z.im, z.re));
    match hermitian_eigen(&hermitian_part(&ic)) {
        Ok(eig) => Ok(eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max)),
        Err(_) => spectral_norm(&c),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectCheck {
    pub accepted: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Accepts iff the spectrum of `a` lies in `[-tol, 1 + tol]`.
pub fn validate_effect(a: &HermitianOperator, tol: f64) -> EffectCheck {
    match a.eigenvalues() {
        Ok(vals) if !vals.is_empty() => {
            let min = vals[0];
            let max = vals[vals.len() - 1];
            EffectCheck {
                accepted: min >= -tol && max <= 1.0 + tol,
                min_eigenvalue: min,
                max_eigenvalue: max,
            }
        }
        _ => EffectCheck {
            accepted: false,
            min_eigenvalue: f64::NAN,
            max_eigenvalue: f64::NAN,
        },
    }
}

/// A Hermitian operator with spectrum in `[0, 1]` (up to tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct Effect(HermitianOperator);

impl Effect {
    pub fn new(op: HermitianOperator, tol: f64) -> Result<Self> {
        let check = validate_effect(&op, tol);
        if !check.accepted {
            return Err(Error::NotAnEffect {
                min: check.min_eigenvalue,
                max: check.max_eigenvalue,
            });
        }
        Ok(Self(op))
    }

    /// Wraps an operator already known to be an effect, e.g. a convex
    /// combination of orthogonal projections.
    pub(crate) fn new_unchecked(op: HermitianOperator) -> Self {
        Self(op)
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_op(self) -> HermitianOperator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// `||P^2 - P||` for a Hermitian `P`.
pub fn idempotency_residual(p: &HermitianOperator) -> f64 {
    let sq = p.product(p) - p.matrix();
    spectral_norm(&sq).unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection(HermitianOperator);

impl Projection {
    pub fn new(op: HermitianOperator, tol: f64) -> Result<Self> {
        let residual = idempotency_residual(&op);
        if residual > tol {
            return Err(Error::NotAProjection { residual });
        }
        Ok(Self(op))
    }

    /// Orthogonal projector onto the span of the (linearly independent)
    /// columns of `basis`. The columns are re-orthonormalized first.
    pub fn onto_span(basis: &CMatrix) -> Self {
        let q = orthonormalize(basis);
        Self(HermitianOperator {
            m: hermitian_part(&(&q * q.adjoint())),
        })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.trace().round() as usize
    }
}

pub(crate) fn orthonormalize(basis: &CMatrix) -> CMatrix {
    if basis.ncols() == 0 {
        return basis.clone();
    }
    basis.clone().qr().q()
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub pairs: Vec<(f64, Projection)>,
    pub cluster_tol: f64,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|(v, _)| *v).collect()
    }

    /// `sum_i lambda_i P_i`.
    pub fn reassemble(&self) -> HermitianOperator {
        let dim = self.pairs.first().map_or(0, |(_, p)| p.op().dim());
        self.pairs
            .iter()
            .fold(HermitianOperator::zeros(dim), |acc, (v, p)| {
                &acc + &p.op().scale(*v)
            })
    }
}

/// `1e-8 * ||A||`, floored so the zero operator still clusters.
pub fn default_cluster_tol(a: &HermitianOperator) -> f64 {
    (CLUSTER_REL * operator_norm(a)).max(f64::MIN_POSITIVE)
}

/// Eigenvalues of `a` ascending, eigenvectors as matching columns.
pub(crate) fn sorted_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let eig = hermitian_eigen(m)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((vals, vecs))
}

/// Groups consecutive sorted values whose gap is at most `tol`.
pub(crate) fn cluster_sorted(vals: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Spectral resolution of `a` with eigenvalues closer than `cluster_tol`
/// merged into a single eigenspace.
pub fn spectral_decompose(a: &HermitianOperator, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if !(cluster_tol >= 0.0) {
        return Err(Error::InvalidInput("cluster_tol must be nonnegative".into()));
    }
    let (vals, vecs) = sorted_eigen(a.matrix())?;
    let pairs = cluster_sorted(&vals, cluster_tol)
        .into_iter()
        .map(|r| {
            let mean = vals[r.clone()].iter().sum::<f64>() / r.len() as f64;
            let cols = vecs.columns(r.start, r.len()).into_owned();
            (mean, Projection::onto_span(&cols))
        })
        .collect();
    Ok(SpectralDecomposition { pairs, cluster_tol })
}

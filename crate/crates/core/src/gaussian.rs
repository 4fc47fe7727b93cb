//! Multivariate Gaussian primitives: validated covariance matrices,
//! Cholesky factorization, log-densities and sampling.
//!
//! All log-densities are natural logarithms (nats).

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Finite real vector of dimension at least one.
#[derive(Clone, Debug, PartialEq)]
pub struct RealVector(DVector<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("vector must have dimension >= 1".into()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("vector entries must be finite".into()));
        }
        Ok(Self(DVector::from_vec(entries)))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DVector::zeros(d))
    }

    pub fn from_dvector(v: DVector<f64>) -> Result<Self> {
        Self::new(v.as_slice().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for RealVector {
    type Target = DVector<f64>;
    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
}

/// Symmetric covariance matrix, checked for the requested definiteness at
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct CovMatrix {
    m: DMatrix<f64>,
    definiteness: Definiteness,
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("covariance entries must be finite".into()));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax() / scale;
    if asym > 1e-12 {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

impl CovMatrix {
    /// Positive-definite covariance. Fails with the failing pivot index
    /// when the Cholesky factorization does not exist.
    pub fn positive_definite(m: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&m)?;
        let m = symmetrize(m);
        factorize_matrix(&m)?;
        Ok(Self { m, definiteness: Definiteness::PositiveDefinite })
    }

    /// Positive-semidefinite covariance (eigenvalues >= -1e-12 * scale).
    pub fn positive_semidefinite(m: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&m)?;
        let m = symmetrize(m);
        let scale = m.amax().max(1.0);
        let eig = m.clone().symmetric_eigen();
        if let Some(i) = eig.eigenvalues.iter().position(|&l| l < -1e-12 * scale) {
            return Err(Error::NotPositiveDefinite { index: i });
        }
        Ok(Self { m, definiteness: Definiteness::PositiveSemidefinite })
    }

    pub fn identity(d: usize) -> Self {
        Self { m: DMatrix::identity(d, d), definiteness: Definiteness::PositiveDefinite }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::positive_definite(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Positive-definite `d x d` covariance from row-major entries.
    pub fn from_rows(d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: entries.len() });
        }
        Self::positive_definite(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn definiteness(&self) -> Definiteness {
        self.definiteness
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Lower-triangular `L` with `L * L^T` equal to the factorized covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerTriangularFactor(DMatrix<f64>);

impl LowerTriangularFactor {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.0.diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Solve `L z = b` by forward substitution.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let l = &self.0;
        let d = l.nrows();
        let mut z = DVector::zeros(d);
        for i in 0..d {
            let mut acc = b[i];
            for k in 0..i {
                acc -= l[(i, k)] * z[k];
            }
            z[i] = acc / l[(i, i)];
        }
        z
    }

    /// `b^T (L L^T)^{-1} b`.
    pub fn mahalanobis_sq(&self, b: &DVector<f64>) -> f64 {
        self.solve_lower(b).norm_squared()
    }

    /// `L^{-1} M` column by column.
    pub fn solve_lower_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            let col = self.solve_lower(&m.column(c).into_owned());
            out.set_column(c, &col);
        }
        out
    }
}

/// Cholesky factorization of a symmetric positive-definite covariance.
///
/// A pivot below `1e-12 * trace / d` is treated as a failure, which makes
/// the positive-definiteness decision scale-aware.
pub fn factorize(cov: &CovMatrix) -> Result<LowerTriangularFactor> {
    factorize_matrix(&cov.m)
}

pub(crate) fn factorize_matrix(a: &DMatrix<f64>) -> Result<LowerTriangularFactor> {
    check_symmetric(a)?;
    let d = a.nrows();
    let threshold = 1e-12 * a.trace().abs() / d as f64;
    let mut l = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > threshold) {
            return Err(Error::NotPositiveDefinite { index: j });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..d {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = acc / ljj;
        }
    }
    Ok(LowerTriangularFactor(l))
}

/// Gaussian measure with positive-definite covariance. The factor and the
/// log-determinant are cached at construction.
#[derive(Clone, Debug)]
pub struct GaussianDist {
    mean: RealVector,
    cov: CovMatrix,
    chol: LowerTriangularFactor,
    log_det: f64,
}

impl GaussianDist {
    pub fn new(mean: RealVector, cov: CovMatrix) -> Result<Self> {
        if mean.dim() != cov.dim() {
            return Err(Error::DimensionMismatch { expected: cov.dim(), found: mean.dim() });
        }
        let chol = factorize(&cov)?;
        let log_det = chol.log_det();
        Ok(Self { mean, cov, chol, log_det })
    }

    pub fn univariate(mean: f64, var: f64) -> Result<Self> {
        Self::new(RealVector::new(vec![mean])?, CovMatrix::positive_definite(DMatrix::from_element(1, 1, var))?)
    }

    pub fn standard(d: usize) -> Self {
        Self::new(RealVector::zeros(d), CovMatrix::identity(d)).expect("identity is PD")
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    pub fn mean(&self) -> &RealVector {
        &self.mean
    }

    pub fn cov(&self) -> &CovMatrix {
        &self.cov
    }

    pub fn factor(&self) -> &LowerTriangularFactor {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(self.log_density_unchecked(x.as_slice()))
    }

    pub(crate) fn log_density_unchecked(&self, x: &[f64]) -> f64 {
        let diff = DVector::from_fn(self.dim(), |i, _| x[i] - self.mean[i]);
        let q = self.chol.mahalanobis_sq(&diff);
        -0.5 * (self.dim() as f64 * LN_2PI + self.log_det + q)
    }

    pub fn sample_one(&self, rng: &mut RngStream) -> RealVector {
        let d = self.dim();
        let z = DVector::from_fn(d, |_, _| rng.standard_normal());
        RealVector(self.mean.as_dvector() + self.chol.matrix() * z)
    }

    /// `count` independent draws. `count` must be at least one.
    pub fn sample(&self, rng: &mut RngStream, count: usize) -> Result<Vec<RealVector>> {
        if count == 0 {
            return Err(Error::InvalidParameter("sample count must be >= 1".into()));
        }
        Ok((0..count).map(|_| self.sample_one(rng)).collect())
    }

    /// Scalar view, available when `dim() == 1`.
    pub fn as_normal(&self) -> Option<Normal> {
        (self.dim() == 1).then(|| Normal { mean: self.mean[0], var: self.cov.matrix()[(0, 0)] })
    }
}

/// Scalar Gaussian `N(mean, var)`, the workhorse input and noise law of the
/// scalar additive channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normal {
    pub mean: f64,
    pub var: f64,
}

impl Normal {
    pub fn new(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) || !var.is_finite() || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!("normal needs finite mean and positive variance, got ({mean}, {var})")));
        }
        Ok(Self { mean, var })
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * (LN_2PI + self.var.ln() + d * d / self.var)
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        rng.normal(self.mean, self.var)
    }

    pub fn to_dist(&self) -> GaussianDist {
        GaussianDist::univariate(self.mean, self.var).expect("validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn random_pd(d: usize, rng: &mut RngStream) -> DMatrix<f64> {
        let a = DMatrix::from_fn(d, d, |_, _| rng.standard_normal());
        &a * a.transpose() + DMatrix::identity(d, d)
    }

    #[test]
    fn identity_factor() {
        let l = factorize(&CovMatrix::identity(3)).unwrap();
        assert_eq!(l.matrix(), &DMatrix::<f64>::identity(3, 3));
    }

    #[test]
    fn diagonal_factor() {
        let l = factorize(&CovMatrix::diagonal(&[4.0, 9.0]).unwrap()).unwrap();
        assert_eq!(l.matrix(), &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
    }

    #[test]
    fn reconstruction_from_known_factor() {
        let mut rng = RngStream::new(1, 0);
        for d in 1..6 {
            let cov = random_pd(d, &mut rng);
            let l = factorize_matrix(&cov).unwrap();
            let rec = l.matrix() * l.matrix().transpose();
            assert!((rec - &cov).norm() / cov.norm() <= 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite_with_index() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(CovMatrix::positive_definite(m).unwrap_err(), Error::NotPositiveDefinite { index: 1 });
    }

    #[test]
    fn rejects_scaled_near_singular() {
        // second pivot is 1e-14 * scale, below the 1e-12 * trace/d threshold
        let s = 1e6;
        let m = DMatrix::from_row_slice(2, 2, &[s, s, s, s * (1.0 + 1e-14)]);
        assert!(CovMatrix::positive_definite(m).is_err());
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(CovMatrix::positive_definite(m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn psd_accepts_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(CovMatrix::positive_semidefinite(m.clone()).is_ok());
        assert!(CovMatrix::positive_definite(m).is_err());
    }

    #[test]
    fn standard_normal_at_zero() {
        let g = GaussianDist::standard(1);
        assert_abs_diff_eq!(g.log_density(&DVector::from_element(1, 0.0)).unwrap(), -0.5 * (2.0 * PI).ln(), epsilon = 1e-15);
    }

    #[test]
    fn log_density_at_mean() {
        let mut rng = RngStream::new(2, 0);
        let cov = random_pd(3, &mut rng);
        let g =
            GaussianDist::new(RealVector::new(vec![1.0, -2.0, 0.5]).unwrap(), CovMatrix::positive_definite(cov.clone()).unwrap()).unwrap();
        let expected = -0.5 * (3.0 * (2.0 * PI).ln() + cov.determinant().ln());
        assert_abs_diff_eq!(g.log_density(g.mean().as_dvector()).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn log_density_dimension_mismatch() {
        let g = GaussianDist::standard(2);
        assert!(matches!(g.log_density(&DVector::zeros(3)), Err(Error::DimensionMismatch { expected: 2, found: 3 })));
    }

    #[test]
    fn density_normalizes_in_2d() {
        // midpoint rule over a box holding all but ~1e-20 of the mass
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 2.0]);
        let g = GaussianDist::new(RealVector::new(vec![0.3, -0.4]).unwrap(), CovMatrix::positive_definite(cov).unwrap()).unwrap();
        let (n, half) = (400, 14.0);
        let h = 2.0 * half / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = [-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h];
                total += g.log_density_unchecked(&x).exp() * h * h;
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn sample_count_contract() {
        let g = GaussianDist::standard(2);
        let mut rng = RngStream::new(3, 0);
        assert!(g.sample(&mut rng, 0).is_err());
        let one = g.sample(&mut rng, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].dim(), 2);
    }

    #[test]
    fn sample_mean_within_clt_bound() {
        let g = GaussianDist::standard(2);
        let mut rng = RngStream::new(4, 0);
        let n = 100_000;
        let xs = g.sample(&mut rng, n).unwrap();
        for c in 0..2 {
            let m: f64 = xs.iter().map(|x| x[c]).sum::<f64>() / n as f64;
            assert!(m.abs() < 3.0 / (n as f64).sqrt(), "coordinate {c} mean {m}");
        }
    }

    #[test]
    fn sample_covariance_converges() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, -0.8, -0.8, 1.0]);
        let g = GaussianDist::new(RealVector::zeros(2), CovMatrix::positive_definite(cov.clone()).unwrap()).unwrap();
        let mut rng = RngStream::new(5, 0);
        let n = 200_000;
        let mut acc = DMatrix::<f64>::zeros(2, 2);
        for x in g.sample(&mut rng, n).unwrap() {
            acc += x.as_dvector() * x.as_dvector().transpose();
        }
        acc /= n as f64;
        assert!((acc - cov).amax() < 0.03);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = GaussianDist::standard(3);
        let a = g.sample(&mut RngStream::new(9, 1), 10).unwrap();
        let b = g.sample(&mut RngStream::new(9, 1), 10).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn factorization_roundtrip(seed in 0u64..10_000, d in 1usize..7) {
            let mut rng = RngStream::new(seed, 0);
            let cov = random_pd(d, &mut rng);
            let l = factorize_matrix(&cov).unwrap();
            let rec = l.matrix() * l.matrix().transpose();
            prop_assert!((rec - &cov).norm() / cov.norm() <= 1e-10);
        }

        #[test]
        fn density_peaks_at_mean(seed in 0u64..10_000) {
            let mut rng = RngStream::new(seed, 1);
            let cov = random_pd(2, &mut rng);
            let mean = vec![rng.standard_normal(), rng.standard_normal()];
            let g = GaussianDist::new(
                RealVector::new(mean.clone()).unwrap(),
                CovMatrix::positive_definite(cov).unwrap(),
            ).unwrap();
            let peak = g.log_density_unchecked(&mean);
            for i in -4..=4 {
                for j in -4..=4 {
                    if i == 0 && j == 0 { continue; }
                    let x = [mean[0] + 0.25 * i as f64, mean[1] + 0.25 * j as f64];
                    prop_assert!(g.log_density_unchecked(&x) < peak);
                }
            }
        }
    }
}

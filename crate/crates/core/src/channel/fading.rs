//! Gaussian fading MIMO channels `Y = H x + N`.
//!
//! `H` is an `i x j` Gaussian matrix vectorized row-major: entry `H[a][b]`
//! sits at index `a * j + b` of `mu_h` and of the rows/columns of
//! `sigma_h`. For a fixed input `x` the output is Gaussian with mean
//! `M(mu_h) x + mu_n` and covariance `Q(x, sigma_h) + sigma_n`, where
//! `Q(x, sigma_h)[a][c] = sum_{b,d} x_b x_d sigma_h[a*j+b][c*j+d]`.

use nalgebra::DMatrix;

use super::JointModel;
use crate::error::{Error, Result};
use crate::gaussian::{CovMatrix, Definiteness, GaussianDist, RealVector};
use crate::info::{kl_gaussian, renyi_gaussian, Nats, RenyiOrder};
use crate::rng::RngStream;

/// The compound index `s = (mu_H, Sigma_H, mu_N, Sigma_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingParams {
    rows: usize,
    cols: usize,
    mu_h: Vec<f64>,
    sigma_h: CovMatrix,
    mu_n: RealVector,
    sigma_n: CovMatrix,
}

impl FadingParams {
    pub fn new(rows: usize, cols: usize, mu_h: Vec<f64>, sigma_h: CovMatrix, mu_n: RealVector, sigma_n: CovMatrix) -> Result<Self> {
        let check = |expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, found })
            }
        };
        check(rows * cols, mu_h.len())?;
        check(rows * cols, sigma_h.dim())?;
        check(rows, mu_n.dim())?;
        check(rows, sigma_n.dim())?;
        if sigma_n.definiteness() != Definiteness::PositiveDefinite {
            return Err(Error::InvalidParameter("noise covariance must be positive definite".into()));
        }
        if mu_h.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite fading mean".into()));
        }
        Ok(Self { rows, cols, mu_h, sigma_h, mu_n, sigma_n })
    }

    /// Scalar fading `y = h x + n` with `h ~ N(mu_h, var_h)`, `n ~ N(mu_n, var_n)`.
    pub fn scalar(mu_h: f64, var_h: f64, mu_n: f64, var_n: f64) -> Result<Self> {
        Self::new(
            1,
            1,
            vec![mu_h],
            CovMatrix::positive_semidefinite(DMatrix::from_element(1, 1, var_h))?,
            RealVector::new(vec![mu_n])?,
            CovMatrix::positive_definite(DMatrix::from_element(1, 1, var_n))?,
        )
    }

    pub fn output_dim(&self) -> usize {
        self.rows
    }

    pub fn input_dim(&self) -> usize {
        self.cols
    }

    pub fn mean_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.mu_h)
    }

    pub fn sigma_h(&self) -> &CovMatrix {
        &self.sigma_h
    }

    pub fn mu_n(&self) -> &RealVector {
        &self.mu_n
    }

    pub fn sigma_n(&self) -> &CovMatrix {
        &self.sigma_n
    }

    fn has_deterministic_gain(&self) -> bool {
        self.sigma_h.matrix().iter().all(|v| *v == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianFadingChannel {
    pub params: FadingParams,
}

impl GaussianFadingChannel {
    pub fn new(params: FadingParams) -> Self {
        Self { params }
    }

    pub fn sample(&self, x: &RealVector, rng: &mut RngStream) -> Result<RealVector> {
        Ok(fading_conditional(self, x)?.sample_one(rng))
    }
}

/// Law of `H x + N` for a fixed input `x`.
pub fn fading_conditional(ch: &GaussianFadingChannel, x: &RealVector) -> Result<GaussianDist> {
    let p = &ch.params;
    if x.dim() != p.cols {
        return Err(Error::DimensionMismatch { expected: p.cols, found: x.dim() });
    }
    let mean = p.mean_matrix() * x.as_dvector() + p.mu_n.as_dvector();
    let (i, j) = (p.rows, p.cols);
    let sh = p.sigma_h.matrix();
    let mut cov = p.sigma_n.matrix().clone();
    for a in 0..i {
        for c in 0..i {
            let mut acc = 0.0;
            for b in 0..j {
                for d in 0..j {
                    acc += x[b] * x[d] * sh[(a * j + b, c * j + d)];
                }
            }
            cov[(a, c)] += acc;
        }
    }
    // exact symmetry against rounding in the quadratic form
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianDist::new(RealVector::from_dvector(mean)?, CovMatrix::positive_definite(cov)?)
}

/// Closed-form output law of a fading channel with Gaussian input. Only
/// deterministic gains (`Sigma_H = 0`) keep the output Gaussian; random
/// gains yield [`Error::UnsupportedCombination`] and callers fall back to
/// a Monte Carlo marginal ([`FadingModel`]).
pub fn marginal_output(ch: &GaussianFadingChannel, input: &GaussianDist) -> Result<GaussianDist> {
    let p = &ch.params;
    if input.dim() != p.cols {
        return Err(Error::DimensionMismatch { expected: p.cols, found: input.dim() });
    }
    if !p.has_deterministic_gain() {
        return Err(Error::UnsupportedCombination("random fading gain with continuous input has no closed-form output law".into()));
    }
    let m = p.mean_matrix();
    let mean = &m * input.mean().as_dvector() + p.mu_n.as_dvector();
    let cov = &m * input.cov().matrix() * m.transpose() + p.sigma_n.matrix();
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianDist::new(RealVector::from_dvector(mean)?, CovMatrix::positive_definite(cov)?)
}

/// Fading channel with Gaussian input. The output marginal is the mixture
/// of conditionals over a fixed inner sample of inputs drawn from its own
/// stream, so the marginal density is a deterministic function once the
/// model is built; its Monte Carlo error is of order `inner_samples^{-1/2}`
/// and adds to the outer estimator's sampling error.
#[derive(Clone, Debug)]
pub struct FadingModel {
    channel: GaussianFadingChannel,
    input: GaussianDist,
    inner: Vec<GaussianDist>,
}

impl FadingModel {
    pub fn new(channel: GaussianFadingChannel, input: GaussianDist, inner_samples: usize, inner_rng: &mut RngStream) -> Result<Self> {
        if inner_samples == 0 {
            return Err(Error::InvalidParameter("inner sample count must be >= 1".into()));
        }
        let xs = input.sample(inner_rng, inner_samples)?;
        let inner = xs.iter().map(|x| fading_conditional(&channel, x)).collect::<Result<Vec<_>>>()?;
        Ok(Self { channel, input, inner })
    }

    pub fn channel(&self) -> &GaussianFadingChannel {
        &self.channel
    }

    pub fn input(&self) -> &GaussianDist {
        &self.input
    }

    fn conditional(&self, x: &RealVector) -> GaussianDist {
        fading_conditional(&self.channel, x).expect("input dimension fixed by the model")
    }
}

impl JointModel for FadingModel {
    type Input = RealVector;
    type Output = RealVector;

    fn sample_input(&self, rng: &mut RngStream) -> RealVector {
        self.input.sample_one(rng)
    }

    fn sample_output(&self, x: &RealVector, rng: &mut RngStream) -> RealVector {
        self.conditional(x).sample_one(rng)
    }

    fn cond_log_density(&self, x: &RealVector, y: &RealVector) -> f64 {
        self.conditional(x).log_density_unchecked(y.as_slice())
    }

    fn marginal_log_density(&self, y: &RealVector) -> f64 {
        let logs: Vec<f64> = self.inner.iter().map(|g| g.log_density_unchecked(y.as_slice())).collect();
        crate::stats::log_mean_exp(&logs)
    }

    fn input_points(&self, count: usize, rng: &mut RngStream) -> Vec<(RealVector, f64)> {
        let w = 1.0 / count as f64;
        (0..count).map(|_| (self.input.sample_one(rng), w)).collect()
    }

    fn conditional_kl(&self, other: &Self, x: &RealVector) -> Result<Nats> {
        kl_gaussian(&self.conditional(x), &other.conditional(x))
    }

    fn conditional_renyi(&self, other: &Self, order: RenyiOrder, x: &RealVector) -> Result<Nats> {
        renyi_gaussian(order, &self.conditional(x), &other.conditional(x))
    }
}

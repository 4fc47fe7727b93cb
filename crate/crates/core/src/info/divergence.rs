//! Closed-form KL and Rényi divergences between Gaussians.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::{factorize_matrix, GaussianDist, Normal};

use super::Nats;

/// Rényi order `alpha > 0`, `alpha != 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("Rényi order must be positive, finite and != 1, got {alpha}")));
        }
        Ok(Self(alpha))
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

fn check_dims(g0: &GaussianDist, g1: &GaussianDist) -> Result<()> {
    if g0.dim() != g1.dim() {
        return Err(Error::DimensionMismatch { expected: g0.dim(), found: g1.dim() });
    }
    Ok(())
}

/// `D(g0 || g1)` in nats.
pub fn kl_gaussian(g0: &GaussianDist, g1: &GaussianDist) -> Result<Nats> {
    check_dims(g0, g1)?;
    let d = g0.dim() as f64;
    let l1 = g1.factor();
    // tr(S1^{-1} S0) = ||L1^{-1} L0||_F^2
    let trace = l1.solve_lower_matrix(g0.factor().matrix()).norm_squared();
    let diff = g1.mean().as_dvector() - g0.mean().as_dvector();
    let maha = l1.mahalanobis_sq(&diff);
    let kl = 0.5 * (trace + maha - d + g1.log_det() - g0.log_det());
    // rounding can push identical inputs a hair below zero
    Ok(kl.max(0.0))
}

/// `D_alpha(g0 || g1)` in nats.
///
/// With `S* = alpha*S1 + (1-alpha)*S0`, the divergence is finite iff `S*`
/// is positive definite; otherwise `f64::INFINITY` is returned.
pub fn renyi_gaussian(order: RenyiOrder, g0: &GaussianDist, g1: &GaussianDist) -> Result<Nats> {
    check_dims(g0, g1)?;
    let a = order.alpha();
    let s_star: DMatrix<f64> = g1.cov().matrix() * a + g0.cov().matrix() * (1.0 - a);
    let l_star = match factorize_matrix(&s_star) {
        Ok(l) => l,
        Err(Error::NotPositiveDefinite { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let diff = g1.mean().as_dvector() - g0.mean().as_dvector();
    let maha = l_star.mahalanobis_sq(&diff);
    let log_ratio = l_star.log_det() - (1.0 - a) * g0.log_det() - a * g1.log_det();
    let value = 0.5 * a * maha - log_ratio / (2.0 * (a - 1.0));
    Ok(value.max(0.0))
}

/// Scalar specialisation of [`kl_gaussian`].
pub fn kl_normal(n0: &Normal, n1: &Normal) -> Nats {
    let r = n0.var / n1.var;
    let d = n1.mean - n0.mean;
    (0.5 * (r + d * d / n1.var - 1.0 - r.ln())).max(0.0)
}

/// Scalar specialisation of [`renyi_gaussian`].
pub fn renyi_normal(order: RenyiOrder, n0: &Normal, n1: &Normal) -> Nats {
    let a = order.alpha();
    let s_star = a * n1.var + (1.0 - a) * n0.var;
    if !(s_star > 1e-12 * (n0.var + n1.var)) {
        return f64::INFINITY;
    }
    let d = n1.mean - n0.mean;
    let log_ratio = s_star.ln() - (1.0 - a) * n0.var.ln() - a * n1.var.ln();
    (0.5 * a * d * d / s_star - log_ratio / (2.0 * (a - 1.0))).max(0.0)
}

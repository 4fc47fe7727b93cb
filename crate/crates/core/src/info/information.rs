//! Information density, mutual information and moment-generating-function
//! checks by Monte Carlo.

use serde::{Deserialize, Serialize};

use crate::channel::{JointModel, Magnitude};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{mc_moments, Moments};

use super::Nats;

/// `ln W(x, y) - ln Q_P(y)` from the two log-density callables.
///
/// A vanishing marginal under a positive conditional means `W(x, .)` is
/// not absolutely continuous with respect to `Q_P`.
pub fn information_density<X, Y>(
    cond_log_density: impl Fn(&X, &Y) -> f64,
    marginal_log_density: impl Fn(&Y) -> f64,
    x: &X,
    y: &Y,
) -> Result<Nats> {
    let c = cond_log_density(x, y);
    let m = marginal_log_density(y);
    if m == f64::NEG_INFINITY && c > f64::NEG_INFINITY {
        return Err(Error::NonAbsolutelyContinuous);
    }
    if c == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(c - m)
}

/// n-letter information density of the product channel: the sum of the
/// single-letter values.
pub fn information_density_sequence<M: JointModel>(model: &M, xs: &[M::Input], ys: &[M::Output]) -> Result<Nats> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    let mut total = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        total += information_density(|a, b| model.cond_log_density(a, b), |b| model.marginal_log_density(b), x, y)?;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MIEstimate {
    pub mean: Nats,
    pub stderr: f64,
    pub samples: usize,
}

fn check_samples(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one Monte Carlo sample".into()));
    }
    Ok(())
}

fn density_moments<M, F>(model: &M, n_samples: usize, rng: &RngStream, map: F) -> Result<Moments>
where
    M: JointModel,
    F: Fn(f64) -> f64 + Sync,
{
    let moments = mc_moments(n_samples, rng, |r| {
        let x = model.sample_input(r);
        let y = model.sample_output(&x, r);
        let m = model.marginal_log_density(&y);
        if m == f64::NEG_INFINITY {
            return f64::NAN;
        }
        map(model.cond_log_density(&x, &y) - m)
    });
    if moments.sum.is_nan() {
        return Err(Error::NonAbsolutelyContinuous);
    }
    Ok(moments)
}

/// `I(P; W)` as the sample mean of the information density over
/// `(X, Y) ~ P o W`. Finite-alphabet models are summed exactly instead and
/// report zero stderr.
pub fn mutual_information_mc<M: JointModel>(model: &M, n_samples: usize, rng: &RngStream) -> Result<MIEstimate> {
    check_samples(n_samples)?;
    if let Some(mi) = model.finite_mutual_information() {
        return Ok(MIEstimate { mean: mi, stderr: 0.0, samples: n_samples });
    }
    let m = density_moments(model, n_samples, rng, |i| i)?;
    Ok(MIEstimate { mean: m.mean(), stderr: m.stderr(), samples: m.count })
}

/// Sample estimate of a moment-generating function with a stability flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MgfEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Share of the total contributed by the single largest summand.
    pub max_share: f64,
    /// Raised when at least `1e4` samples were drawn and the largest
    /// summand carries more than half of the total, or the sum overflowed.
    /// Finiteness of an MGF cannot be decided from samples; the flag is
    /// advisory only.
    pub suspicious: bool,
}

const MGF_MIN_SAMPLES_FOR_FLAG: usize = 10_000;

pub(crate) fn mgf_estimate(m: Moments) -> MgfEstimate {
    let max_share = m.max / m.sum;
    let overflow = !m.sum.is_finite();
    MgfEstimate {
        mean: m.mean(),
        stderr: m.stderr(),
        samples: m.count,
        max_share,
        suspicious: overflow || (m.count >= MGF_MIN_SAMPLES_FOR_FLAG && max_share > 0.5),
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("MGF argument must be positive, got {t}")));
    }
    Ok(())
}

/// `E[exp(t i(X; Y))]` over `(X, Y) ~ P o W`.
pub fn mgf_information_density<M: JointModel>(model: &M, t: f64, n_samples: usize, rng: &RngStream) -> Result<MgfEstimate> {
    check_samples(n_samples)?;
    check_t(t)?;
    density_moments(model, n_samples, rng, |i| (t * i).exp()).map(mgf_estimate)
}

/// `E[exp(t (|X| + |Y|))]`: a tail check on the joint input/output law
/// itself rather than on its information density.
pub fn mgf_joint_magnitude<M: JointModel>(model: &M, t: f64, n_samples: usize, rng: &RngStream) -> Result<MgfEstimate> {
    check_samples(n_samples)?;
    check_t(t)?;
    Ok(mgf_estimate(mc_moments(n_samples, rng, |r| {
        let x = model.sample_input(r);
        let y = model.sample_output(&x, r);
        (t * (x.magnitude() + y.magnitude())).exp()
    })))
}

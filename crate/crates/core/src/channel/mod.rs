//! Channels paired with an input law.
//!
//! A [`JointModel`] bundles a channel `W` with the input distribution `P`,
//! which is everything the information measures need: samplers, the
//! conditional density `W(x, .)`, the output marginal `Q_P` and the
//! per-input divergences used by the approximation nets. Models whose
//! block likelihood reduces to low-dimensional sufficient statistics also
//! implement [`BlockModel`], the fast path used by decoding and by the
//! resolvability mixtures.

mod discrete;
mod fading;
mod linear;
mod mac;

pub use discrete::{dmc_apply, DiscreteChannel, DiscreteDist, DiscreteModel};
pub use fading::{fading_conditional, marginal_output, FadingModel, FadingParams, GaussianFadingChannel};
pub use linear::{LinearGaussianModel, ScalarGaussianChannel};
pub use mac::{effective_channel, EffectiveMACConfig, MessageTuple, Side};

use crate::error::Result;
use crate::gaussian::RealVector;
use crate::info::{Nats, RenyiOrder};
use crate::rng::RngStream;

/// Size of a symbol, used for tail checks on the joint input/output law.
/// Finite alphabets report zero: their joint law is bounded.
pub trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Magnitude for usize {
    fn magnitude(&self) -> f64 {
        0.0
    }
}

impl Magnitude for RealVector {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// A channel `W` together with its input law `P`.
pub trait JointModel: Send + Sync {
    type Input: Clone + Send + Sync + Magnitude;
    type Output: Clone + Send + Sync + Magnitude;

    fn sample_input(&self, rng: &mut RngStream) -> Self::Input;

    fn sample_output(&self, x: &Self::Input, rng: &mut RngStream) -> Self::Output;

    /// `ln W(x, y)`: a density for continuous outputs, a mass otherwise.
    fn cond_log_density(&self, x: &Self::Input, y: &Self::Output) -> f64;

    /// `ln Q_P(y)` for the output marginal.
    fn marginal_log_density(&self, y: &Self::Output) -> f64;

    /// Input points with weights summing to one, used to average
    /// per-input quantities over `P`. Finite alphabets return the exact
    /// support; continuous inputs return `count` equally weighted draws.
    fn input_points(&self, count: usize, rng: &mut RngStream) -> Vec<(Self::Input, f64)>;

    /// `D(W(x, .) || other(x, .))`.
    fn conditional_kl(&self, other: &Self, x: &Self::Input) -> Result<Nats>;

    /// `D_alpha(W(x, .) || other(x, .))`, possibly `+inf`.
    fn conditional_renyi(&self, other: &Self, order: RenyiOrder, x: &Self::Input) -> Result<Nats>;

    /// `I(P; W)` by finite enumeration, when the alphabets are finite.
    fn finite_mutual_information(&self) -> Option<Nats> {
        None
    }

    /// `D_alpha(P o W || P x Q_P)` in closed form, when available.
    fn joint_renyi_vs_product(&self, _order: RenyiOrder) -> Option<Nats> {
        None
    }
}

/// Block likelihoods through sufficient statistics.
///
/// The statistics depend only on the symbols, never on the channel
/// parameters, so one pass over a codeword serves every member of a
/// family (every centre of an approximation net).
pub trait BlockModel: JointModel
where
    Self::Input: Copy,
    Self::Output: Copy,
{
    type WordStat: Clone + Send + Sync;
    type OutputStat: Clone + Send + Sync;
    type PairStat: Clone + Send + Sync;

    fn word_stat(&self, word: &[Self::Input]) -> Self::WordStat;

    fn output_stat(&self, y: &[Self::Output]) -> Self::OutputStat;

    fn pair_stat(&self, word: &[Self::Input], y: &[Self::Output]) -> Self::PairStat;

    /// `sum_i ln W(x_i, y_i)` over a block of length `n`.
    fn block_log_likelihood(&self, n: usize, word: &Self::WordStat, output: &Self::OutputStat, pair: &Self::PairStat) -> f64;

    /// `sum_i ln Q_P(y_i)` over a block of length `n`.
    fn block_log_marginal(&self, n: usize, output: &Self::OutputStat) -> f64;
}

use serde::{Deserialize, Serialize};

use super::{BlockModel, JointModel};
use crate::error::{Error, Result};
use crate::gaussian::{CovMatrix, GaussianDist, Normal, RealVector, LN_2PI};
use crate::info::{kl_normal, renyi_gaussian, renyi_normal, Nats, RenyiOrder};
use crate::rng::RngStream;

/// `y = offset + gain * x + N(0, noise_var)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarGaussianChannel {
    pub offset: f64,
    pub gain: f64,
    pub noise_var: f64,
}

impl ScalarGaussianChannel {
    pub fn new(offset: f64, gain: f64, noise_var: f64) -> Result<Self> {
        if !(noise_var > 0.0) || !noise_var.is_finite() || !offset.is_finite() || !gain.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scalar channel needs finite offset/gain and positive noise variance, got ({offset}, {gain}, {noise_var})"
            )));
        }
        Ok(Self { offset, gain, noise_var })
    }

    /// Unit-gain AWGN channel `y = x + N(0, noise_var)`.
    pub fn awgn(noise_var: f64) -> Result<Self> {
        Self::new(0.0, 1.0, noise_var)
    }

    pub fn conditional(&self, x: f64) -> Normal {
        Normal { mean: self.offset + self.gain * x, var: self.noise_var }
    }

    pub fn sample(&self, x: f64, rng: &mut RngStream) -> f64 {
        self.offset + self.gain * x + self.noise_var.sqrt() * rng.standard_normal()
    }
}

/// Scalar linear-Gaussian channel driven by a Gaussian input. The output
/// marginal is Gaussian and every information quantity has a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearGaussianModel {
    pub channel: ScalarGaussianChannel,
    pub input: Normal,
}

impl LinearGaussianModel {
    pub fn new(channel: ScalarGaussianChannel, input: Normal) -> Self {
        Self { channel, input }
    }

    /// The output law `Q_P = N(offset + gain * mu, gain^2 * var + noise_var)`.
    pub fn marginal(&self) -> Normal {
        let ch = &self.channel;
        Normal { mean: ch.offset + ch.gain * self.input.mean, var: ch.gain * ch.gain * self.input.var + ch.noise_var }
    }

    /// `1/2 ln(1 + gain^2 var / noise_var)`.
    pub fn closed_form_mutual_information(&self) -> Nats {
        let ch = &self.channel;
        0.5 * (ch.gain * ch.gain * self.input.var / ch.noise_var).ln_1p()
    }

    /// The bivariate Gaussian law of `(X, Y)`.
    pub fn joint(&self) -> GaussianDist {
        let (p, q) = (self.input, self.marginal());
        let c = self.channel.gain * p.var;
        joint_dist(p.mean, q.mean, p.var, c, q.var)
    }

    /// `P x Q_P` as a bivariate Gaussian.
    pub fn product(&self) -> GaussianDist {
        let (p, q) = (self.input, self.marginal());
        joint_dist(p.mean, q.mean, p.var, 0.0, q.var)
    }
}

fn joint_dist(mx: f64, my: f64, vx: f64, c: f64, vy: f64) -> GaussianDist {
    let cov = nalgebra::DMatrix::from_row_slice(2, 2, &[vx, c, c, vy]);
    GaussianDist::new(
        RealVector::new(vec![mx, my]).expect("finite"),
        CovMatrix::positive_definite(cov).expect("noise variance keeps the joint PD"),
    )
    .expect("dimensions agree")
}

impl JointModel for LinearGaussianModel {
    type Input = f64;
    type Output = f64;

    fn sample_input(&self, rng: &mut RngStream) -> f64 {
        self.input.sample(rng)
    }

    fn sample_output(&self, x: &f64, rng: &mut RngStream) -> f64 {
        self.channel.sample(*x, rng)
    }

    fn cond_log_density(&self, x: &f64, y: &f64) -> f64 {
        self.channel.conditional(*x).log_density(*y)
    }

    fn marginal_log_density(&self, y: &f64) -> f64 {
        self.marginal().log_density(*y)
    }

    fn input_points(&self, count: usize, rng: &mut RngStream) -> Vec<(f64, f64)> {
        let w = 1.0 / count as f64;
        (0..count).map(|_| (self.input.sample(rng), w)).collect()
    }

    fn conditional_kl(&self, other: &Self, x: &f64) -> Result<Nats> {
        Ok(kl_normal(&self.channel.conditional(*x), &other.channel.conditional(*x)))
    }

    fn conditional_renyi(&self, other: &Self, order: RenyiOrder, x: &f64) -> Result<Nats> {
        Ok(renyi_normal(order, &self.channel.conditional(*x), &other.channel.conditional(*x)))
    }

    fn joint_renyi_vs_product(&self, order: RenyiOrder) -> Option<Nats> {
        renyi_gaussian(order, &self.joint(), &self.product()).ok()
    }
}

impl BlockModel for LinearGaussianModel {
    /// `(sum x, sum x^2)`
    type WordStat = [f64; 2];
    /// `(sum y, sum y^2)`
    type OutputStat = [f64; 2];
    /// `sum x y`
    type PairStat = f64;

    fn word_stat(&self, word: &[f64]) -> [f64; 2] {
        word.iter().fold([0.0, 0.0], |[s, q], &x| [s + x, q + x * x])
    }

    fn output_stat(&self, y: &[f64]) -> [f64; 2] {
        self.word_stat(y)
    }

    fn pair_stat(&self, word: &[f64], y: &[f64]) -> f64 {
        word.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    fn block_log_likelihood(&self, n: usize, word: &[f64; 2], output: &[f64; 2], pair: &f64) -> f64 {
        let ScalarGaussianChannel { offset: b, gain: g, noise_var: v } = self.channel;
        let n = n as f64;
        // sum (y - b - g x)^2 expanded in the sufficient statistics
        let resid = output[1] - 2.0 * b * output[0] + n * b * b - 2.0 * g * (pair - b * word[0]) + g * g * word[1];
        -0.5 * (n * (LN_2PI + v.ln()) + resid / v)
    }

    fn block_log_marginal(&self, n: usize, output: &[f64; 2]) -> f64 {
        let q = self.marginal();
        let n = n as f64;
        let resid = output[1] - 2.0 * q.mean * output[0] + n * q.mean * q.mean;
        -0.5 * (n * (LN_2PI + q.var.ln()) + resid / q.var)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(offset: f64, gain: f64, nv: f64) -> LinearGaussianModel {
        LinearGaussianModel::new(ScalarGaussianChannel::new(offset, gain, nv).unwrap(), Normal::new(0.3, 1.7).unwrap())
    }

    #[test]
    fn awgn_marginal_is_sum_of_variances() {
        let m = LinearGaussianModel::new(ScalarGaussianChannel::awgn(1.0).unwrap(), Normal::new(0.0, 1.0).unwrap());
        assert_eq!(m.marginal(), Normal { mean: 0.0, var: 2.0 });
    }

    #[test]
    fn block_stats_match_letterwise_sum() {
        let m = model(0.4, -1.3, 0.6);
        let mut rng = RngStream::new(3, 0);
        let x: Vec<f64> = (0..37).map(|_| m.sample_input(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|xi| m.sample_output(xi, &mut rng)).collect();
        let direct: f64 = x.iter().zip(&y).map(|(a, b)| m.cond_log_density(a, b)).sum();
        let fast = m.block_log_likelihood(37, &m.word_stat(&x), &m.output_stat(&y), &m.pair_stat(&x, &y));
        assert_abs_diff_eq!(direct, fast, epsilon = 1e-9 * direct.abs());
        let direct_q: f64 = y.iter().map(|b| m.marginal_log_density(b)).sum();
        let fast_q = m.block_log_marginal(37, &m.output_stat(&y));
        assert_abs_diff_eq!(direct_q, fast_q, epsilon = 1e-9 * direct_q.abs());
    }

    #[test]
    fn joint_renyi_approaches_mutual_information() {
        // D(P o W || P x Q) = I(P; W)
        let m = model(0.0, 1.0, 1.0);
        let d = m.joint_renyi_vs_product(RenyiOrder::new(1.0001).unwrap()).unwrap();
        assert_abs_diff_eq!(d, m.closed_form_mutual_information(), epsilon = 1e-3);
    }

    #[test]
    fn zero_gain_has_no_information() {
        let m = model(2.0, 0.0, 1.0);
        assert_eq!(m.closed_form_mutual_information(), 0.0);
        assert_eq!(m.cond_log_density(&5.0, &1.0), m.marginal_log_density(&1.0));
    }
}

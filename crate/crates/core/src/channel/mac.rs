//! The scalar additive multiple-access model seen by the legitimate
//! receiver (Bob) and the eavesdropper (Eve):
//!
//! ```text
//! y = sum_k g_k a_k + g_J x + N_B
//! z = sum_k h_k a_k + h_J x + N_E
//! ```
//!
//! For a fixed message tuple `a`, both are point-to-point linear-Gaussian
//! channels in the jammer input `x`.

use serde::{Deserialize, Serialize};

use super::ScalarGaussianChannel;
use crate::error::{Error, Result};
use crate::gaussian::Normal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bob,
    Eve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMACConfig {
    pub bob_gains: Vec<f64>,
    pub bob_jammer_gain: f64,
    pub eve_gains: Vec<f64>,
    pub eve_jammer_gain: f64,
    pub bob_noise: Normal,
    pub eve_noise: Normal,
}

impl EffectiveMACConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bob_gains.is_empty() {
            return Err(Error::InvalidParameter("need at least one transmitter".into()));
        }
        if self.bob_gains.len() != self.eve_gains.len() {
            return Err(Error::DimensionMismatch { expected: self.bob_gains.len(), found: self.eve_gains.len() });
        }
        if !(self.bob_jammer_gain >= 0.0) || !(self.eve_jammer_gain >= 0.0) {
            return Err(Error::InvalidParameter("jammer gains must be nonnegative".into()));
        }
        let gains = self.bob_gains.iter().chain(&self.eve_gains);
        if gains.chain([&self.bob_jammer_gain, &self.eve_jammer_gain]).any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter("gains must be finite".into()));
        }
        Normal::new(self.bob_noise.mean, self.bob_noise.var)?;
        Normal::new(self.eve_noise.mean, self.eve_noise.var)?;
        Ok(())
    }

    /// Number of transmitters `K`.
    pub fn k(&self) -> usize {
        self.bob_gains.len()
    }

    /// The jammer reaches Bob more strongly than Eve.
    pub fn stronger_at_bob(&self) -> bool {
        self.bob_jammer_gain > self.eve_jammer_gain
    }

    pub fn gains(&self, side: Side) -> (&[f64], f64, Normal) {
        match side {
            Side::Bob => (&self.bob_gains, self.bob_jammer_gain, self.bob_noise),
            Side::Eve => (&self.eve_gains, self.eve_jammer_gain, self.eve_noise),
        }
    }
}

/// Message values `(a_1, .., a_K)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageTuple(pub Vec<f64>);

impl MessageTuple {
    /// Checks each `a_k` against its alphabet interval `[lo_k, hi_k]`.
    pub fn new(values: Vec<f64>, alphabets: &[(f64, f64)]) -> Result<Self> {
        if values.len() != alphabets.len() {
            return Err(Error::DimensionMismatch { expected: alphabets.len(), found: values.len() });
        }
        for (v, (lo, hi)) in values.iter().zip(alphabets) {
            if !(lo <= v && v <= hi) {
                return Err(Error::InvalidParameter(format!("message value {v} outside [{lo}, {hi}]")));
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// The channel from the jammer input `x` to one receiver for a fixed
/// message tuple: `offset = sum gain_k a_k + noise mean`, `gain = gain_J`.
pub fn effective_channel(config: &EffectiveMACConfig, a: &MessageTuple, side: Side) -> Result<ScalarGaussianChannel> {
    let (gains, jam, noise) = config.gains(side);
    if a.0.len() != gains.len() {
        return Err(Error::DimensionMismatch { expected: gains.len(), found: a.0.len() });
    }
    let offset: f64 = gains.iter().zip(&a.0).map(|(g, v)| g * v).sum::<f64>() + noise.mean;
    ScalarGaussianChannel::new(offset, jam, noise.var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{JointModel, LinearGaussianModel};
    use crate::rng::RngStream;

    fn config(k: usize, gj: f64) -> EffectiveMACConfig {
        EffectiveMACConfig {
            bob_gains: vec![1.0; k],
            bob_jammer_gain: gj,
            eve_gains: vec![1.0; k],
            eve_jammer_gain: 0.25,
            bob_noise: Normal::new(0.0, 1.0).unwrap(),
            eve_noise: Normal::new(0.0, 1.0).unwrap(),
        }
    }

    #[test]
    fn zero_messages_unit_jammer_is_awgn() {
        let ch = effective_channel(&config(2, 1.0), &MessageTuple(vec![0.0, 0.0]), Side::Bob).unwrap();
        assert_eq!(ch, ScalarGaussianChannel::awgn(1.0).unwrap());
    }

    #[test]
    fn offset_is_linear_in_messages() {
        let ch = effective_channel(&config(2, 1.0), &MessageTuple(vec![1.0, 2.0]), Side::Bob).unwrap();
        assert_eq!(ch.offset, 3.0);
    }

    #[test]
    fn silent_jammer_output_ignores_input() {
        let ch = effective_channel(&config(1, 0.0), &MessageTuple(vec![0.5]), Side::Bob).unwrap();
        let m = LinearGaussianModel::new(ch, Normal::new(0.0, 1.0).unwrap());
        assert_eq!(m.closed_form_mutual_information(), 0.0);
        let mut a = RngStream::new(1, 0);
        let mut b = RngStream::new(1, 0);
        assert_eq!(m.sample_output(&-4.0, &mut a), m.sample_output(&9.0, &mut b));
    }

    #[test]
    fn validation() {
        let mut c = config(2, 1.0);
        assert!(c.validate().is_ok());
        assert!(c.stronger_at_bob());
        c.eve_gains.pop();
        assert!(c.validate().is_err());
        let mut c = config(2, -1.0);
        assert!(c.validate().is_err());
        c.bob_jammer_gain = 0.25;
        assert!(!c.stronger_at_bob());
    }

    #[test]
    fn message_range_checked() {
        assert!(MessageTuple::new(vec![0.5, 2.0], &[(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(MessageTuple::new(vec![0.5, 1.0], &[(0.0, 1.0), (0.0, 1.0)]).is_ok());
    }
}

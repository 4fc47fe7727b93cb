use serde::{Deserialize, Serialize};

use crate::channel::JointModel;
use crate::error::{Error, Result};
use crate::info::{Nats, RenyiOrder};

/// Slack parameters of the decoding analysis, all in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentParams {
    pub delta: f64,
    pub epsilon: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl ExponentParams {
    /// Interval memberships for a gap `g = infI - R`:
    /// `0 < delta < g/3`, `2 delta < epsilon < g - delta`,
    /// `delta < beta1 < epsilon - delta`, `0 < beta2 < epsilon - delta - beta1`.
    pub fn is_valid(&self, inf_mi: Nats, rate: Nats) -> bool {
        let g = inf_mi - rate;
        let Self { delta: d, epsilon: e, beta1: b1, beta2: b2 } = *self;
        0.0 < d && d < g / 3.0 && 2.0 * d < e && e < g - d && d < b1 && b1 < e - d && 0.0 < b2 && b2 < e - d - b1
    }
}

/// Midpoint picks. A `delta_hint` is clamped into the open interval for
/// `delta`; the remaining parameters are midpoints given `delta`.
pub fn pick_exponent_params(inf_mi: Nats, rate: Nats, delta_hint: Option<f64>) -> Result<ExponentParams> {
    if !(rate < inf_mi) || !rate.is_finite() || !inf_mi.is_finite() {
        return Err(Error::RateTooHigh { rate, inf_mi });
    }
    let g = inf_mi - rate;
    let hi = g / 3.0;
    let delta = match delta_hint {
        Some(h) => h.clamp(hi * 1e-6, hi * (1.0 - 1e-6)),
        None => hi / 2.0,
    };
    let epsilon = (2.0 * delta + g - delta) / 2.0;
    let beta1 = (delta + epsilon - delta) / 2.0;
    let beta2 = (epsilon - delta - beta1) / 2.0;
    Ok(ExponentParams { delta, epsilon, beta1, beta2 })
}

/// Orders over which the Rényi terms are optimised.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrids {
    /// Orders in `(1, 2]` for the centre-mismatch term.
    pub alpha1: Vec<f64>,
    /// Orders in `[1/2, 1)` for the wrong-codeword term.
    pub alpha3: Vec<f64>,
}

impl Default for AlphaGrids {
    fn default() -> Self {
        Self { alpha1: vec![1.01, 1.05, 1.1, 1.25, 1.5, 2.0], alpha3: vec![0.5, 0.75, 0.9, 0.95, 0.99] }
    }
}

/// The four exponent terms and their minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentBound {
    pub gamma: f64,
    /// `(a1 - 1)(beta1 - E_P D_a1(W_s || W_j))` at the best `a1`.
    pub t1: f64,
    pub alpha1: f64,
    /// Limit `a2 -> 1` of the sent-word atypicality term, `beta2`.
    pub t2: f64,
    /// `(1 - a3)(D_a3(P o W_s || P x Q) + epsilon - I_s - beta1 - beta2 - delta)`
    /// at the best `a3`.
    pub t3: f64,
    pub alpha3: f64,
    /// `infI - epsilon - R - delta`, from the wrong-codeword union bound.
    pub t4: f64,
}

/// Exponent of the expected decoding error when the true channel is
/// `truth` and the decoder's nearby centre is `center`.
///
/// `input_points` average the conditional divergences over `P` (see
/// [`JointModel::input_points`]). `truth_mi` is `I(P; W_s)`.
#[allow(clippy::too_many_arguments)]
pub fn exponent_bound<M: JointModel>(
    truth: &M,
    center: &M,
    truth_mi: Nats,
    inf_mi: Nats,
    rate: Nats,
    params: &ExponentParams,
    grids: &AlphaGrids,
    input_points: &[(M::Input, f64)],
) -> Result<ExponentBound> {
    if grids.alpha1.iter().any(|&a| !(a > 1.0 && a <= 2.0)) || grids.alpha3.iter().any(|&a| !(0.5..1.0).contains(&a)) {
        return Err(Error::InvalidParameter("alpha grids must lie in (1, 2] and [1/2, 1)".into()));
    }
    if grids.alpha1.is_empty() || grids.alpha3.is_empty() {
        return Err(Error::GridEmpty);
    }
    let ExponentParams { delta, epsilon, beta1, beta2 } = *params;

    let (mut t1, mut alpha1) = (f64::NEG_INFINITY, grids.alpha1[0]);
    for &a in &grids.alpha1 {
        let order = RenyiOrder::new(a)?;
        let mut mean_div = 0.0;
        for (x, w) in input_points {
            mean_div += w * truth.conditional_renyi(center, order, x)?;
        }
        let t = (a - 1.0) * (beta1 - mean_div);
        if t > t1 {
            (t1, alpha1) = (t, a);
        }
    }

    let (mut t3, mut alpha3) = (f64::NEG_INFINITY, grids.alpha3[0]);
    for &a in &grids.alpha3 {
        let d = truth
            .joint_renyi_vs_product(RenyiOrder::new(a)?)
            .ok_or_else(|| Error::UnsupportedCombination("no closed-form joint Rényi divergence".into()))?;
        let t = (1.0 - a) * (d + epsilon - truth_mi - beta1 - beta2 - delta);
        if t > t3 {
            (t3, alpha3) = (t, a);
        }
    }

    let t2 = beta2;
    let t4 = inf_mi - epsilon - rate - delta;
    let gamma = t1.min(t2).min(t3).min(t4);
    if !(gamma > 0.0) {
        return Err(Error::NonpositiveExponent { gamma });
    }
    Ok(ExponentBound { gamma, t1, alpha1, t2, t3, alpha3, t4 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{DiscreteChannel, DiscreteDist, DiscreteModel, LinearGaussianModel, ScalarGaussianChannel};
    use crate::gaussian::Normal;
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn midpoint_example() {
        let p = pick_exponent_params(1.0, 0.4, None).unwrap();
        assert_abs_diff_eq!(p.delta, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(p.epsilon, 0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(p.beta1, 0.175, epsilon = 1e-12);
        assert_abs_diff_eq!(p.beta2, 0.0375, epsilon = 1e-12);
    }

    #[test]
    fn rate_at_capacity_rejected() {
        assert!(matches!(pick_exponent_params(1.0, 1.0, None), Err(Error::RateTooHigh { .. })));
        assert!(matches!(pick_exponent_params(1.0, 2.0, None), Err(Error::RateTooHigh { .. })));
    }

    #[test]
    fn hint_is_clamped() {
        let p = pick_exponent_params(1.0, 0.4, Some(5.0)).unwrap();
        assert!(p.is_valid(1.0, 0.4) && p.delta < 0.2);
        let q = pick_exponent_params(1.0, 0.4, Some(-1.0)).unwrap();
        assert!(q.is_valid(1.0, 0.4));
    }

    #[test]
    fn truth_in_net_gives_beta1_term_and_gap_term() {
        let m = DiscreteModel::new(DiscreteChannel::bsc(0.05).unwrap(), DiscreteDist::uniform(2).unwrap()).unwrap();
        let i = m.finite_mutual_information().unwrap();
        let rate = 0.4 * i;
        let p = pick_exponent_params(i, rate, None).unwrap();
        let pts = m.input_points(0, &mut RngStream::new(1, 0));
        let b = exponent_bound(&m, &m, i, i, rate, &p, &AlphaGrids::default(), &pts).unwrap();
        assert_abs_diff_eq!(b.t1, p.beta1, epsilon = 1e-12);
        assert_eq!(b.alpha1, 2.0);
        assert_abs_diff_eq!(b.t4, i - p.epsilon - rate - p.delta, epsilon = 1e-12);
        assert!(b.gamma > 0.0);
    }

    #[test]
    fn fourth_term_arithmetic() {
        // unit-variance AWGN with SNR e^2 - 1 has I = 1
        let m = LinearGaussianModel::new(ScalarGaussianChannel::awgn(1.0).unwrap(), Normal::new(0.0, 2f64.exp() - 1.0).unwrap());
        let i = m.closed_form_mutual_information();
        assert_abs_diff_eq!(i, 1.0, epsilon = 1e-12);
        let p = pick_exponent_params(1.0, 0.4, None).unwrap();
        let pts = m.input_points(256, &mut RngStream::new(2, 0));
        let b = exponent_bound(&m, &m, i, 1.0, 0.4, &p, &AlphaGrids::default(), &pts).unwrap();
        assert_abs_diff_eq!(b.t4, 0.15, epsilon = 1e-12);
        assert_abs_diff_eq!(b.t2, 0.0375, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_center_can_kill_the_exponent() {
        let truth = DiscreteModel::new(DiscreteChannel::bsc(0.05).unwrap(), DiscreteDist::uniform(2).unwrap()).unwrap();
        let far = DiscreteModel::new(DiscreteChannel::bsc(0.45).unwrap(), DiscreteDist::uniform(2).unwrap()).unwrap();
        let i = truth.finite_mutual_information().unwrap();
        let p = pick_exponent_params(i, 0.5 * i, None).unwrap();
        let pts = truth.input_points(0, &mut RngStream::new(1, 0));
        let r = exponent_bound(&truth, &far, i, i, 0.5 * i, &p, &AlphaGrids::default(), &pts);
        assert!(matches!(r, Err(Error::NonpositiveExponent { .. })), "{r:?}");
    }

    proptest! {
        #[test]
        fn picks_satisfy_all_intervals(inf_mi in 0.01f64..10.0, frac in 0.0f64..0.99, hint in proptest::option::of(-1.0f64..5.0)) {
            let rate = frac * inf_mi;
            let p = pick_exponent_params(inf_mi, rate, hint).unwrap();
            prop_assert!(p.is_valid(inf_mi, rate), "{:?}", p);
            prop_assert!(p.epsilon - p.delta - p.beta1 - p.beta2 > 0.0);
        }
    }
}

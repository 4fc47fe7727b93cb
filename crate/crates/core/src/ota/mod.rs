//! Over-the-air computation with a friendly jammer.
//!
//! `K` transmitters send their messages `a_k` repeated over the block. A
//! jammer sends a codeword `x^n` from a random codebook. Bob decodes the
//! jammer's codeword with the compound decoder (the unknown message tuple
//! is the compound state), subtracts it and estimates `f(a) = sum_k a_k`
//! from the sample mean. Eve applies the same estimator without
//! cancellation.

mod security;

pub use security::{
    exact_tail_check, security_loss_check, security_tail_check, EveEstimator, Jamming, LossCheck, LossFunction, SecurityRow, TailCheck,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{EffectiveMACConfig, LinearGaussianModel, MessageTuple, Side};
use crate::coding::{Codebook, CostConstraint, JtDecoder, PreparedCodebook, BATCH};
use crate::compound::{inf_sup_mutual_information, Axis, MessageFamily, ParamGrid};
use crate::error::{Error, Result};
use crate::gaussian::Normal;
use crate::info::MIEstimate;
use crate::rng::RngStream;
use crate::stats::Moments;

/// Default number of grid points per message alphabet.
pub const DEFAULT_MESSAGE_POINTS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OTAConfig {
    pub mac: EffectiveMACConfig,
    /// Interval `[lo_k, hi_k]` of each message.
    pub alphabets: Vec<(f64, f64)>,
    /// Points per alphabet on the message grid.
    pub message_points: usize,
    pub jammer_input: Normal,
    pub cost: Option<CostConstraint>,
    pub rate: f64,
    pub n: usize,
}

impl OTAConfig {
    pub fn validate(&self) -> Result<()> {
        self.mac.validate()?;
        if self.alphabets.len() != self.mac.k() {
            return Err(Error::DimensionMismatch { expected: self.mac.k(), found: self.alphabets.len() });
        }
        if self.alphabets.iter().any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::InvalidParameter("message alphabets must be finite intervals".into()));
        }
        if self.message_points == 0 || self.n == 0 {
            return Err(Error::InvalidParameter("need message points and a positive block length".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.mac.k()
    }

    /// The message grid: `message_points` evenly spaced values per alphabet.
    pub fn message_grid(&self) -> Result<ParamGrid> {
        ParamGrid::boxed(self.alphabets.iter().map(|&(lo, hi)| Axis { lo, hi, points: self.message_points }).collect())
    }

    /// Jammer channels indexed by the message tuple, seen from `side`.
    pub fn family(&self, side: Side) -> MessageFamily {
        MessageFamily { config: self.mac.clone(), side, input: self.jammer_input }
    }

    /// `f(a) = sum_k a_k`.
    pub fn objective(&self, a: &MessageTuple) -> f64 {
        a.sum()
    }

    /// Affine post-processor: the sample mean of `y`, minus the known noise
    /// mean and the expected jammer term (`None` once the jammer has been
    /// cancelled), rescaled from `sum_k g_k a_k` to `sum_k a_k`.
    pub fn post_process(&self, side: Side, y: &[f64], jammer_removed: bool) -> f64 {
        let (gains, jam, noise) = self.mac.gains(side);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let jam_mean = if jammer_removed { 0.0 } else { jam * self.jammer_input.mean };
        let total: f64 = gains.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        (mean - noise.mean - jam_mean) * self.k() as f64 / total
    }
}

/// The interval of admissible jamming rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateWindow {
    pub sup_eve: MIEstimate,
    pub inf_bob: MIEstimate,
    pub rate: f64,
    /// `sup_eve + 3 se < R < inf_bob - 3 se`.
    pub feasible: bool,
    /// Distance of `R` from the nearer end of the stderr-widened window;
    /// negative when infeasible.
    pub margin: f64,
}

/// Sup of Eve's and inf of Bob's jammer mutual information over the
/// message grid, and whether `config.rate` lies strictly inside.
pub fn rate_window(config: &OTAConfig, mc_budget: usize, rng: &RngStream) -> Result<RateWindow> {
    config.validate()?;
    let grid = config.message_grid()?;
    let eve = inf_sup_mutual_information(&config.family(Side::Eve), &grid, mc_budget, rng)?;
    let bob = inf_sup_mutual_information(&config.family(Side::Bob), &grid, mc_budget, rng)?;
    let lo = eve.sup.mean + 3.0 * eve.sup.stderr;
    let hi = bob.inf.mean - 3.0 * bob.inf.stderr;
    let r = config.rate;
    let margin = (r - lo).min(hi - r);
    Ok(RateWindow { sup_eve: eve.sup, inf_bob: bob.inf, rate: r, feasible: lo < r && r < hi, margin })
}

/// One transmission round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub round: usize,
    pub a: Vec<f64>,
    pub m: usize,
    pub m_hat: Option<usize>,
    pub decode_ok: bool,
    pub f_true: f64,
    pub f_bob_cancel: f64,
    pub f_bob_genie: f64,
    pub f_bob_nocancel: f64,
    pub f_eve: f64,
    pub y_digest: String,
    pub z_digest: String,
}

/// First 16 hex digits of the SHA-256 of the little-endian samples.
pub fn sequence_digest(v: &[f64]) -> String {
    let mut h = Sha256::new();
    for x in v {
        h.update(x.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Uniform draw from the message grid.
pub fn draw_message(config: &OTAConfig, rng: &mut RngStream) -> MessageTuple {
    let p = config.message_points;
    MessageTuple(
        config
            .alphabets
            .iter()
            .map(|&(lo, hi)| {
                let i = rng.below(p);
                if p == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * i as f64 / (p - 1) as f64
                }
            })
            .collect(),
    )
}

/// Received block for a fixed message tuple and jammer word.
pub fn receive(config: &OTAConfig, side: Side, a: &MessageTuple, x: &[f64], rng: &mut RngStream) -> Vec<f64> {
    let (gains, jam, noise) = config.mac.gains(side);
    let s: f64 = gains.iter().zip(&a.0).map(|(g, v)| g * v).sum();
    x.iter().map(|xi| s + jam * xi + noise.sample(rng)).collect()
}

struct Pending {
    a: MessageTuple,
    m: usize,
    y: Vec<f64>,
    z: Vec<f64>,
}

/// Simulate `rounds` rounds. Round `t` draws from `rng.derive(t)`: the
/// message tuple, the jammer index, Bob's noise, then Eve's noise.
pub fn run_rounds(
    config: &OTAConfig,
    decoder: &JtDecoder<LinearGaussianModel>,
    prepared: &PreparedCodebook<'_, LinearGaussianModel>,
    rounds: usize,
    rng: &RngStream,
) -> Result<Vec<RoundResult>> {
    config.validate()?;
    let cb: &Codebook<f64> = prepared.codebook();
    if cb.n() != config.n {
        return Err(Error::DimensionMismatch { expected: config.n, found: cb.n() });
    }
    let g_j = config.mac.bob_jammer_gain;
    let batches: Vec<Vec<RoundResult>> = (0..rounds.div_ceil(BATCH))
        .into_par_iter()
        .map(|b| {
            let lo = b * BATCH;
            let hi = rounds.min(lo + BATCH);
            let pending: Vec<Pending> = (lo..hi)
                .map(|t| {
                    let mut r = rng.derive(t as u64);
                    let a = draw_message(config, &mut r);
                    let m = r.below(cb.m());
                    let x = cb.word(m);
                    let y = receive(config, Side::Bob, &a, x, &mut r);
                    let z = receive(config, Side::Eve, &a, x, &mut r);
                    Pending { a, m, y, z }
                })
                .collect();
            let queries: Vec<(&[f64], Option<usize>)> = pending.iter().map(|p| (p.y.as_slice(), Some(p.m))).collect();
            let outcomes = decoder.decode_many(prepared, &queries);
            pending
                .into_iter()
                .zip(outcomes)
                .enumerate()
                .map(|(i, (p, o))| {
                    let cancel = |word: &[f64]| -> Vec<f64> { p.y.iter().zip(word).map(|(y, x)| y - g_j * x).collect() };
                    let nocancel = config.post_process(Side::Bob, &p.y, false);
                    let cancelled = match o.decision {
                        Some(mh) => config.post_process(Side::Bob, &cancel(cb.word(mh)), true),
                        None => nocancel,
                    };
                    RoundResult {
                        round: lo + i,
                        f_true: config.objective(&p.a),
                        a: p.a.0,
                        m: p.m,
                        m_hat: o.decision,
                        decode_ok: o.decision == Some(p.m),
                        f_bob_cancel: cancelled,
                        f_bob_genie: config.post_process(Side::Bob, &cancel(cb.word(p.m)), true),
                        f_bob_nocancel: nocancel,
                        f_eve: config.post_process(Side::Eve, &p.z, false),
                        y_digest: sequence_digest(&p.y),
                        z_digest: sequence_digest(&p.z),
                    }
                })
                .collect()
        })
        .collect();
    Ok(batches.into_iter().flatten().collect())
}

/// Mean squared errors of the four estimators, with stderrs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct E2eSummary {
    pub rounds: usize,
    pub decode_success: f64,
    pub mse_cancel: f64,
    pub mse_cancel_stderr: f64,
    pub mse_genie: f64,
    pub mse_genie_stderr: f64,
    pub mse_nocancel: f64,
    pub mse_nocancel_stderr: f64,
    pub mse_eve: f64,
    pub mse_eve_stderr: f64,
}

pub fn summarize(results: &[RoundResult]) -> E2eSummary {
    let sq = |f: fn(&RoundResult) -> f64| -> Moments { results.iter().map(|r| (f(r) - r.f_true).powi(2)).collect() };
    let c = sq(|r| r.f_bob_cancel);
    let g = sq(|r| r.f_bob_genie);
    let nc = sq(|r| r.f_bob_nocancel);
    let e = sq(|r| r.f_eve);
    let ok = results.iter().filter(|r| r.decode_ok).count();
    E2eSummary {
        rounds: results.len(),
        decode_success: ok as f64 / results.len() as f64,
        mse_cancel: c.mean(),
        mse_cancel_stderr: c.stderr(),
        mse_genie: g.mean(),
        mse_genie_stderr: g.stderr(),
        mse_nocancel: nc.mean(),
        mse_nocancel_stderr: nc.stderr(),
        mse_eve: e.mean(),
        mse_eve_stderr: e.stderr(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{draw_codebook, CodebookSpec, SizeCaps};
    use crate::compound::{build_net, NetOptions};

    pub(crate) fn config(g_j: f64, h_j: f64, bob_var: f64) -> OTAConfig {
        OTAConfig {
            mac: EffectiveMACConfig {
                bob_gains: vec![1.0, 1.0],
                bob_jammer_gain: g_j,
                eve_gains: vec![1.0, 1.0],
                eve_jammer_gain: h_j,
                bob_noise: Normal::new(0.0, bob_var).unwrap(),
                eve_noise: Normal::new(0.0, 1.0).unwrap(),
            },
            alphabets: vec![(0.0, 1.0); 2],
            message_points: DEFAULT_MESSAGE_POINTS,
            jammer_input: Normal::new(0.0, 1.0).unwrap(),
            cost: None,
            rate: 0.1,
            n: 16,
        }
    }

    #[test]
    fn window_for_weak_eve() {
        let w = rate_window(&config(1.0, 0.25, 1.0), 50_000, &RngStream::new(1, 0)).unwrap();
        assert!((w.inf_bob.mean - 0.5 * 2f64.ln()).abs() <= 3.0 * w.inf_bob.stderr, "{w:?}");
        assert!((w.sup_eve.mean - 0.5 * 1.0625f64.ln()).abs() <= 3.0 * w.sup_eve.stderr, "{w:?}");
        assert!(w.feasible && w.margin > 0.0);
    }

    #[test]
    fn symmetric_window_is_empty() {
        let w = rate_window(&config(1.0, 1.0, 1.0), 20_000, &RngStream::new(1, 0)).unwrap();
        assert!(!w.feasible && w.margin < 0.0, "{w:?}");
    }

    #[test]
    fn blind_eve_admits_any_rate_below_bob() {
        let mut c = config(1.0, 0.0, 1.0);
        c.mac.eve_gains = vec![0.0, 0.0];
        let w = rate_window(&c, 20_000, &RngStream::new(1, 0)).unwrap();
        assert_eq!(w.sup_eve.mean, 0.0);
        assert!(w.feasible);
    }

    fn setup(c: &OTAConfig) -> (JtDecoder<LinearGaussianModel>, Codebook<f64>) {
        let fam = c.family(Side::Bob);
        let net = build_net(&fam, &c.message_grid().unwrap(), 0.1, &NetOptions::default(), &RngStream::new(3, 0)).unwrap();
        let dec = JtDecoder::from_net(&net, &fam, 0.3).unwrap();
        let spec = CodebookSpec::new(c.n, c.rate).unwrap();
        let cb = draw_codebook(spec, &c.jammer_input, &SizeCaps::default(), &RngStream::new(4, 0)).unwrap();
        (dec, cb)
    }

    #[test]
    fn no_jamming_at_bob_makes_cancellation_moot() {
        let c = config(0.0, 0.25, 0.2);
        let (dec, cb) = setup(&c);
        let prep = dec.prepare(&cb);
        for r in run_rounds(&c, &dec, &prep, 40, &RngStream::new(5, 0)).unwrap() {
            assert_eq!(r.f_bob_cancel, r.f_bob_nocancel);
            assert_eq!(r.f_bob_genie, r.f_bob_nocancel);
        }
    }

    #[test]
    fn genie_matches_unjammed_run() {
        let c = config(1.0, 0.25, 0.2);
        let (dec, cb) = setup(&c);
        let prep = dec.prepare(&cb);
        let rng = RngStream::new(6, 0);
        let rounds = run_rounds(&c, &dec, &prep, 20, &rng).unwrap();
        let mut quiet = c.clone();
        quiet.mac.bob_jammer_gain = 0.0;
        for r in rounds {
            // same stream, jammer gain zero: only the jammer term differs
            let mut s = rng.derive(r.round as u64);
            let a = draw_message(&quiet, &mut s);
            let _ = s.below(cb.m());
            let y = receive(&quiet, Side::Bob, &a, cb.word(r.m), &mut s);
            assert!((quiet.post_process(Side::Bob, &y, true) - r.f_bob_genie).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_genie_recovers_sum() {
        let mut c = config(1.0, 0.25, 0.2);
        c.mac.bob_noise = Normal::new(0.0, 1e-300).unwrap();
        let a = MessageTuple(vec![0.25, 0.75]);
        let x = [0.3, -1.2, 2.0];
        let y = receive(&c, Side::Bob, &a, &x, &mut RngStream::new(1, 0));
        let y0: Vec<f64> = y.iter().zip(&x).map(|(y, x)| y - x).collect();
        assert!((c.post_process(Side::Bob, &y0, true) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sum_estimator_is_shift_equivariant() {
        let c = config(1.0, 0.25, 0.2);
        let x = [0.5, -0.1, 0.7, 0.0];
        let t = 0.125;
        let a = MessageTuple(vec![0.25, 0.5]);
        let b = MessageTuple(vec![0.25 + t, 0.5 + t]);
        let mut zero = c.clone();
        zero.mac.bob_noise = Normal::new(0.0, 1e-300).unwrap();
        let ya = receive(&zero, Side::Bob, &a, &x, &mut RngStream::new(1, 0));
        let yb = receive(&zero, Side::Bob, &b, &x, &mut RngStream::new(1, 0));
        let fa = zero.post_process(Side::Bob, &ya, false);
        let fb = zero.post_process(Side::Bob, &yb, false);
        assert!((fb - fa - 2.0 * t).abs() < 1e-12);
    }

    #[test]
    fn rounds_are_deterministic_and_digested() {
        let c = config(1.0, 0.25, 0.2);
        let (dec, cb) = setup(&c);
        let prep = dec.prepare(&cb);
        let a = run_rounds(&c, &dec, &prep, 50, &RngStream::new(7, 0)).unwrap();
        let b = run_rounds(&c, &dec, &prep, 50, &RngStream::new(7, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].y_digest.len(), 16);
        let s = summarize(&a);
        assert!(s.decode_success > 0.5 && s.mse_cancel <= s.mse_nocancel, "{s:?}");
    }
}

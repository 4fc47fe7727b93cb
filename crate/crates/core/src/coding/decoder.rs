use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use crate::channel::{BlockModel, JointModel};
use crate::compound::{ApproximationNet, ChannelFamily};
use crate::error::{Error, Result};
use crate::info::MIEstimate;
use crate::rng::RngStream;
use crate::stats::binomial_stderr;

/// Outputs decoded per pass over the codebook.
pub(crate) const BATCH: usize = 32;

/// Compound joint-typicality decoder.
///
/// Codeword `c_m` is typical for output `y` when, for some centre `j`,
/// `ln W_j(c_m, y) - ln Q_j(y) >= n (I_j - epsilon)`. The decoder outputs
/// `m` when exactly one word is typical and refuses otherwise.
#[derive(Clone, Debug)]
pub struct JtDecoder<M> {
    centers: Vec<M>,
    mutual_information: Vec<f64>,
    epsilon: f64,
}

impl<M> JtDecoder<M>
where
    M: BlockModel,
    M::Input: Copy,
    M::Output: Copy,
{
    /// `epsilon` must exceed three times the largest Monte Carlo stderr of
    /// the table, otherwise estimation noise dominates the slack.
    pub fn new(centers: Vec<M>, mi_table: &[MIEstimate], epsilon: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::GridEmpty);
        }
        if centers.len() != mi_table.len() {
            return Err(Error::DimensionMismatch { expected: centers.len(), found: mi_table.len() });
        }
        let floor = 3.0 * mi_table.iter().map(|m| m.stderr).fold(0.0, f64::max);
        if !(epsilon > floor) || !epsilon.is_finite() {
            return Err(Error::EpsilonBelowNoise { epsilon, floor });
        }
        Ok(Self { centers, mutual_information: mi_table.iter().map(|m| m.mean).collect(), epsilon })
    }

    /// Decoder over the centres of `net`, using its stored table.
    pub fn from_net<F: ChannelFamily<Model = M>>(net: &ApproximationNet, family: &F, epsilon: f64) -> Result<Self> {
        Self::new(net.models(family)?, &net.mutual_information, epsilon)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn centers(&self) -> &[M] {
        &self.centers
    }

    /// Same centres and table, different slack.
    pub fn with_epsilon(&self, epsilon: f64) -> Self
    where
        M: Clone,
    {
        Self { centers: self.centers.clone(), mutual_information: self.mutual_information.clone(), epsilon }
    }

    pub fn prepare<'a>(&self, cb: &'a Codebook<M::Input>) -> PreparedCodebook<'a, M> {
        let stats = cb.words().map(|w| self.centers[0].word_stat(w)).collect();
        PreparedCodebook { cb, stats }
    }

    /// Per-centre thresholds `n (I_j - eps) + ln Q_j(y)` and the output
    /// statistic, computed once per output.
    fn output_side(&self, n: usize, y: &[M::Output]) -> (M::OutputStat, Vec<f64>) {
        let os = self.centers[0].output_stat(y);
        let thr = self
            .centers
            .iter()
            .zip(&self.mutual_information)
            .map(|(c, i)| n as f64 * (i - self.epsilon) + c.block_log_marginal(n, &os))
            .collect();
        (os, thr)
    }

    fn is_typical(&self, n: usize, ws: &M::WordStat, os: &M::OutputStat, ps: &M::PairStat, thr: &[f64]) -> bool {
        self.centers.iter().zip(thr).any(|(c, &t)| c.block_log_likelihood(n, ws, os, ps) >= t)
    }

    /// Decoded index, or `None` when zero or several words are typical.
    pub fn decode(&self, prepared: &PreparedCodebook<'_, M>, y: &[M::Output]) -> Option<usize> {
        self.decode_detailed(prepared, y, None).decision
    }

    /// Decode `y` and, if the sent index is known, classify the outcome.
    pub fn decode_detailed(&self, prepared: &PreparedCodebook<'_, M>, y: &[M::Output], sent: Option<usize>) -> DecodeOutcome {
        let mut out = self.decode_many(prepared, &[(y, sent)]);
        out.pop().expect("one outcome per output")
    }

    /// Decode several outputs in one pass over the codebook.
    pub fn decode_many(&self, prepared: &PreparedCodebook<'_, M>, ys: &[(&[M::Output], Option<usize>)]) -> Vec<DecodeOutcome> {
        let n = prepared.cb.n();
        let sides: Vec<_> = ys.iter().map(|(y, _)| self.output_side(n, y)).collect();
        let mut first: Vec<Option<usize>> = vec![None; ys.len()];
        let mut count = vec![0usize; ys.len()];
        let mut sent_typical = vec![false; ys.len()];
        let c0 = &self.centers[0];
        for (m, (word, ws)) in prepared.cb.words().zip(&prepared.stats).enumerate() {
            for (k, ((y, sent), (os, thr))) in ys.iter().zip(&sides).enumerate() {
                let ps = c0.pair_stat(word, y);
                if self.is_typical(n, ws, os, &ps, thr) {
                    count[k] += 1;
                    if first[k].is_none() {
                        first[k] = Some(m);
                    }
                    if Some(m) == *sent {
                        sent_typical[k] = true;
                    }
                }
            }
        }
        (0..ys.len())
            .map(|k| {
                let wrong = count[k] - usize::from(sent_typical[k]);
                DecodeOutcome {
                    decision: if count[k] == 1 { first[k] } else { None },
                    typical_count: count[k],
                    sent_typical: sent_typical[k],
                    wrong_typical: wrong > 0,
                }
            })
            .collect()
    }
}

/// A codebook with its per-word sufficient statistics cached.
pub struct PreparedCodebook<'a, M: BlockModel>
where
    M::Input: Copy,
    M::Output: Copy,
{
    cb: &'a Codebook<M::Input>,
    stats: Vec<M::WordStat>,
}

impl<M: BlockModel> PreparedCodebook<'_, M>
where
    M::Input: Copy,
    M::Output: Copy,
{
    pub fn codebook(&self) -> &Codebook<M::Input> {
        self.cb
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub decision: Option<usize>,
    pub typical_count: usize,
    /// The sent word passed the test for some centre. Always false when
    /// the sent index was not supplied.
    pub sent_typical: bool,
    /// Some word other than the sent one passed the test.
    pub wrong_typical: bool,
}

/// Empirical error with the two error events tallied separately. A trial
/// can count towards both.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub trials: usize,
    pub errors: usize,
    pub err: f64,
    pub stderr: f64,
    /// Fraction of trials where the sent word was atypical for every centre.
    pub e1_frac: f64,
    /// Fraction of trials where some wrong word was typical.
    pub e2_frac: f64,
}

/// Send a uniformly chosen codeword through `truth` `trials` times and
/// decode. Trial `t` draws everything from `rng.derive(t)`, so the result
/// does not depend on batching or the worker count.
pub fn estimate_error<M, T>(
    decoder: &JtDecoder<M>,
    prepared: &PreparedCodebook<'_, M>,
    truth: &T,
    trials: usize,
    rng: &RngStream,
) -> Result<ErrorEstimate>
where
    M: BlockModel,
    M::Input: Copy,
    M::Output: Copy,
    T: JointModel<Input = M::Input, Output = M::Output>,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one decoding trial".into()));
    }
    let cb = prepared.cb;
    let batches: Vec<Vec<DecodeOutcome>> = (0..trials.div_ceil(BATCH))
        .into_par_iter()
        .map(|b| {
            let lo = b * BATCH;
            let hi = trials.min(lo + BATCH);
            let sends: Vec<(Vec<M::Output>, usize)> = (lo..hi)
                .map(|t| {
                    let mut r = rng.derive(t as u64);
                    let m = r.below(cb.m());
                    let y = cb.word(m).iter().map(|x| truth.sample_output(x, &mut r)).collect();
                    (y, m)
                })
                .collect();
            let refs: Vec<(&[M::Output], Option<usize>)> = sends.iter().map(|(y, m)| (y.as_slice(), Some(*m))).collect();
            decoder.decode_many(prepared, &refs)
        })
        .collect();
    let (mut errors, mut e1, mut e2) = (0usize, 0usize, 0usize);
    for o in batches.iter().flatten() {
        let ok = o.sent_typical && !o.wrong_typical;
        errors += usize::from(!ok);
        e1 += usize::from(!o.sent_typical);
        e2 += usize::from(o.wrong_typical);
    }
    let t = trials as f64;
    let err = errors as f64 / t;
    Ok(ErrorEstimate { trials, errors, err, stderr: binomial_stderr(err, trials), e1_frac: e1 as f64 / t, e2_frac: e2 as f64 / t })
}

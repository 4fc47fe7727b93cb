//! One-sided operational bounds for the eavesdropper.
//!
//! If Eve's output law under codebook jamming (`mu`) is within `delta` of
//! the law under i.i.d. jamming (`nu`) in the half-normalised distance,
//! no estimator can raise the probability of any event by more than
//! `delta`, nor lower an expected loss bounded by `L_max` by more than
//! `L_max delta`. The checks below estimate both sides and test only
//! these directions.

use serde::{Deserialize, Serialize};

use super::{receive, OTAConfig};
use crate::channel::{DiscreteModel, MessageTuple, Side};
use crate::coding::Codebook;
use crate::error::{Error, Result};
use crate::gaussian::Normal;
use crate::resolvability::{exact_tv_discrete, TVEstimate};
use crate::rng::RngStream;
use crate::stats::binomial_stderr;

/// How the jammer draws its block.
#[derive(Clone, Copy, Debug)]
pub enum Jamming<'a> {
    /// Uniformly chosen codeword.
    Codebook(&'a Codebook<f64>),
    /// i.i.d. symbols from the input law.
    Iid(Normal),
}

impl Jamming<'_> {
    fn block(&self, n: usize, rng: &mut RngStream) -> Vec<f64> {
        match self {
            Jamming::Codebook(cb) => cb.word(rng.below(cb.m())).to_vec(),
            Jamming::Iid(p) => (0..n).map(|_| p.sample(rng)).collect(),
        }
    }
}

/// Eve's estimate of `f(a)` from her block.
pub type EveEstimator<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecurityRow {
    pub n: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    pub tv: f64,
    pub tv_stderr: f64,
    /// Tail threshold, or the loss name.
    pub eps_or_lossname: String,
    pub mu_stat: f64,
    pub nu_stat: f64,
    /// Largest decrease of the statistic allowed by the bound.
    pub bound: f64,
    pub satisfied: bool,
    pub mu_stderr: f64,
    pub nu_stderr: f64,
}

/// `mu_stat >= nu_stat - bound - 3 se`, where `se` combines both Monte
/// Carlo errors and the bound's own uncertainty `slack_stderr`.
fn one_sided(mu: (f64, f64), nu: (f64, f64), bound: f64, slack_stderr: f64) -> bool {
    let se = (mu.1 * mu.1 + nu.1 * nu.1 + slack_stderr * slack_stderr).sqrt();
    mu.0 >= nu.0 - bound - 3.0 * se
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    /// Half-normalised distance used as the bound.
    pub delta_half: f64,
    pub rows: Vec<SecurityRow>,
}

impl TailCheck {
    pub fn all_satisfied(&self) -> bool {
        self.rows.iter().all(|r| r.satisfied)
    }
}

fn eve_statistics(
    config: &OTAConfig,
    a: &MessageTuple,
    jam: Jamming<'_>,
    g: EveEstimator<'_>,
    n_rounds: usize,
    rng: &RngStream,
) -> Vec<f64> {
    (0..n_rounds)
        .map(|t| {
            let mut r = rng.derive(t as u64);
            let x = jam.block(config.n, &mut r);
            g(&receive(config, Side::Eve, a, &x, &mut r))
        })
        .collect()
}

/// For each `eps`, the probabilities that Eve's estimate misses `f(a)`
/// by more than `eps` under `mu` (the given jamming) and under `nu`
/// (i.i.d. jamming from the configured input law), with the message tuple
/// held fixed. Bound: `P_mu(miss) >= P_nu(miss) - delta_half`.
#[allow(clippy::too_many_arguments)]
pub fn security_tail_check(
    config: &OTAConfig,
    a: &MessageTuple,
    mu: Jamming<'_>,
    g: EveEstimator<'_>,
    eps_grid: &[f64],
    n_rounds: usize,
    rng: &RngStream,
    tv: &TVEstimate,
) -> Result<TailCheck> {
    if n_rounds == 0 {
        return Err(Error::InvalidParameter("need at least one round".into()));
    }
    // the single conversion from the signed-measure norm
    let delta_half = tv.half();
    let f = config.objective(a);
    let mu_stats = eve_statistics(config, a, mu, g, n_rounds, &rng.derive(0));
    let nu_stats = eve_statistics(config, a, Jamming::Iid(config.jammer_input), g, n_rounds, &rng.derive(1));
    let tail = |v: &[f64], eps: f64| {
        let p = v.iter().filter(|s| (*s - f).abs() > eps).count() as f64 / v.len() as f64;
        (p, binomial_stderr(p, v.len()))
    };
    let rows = eps_grid
        .iter()
        .map(|&eps| {
            let m = tail(&mu_stats, eps);
            let v = tail(&nu_stats, eps);
            SecurityRow {
                n: config.n,
                rate: config.rate,
                tv: tv.value,
                tv_stderr: tv.stderr,
                eps_or_lossname: format!("{eps}"),
                mu_stat: m.0,
                mu_stderr: m.1,
                nu_stat: v.0,
                nu_stderr: v.1,
                bound: delta_half,
                satisfied: one_sided(m, v, delta_half, 0.5 * tv.stderr),
            }
        })
        .collect();
    Ok(TailCheck { delta_half, rows })
}

/// Losses bounded by `L_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossFunction {
    /// `min((g - f)^2, range^2)`.
    ClampedSquared { range: f64 },
    /// `(g - f)^2` with a declared maximum; exceeding it is an error.
    Squared { l_max: f64 },
    /// `1{|g - f| > eps}`.
    Miss { eps: f64 },
    /// Always zero.
    Zero,
}

impl LossFunction {
    pub fn l_max(&self) -> f64 {
        match self {
            LossFunction::ClampedSquared { range } => range * range,
            LossFunction::Squared { l_max } => *l_max,
            LossFunction::Miss { .. } => 1.0,
            LossFunction::Zero => 0.0,
        }
    }

    pub fn eval(&self, estimate: f64, truth: f64) -> f64 {
        match self {
            LossFunction::ClampedSquared { range } => (estimate - truth).powi(2).min(range * range),
            LossFunction::Squared { .. } => (estimate - truth).powi(2),
            LossFunction::Miss { eps } => f64::from(u8::from((estimate - truth).abs() > *eps)),
            LossFunction::Zero => 0.0,
        }
    }

    pub fn name(&self) -> String {
        match self {
            LossFunction::ClampedSquared { range } => format!("clamped_sq_{range}"),
            LossFunction::Squared { .. } => "squared".into(),
            LossFunction::Miss { eps } => format!("miss_{eps}"),
            LossFunction::Zero => "zero".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossCheck {
    pub delta_half: f64,
    pub row: SecurityRow,
    /// `E_nu L - E_mu L`, what codebook jamming hands Eve.
    pub empirical_gain: f64,
    pub gain_stderr: f64,
    /// `Delta^2 delta_half` for the clamped squared loss.
    pub squared_loss_bound: Option<f64>,
}

/// Expected losses of Eve's estimate under `mu` and `nu`. Bound:
/// `E_mu L >= E_nu L - L_max delta_half`.
#[allow(clippy::too_many_arguments)]
pub fn security_loss_check(
    config: &OTAConfig,
    a: &MessageTuple,
    mu: Jamming<'_>,
    g: EveEstimator<'_>,
    loss: &LossFunction,
    n_rounds: usize,
    rng: &RngStream,
    tv: &TVEstimate,
) -> Result<LossCheck> {
    if n_rounds == 0 {
        return Err(Error::InvalidParameter("need at least one round".into()));
    }
    let l_max = loss.l_max();
    let delta_half = tv.half();
    let f = config.objective(a);
    let mut moments = Vec::with_capacity(2);
    for (label, jam) in [(0, mu), (1, Jamming::Iid(config.jammer_input))] {
        let vals: Vec<f64> = eve_statistics(config, a, jam, g, n_rounds, &rng.derive(label)).into_iter().map(|s| loss.eval(s, f)).collect();
        if let Some(&bad) = vals.iter().find(|&&v| !(0.0..=l_max).contains(&v)) {
            return Err(Error::InvalidLoss { value: bad, max: l_max });
        }
        moments.push(vals.into_iter().collect::<crate::stats::Moments>());
    }
    let m = (moments[0].mean(), moments[0].stderr());
    let v = (moments[1].mean(), moments[1].stderr());
    let bound = l_max * delta_half;
    Ok(LossCheck {
        delta_half,
        row: SecurityRow {
            n: config.n,
            rate: config.rate,
            tv: tv.value,
            tv_stderr: tv.stderr,
            eps_or_lossname: loss.name(),
            mu_stat: m.0,
            mu_stderr: m.1,
            nu_stat: v.0,
            nu_stderr: v.1,
            bound,
            satisfied: one_sided(m, v, bound, 0.5 * l_max * tv.stderr),
        },
        empirical_gain: v.0 - m.0,
        gain_stderr: (m.1 * m.1 + v.1 * v.1).sqrt(),
        squared_loss_bound: match loss {
            LossFunction::ClampedSquared { .. } => Some(bound),
            _ => None,
        },
    })
}

/// Exact tail check on a finite system: every output block is enumerated
/// and both tail probabilities and the distance are exact, so the bound
/// must hold with no statistical slack.
pub fn exact_tail_check(
    cb: &Codebook<usize>,
    model: &DiscreteModel,
    g: &dyn Fn(&[usize]) -> f64,
    f_true: f64,
    eps_grid: &[f64],
) -> Result<TailCheck> {
    let tv = exact_tv_discrete(cb, model)?;
    let delta_half = tv.half();
    let n = cb.n();
    let k = model.output_size();
    let q = model.marginal().probs();
    let mut mu_tail = vec![0.0; eps_grid.len()];
    let mut nu_tail = vec![0.0; eps_grid.len()];
    let mut z = vec![0usize; n];
    for _ in 0..tv.samples {
        let nu: f64 = z.iter().map(|&s| q[s]).product();
        let mu: f64 =
            cb.words().map(|w| w.iter().zip(&z).map(|(&x, &s)| model.channel().prob(x, s)).product::<f64>()).sum::<f64>() / cb.m() as f64;
        let err = (g(&z) - f_true).abs();
        for (i, &eps) in eps_grid.iter().enumerate() {
            if err > eps {
                mu_tail[i] += mu;
                nu_tail[i] += nu;
            }
        }
        for s in z.iter_mut() {
            *s += 1;
            if *s < k {
                break;
            }
            *s = 0;
        }
    }
    let rows = eps_grid
        .iter()
        .enumerate()
        .map(|(i, &eps)| SecurityRow {
            n,
            rate: cb.spec().rate,
            tv: tv.value,
            tv_stderr: 0.0,
            eps_or_lossname: format!("{eps}"),
            mu_stat: mu_tail[i],
            mu_stderr: 0.0,
            nu_stat: nu_tail[i],
            nu_stderr: 0.0,
            bound: delta_half,
            // rounding slack only
            satisfied: mu_tail[i] >= nu_tail[i] - delta_half - 1e-12,
        })
        .collect();
    Ok(TailCheck { delta_half, rows })
}

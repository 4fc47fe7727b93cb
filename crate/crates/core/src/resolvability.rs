//! Distance between the output law induced by a random codebook and the
//! i.i.d. output law.
//!
//! `mu` is the law of `Z^n` when a uniformly chosen codeword is sent;
//! `nu = Q_P^n` is the output law under i.i.d. inputs from `P`. Distances
//! use the signed-measure norm `||mu - nu|| = sum |mu - nu|`, in `[0, 2]`.

use serde::{Deserialize, Serialize};

use crate::channel::{BlockModel, DiscreteModel};
use crate::coding::{draw_codebook, Codebook, CodebookSpec, SizeCaps, SymbolLaw};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{log_sum_exp, mc_moments};

/// Largest output space enumerated exactly.
pub const MAX_ENUMERATION: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvMethod {
    ExactEnum,
    IsMc,
}

impl TvMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TvMethod::ExactEnum => "exact_enum",
            TvMethod::IsMc => "is_mc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TVEstimate {
    /// Signed-measure norm, in `[0, 2]`.
    pub value: f64,
    pub stderr: f64,
    pub method: TvMethod,
    pub n: usize,
    pub m: usize,
    pub samples: usize,
    /// Times the raw estimate left `[0, 2]` and was clipped.
    pub clip_events: usize,
}

impl TVEstimate {
    /// `||mu - nu|| / 2`, the largest probability gain on any event.
    pub fn half(&self) -> f64 {
        0.5 * self.value
    }
}

/// The codebook-induced output mixture with per-word statistics cached.
pub struct CodebookMixture<'a, M: BlockModel>
where
    M::Input: Copy,
    M::Output: Copy,
{
    model: &'a M,
    cb: &'a Codebook<M::Input>,
    stats: Vec<M::WordStat>,
}

impl<'a, M: BlockModel> CodebookMixture<'a, M>
where
    M::Input: Copy,
    M::Output: Copy,
{
    pub fn new(model: &'a M, cb: &'a Codebook<M::Input>) -> Self {
        let stats = cb.words().map(|w| model.word_stat(w)).collect();
        Self { model, cb, stats }
    }

    /// `ln mu(z)` by log-sum-exp over codewords.
    pub fn log_density(&self, z: &[M::Output]) -> f64 {
        let n = self.cb.n();
        let os = self.model.output_stat(z);
        let terms: Vec<f64> = self
            .cb
            .words()
            .zip(&self.stats)
            .map(|(w, ws)| self.model.block_log_likelihood(n, ws, &os, &self.model.pair_stat(w, z)))
            .collect();
        log_sum_exp(&terms) - (self.cb.m() as f64).ln()
    }

    /// `ln nu(z)` under the i.i.d. output law.
    pub fn log_product_density(&self, z: &[M::Output]) -> f64 {
        self.model.block_log_marginal(z.len(), &self.model.output_stat(z))
    }
}

/// `ln[(1/M) sum_m prod_i W(c_mi, z_i)]`.
pub fn mixture_log_density<M>(model: &M, cb: &Codebook<M::Input>, z: &[M::Output]) -> Result<f64>
where
    M: BlockModel,
    M::Input: Copy,
    M::Output: Copy,
{
    if z.len() != cb.n() {
        return Err(Error::DimensionMismatch { expected: cb.n(), found: z.len() });
    }
    Ok(CodebookMixture::new(model, cb).log_density(z))
}

/// Exact `sum_z |mu(z) - nu(z)|` by enumerating every output sequence.
pub fn exact_tv_discrete(cb: &Codebook<usize>, model: &DiscreteModel) -> Result<TVEstimate> {
    let n = cb.n();
    let k = model.output_size();
    let space = (k as u64).checked_pow(n as u32).filter(|&s| s <= MAX_ENUMERATION);
    let Some(space) = space else {
        return Err(Error::SizeOverflow(format!("{k}^{n} output sequences exceed 2^20")));
    };
    if let Some(&bad) = cb.words().flatten().find(|&&x| x >= model.input_size()) {
        return Err(Error::IndexOutOfRange { index: bad, size: model.input_size() });
    }
    let q = model.marginal().probs();
    let m = cb.m() as f64;
    let mut z = vec![0usize; n];
    let mut total = 0.0;
    for _ in 0..space {
        let nu: f64 = z.iter().map(|&s| q[s]).product();
        let mu: f64 = cb.words().map(|w| w.iter().zip(&z).map(|(&x, &s)| model.channel().prob(x, s)).product::<f64>()).sum::<f64>() / m;
        total += (mu - nu).abs();
        // odometer increment, first symbol fastest
        for s in z.iter_mut() {
            *s += 1;
            if *s < k {
                break;
            }
            *s = 0;
        }
    }
    Ok(TVEstimate {
        value: total.clamp(0.0, 2.0),
        stderr: 0.0,
        method: TvMethod::ExactEnum,
        n,
        m: cb.m(),
        samples: space as usize,
        clip_events: 0,
    })
}

/// Form of the importance-sampled summand. Both have mean `||mu - nu||`
/// under `Z ~ nu` because `E_nu[dmu/dnu] = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvSummand {
    /// `|r - 1|`: unbounded, the estimate is clipped to `[0, 2]`.
    Absolute,
    /// `2 (1 - r)^+`: bounded in `[0, 2]`, lower variance.
    #[default]
    PositivePart,
}

/// Importance-sampled `E_nu |dmu/dnu - 1|` with `Z ~ nu`.
pub fn tv_importance_mc<M>(model: &M, cb: &Codebook<M::Input>, n_samples: usize, summand: TvSummand, rng: &RngStream) -> Result<TVEstimate>
where
    M: BlockModel,
    M::Input: Copy,
    M::Output: Copy,
{
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mix = CodebookMixture::new(model, cb);
    let n = cb.n();
    let moments = mc_moments(n_samples, rng, |r| {
        let z: Vec<M::Output> = (0..n)
            .map(|_| {
                let x = model.sample_input(r);
                model.sample_output(&x, r)
            })
            .collect();
        let ratio = (mix.log_density(&z) - mix.log_product_density(&z)).exp();
        match summand {
            TvSummand::Absolute => (ratio - 1.0).abs(),
            TvSummand::PositivePart => 2.0 * (1.0 - ratio).max(0.0),
        }
    });
    let raw = moments.mean();
    let value = raw.clamp(0.0, 2.0);
    Ok(TVEstimate {
        value,
        stderr: moments.stderr(),
        method: TvMethod::IsMc,
        n,
        m: cb.m(),
        samples: n_samples,
        clip_events: usize::from(value != raw),
    })
}

/// One row of a decay experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvRow {
    pub n: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    pub replicate: usize,
    pub method: TvMethod,
    pub tv: f64,
    pub stderr: f64,
    pub clip_events: usize,
    pub replaced_count: Option<usize>,
    pub seed: u64,
}

/// Block lengths, rate and replicate count of a decay experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySweep {
    pub block_lengths: Vec<usize>,
    pub rate: f64,
    pub replicates: usize,
    #[serde(default)]
    pub caps: SizeCaps,
}

/// Codebook post-processing, e.g. a cost constraint; returns the new
/// codebook and the number of replaced words.
pub type Constrain<'a, S> = &'a (dyn Fn(&Codebook<S>) -> Result<(Codebook<S>, usize)> + Sync);

/// Draw `replicates` codebooks per block length, optionally constrain
/// them, and measure each with `measure`. Replicate `r` at length `n`
/// draws its codebook from `rng.derive(n).derive(2 r)` and measures with
/// `rng.derive(n).derive(2 r + 1)`.
pub fn tv_decay_experiment<L, F>(
    law: &L,
    sweep: &DecaySweep,
    constrain: Option<Constrain<'_, L::Symbol>>,
    measure: F,
    rng: &RngStream,
) -> Result<Vec<TvRow>>
where
    L: SymbolLaw,
    F: Fn(&Codebook<L::Symbol>, &RngStream) -> Result<TVEstimate>,
{
    if sweep.replicates == 0 || sweep.block_lengths.is_empty() {
        return Err(Error::InvalidParameter("decay sweep needs block lengths and replicates".into()));
    }
    let mut rows = Vec::new();
    for &n in &sweep.block_lengths {
        let spec = CodebookSpec::new(n, sweep.rate)?;
        spec.check(&sweep.caps)?;
        let base = rng.derive(n as u64);
        for r in 0..sweep.replicates {
            let cb = draw_codebook(spec, law, &sweep.caps, &base.derive(2 * r as u64))?;
            let (cb, replaced) = match constrain {
                Some(f) => {
                    let (c, k) = f(&cb)?;
                    (c, Some(k))
                }
                None => (cb, None),
            };
            let tv = measure(&cb, &base.derive(2 * r as u64 + 1))?;
            rows.push(TvRow {
                n,
                rate: sweep.rate,
                replicate: r,
                method: tv.method,
                tv: tv.value,
                stderr: tv.stderr,
                clip_events: tv.clip_events,
                replaced_count: replaced,
                seed: rng.seed(),
            });
        }
    }
    Ok(rows)
}

/// `(max - min) / median` of the values, a spread summary for replicate
/// codebooks.
pub fn dispersion(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let median = if v.len() % 2 == 1 { v[v.len() / 2] } else { 0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2]) };
    (v[v.len() - 1] - v[0]) / median
}

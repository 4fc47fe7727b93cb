//! Experiment orchestration: each runner reads its sections of an
//! [`ExperimentConfig`], fans the master seed out to module streams and
//! returns typed results; `write` methods emit the CSV logs.
//!
//! Stream labels (`RngStream::new(seed, label)`): net 1, codebook 2,
//! decode 3, resolvability 4, end-to-end 5, rate window 6, exponent 7,
//! mutual information 8, security 9.

mod config;
mod output;

pub use config::{
    missing_keys, CompoundSection, CostSection, DecodeSection, ExperimentConfig, Needs, OtaSection, RateBasis, ResolvabilityChannel,
    ResolvabilitySection, SecuritySection,
};
pub use output::{read_csv, write_csv, VERSION};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{
    effective_channel, DiscreteChannel, DiscreteDist, DiscreteModel, EffectiveMACConfig, JointModel, LinearGaussianModel, MessageTuple,
    ScalarGaussianChannel, Side,
};
use crate::coding::{
    apply_cost_constraint, draw_codebook, estimate_error, exponent_bound, pick_exponent_params, AlphaGrids, Codebook, CodebookSpec,
    CostConstraint, ExponentBound, ExponentParams, JtDecoder,
};
use crate::compound::{
    build_net, expected_kl, inf_sup_mutual_information, verify_net, ApproximationNet, AwgnFamily, ChannelFamily, InfSup, NetOptions,
    ParamGrid, VerificationReport,
};
use crate::error::{Error, Result};
use crate::ota::{
    rate_window, run_rounds, security_loss_check, security_tail_check, summarize, E2eSummary, Jamming, LossCheck, LossFunction, OTAConfig,
    RateWindow, RoundResult, SecurityRow, TailCheck,
};
use crate::resolvability::{exact_tv_discrete, tv_decay_experiment, tv_importance_mc, DecaySweep, TVEstimate, TvRow, TvSummand};
use crate::rng::{streams, RngStream};

fn stream(cfg: &ExperimentConfig, label: u64) -> RngStream {
    RngStream::new(cfg.seed, label)
}

// ---------------------------------------------------------------- compound

fn awgn_family(c: &CompoundSection) -> AwgnFamily {
    AwgnFamily { gain: c.gain, input: c.input }
}

fn noise_grid(c: &CompoundSection) -> ParamGrid {
    ParamGrid::finite(c.noise_vars.iter().map(|&v| vec![v]).collect())
}

fn net_options(c: &CompoundSection) -> NetOptions {
    NetOptions { input_points: c.input_points, mi_samples: c.mi_samples, renyi_order: c.renyi_order }
}

#[derive(Clone, Debug)]
pub struct NetRun {
    pub net: ApproximationNet,
    pub verification: VerificationReport,
}

#[derive(Serialize)]
struct CenterRow {
    j: usize,
    noise_var: f64,
    mi: f64,
    mi_stderr: f64,
}

impl NetRun {
    pub fn summary(&self) -> String {
        format!(
            "net: J={} delta={} verified={} worst_kl={:.6}",
            self.net.j(),
            self.net.delta,
            self.verification.is_clean(),
            self.verification.worst_kl
        )
    }

    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join("net.json");
        self.net.save(&json)?;
        let rows: Vec<CenterRow> = self
            .net
            .centers
            .iter()
            .zip(&self.net.mutual_information)
            .enumerate()
            .map(|(j, (c, m))| CenterRow { j, noise_var: c[0], mi: m.mean, mi_stderr: m.stderr })
            .collect();
        Ok(vec![json, write_csv(dir, "net.csv", cfg, &rows)?])
    }
}

/// Build the approximation net of the compound family and audit it on
/// every grid state.
pub fn run_net(cfg: &ExperimentConfig) -> Result<NetRun> {
    let c = ExperimentConfig::section(&cfg.compound, "compound")?;
    let fam = awgn_family(c);
    let grid = noise_grid(c);
    let opts = net_options(c);
    let rng = stream(cfg, streams::NET);
    let net = build_net(&fam, &grid, c.delta, &opts, &rng)?;
    let verification = verify_net(&net, &fam, &grid.points(), c.delta, &opts, &rng.derive(1))?;
    Ok(NetRun { net, verification })
}

// ------------------------------------------------------------------ decode

/// Error of one (state, block length) cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    pub trials: usize,
    pub err: f64,
    pub stderr: f64,
    pub e1_frac: f64,
    pub e2_frac: f64,
    pub seed: u64,
    /// Noise variance of the true channel.
    pub state: f64,
}

#[derive(Clone, Debug)]
pub struct DecodeRun {
    pub info: InfSup,
    pub rate: f64,
    pub epsilon: f64,
    pub net: ApproximationNet,
    pub rows: Vec<ErrorRow>,
}

impl DecodeRun {
    /// Largest error over states at block length `n`.
    pub fn worst_at(&self, n: usize) -> Option<ErrorRow> {
        self.rows.iter().filter(|r| r.n == n).copied().max_by(|a, b| a.err.total_cmp(&b.err))
    }

    /// Worst-state error for each block length, in sweep order.
    pub fn worst_curve(&self) -> Vec<ErrorRow> {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        ns.dedup();
        ns.into_iter().filter_map(|n| self.worst_at(n)).collect()
    }

    pub fn summary(&self) -> String {
        let curve: Vec<String> = self.worst_curve().iter().map(|r| format!("n={}:{:.4}", r.n, r.err)).collect();
        format!(
            "decode-sim: infI={:.4} supI={:.4} R={:.4} eps={:.4} J={} worst-state err {}",
            self.info.inf.mean,
            self.info.sup.mean,
            self.rate,
            self.epsilon,
            self.net.j(),
            curve.join(" ")
        )
    }

    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
        Ok(vec![write_csv(dir, "errors.csv", cfg, &self.rows)?])
    }
}

fn decode_rate(c: &CompoundSection, d: &DecodeSection, cfg: &ExperimentConfig) -> Result<(InfSup, f64, f64)> {
    let info = inf_sup_mutual_information(&awgn_family(c), &noise_grid(c), c.mi_samples, &stream(cfg, streams::MUTUAL_INFORMATION))?;
    let basis = match d.rate_basis {
        RateBasis::Inf => info.inf.mean,
        RateBasis::Sup => info.sup.mean,
    };
    let rate = d.rate_fraction * basis;
    let epsilon = match (d.epsilon, d.epsilon_fraction) {
        (Some(e), _) => e,
        (None, Some(f)) => f * (info.inf.mean - rate),
        (None, None) => unreachable!("checked at parse time"),
    };
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("decode slack {epsilon} is not positive; give an explicit epsilon when R >= infI")));
    }
    Ok((info, rate, epsilon))
}

/// Error curves of the compound decoder for every state of the family.
/// The codebook for length `n` comes from the codebook stream derived by
/// `n`; the trials for state `s` from the decode stream derived by `n`
/// and then by the state index.
pub fn run_decode(cfg: &ExperimentConfig) -> Result<DecodeRun> {
    let c = ExperimentConfig::section(&cfg.compound, "compound")?;
    let d = ExperimentConfig::section(&cfg.decode, "decode")?;
    let fam = awgn_family(c);
    let grid = noise_grid(c);
    let net = build_net(&fam, &grid, c.delta, &net_options(c), &stream(cfg, streams::NET))?;
    let (info, rate, epsilon) = decode_rate(c, d, cfg)?;
    let decoder = JtDecoder::from_net(&net, &fam, epsilon)?;
    let states = grid.points();
    let mut rows = Vec::new();
    for &n in &d.block_lengths {
        let spec = CodebookSpec::new(n, rate)?;
        let cb = draw_codebook(spec, &c.input, &d.caps, &stream(cfg, streams::CODEBOOK).derive(n as u64))?;
        let prepared = decoder.prepare(&cb);
        let trials_rng = stream(cfg, streams::DECODE).derive(n as u64);
        for (i, s) in states.iter().enumerate() {
            let truth = fam.member(s)?;
            let e = estimate_error(&decoder, &prepared, &truth, d.trials, &trials_rng.derive(i as u64))?;
            rows.push(ErrorRow {
                state: s[0],
                n,
                rate,
                trials: e.trials,
                err: e.err,
                stderr: e.stderr,
                e1_frac: e.e1_frac,
                e2_frac: e.e2_frac,
                seed: cfg.seed,
            });
        }
    }
    Ok(DecodeRun { info, rate, epsilon, net, rows })
}

// ---------------------------------------------------------------- exponent

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub state: f64,
    pub center: f64,
    pub gamma: f64,
    pub t1: f64,
    pub alpha1: f64,
    pub t2: f64,
    pub t3: f64,
    pub alpha3: f64,
    pub t4: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub beta1: f64,
    pub beta2: f64,
}

#[derive(Clone, Debug)]
pub struct ExponentRun {
    pub inf_mi: f64,
    pub rate: f64,
    pub params: ExponentParams,
    pub rows: Vec<ExponentRow>,
}

impl ExponentRun {
    /// Smallest exponent over states.
    pub fn gamma(&self) -> f64 {
        self.rows.iter().map(|r| r.gamma).fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> String {
        format!(
            "exponent: infI={:.4} R={:.4} delta={:.5} eps={:.5} beta1={:.5} beta2={:.5} gamma={:.6}",
            self.inf_mi,
            self.rate,
            self.params.delta,
            self.params.epsilon,
            self.params.beta1,
            self.params.beta2,
            self.gamma()
        )
    }

    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
        Ok(vec![write_csv(dir, "exponent.csv", cfg, &self.rows)?])
    }
}

/// Exponent of the decoding analysis for each state, paired with its
/// nearest net centre, at the midpoint parameter picks. Mutual
/// informations are the closed-form AWGN values.
pub fn run_exponent(cfg: &ExperimentConfig) -> Result<ExponentRun> {
    let c = ExperimentConfig::section(&cfg.compound, "compound")?;
    let d = ExperimentConfig::section(&cfg.decode, "decode")?;
    let fam = awgn_family(c);
    let grid = noise_grid(c);
    let net = build_net(&fam, &grid, c.delta, &net_options(c), &stream(cfg, streams::NET))?;
    let (_, rate, _) = decode_rate(c, d, cfg)?;
    let states = grid.points();
    let models: Vec<LinearGaussianModel> = states.iter().map(|s| fam.member(s)).collect::<Result<_>>()?;
    let inf_mi = models.iter().map(|m| m.closed_form_mutual_information()).fold(f64::INFINITY, f64::min);
    let params = pick_exponent_params(inf_mi, rate, None)?;
    let centers = net.models(&fam)?;
    let mut r = stream(cfg, streams::EXPONENT);
    let points = models[0].input_points(c.input_points, &mut r);
    let grids = AlphaGrids::default();
    let mut rows = Vec::new();
    for (s, truth) in states.iter().zip(&models) {
        let mut best = (f64::INFINITY, 0);
        for (j, m) in centers.iter().enumerate() {
            let kl = expected_kl(truth, m, &points)?;
            if kl < best.0 {
                best = (kl, j);
            }
        }
        let center = &centers[best.1];
        let b: ExponentBound =
            exponent_bound(truth, center, truth.closed_form_mutual_information(), inf_mi, rate, &params, &grids, &points)?;
        rows.push(ExponentRow {
            state: s[0],
            center: net.centers[best.1][0],
            gamma: b.gamma,
            t1: b.t1,
            alpha1: b.alpha1,
            t2: b.t2,
            t3: b.t3,
            alpha3: b.alpha3,
            t4: b.t4,
            delta: params.delta,
            epsilon: params.epsilon,
            beta1: params.beta1,
            beta2: params.beta2,
        });
    }
    Ok(ExponentRun { inf_mi, rate, params, rows })
}

// ----------------------------------------------------------- resolvability

#[derive(Clone, Debug)]
pub struct ResolvabilityRun {
    pub mutual_information: f64,
    pub rate: f64,
    pub rows: Vec<TvRow>,
}

impl ResolvabilityRun {
    /// Mean distance over replicates for each block length.
    pub fn mean_curve(&self) -> Vec<(usize, f64)> {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        ns.dedup();
        ns.into_iter()
            .map(|n| {
                let v: Vec<f64> = self.rows.iter().filter(|r| r.n == n).map(|r| r.tv).collect();
                (n, v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect()
    }

    pub fn summary(&self) -> String {
        let curve: Vec<String> = self.mean_curve().iter().map(|(n, v)| format!("n={n}:{v:.5}")).collect();
        format!("resolvability-sim: I={:.4} R={:.4} mean tv {}", self.mutual_information, self.rate, curve.join(" "))
    }

    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
        Ok(vec![write_csv(dir, "tv.csv", cfg, &self.rows)?])
    }
}

fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing keys: resolvability.{key}")))
}

fn cost_constraint(c: &CostSection, n: usize) -> Result<CostConstraint> {
    CostConstraint::with_zero_word(c.function, c.budget, n)
}

/// Distance decay over block lengths for replicate codebooks.
pub fn run_resolvability(cfg: &ExperimentConfig) -> Result<ResolvabilityRun> {
    let r = ExperimentConfig::section(&cfg.resolvability, "resolvability")?;
    let rng = stream(cfg, streams::RESOLVABILITY);
    let pick_rate = |i: f64| r.rate.unwrap_or_else(|| r.rate_fraction.unwrap_or(0.0) * i);
    match r.channel {
        ResolvabilityChannel::Gaussian => {
            let input = need(r.input, "input")?;
            let ch = ScalarGaussianChannel::new(0.0, need(r.gain, "gain")?, need(r.noise_var, "noise_var")?)?;
            let model = LinearGaussianModel::new(ch, input);
            let i = model.closed_form_mutual_information();
            let rate = pick_rate(i);
            let sweep = DecaySweep { block_lengths: r.block_lengths.clone(), rate, replicates: r.replicates, caps: r.caps };
            let constrain = |cb: &Codebook<f64>| -> Result<(Codebook<f64>, usize)> {
                let cost = r.cost.as_ref().expect("only called when configured");
                apply_cost_constraint(cb, &cost_constraint(cost, cb.n())?)
            };
            let rows = tv_decay_experiment(
                &input,
                &sweep,
                r.cost.as_ref().map(|_| &constrain as _),
                |cb, s| tv_importance_mc(&model, cb, r.samples, TvSummand::PositivePart, s),
                &rng,
            )?;
            Ok(ResolvabilityRun { mutual_information: i, rate, rows })
        }
        ResolvabilityChannel::Bsc => {
            if r.cost.is_some() {
                return Err(Error::Config("cost constraints apply to the gaussian channel only".into()));
            }
            let model = DiscreteModel::new(DiscreteChannel::bsc(need(r.crossover, "crossover")?)?, DiscreteDist::uniform(2)?)?;
            let i = model.finite_mutual_information().expect("finite alphabet");
            let rate = pick_rate(i);
            let sweep = DecaySweep { block_lengths: r.block_lengths.clone(), rate, replicates: r.replicates, caps: r.caps };
            let rows = tv_decay_experiment(model.input(), &sweep, None, |cb, _| exact_tv_discrete(cb, &model), &rng)?;
            Ok(ResolvabilityRun { mutual_information: i, rate, rows })
        }
    }
}

// --------------------------------------------------------------------- ota

pub fn ota_config(o: &OtaSection) -> Result<OTAConfig> {
    let c = OTAConfig {
        mac: EffectiveMACConfig {
            bob_gains: o.bob_gains.clone(),
            bob_jammer_gain: o.bob_jammer_gain,
            eve_gains: o.eve_gains.clone(),
            eve_jammer_gain: o.eve_jammer_gain,
            bob_noise: o.bob_noise,
            eve_noise: o.eve_noise,
        },
        alphabets: o.alphabets.clone(),
        message_points: o.message_points,
        jammer_input: o.input,
        cost: o.cost.as_ref().map(|c| cost_constraint(c, o.n)).transpose()?,
        rate: o.rate,
        n: o.n,
    };
    c.validate()?;
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub sup_eve: f64,
    pub sup_eve_stderr: f64,
    pub inf_bob: f64,
    pub inf_bob_stderr: f64,
    #[serde(rename = "R")]
    pub rate: f64,
    pub feasible: bool,
    pub margin: f64,
}

impl From<&RateWindow> for WindowRow {
    fn from(w: &RateWindow) -> Self {
        Self {
            sup_eve: w.sup_eve.mean,
            sup_eve_stderr: w.sup_eve.stderr,
            inf_bob: w.inf_bob.mean,
            inf_bob_stderr: w.inf_bob.stderr,
            rate: w.rate,
            feasible: w.feasible,
            margin: w.margin,
        }
    }
}

pub fn window_summary(w: &RateWindow) -> String {
    format!(
        "rate-window: supI_eve={:.5}±{:.5} infI_bob={:.5}±{:.5} R={} feasible={} margin={:.5}",
        w.sup_eve.mean, w.sup_eve.stderr, w.inf_bob.mean, w.inf_bob.stderr, w.rate, w.feasible, w.margin
    )
}

pub fn run_rate_window(cfg: &ExperimentConfig) -> Result<RateWindow> {
    let o = ExperimentConfig::section(&cfg.ota, "ota")?;
    rate_window(&ota_config(o)?, o.mi_samples, &stream(cfg, streams::RATE_WINDOW))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub round: usize,
    pub n: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    pub m: usize,
    pub m_hat: Option<usize>,
    pub decode_ok: bool,
    pub f_true: f64,
    pub f_bob_cancel: f64,
    pub f_bob_genie: f64,
    pub f_bob_nocancel: f64,
    pub f_eve: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SecurityRun {
    pub tv: TVEstimate,
    pub tail: TailCheck,
    pub loss: LossCheck,
}

impl SecurityRun {
    pub fn rows(&self) -> Vec<SecurityRow> {
        let mut rows = self.tail.rows.clone();
        rows.push(self.loss.row.clone());
        rows
    }
}

#[derive(Clone, Debug)]
pub struct E2eRun {
    pub window: RateWindow,
    pub centers: usize,
    pub replaced: usize,
    pub rounds: Vec<RoundResult>,
    pub summary: E2eSummary,
    pub security: Option<SecurityRun>,
}

impl E2eRun {
    pub fn summary_line(&self) -> String {
        let s = &self.summary;
        let mut line = format!(
            "e2e-sim: feasible={} J={} replaced={} success={:.4} mse cancel={:.6} genie={:.6} nocancel={:.6} eve={:.6}",
            self.window.feasible, self.centers, self.replaced, s.decode_success, s.mse_cancel, s.mse_genie, s.mse_nocancel, s.mse_eve
        );
        if let Some(sec) = &self.security {
            line += &format!(
                " | tv={:.5}±{:.5} tail_ok={} loss_ok={}",
                sec.tv.value,
                sec.tv.stderr,
                sec.tail.all_satisfied(),
                sec.loss.row.satisfied
            );
        }
        line
    }

    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
        let rows: Vec<RoundRow> = self
            .rounds
            .iter()
            .map(|r| RoundRow {
                round: r.round,
                n: self.rounds_n(cfg),
                rate: self.window.rate,
                m: r.m,
                m_hat: r.m_hat,
                decode_ok: r.decode_ok,
                f_true: r.f_true,
                f_bob_cancel: r.f_bob_cancel,
                f_bob_genie: r.f_bob_genie,
                f_bob_nocancel: r.f_bob_nocancel,
                f_eve: r.f_eve,
                seed: cfg.seed,
            })
            .collect();
        let mut out =
            vec![write_csv(dir, "rounds.csv", cfg, &rows)?, write_csv(dir, "rate_window.csv", cfg, &[WindowRow::from(&self.window)])?];
        if let Some(sec) = &self.security {
            out.push(write_csv(dir, "security.csv", cfg, &sec.rows())?);
        }
        Ok(out)
    }

    fn rounds_n(&self, cfg: &ExperimentConfig) -> usize {
        cfg.ota.as_ref().map_or(0, |o| o.n)
    }
}

fn draw_constrained(c: &OTAConfig, n: usize, rate: f64, caps: &crate::coding::SizeCaps, rng: &RngStream) -> Result<(Codebook<f64>, usize)> {
    let cb = draw_codebook(CodebookSpec::new(n, rate)?, &c.jammer_input, caps, rng)?;
    match &c.cost {
        Some(cc) => apply_cost_constraint(&cb, &CostConstraint::with_zero_word(cc.cost, cc.budget, n)?),
        None => Ok((cb, 0)),
    }
}

/// The full pipeline: rate window, Bob's net over the message grid,
/// a cost-constrained jammer codebook, the rounds, and optionally the
/// security checks on Eve's side.
pub fn run_e2e(cfg: &ExperimentConfig) -> Result<E2eRun> {
    let o = ExperimentConfig::section(&cfg.ota, "ota")?;
    let c = ota_config(o)?;
    let window = rate_window(&c, o.mi_samples, &stream(cfg, streams::RATE_WINDOW))?;
    let fam = c.family(Side::Bob);
    let opts = NetOptions { mi_samples: o.mi_samples, ..NetOptions::default() };
    let net = build_net(&fam, &c.message_grid()?, o.net_delta, &opts, &stream(cfg, streams::NET))?;
    let (cb, replaced) = draw_constrained(&c, o.n, o.rate, &o.caps, &stream(cfg, streams::CODEBOOK))?;
    let decoder = JtDecoder::from_net(&net, &fam, o.epsilon)?;
    let prepared = decoder.prepare(&cb);
    let rounds = run_rounds(&c, &decoder, &prepared, o.rounds, &stream(cfg, streams::E2E))?;
    let summary = summarize(&rounds);
    let security = match &cfg.security {
        Some(_) => Some(run_security(cfg)?),
        None => None,
    };
    Ok(E2eRun { window, centers: net.j(), replaced, rounds, summary, security })
}

/// Security checks for the fixed message of `[security]`: the distance of
/// Eve's codebook-induced output from the i.i.d. one, then the tail and
/// clamped squared-loss bounds under that distance.
pub fn run_security(cfg: &ExperimentConfig) -> Result<SecurityRun> {
    let o = ExperimentConfig::section(&cfg.ota, "ota")?;
    let s = ExperimentConfig::section(&cfg.security, "security")?;
    let mut c = ota_config(o)?;
    c.n = s.n.unwrap_or(o.n);
    c.rate = s.rate.unwrap_or(o.rate);
    let a = MessageTuple::new(s.message.clone(), &c.alphabets)?;
    let rng = stream(cfg, streams::SECURITY);
    let (cb, _) = draw_constrained(&c, c.n, c.rate, &o.caps, &rng.derive(0))?;
    let eve = LinearGaussianModel::new(effective_channel(&c.mac, &a, Side::Eve)?, c.jammer_input);
    let tv = tv_importance_mc(&eve, &cb, s.tv_samples, TvSummand::PositivePart, &rng.derive(1))?;
    let g = |z: &[f64]| c.post_process(Side::Eve, z, false);
    let tail = security_tail_check(&c, &a, Jamming::Codebook(&cb), &g, &s.eps_grid, s.rounds, &rng.derive(2), &tv)?;
    let loss = security_loss_check(
        &c,
        &a,
        Jamming::Codebook(&cb),
        &g,
        &LossFunction::ClampedSquared { range: s.loss_range },
        s.rounds,
        &rng.derive(3),
        &tv,
    )?;
    Ok(SecurityRun { tv, tail, loss })
}

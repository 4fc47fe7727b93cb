//! Finite approximation nets for compound channels.
//!
//! A compound channel is a family `(W_s)` indexed by an unknown state `s`
//! in a compact set. A `(delta, J)`-approximation picks `J` surrogate
//! channels such that every member is within `delta` of one surrogate in
//! expected KL divergence and in mutual information, with a finite Rényi
//! divergence of some order above one. Nets here are built greedily over a
//! finite grid of states, with the surrogates taken from the family itself.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{effective_channel, EffectiveMACConfig, JointModel, LinearGaussianModel, MessageTuple, ScalarGaussianChannel, Side};
use crate::error::{Error, Result};
use crate::gaussian::Normal;
use crate::info::{mutual_information_mc, MIEstimate, Nats, RenyiOrder};
use crate::rng::RngStream;

/// A family of channels sharing one input law, indexed by real parameters.
pub trait ChannelFamily: Sync {
    type Model: JointModel;

    fn param_dim(&self) -> usize;

    fn member(&self, s: &[f64]) -> Result<Self::Model>;
}

/// AWGN channels `y = gain * x + N(0, s[0])` with a fixed Gaussian input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwgnFamily {
    pub gain: f64,
    pub input: Normal,
}

impl ChannelFamily for AwgnFamily {
    type Model = LinearGaussianModel;

    fn param_dim(&self) -> usize {
        1
    }

    fn member(&self, s: &[f64]) -> Result<LinearGaussianModel> {
        Ok(LinearGaussianModel::new(ScalarGaussianChannel::new(0.0, self.gain, s[0])?, self.input))
    }
}

/// The effective jammer channel to one receiver, indexed by the message
/// tuple `s = (a_1, .., a_K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageFamily {
    pub config: EffectiveMACConfig,
    pub side: Side,
    pub input: Normal,
}

impl ChannelFamily for MessageFamily {
    type Model = LinearGaussianModel;

    fn param_dim(&self) -> usize {
        self.config.k()
    }

    fn member(&self, s: &[f64]) -> Result<LinearGaussianModel> {
        let ch = effective_channel(&self.config, &MessageTuple(s.to_vec()), self.side)?;
        Ok(LinearGaussianModel::new(ch, self.input))
    }
}

/// A family given by a closure, e.g. fading or discrete families.
pub struct FnFamily<F> {
    dim: usize,
    f: F,
}

impl<F> FnFamily<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F, M> ChannelFamily for FnFamily<F>
where
    F: Fn(&[f64]) -> Result<M> + Sync,
    M: JointModel,
{
    type Model = M;

    fn param_dim(&self) -> usize {
        self.dim
    }

    fn member(&self, s: &[f64]) -> Result<M> {
        (self.f)(s)
    }
}

/// Default number of grid points per parameter axis.
pub const DEFAULT_AXIS_POINTS: usize = 17;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

/// The compact parameter set and its finite grid: either a box with a
/// per-axis resolution or an explicit finite set of states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ParamGrid {
    Box { axes: Vec<Axis> },
    Points { points: Vec<Vec<f64>> },
}

impl ParamGrid {
    pub fn boxed(axes: Vec<Axis>) -> Result<Self> {
        for a in &axes {
            if !(a.lo <= a.hi) || a.points == 0 {
                return Err(Error::InvalidParameter(format!("bad grid axis {a:?}")));
            }
        }
        Ok(ParamGrid::Box { axes })
    }

    pub fn finite(points: Vec<Vec<f64>>) -> Self {
        ParamGrid::Points { points }
    }

    pub fn dim(&self) -> usize {
        match self {
            ParamGrid::Box { axes } => axes.len(),
            ParamGrid::Points { points } => points.first().map_or(0, Vec::len),
        }
    }

    /// All grid states in lexicographic order, last axis fastest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            ParamGrid::Points { points } => points.clone(),
            ParamGrid::Box { axes } => {
                if axes.is_empty() {
                    return Vec::new();
                }
                let ticks: Vec<Vec<f64>> = axes.iter().map(axis_ticks).collect();
                let mut out = vec![Vec::new()];
                for t in &ticks {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            t.iter().map(move |v| {
                                let mut q = p.clone();
                                q.push(*v);
                                q
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    /// Membership in the compact set the grid covers.
    pub fn contains(&self, s: &[f64]) -> bool {
        match self {
            ParamGrid::Box { axes } => {
                s.len() == axes.len()
                    && s.iter().zip(axes).all(|(v, a)| {
                        let tol = 1e-12 * (1.0 + a.lo.abs().max(a.hi.abs()));
                        v.is_finite() && *v >= a.lo - tol && *v <= a.hi + tol
                    })
            }
            ParamGrid::Points { points } => {
                points.iter().any(|p| p.len() == s.len() && p.iter().zip(s).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs())))
            }
        }
    }

    /// Uniform draw from the compact set (a random grid state for finite sets).
    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        match self {
            ParamGrid::Box { axes } => axes.iter().map(|a| a.lo + (a.hi - a.lo) * rng.uniform()).collect(),
            ParamGrid::Points { points } => points[rng.below(points.len())].clone(),
        }
    }
}

fn axis_ticks(a: &Axis) -> Vec<f64> {
    if a.points == 1 {
        return vec![0.5 * (a.lo + a.hi)];
    }
    (0..a.points).map(|i| a.lo + (a.hi - a.lo) * i as f64 / (a.points - 1) as f64).collect()
}

/// Sampling budgets for building and verifying nets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetOptions {
    /// Inputs drawn from `P` to average conditional divergences (ignored
    /// for finite alphabets, which are summed exactly).
    pub input_points: usize,
    /// Monte Carlo draws per mutual-information estimate.
    pub mi_samples: usize,
    /// Order of the Rényi finiteness probe.
    pub renyi_order: f64,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self { input_points: 2048, mi_samples: 20_000, renyi_order: 1.5 }
    }
}

/// Surrogate channels `W_{s_1}, .., W_{s_J}` with their mutual informations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationNet {
    pub delta: f64,
    pub centers: Vec<Vec<f64>>,
    pub mutual_information: Vec<MIEstimate>,
    pub grid: ParamGrid,
}

impl ApproximationNet {
    pub fn j(&self) -> usize {
        self.centers.len()
    }

    pub fn models<F: ChannelFamily>(&self, family: &F) -> Result<Vec<F::Model>> {
        self.centers.iter().map(|c| family.member(c)).collect()
    }

    /// Largest stderr among the centre mutual-information estimates.
    pub fn max_mi_stderr(&self) -> f64 {
        self.mutual_information.iter().map(|m| m.stderr).fold(0.0, f64::max)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))
    }
}

/// `E_P D(a(X, .) || b(X, .))` over weighted input points.
pub fn expected_kl<M: JointModel>(a: &M, b: &M, points: &[(M::Input, f64)]) -> Result<Nats> {
    let mut total = 0.0;
    for (x, w) in points {
        total += w * a.conditional_kl(b, x)?;
    }
    Ok(total)
}

/// `E_P D_alpha(a(X, .) || b(X, .))` over weighted input points.
pub fn expected_renyi<M: JointModel>(a: &M, b: &M, order: RenyiOrder, points: &[(M::Input, f64)]) -> Result<Nats> {
    let mut total = 0.0;
    for (x, w) in points {
        total += w * a.conditional_renyi(b, order, x)?;
    }
    Ok(total)
}

/// Rényi divergence finite at every probed input.
fn renyi_finite<M: JointModel>(a: &M, b: &M, order: RenyiOrder, points: &[(M::Input, f64)]) -> Result<bool> {
    for (x, _) in points {
        if !a.conditional_renyi(b, order, x)?.is_finite() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Mutual information at each state with common random numbers: every
/// state reuses the same stream, so differences between states carry
/// much less noise than the estimates themselves.
fn mi_table<F: ChannelFamily>(family: &F, states: &[Vec<f64>], samples: usize, rng: &RngStream) -> Result<Vec<MIEstimate>> {
    states.par_iter().map(|s| mutual_information_mc(&family.member(s)?, samples, rng)).collect()
}

fn input_points<F: ChannelFamily>(
    family: &F,
    any_state: &[f64],
    opts: &NetOptions,
    rng: &RngStream,
) -> Result<Vec<(<F::Model as JointModel>::Input, f64)>> {
    let mut r = rng.derive(0x1D);
    Ok(family.member(any_state)?.input_points(opts.input_points, &mut r))
}

/// Greedy cover of the grid.
///
/// Grid states are scanned in order. A state is covered by an existing
/// centre `s_j` when `E_P KL(W_s || W_{s_j}) <= delta/2`,
/// `I(P; W_{s_j}) - I(P; W_s) <= delta/2` and the Rényi probe is finite on
/// the sampled inputs; otherwise it becomes a new centre. The half margin
/// leaves room for states between grid points.
pub fn build_net<F: ChannelFamily>(
    family: &F,
    grid: &ParamGrid,
    delta: f64,
    opts: &NetOptions,
    rng: &RngStream,
) -> Result<ApproximationNet> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let states = grid.points();
    if states.is_empty() {
        return Err(Error::GridEmpty);
    }
    let order = RenyiOrder::new(opts.renyi_order)?;
    let points = input_points(family, &states[0], opts, rng)?;
    let mis = mi_table(family, &states, opts.mi_samples, &rng.derive(0x11))?;
    let models: Vec<F::Model> = states.iter().map(|s| family.member(s)).collect::<Result<_>>()?;

    let mut centers: Vec<usize> = Vec::new();
    for (i, m) in models.iter().enumerate() {
        let mut covered = false;
        for &c in &centers {
            if mis[c].mean - mis[i].mean <= 0.5 * delta
                && expected_kl(m, &models[c], &points)? <= 0.5 * delta
                && renyi_finite(m, &models[c], order, &points)?
            {
                covered = true;
                break;
            }
        }
        if !covered {
            centers.push(i);
        }
    }
    Ok(ApproximationNet {
        delta,
        centers: centers.iter().map(|&i| states[i].clone()).collect(),
        mutual_information: centers.iter().map(|&i| mis[i]).collect(),
        grid: grid.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// Expected KL divergence to the surrogate.
    ExpectedKl,
    /// Rényi finiteness on the probed inputs.
    RenyiFinite,
    /// Surrogate information not above the member's by more than delta.
    InformationAbove,
    /// Some member's information not above the surrogate's by more than delta.
    InformationBelow,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub state: Vec<f64>,
    pub condition: Condition,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub delta: f64,
    pub probes_checked: usize,
    /// Probes outside the parameter set, with a diagnostic.
    pub rejected: Vec<(Vec<f64>, String)>,
    pub violations: Vec<Violation>,
    /// Number of inputs at which Rényi finiteness was checked. The
    /// condition is required for all inputs; only these were examined.
    pub renyi_inputs_checked: usize,
    /// Largest over probes of the smallest expected KL to any centre.
    pub worst_kl: f64,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audit a net against probe states at tolerance `delta`.
pub fn verify_net<F: ChannelFamily>(
    net: &ApproximationNet,
    family: &F,
    probes: &[Vec<f64>],
    delta: f64,
    opts: &NetOptions,
    rng: &RngStream,
) -> Result<VerificationReport> {
    let order = RenyiOrder::new(opts.renyi_order)?;
    if net.centers.is_empty() {
        return Err(Error::GridEmpty);
    }
    let mut rejected = Vec::new();
    let mut inside = Vec::new();
    for p in probes {
        if net.grid.contains(p) {
            inside.push(p.clone());
        } else {
            rejected.push((p.clone(), Error::OutsideParameterSet(p.clone()).to_string()));
        }
    }
    let points = input_points(family, &net.centers[0], opts, rng)?;
    let mi_rng = rng.derive(0x11);
    let center_models = net.models(family)?;
    let center_mi = mi_table(family, &net.centers, opts.mi_samples, &mi_rng)?;
    let probe_mi = mi_table(family, &inside, opts.mi_samples, &mi_rng)?;

    let per_probe: Vec<(Option<Violation>, f64)> = inside
        .par_iter()
        .zip(&probe_mi)
        .map(|(s, mi_s)| {
            let m = family.member(s)?;
            let mut best: Option<(f64, usize)> = None;
            let mut min_kl = f64::INFINITY;
            for (j, c) in center_models.iter().enumerate() {
                let kl = expected_kl(&m, c, &points)?;
                min_kl = min_kl.min(kl);
                let ok = kl <= delta && center_mi[j].mean - mi_s.mean <= delta && renyi_finite(&m, c, order, &points)?;
                if ok {
                    return Ok((None, min_kl));
                }
                if best.is_none_or(|(b, _)| kl < b) {
                    best = Some((kl, j));
                }
            }
            let (kl, j) = best.expect("at least one centre");
            let condition = if kl > delta {
                Condition::ExpectedKl
            } else if center_mi[j].mean - mi_s.mean > delta {
                Condition::InformationAbove
            } else {
                Condition::RenyiFinite
            };
            let detail = format!("nearest centre {:?}: E KL = {kl:.4e}, I gap = {:.4e}", net.centers[j], center_mi[j].mean - mi_s.mean);
            Ok((Some(Violation { state: s.clone(), condition, detail }), min_kl))
        })
        .collect::<Result<_>>()?;

    let mut violations: Vec<Violation> = Vec::new();
    let mut worst_kl: f64 = 0.0;
    for (v, kl) in per_probe {
        worst_kl = worst_kl.max(kl);
        violations.extend(v);
    }
    // each centre is itself a member, so I(W_{s_j}) - I(W_j) = 0
    for (j, c) in net.centers.iter().enumerate() {
        let gap = center_mi[j].mean - mutual_information_mc(&family.member(c)?, opts.mi_samples, &mi_rng)?.mean;
        if gap > delta {
            violations.push(Violation { state: c.clone(), condition: Condition::InformationBelow, detail: format!("gap {gap}") });
        }
    }
    Ok(VerificationReport { delta, probes_checked: inside.len(), rejected, violations, renyi_inputs_checked: points.len(), worst_kl })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfSup {
    pub inf: MIEstimate,
    pub sup: MIEstimate,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

/// Minimum and maximum of `I(P; W_s)` over the grid states, estimated with
/// common random numbers across states.
pub fn inf_sup_mutual_information<F: ChannelFamily>(family: &F, grid: &ParamGrid, mc_budget: usize, rng: &RngStream) -> Result<InfSup> {
    let states = grid.points();
    if states.is_empty() {
        return Err(Error::GridEmpty);
    }
    let mis = mi_table(family, &states, mc_budget, rng)?;
    let (mut lo, mut hi) = (0, 0);
    for (i, m) in mis.iter().enumerate() {
        if m.mean < mis[lo].mean {
            lo = i;
        }
        if m.mean > mis[hi].mean {
            hi = i;
        }
    }
    Ok(InfSup { inf: mis[lo], sup: mis[hi], argmin: states[lo].clone(), argmax: states[hi].clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        fading_conditional, DiscreteChannel, DiscreteDist, DiscreteModel, FadingModel, FadingParams, GaussianFadingChannel,
    };
    use crate::gaussian::GaussianDist;

    fn awgn_family() -> AwgnFamily {
        AwgnFamily { gain: 1.0, input: Normal::new(0.0, 1.0).unwrap() }
    }

    fn interval(lo: f64, hi: f64, points: usize) -> ParamGrid {
        ParamGrid::boxed(vec![Axis { lo, hi, points }]).unwrap()
    }

    fn quick() -> NetOptions {
        NetOptions { input_points: 512, mi_samples: 20_000, renyi_order: 1.5 }
    }

    #[test]
    fn grid_enumeration_order() {
        let g = ParamGrid::boxed(vec![Axis { lo: 0.0, hi: 1.0, points: 2 }, Axis { lo: 5.0, hi: 7.0, points: 3 }]).unwrap();
        let p = g.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0.0, 5.0]);
        assert_eq!(p[1], vec![0.0, 6.0]);
        assert_eq!(p[5], vec![1.0, 7.0]);
        assert!(p.iter().all(|s| g.contains(s)));
        assert!(!g.contains(&[1.5, 6.0]));
    }

    #[test]
    fn empty_grid_rejected() {
        let r = build_net(&awgn_family(), &ParamGrid::finite(vec![]), 0.1, &quick(), &RngStream::new(1, 0));
        assert_eq!(r.unwrap_err(), Error::GridEmpty);
    }

    #[test]
    fn singleton_family_has_one_center() {
        let net = build_net(&awgn_family(), &ParamGrid::finite(vec![vec![1.3]]), 0.1, &quick(), &RngStream::new(1, 0)).unwrap();
        assert_eq!(net.centers, vec![vec![1.3]]);
    }

    #[test]
    fn identical_members_collapse() {
        let fam = FnFamily::new(1, |_s: &[f64]| Ok(LinearGaussianModel::new(ScalarGaussianChannel::awgn(1.0)?, Normal::new(0.0, 1.0)?)));
        let net = build_net(&fam, &ParamGrid::finite(vec![vec![0.0], vec![1.0]]), 0.01, &quick(), &RngStream::new(2, 0)).unwrap();
        assert_eq!(net.j(), 1);
    }

    #[test]
    fn centers_are_family_members_and_pass_own_grid() {
        let fam = awgn_family();
        let grid = interval(1.0, 2.0, DEFAULT_AXIS_POINTS);
        let rng = RngStream::new(3, 0);
        let net = build_net(&fam, &grid, 0.1, &quick(), &rng).unwrap();
        let states = grid.points();
        for c in &net.centers {
            assert!(states.contains(c));
        }
        let report = verify_net(&net, &fam, &states, net.delta, &quick(), &rng).unwrap();
        assert!(report.is_clean(), "{:?}", report.violations);
        assert_eq!(report.probes_checked, states.len());
    }

    #[test]
    fn off_grid_probes_pass_at_double_delta() {
        let fam = awgn_family();
        let grid = interval(1.0, 2.0, DEFAULT_AXIS_POINTS);
        let rng = RngStream::new(4, 0);
        let net = build_net(&fam, &grid, 0.1, &quick(), &rng).unwrap();
        let mut prng = RngStream::new(4, 9);
        let probes: Vec<Vec<f64>> = (0..100).map(|_| grid.sample(&mut prng)).collect();
        let report = verify_net(&net, &fam, &probes, 2.0 * net.delta, &quick(), &rng).unwrap();
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn outside_probe_rejected() {
        let fam = awgn_family();
        let grid = interval(1.0, 2.0, 5);
        let rng = RngStream::new(5, 0);
        let net = build_net(&fam, &grid, 0.1, &quick(), &rng).unwrap();
        let report = verify_net(&net, &fam, &[vec![3.0], vec![1.5]], 0.1, &quick(), &rng).unwrap();
        assert_eq!(report.rejected.len(), 1);
        assert!(report.rejected[0].1.contains("outside"));
        assert_eq!(report.probes_checked, 1);
    }

    #[test]
    fn coarser_tolerance_never_needs_more_centers() {
        let fam = awgn_family();
        let grid = interval(1.0, 4.0, DEFAULT_AXIS_POINTS);
        let rng = RngStream::new(6, 0);
        let mut last = usize::MAX;
        for delta in [0.02, 0.04, 0.08, 0.16] {
            let j = build_net(&fam, &grid, delta, &quick(), &rng).unwrap().j();
            assert!(j <= last, "delta {delta}: {j} > {last}");
            last = j;
        }
    }

    #[test]
    fn discrete_family_is_exact() {
        let fam = FnFamily::new(1, |s: &[f64]| DiscreteModel::new(DiscreteChannel::bsc(s[0])?, DiscreteDist::uniform(2)?));
        let grid = interval(0.05, 0.15, 11);
        let net = build_net(&fam, &grid, 0.02, &quick(), &RngStream::new(7, 0)).unwrap();
        assert!(net.mutual_information.iter().all(|m| m.stderr == 0.0));
        let report = verify_net(&net, &fam, &grid.points(), 0.02, &quick(), &RngStream::new(7, 0)).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.renyi_inputs_checked, 2);
    }

    #[test]
    fn constant_family_inf_equals_sup() {
        let fam = FnFamily::new(1, |_s: &[f64]| Ok(LinearGaussianModel::new(ScalarGaussianChannel::awgn(2.0)?, Normal::new(0.0, 1.0)?)));
        let r = inf_sup_mutual_information(&fam, &interval(0.0, 1.0, 5), 20_000, &RngStream::new(8, 0)).unwrap();
        assert!((r.sup.mean - r.inf.mean).abs() <= 2.0 * r.inf.stderr);
    }

    #[test]
    fn awgn_inf_sup_match_closed_form() {
        let r = inf_sup_mutual_information(&awgn_family(), &interval(1.0, 4.0, 7), 100_000, &RngStream::new(9, 0)).unwrap();
        assert_eq!(r.argmin, vec![4.0]);
        assert_eq!(r.argmax, vec![1.0]);
        assert!((r.inf.mean - 0.5 * 1.25f64.ln()).abs() <= 3.0 * r.inf.stderr);
        assert!((r.sup.mean - 0.5 * 2f64.ln()).abs() <= 3.0 * r.sup.stderr);
    }

    #[test]
    fn net_roundtrips_through_file() {
        let net = build_net(&awgn_family(), &interval(1.0, 2.0, 5), 0.1, &quick(), &RngStream::new(10, 0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        net.save(&path).unwrap();
        assert_eq!(ApproximationNet::load(&path).unwrap(), net);
    }

    /// E_P KL(W_s || W_s0) along a path of fading states: the largest
    /// jump between neighbours shrinks as the path is refined.
    #[test]
    fn fading_kl_is_continuous_along_path() {
        let input = GaussianDist::standard(1);
        let mut rng = RngStream::new(11, 0);
        let xs = input.sample(&mut rng, 512).unwrap();
        let channel = |t: f64| GaussianFadingChannel::new(FadingParams::scalar(1.0 + 0.5 * t, 0.2 + 0.3 * t, 0.0, 1.0 + t).unwrap());
        let base = channel(0.0);
        let ekl = |t: f64| -> f64 {
            let ch = channel(t);
            xs.iter()
                .map(|x| crate::info::kl_gaussian(&fading_conditional(&ch, x).unwrap(), &fading_conditional(&base, x).unwrap()).unwrap())
                .sum::<f64>()
                / xs.len() as f64
        };
        let mut prev = f64::INFINITY;
        for steps in [8, 16, 32, 64] {
            let vals: Vec<f64> = (0..=steps).map(|i| ekl(i as f64 / steps as f64)).collect();
            let jump = vals.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
            assert!(jump < prev);
            prev = jump;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn fading_family_net_verifies() {
        let input = GaussianDist::standard(1);
        let fam = FnFamily::new(1, move |s: &[f64]| {
            let ch = GaussianFadingChannel::new(FadingParams::scalar(1.0, s[0], 0.0, 1.0)?);
            FadingModel::new(ch, input.clone(), 256, &mut RngStream::new(12, 1))
        });
        let grid = interval(0.0, 0.5, 6);
        let opts = NetOptions { input_points: 256, mi_samples: 2000, renyi_order: 1.5 };
        let rng = RngStream::new(12, 0);
        let net = build_net(&fam, &grid, 0.1, &opts, &rng).unwrap();
        let report = verify_net(&net, &fam, &grid.points(), 0.1, &opts, &rng).unwrap();
        assert!(report.is_clean(), "{:?}", report.violations);
    }
}

use serde::{Deserialize, Serialize};

use super::{BlockModel, JointModel};
use crate::error::{Error, Result};
use crate::info::{Nats, RenyiOrder};
use crate::rng::RngStream;

const ROW_TOL: f64 = 1e-12;

fn check_probs(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidParameter(format!("{what}: empty probability vector")));
    }
    if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidParameter(format!("{what}: entries must lie in [0, 1]")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > ROW_TOL {
        return Err(Error::InvalidParameter(format!("{what}: sums to {s}, not 1")));
    }
    Ok(())
}

/// Probability vector on `{0, .., k-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDist {
    probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs, "distribution")?;
        Ok(Self { probs })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn sample(&self, rng: &mut RngStream) -> usize {
        rng.categorical(&self.probs)
    }
}

/// Row-stochastic transition matrix `W(y | x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteChannel {
    rows: Vec<Vec<f64>>,
}

impl DiscreteChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let ny = rows.first().map(Vec::len).unwrap_or(0);
        if ny == 0 {
            return Err(Error::InvalidParameter("channel needs at least one row and column".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ny {
                return Err(Error::DimensionMismatch { expected: ny, found: r.len() });
            }
            check_probs(r, &format!("row {i}"))?;
        }
        Ok(Self { rows })
    }

    pub fn identity(k: usize) -> Self {
        Self { rows: (0..k).map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect()).collect() }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> Result<&[f64]> {
        self.rows.get(x).map(Vec::as_slice).ok_or(Error::IndexOutOfRange { index: x, size: self.rows.len() })
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }
}

/// Draw `y ~ W(. | x)`.
pub fn dmc_apply(ch: &DiscreteChannel, x: usize, rng: &mut RngStream) -> Result<usize> {
    Ok(rng.categorical(ch.row(x)?))
}

/// Finite-alphabet channel with its input law; marginal and log tables are
/// precomputed.
#[derive(Clone, Debug)]
pub struct DiscreteModel {
    channel: DiscreteChannel,
    input: DiscreteDist,
    marginal: DiscreteDist,
    log_w: Vec<f64>,
    log_q: Vec<f64>,
}

impl DiscreteModel {
    pub fn new(channel: DiscreteChannel, input: DiscreteDist) -> Result<Self> {
        if channel.input_size() != input.len() {
            return Err(Error::DimensionMismatch { expected: channel.input_size(), found: input.len() });
        }
        let ny = channel.output_size();
        let mut q = vec![0.0; ny];
        for (x, px) in input.probs().iter().enumerate() {
            for (y, qy) in q.iter_mut().enumerate() {
                *qy += px * channel.prob(x, y);
            }
        }
        let log_w = channel.rows.iter().flatten().map(|w| w.ln()).collect();
        let log_q = q.iter().map(|v| v.ln()).collect();
        Ok(Self { channel, input, marginal: DiscreteDist { probs: q }, log_w, log_q })
    }

    pub fn channel(&self) -> &DiscreteChannel {
        &self.channel
    }

    pub fn input(&self) -> &DiscreteDist {
        &self.input
    }

    /// Exact output marginal `Q_P(y) = sum_x P(x) W(y | x)`.
    pub fn marginal(&self) -> &DiscreteDist {
        &self.marginal
    }

    pub fn input_size(&self) -> usize {
        self.channel.input_size()
    }

    pub fn output_size(&self) -> usize {
        self.channel.output_size()
    }

    pub(crate) fn log_w(&self, x: usize, y: usize) -> f64 {
        self.log_w[x * self.output_size() + y]
    }
}

impl JointModel for DiscreteModel {
    type Input = usize;
    type Output = usize;

    fn sample_input(&self, rng: &mut RngStream) -> usize {
        self.input.sample(rng)
    }

    fn sample_output(&self, x: &usize, rng: &mut RngStream) -> usize {
        rng.categorical(&self.channel.rows[*x])
    }

    fn cond_log_density(&self, x: &usize, y: &usize) -> f64 {
        self.log_w(*x, *y)
    }

    fn marginal_log_density(&self, y: &usize) -> f64 {
        self.log_q[*y]
    }

    fn input_points(&self, _count: usize, _rng: &mut RngStream) -> Vec<(usize, f64)> {
        self.input.probs().iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(x, p)| (x, *p)).collect()
    }

    fn conditional_kl(&self, other: &Self, x: &usize) -> Result<Nats> {
        let (w0, w1) = (self.channel.row(*x)?, other.channel.row(*x)?);
        let mut kl = 0.0;
        for (p, q) in w0.iter().zip(w1) {
            if *p > 0.0 {
                if *q == 0.0 {
                    return Ok(f64::INFINITY);
                }
                kl += p * (p / q).ln();
            }
        }
        Ok(kl.max(0.0))
    }

    fn conditional_renyi(&self, other: &Self, order: RenyiOrder, x: &usize) -> Result<Nats> {
        let a = order.alpha();
        let (w0, w1) = (self.channel.row(*x)?, other.channel.row(*x)?);
        let mut s = 0.0;
        for (p, q) in w0.iter().zip(w1) {
            if *p > 0.0 {
                if *q == 0.0 {
                    if a > 1.0 {
                        return Ok(f64::INFINITY);
                    }
                    continue;
                }
                s += p.powf(a) * q.powf(1.0 - a);
            }
        }
        if s == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok((s.ln() / (a - 1.0)).max(0.0))
    }

    fn finite_mutual_information(&self) -> Option<Nats> {
        let mut mi = 0.0;
        for (x, px) in self.input.probs().iter().enumerate() {
            for y in 0..self.output_size() {
                let w = self.channel.prob(x, y);
                if *px > 0.0 && w > 0.0 {
                    mi += px * w * (self.log_w(x, y) - self.log_q[y]);
                }
            }
        }
        Some(mi.max(0.0))
    }

    fn joint_renyi_vs_product(&self, order: RenyiOrder) -> Option<Nats> {
        // sum_{x,y} P(x) W(y|x)^a Q(y)^(1-a)
        let a = order.alpha();
        let mut s = 0.0;
        for (x, px) in self.input.probs().iter().enumerate() {
            for y in 0..self.output_size() {
                let w = self.channel.prob(x, y);
                if *px > 0.0 && w > 0.0 {
                    s += px * w.powf(a) * self.marginal.probs[y].powf(1.0 - a);
                }
            }
        }
        Some((s.ln() / (a - 1.0)).max(0.0))
    }
}

impl BlockModel for DiscreteModel {
    type WordStat = ();
    /// Output symbol counts.
    type OutputStat = Vec<u32>;
    /// Joint type counts, row-major over `(x, y)`.
    type PairStat = Vec<u32>;

    fn word_stat(&self, _word: &[usize]) {}

    fn output_stat(&self, y: &[usize]) -> Vec<u32> {
        let mut c = vec![0u32; self.output_size()];
        for &v in y {
            c[v] += 1;
        }
        c
    }

    fn pair_stat(&self, word: &[usize], y: &[usize]) -> Vec<u32> {
        let ny = self.output_size();
        let mut c = vec![0u32; self.input_size() * ny];
        for (&a, &b) in word.iter().zip(y) {
            c[a * ny + b] += 1;
        }
        c
    }

    fn block_log_likelihood(&self, _n: usize, _word: &(), _output: &Vec<u32>, pair: &Vec<u32>) -> f64 {
        pair.iter().zip(&self.log_w).filter(|(c, _)| **c > 0).map(|(c, l)| *c as f64 * l).sum()
    }

    fn block_log_marginal(&self, _n: usize, output: &Vec<u32>) -> f64 {
        output.iter().zip(&self.log_q).filter(|(c, _)| **c > 0).map(|(c, l)| *c as f64 * l).sum()
    }
}

//! Monte Carlo accumulation and the small set of trend tests the
//! experiments rely on.

use rayon::prelude::*;

use crate::rng::RngStream;

/// Draws per parallel chunk. Chunk `c` always uses `rng.derive(c)`, so
/// results do not depend on the worker count.
pub const MC_CHUNK: usize = 4096;

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn log_mean_exp(xs: &[f64]) -> f64 {
    log_sum_exp(xs) - (xs.len() as f64).ln()
}

/// Streaming sum, sum of squares and maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
    pub max: f64,
}

impl Default for Moments {
    fn default() -> Self {
        Self { count: 0, sum: 0.0, sum_sq: 0.0, max: f64::NEG_INFINITY }
    }
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
        self.max = self.max.max(v);
    }

    pub fn merge(self, o: Moments) -> Moments {
        Moments { count: self.count + o.count, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq, max: self.max.max(o.max) }
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for v in iter {
            m.push(v);
        }
        m
    }
}

/// Accumulate `f` over `n` draws, in parallel over fixed chunks.
pub fn mc_moments<F>(n: usize, rng: &RngStream, f: F) -> Moments
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    let chunks = n.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.derive(c as u64);
            let len = MC_CHUNK.min(n - c * MC_CHUNK);
            (0..len).map(|_| f(&mut r)).collect()
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

/// Kendall rank correlation (tau-b) between two paired samples.
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    let (mut s, mut tx, mut ty) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let a = (xs[j] - xs[i]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            let b = (ys[j] - ys[i]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            s += a * b;
            tx += a.abs();
            ty += b.abs();
        }
    }
    if tx == 0 || ty == 0 {
        return 0.0;
    }
    s as f64 / ((tx as f64) * (ty as f64)).sqrt()
}

/// Kendall trend test for a decreasing relation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrendTest {
    pub tau: f64,
    /// One-sided p-value for `tau < 0`.
    pub p_value: f64,
}

/// One-sided test of a decreasing trend of `ys` in `xs`. Up to eight
/// points the p-value is the exact permutation probability of a tau at
/// least as negative; beyond that the normal approximation is used.
pub fn decreasing_trend(xs: &[f64], ys: &[f64]) -> TrendTest {
    let n = xs.len().min(ys.len());
    let tau = kendall_tau(&xs[..n], &ys[..n]);
    let p_value = if n <= 8 {
        let mut perm: Vec<usize> = (0..n).collect();
        let (mut hits, mut total) = (0u64, 0u64);
        permutations(&mut perm, 0, &mut |p| {
            let permuted: Vec<f64> = p.iter().map(|&i| ys[i]).collect();
            total += 1;
            if kendall_tau(&xs[..n], &permuted) <= tau + 1e-12 {
                hits += 1;
            }
        });
        hits as f64 / total as f64
    } else {
        let nf = n as f64;
        let sd = (2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0))).sqrt();
        normal_cdf(tau / sd)
    };
    TrendTest { tau, p_value }
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

// Numerical Recipes erfc (Chebyshev fit), relative error < 1.2e-7.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t
        * (-z * z - 1.265_512_23
            + t * (1.000_023_68
                + t * (0.374_091_96
                    + t * (0.096_784_18
                        + t * (-0.186_288_06
                            + t * (0.278_868_07 + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
            .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

/// One-sided sign test: `P(X >= successes)` for `X ~ Bin(trials, 1/2)`.
pub fn sign_test_p(successes: usize, trials: usize) -> f64 {
    let mut p = 0.0;
    let mut log_c = 0.0f64; // ln C(trials, 0)
    for k in 0..=trials {
        if k > 0 {
            log_c += ((trials - k + 1) as f64).ln() - (k as f64).ln();
        }
        if k >= successes {
            p += (log_c - trials as f64 * std::f64::consts::LN_2).exp();
        }
    }
    p.min(1.0)
}

/// Least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = if xs.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LineFit { slope, intercept, slope_stderr }
}

/// Standard error of a binomial proportion estimate.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

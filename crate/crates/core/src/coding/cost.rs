use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use crate::error::{Error, Result};
use crate::gaussian::Normal;
use crate::info::{mgf_estimate, MgfEstimate};
use crate::rng::RngStream;
use crate::stats::{mc_moments, normal_cdf};

/// Per-symbol cost `c(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFunction {
    /// `c(x) = x^2`, transmit power.
    Square,
    /// `c(x) = |x|`, amplitude.
    Absolute,
}

impl CostFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CostFunction::Square => x * x,
            CostFunction::Absolute => x.abs(),
        }
    }

    pub fn word_cost(&self, word: &[f64]) -> f64 {
        word.iter().map(|&x| self.eval(x)).sum()
    }

    /// `E c(X)` for `X ~ law`.
    pub fn mean_under(&self, law: &Normal) -> f64 {
        match self {
            CostFunction::Square => law.var + law.mean * law.mean,
            CostFunction::Absolute => {
                // folded normal mean
                let s = law.var.sqrt();
                let mu = law.mean;
                s * (2.0 / std::f64::consts::PI).sqrt() * (-mu * mu / (2.0 * law.var)).exp() + mu * (1.0 - 2.0 * normal_cdf(-mu / s))
            }
        }
    }
}

/// Additive cost constraint: a word `x^n` is feasible when
/// `sum_i c(x_i) <= n C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostConstraint {
    pub cost: CostFunction,
    pub budget: f64,
    /// Word substituted for every infeasible one. Its length must match
    /// the block length of the codebook it is applied to.
    pub replacement: Option<Vec<f64>>,
}

impl CostConstraint {
    pub fn new(cost: CostFunction, budget: f64, replacement: Option<Vec<f64>>) -> Result<Self> {
        if !(budget >= 0.0) || !budget.is_finite() {
            return Err(Error::InvalidParameter(format!("cost budget must be finite and >= 0, got {budget}")));
        }
        Ok(Self { cost, budget, replacement })
    }

    /// Constraint whose replacement is the all-zero word of length `n`.
    pub fn with_zero_word(cost: CostFunction, budget: f64, n: usize) -> Result<Self> {
        Self::new(cost, budget, Some(vec![0.0; n]))
    }

    pub fn is_feasible(&self, word: &[f64]) -> bool {
        self.cost.word_cost(word) <= word.len() as f64 * self.budget
    }
}

/// Replace every infeasible word by the constraint's replacement word.
/// Returns the new codebook and the number of words replaced.
pub fn apply_cost_constraint(cb: &Codebook<f64>, cc: &CostConstraint) -> Result<(Codebook<f64>, usize)> {
    let n = cb.n();
    let replacement = cc.replacement.as_deref().ok_or(Error::NoFeasibleWord)?;
    if replacement.len() != n || !cc.is_feasible(replacement) {
        return Err(Error::NoFeasibleWord);
    }
    let bad: Vec<usize> = cb.words().enumerate().filter(|(_, w)| !cc.is_feasible(w)).map(|(i, _)| i).collect();
    let mut out = cb.clone();
    for &i in &bad {
        out.replace_word(i, replacement);
    }
    Ok((out, bad.len()))
}

/// Whether `(c, C)` suits the input law: the mean cost lies strictly
/// below the budget and the moment-generating function of `c(X)` looks
/// finite just above zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Compatibility {
    pub mean_cost: f64,
    pub budget: f64,
    pub mgf_t: f64,
    pub mgf: MgfEstimate,
    pub compatible: bool,
}

pub fn compatibility(cc: &CostConstraint, law: &Normal, mgf_t: f64, samples: usize, rng: &RngStream) -> Result<Compatibility> {
    if !(mgf_t > 0.0) || samples == 0 {
        return Err(Error::InvalidParameter("MGF check needs t > 0 and samples > 0".into()));
    }
    let mean_cost = cc.cost.mean_under(law);
    let mgf = mgf_estimate(mc_moments(samples, rng, |r| (mgf_t * cc.cost.eval(law.sample(r))).exp()));
    Ok(Compatibility { mean_cost, budget: cc.budget, mgf_t, mgf, compatible: cc.budget > mean_cost && !mgf.suspicious })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{draw_codebook, CodebookSpec, SizeCaps};

    fn gaussian_book(n: usize, m: u64, seed: u64) -> Codebook<f64> {
        let spec = CodebookSpec::with_words(n, m).unwrap();
        draw_codebook(spec, &Normal::new(0.0, 1.0).unwrap(), &SizeCaps::default(), &RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn feasible_book_is_untouched() {
        let cb = gaussian_book(8, 32, 1);
        let cc = CostConstraint::with_zero_word(CostFunction::Square, 1e6, 8).unwrap();
        let (out, k) = apply_cost_constraint(&cb, &cc).unwrap();
        assert_eq!(k, 0);
        assert_eq!(out, cb);
    }

    #[test]
    fn zero_budget_replaces_everything_nonzero() {
        let cb = gaussian_book(4, 20, 2);
        let cc = CostConstraint::with_zero_word(CostFunction::Square, 0.0, 4).unwrap();
        let (out, k) = apply_cost_constraint(&cb, &cc).unwrap();
        assert_eq!(k, 20);
        assert!(out.words().all(|w| w.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn missing_or_infeasible_replacement() {
        let cb = gaussian_book(4, 4, 3);
        let none = CostConstraint::new(CostFunction::Square, 1.0, None).unwrap();
        assert_eq!(apply_cost_constraint(&cb, &none).unwrap_err(), Error::NoFeasibleWord);
        let bad = CostConstraint::new(CostFunction::Square, 1.0, Some(vec![5.0; 4])).unwrap();
        assert_eq!(apply_cost_constraint(&cb, &bad).unwrap_err(), Error::NoFeasibleWord);
        let short = CostConstraint::with_zero_word(CostFunction::Square, 1.0, 3).unwrap();
        assert_eq!(apply_cost_constraint(&cb, &short).unwrap_err(), Error::NoFeasibleWord);
    }

    #[test]
    fn folded_normal_mean() {
        let law = Normal::new(0.0, 4.0).unwrap();
        let want = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((CostFunction::Absolute.mean_under(&law) - want).abs() < 1e-6);
        let shifted = Normal::new(50.0, 1.0).unwrap();
        assert!((CostFunction::Absolute.mean_under(&shifted) - 50.0).abs() < 1e-6);
    }

    #[test]
    fn power_budget_compatibility() {
        let law = Normal::new(0.0, 1.0).unwrap();
        let rng = RngStream::new(4, 0);
        let ok = CostConstraint::with_zero_word(CostFunction::Square, 1.5, 8).unwrap();
        let c = compatibility(&ok, &law, 0.05, 20_000, &rng).unwrap();
        assert!(c.compatible, "{c:?}");
        let tight = CostConstraint::with_zero_word(CostFunction::Square, 0.9, 8).unwrap();
        assert!(!compatibility(&tight, &law, 0.05, 20_000, &rng).unwrap().compatible);
    }
}

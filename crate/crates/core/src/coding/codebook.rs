use serde::{Deserialize, Serialize};

use crate::channel::DiscreteDist;
use crate::error::{Error, Result};
use crate::gaussian::Normal;
use crate::rng::RngStream;

/// Desk-scale limits on codebook dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SizeCaps {
    pub max_n: usize,
    pub max_m: u64,
    pub max_symbols: u64,
}

impl Default for SizeCaps {
    fn default() -> Self {
        Self { max_n: 512, max_m: 65_536, max_symbols: 1 << 22 }
    }
}

/// Block length `n`, rate `R` in nats and `M = ceil(exp(n R))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookSpec {
    pub n: usize,
    pub rate: f64,
    pub m: u64,
}

impl CodebookSpec {
    /// `exp(n R)` within `1e-9` relative of an integer counts as that
    /// integer, so `R = ln 2, n = 4` gives exactly 16 words.
    pub fn new(n: usize, rate: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be >= 1".into()));
        }
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("rate must be finite and >= 0, got {rate}")));
        }
        let log_m = n as f64 * rate;
        if log_m >= 63.0 * std::f64::consts::LN_2 {
            return Err(Error::SizeOverflow(format!("exp({log_m}) codewords")));
        }
        let v = log_m.exp();
        let r = v.round();
        let m = if (v - r).abs() <= 1e-9 * r { r } else { v.ceil() };
        Ok(Self { n, rate, m: (m as u64).max(1) })
    }

    /// Rate giving exactly `m` words at block length `n`.
    pub fn with_words(n: usize, m: u64) -> Result<Self> {
        Self::new(n, (m as f64).ln() / n as f64)
    }

    pub fn check(&self, caps: &SizeCaps) -> Result<()> {
        if self.n > caps.max_n {
            return Err(Error::SizeOverflow(format!("n = {} exceeds {}", self.n, caps.max_n)));
        }
        if self.m > caps.max_m {
            return Err(Error::SizeOverflow(format!("M = {} exceeds {}", self.m, caps.max_m)));
        }
        let symbols = self.m.saturating_mul(self.n as u64);
        if symbols > caps.max_symbols {
            return Err(Error::SizeOverflow(format!("M*n = {symbols} symbols exceeds {}", caps.max_symbols)));
        }
        Ok(())
    }
}

/// Input law `P` from which codeword symbols are drawn.
pub trait SymbolLaw: Sync {
    type Symbol: Copy + Send + Sync;

    fn draw(&self, rng: &mut RngStream) -> Self::Symbol;
}

impl SymbolLaw for Normal {
    type Symbol = f64;

    fn draw(&self, rng: &mut RngStream) -> f64 {
        self.sample(rng)
    }
}

impl SymbolLaw for DiscreteDist {
    type Symbol = usize;

    fn draw(&self, rng: &mut RngStream) -> usize {
        self.sample(rng)
    }
}

/// What is needed to regenerate a codebook: its spec and stream.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookRecord {
    pub spec: CodebookSpec,
    pub seed: u64,
    pub stream_id: u64,
}

/// `M x n` codeword symbols stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook<S> {
    spec: CodebookSpec,
    words: Vec<S>,
    record: CodebookRecord,
}

impl<S: Copy> Codebook<S> {
    /// Build from explicit words (all of length `spec.n`, `spec.m` of them).
    pub fn from_words(spec: CodebookSpec, words: Vec<Vec<S>>) -> Result<Self> {
        if words.len() as u64 != spec.m {
            return Err(Error::DimensionMismatch { expected: spec.m as usize, found: words.len() });
        }
        if let Some(w) = words.iter().find(|w| w.len() != spec.n) {
            return Err(Error::DimensionMismatch { expected: spec.n, found: w.len() });
        }
        Ok(Self { spec, words: words.concat(), record: CodebookRecord { spec, seed: 0, stream_id: 0 } })
    }

    pub fn spec(&self) -> &CodebookSpec {
        &self.spec
    }

    pub fn record(&self) -> &CodebookRecord {
        &self.record
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn m(&self) -> usize {
        self.spec.m as usize
    }

    pub fn word(&self, i: usize) -> &[S] {
        let n = self.spec.n;
        &self.words[i * n..(i + 1) * n]
    }

    pub fn words(&self) -> impl ExactSizeIterator<Item = &[S]> {
        self.words.chunks_exact(self.spec.n)
    }

    pub(crate) fn replace_word(&mut self, i: usize, w: &[S]) {
        let n = self.spec.n;
        self.words[i * n..(i + 1) * n].copy_from_slice(w);
    }

    /// Codebook whose row `i` is row `perm[i]` of this one.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut words = Vec::with_capacity(self.words.len());
        for &p in perm {
            words.extend_from_slice(self.word(p));
        }
        Self { spec: self.spec, words, record: self.record }
    }
}

/// `M n` i.i.d. draws from `law`, row by row from `rng`.
pub fn draw_codebook<L: SymbolLaw>(spec: CodebookSpec, law: &L, caps: &SizeCaps, rng: &RngStream) -> Result<Codebook<L::Symbol>> {
    spec.check(caps)?;
    let total = spec.m as usize * spec.n;
    let mut r = rng.clone();
    let words: Vec<L::Symbol> = (0..total).map(|_| law.draw(&mut r)).collect();
    Ok(Codebook { spec, words, record: CodebookRecord { spec, seed: rng.seed(), stream_id: rng.stream_id() } })
}

impl CodebookRecord {
    /// Redraw the codebook this record describes. Only valid for records
    /// produced by [`draw_codebook`] from a fresh stream.
    pub fn regenerate<L: SymbolLaw>(&self, law: &L, caps: &SizeCaps) -> Result<Codebook<L::Symbol>> {
        draw_codebook(self.spec, law, caps, &RngStream::new(self.seed, self.stream_id))
    }
}

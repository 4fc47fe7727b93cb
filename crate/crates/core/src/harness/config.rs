//! Experiment configuration: one TOML file with a section per module.
//!
//! Unknown keys are rejected. Missing required keys are collected across
//! every section a command needs and reported together.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coding::{CostFunction, SizeCaps};
use crate::error::{Error, Result};
use crate::gaussian::Normal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub seed: u64,
    /// Worker threads; `None` lets the runtime decide.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compound: Option<CompoundSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode: Option<DecodeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolvability: Option<ResolvabilitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ota: Option<OtaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub security: Option<SecuritySection>,
}

/// AWGN family `y = gain x + N(0, s)` over a finite set of noise variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompoundSection {
    pub gain: f64,
    pub noise_vars: Vec<f64>,
    pub input: Normal,
    pub delta: f64,
    pub mi_samples: usize,
    #[serde(default = "default_input_points")]
    pub input_points: usize,
    #[serde(default = "default_renyi_order")]
    pub renyi_order: f64,
}

fn default_input_points() -> usize {
    2048
}

fn default_renyi_order() -> f64 {
    1.5
}

/// Which end of the family's information range a rate refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateBasis {
    Inf,
    Sup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeSection {
    /// `R = rate_fraction * (inf or sup) I(P; W_s)`.
    pub rate_fraction: f64,
    #[serde(default = "default_basis")]
    pub rate_basis: RateBasis,
    /// `epsilon = epsilon_fraction * (infI - R)`; exclusive with `epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub block_lengths: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub caps: SizeCaps,
}

fn default_basis() -> RateBasis {
    RateBasis::Inf
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolvabilityChannel {
    /// `z = gain x + N(0, noise_var)`, Gaussian input.
    Gaussian,
    /// Binary symmetric channel with uniform input.
    Bsc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    pub function: CostFunction,
    pub budget: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvabilitySection {
    pub channel: ResolvabilityChannel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_var: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Normal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover: Option<f64>,
    /// Absolute rate in nats; exclusive with `rate_fraction` (of `I(P; W)`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_fraction: Option<f64>,
    pub block_lengths: Vec<usize>,
    pub replicates: usize,
    /// Importance samples per estimate; ignored by exact enumeration.
    #[serde(default = "default_tv_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSection>,
    #[serde(default)]
    pub caps: SizeCaps,
}

fn default_tv_samples() -> usize {
    20_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtaSection {
    pub bob_gains: Vec<f64>,
    pub bob_jammer_gain: f64,
    pub bob_noise: Normal,
    pub eve_gains: Vec<f64>,
    pub eve_jammer_gain: f64,
    pub eve_noise: Normal,
    pub alphabets: Vec<(f64, f64)>,
    #[serde(default = "default_message_points")]
    pub message_points: usize,
    pub input: Normal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSection>,
    pub rate: f64,
    pub n: usize,
    pub net_delta: f64,
    pub mi_samples: usize,
    pub epsilon: f64,
    pub rounds: usize,
    #[serde(default)]
    pub caps: SizeCaps,
}

fn default_message_points() -> usize {
    crate::ota::DEFAULT_MESSAGE_POINTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecuritySection {
    /// Fixed message tuple for both ensembles.
    pub message: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub rounds: usize,
    pub tv_samples: usize,
    /// Range `Delta` of the clamped squared loss.
    pub loss_range: f64,
    /// Block length of the security run, if different from `[ota] n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

/// Sections a command reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Needs {
    Compound,
    Decode,
    Resolvability,
    Ota,
    Security,
}

impl Needs {
    fn name(self) -> &'static str {
        match self {
            Needs::Compound => "compound",
            Needs::Decode => "decode",
            Needs::Resolvability => "resolvability",
            Needs::Ota => "ota",
            Needs::Security => "security",
        }
    }

    /// Keys without defaults; dotted paths reach into inline tables.
    fn required(self) -> &'static [&'static str] {
        match self {
            Needs::Compound => &["gain", "noise_vars", "input.mean", "input.var", "delta", "mi_samples"],
            Needs::Decode => &["rate_fraction", "block_lengths", "trials"],
            Needs::Resolvability => &["channel", "block_lengths", "replicates"],
            Needs::Ota => &[
                "bob_gains",
                "bob_jammer_gain",
                "bob_noise.mean",
                "bob_noise.var",
                "eve_gains",
                "eve_jammer_gain",
                "eve_noise.mean",
                "eve_noise.var",
                "alphabets",
                "input.mean",
                "input.var",
                "rate",
                "n",
                "net_delta",
                "mi_samples",
                "epsilon",
                "rounds",
            ],
            Needs::Security => &["message", "eps_grid", "rounds", "tv_samples", "loss_range"],
        }
    }
}

fn lookup<'a>(table: &'a toml::Table, path: &str) -> Option<&'a toml::Value> {
    let mut parts = path.split('.');
    let mut v = table.get(parts.next()?)?;
    for p in parts {
        v = v.as_table()?.get(p)?;
    }
    Some(v)
}

/// Every required key missing for `needs`, as dotted paths.
pub fn missing_keys(doc: &toml::Table, needs: &[Needs]) -> Vec<String> {
    let mut missing: Vec<String> = ["scenario", "seed"].iter().filter(|k| !doc.contains_key(**k)).map(|k| k.to_string()).collect();
    let empty = toml::Table::new();
    for &need in needs {
        let section = doc.get(need.name()).and_then(|v| v.as_table()).unwrap_or(&empty);
        for key in need.required() {
            if lookup(section, key).is_none() {
                missing.push(format!("{}.{key}", need.name()));
            }
        }
    }
    missing
}

impl ExperimentConfig {
    /// Parse `text`, reporting all keys that `needs` requires but are
    /// absent before attempting typed deserialisation.
    pub fn parse(text: &str, needs: &[Needs]) -> Result<Self> {
        Self::parse_with(text, needs, &[])
    }

    /// Like [`parse`](Self::parse), with `optional` sections checked for
    /// missing keys only when present.
    pub fn parse_with(text: &str, needs: &[Needs], optional: &[Needs]) -> Result<Self> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let mut all = needs.to_vec();
        all.extend(optional.iter().filter(|n| doc.contains_key(n.name())));
        let missing = missing_keys(&doc, &all);
        if !missing.is_empty() {
            return Err(Error::Config(format!("missing keys: {}", missing.join(", "))));
        }
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.check_exclusive()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path, needs: &[Needs]) -> Result<Self> {
        Self::load_with(path, needs, &[])
    }

    pub fn load_with(path: &std::path::Path, needs: &[Needs], optional: &[Needs]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse_with(&text, needs, optional)
    }

    fn check_exclusive(&self) -> Result<()> {
        if let Some(d) = &self.decode {
            if d.epsilon.is_some() == d.epsilon_fraction.is_some() {
                return Err(Error::Config("decode: set exactly one of epsilon, epsilon_fraction".into()));
            }
        }
        if let Some(r) = &self.resolvability {
            if r.rate.is_some() == r.rate_fraction.is_some() {
                return Err(Error::Config("resolvability: set exactly one of rate, rate_fraction".into()));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Single-line JSON of the resolved config, embedded in CSV headers.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the JSON line.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_json_line().as_bytes()))
    }

    pub fn section<'a, T>(opt: &'a Option<T>, name: &str) -> Result<&'a T> {
        opt.as_ref().ok_or_else(|| Error::Config(format!("missing section [{name}]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
scenario = "t"
seed = 7

[compound]
gain = 1.0
noise_vars = [1.0, 2.0]
input = { mean = 0.0, var = 0.6 }
delta = 0.05
mi_samples = 1000

[decode]
rate_fraction = 0.5
epsilon_fraction = 0.9
block_lengths = [10, 20]
trials = 50
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::parse(FULL, &[Needs::Compound, Needs::Decode]).unwrap();
        assert_eq!(c.compound.as_ref().unwrap().input_points, 2048);
        let again = ExperimentConfig::parse(&c.to_toml(), &[Needs::Compound, Needs::Decode]).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.sha256(), again.sha256());
    }

    #[test]
    fn all_missing_keys_reported_at_once() {
        let text = "scenario = \"x\"\n[compound]\ngain = 1.0\ninput = { mean = 0.0 }\n";
        let err = ExperimentConfig::parse(text, &[Needs::Compound, Needs::Decode]).unwrap_err();
        let Error::Config(msg) = err else { panic!() };
        for key in [
            "seed",
            "compound.noise_vars",
            "compound.input.var",
            "compound.delta",
            "compound.mi_samples",
            "decode.rate_fraction",
            "decode.block_lengths",
            "decode.trials",
        ] {
            assert!(msg.contains(key), "{key} not in {msg}");
        }
        assert!(!msg.contains("compound.gain"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = FULL.replace("delta = 0.05", "delta = 0.05\ndetla = 0.1");
        assert!(matches!(ExperimentConfig::parse(&text, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn epsilon_forms_are_exclusive() {
        let text = FULL.replace("epsilon_fraction = 0.9", "epsilon_fraction = 0.9\nepsilon = 0.1");
        assert!(matches!(ExperimentConfig::parse(&text, &[]), Err(Error::Config(_))));
    }
}

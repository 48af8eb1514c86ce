//! JSON run configurations. Every struct rejects unknown keys.

use std::path::Path;

use fdlab::evolver::InitialKind;
use fdlab::profile::GridSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::fail::{input, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsInput {
    pub n: u32,
    pub m: f64,
    pub beta: f64,
}

impl ParamsInput {
    pub fn derive(&self) -> CliResult<fdlab::ParamSet> {
        Ok(fdlab::derive_params(self.n, self.m, self.beta)?)
    }
}

fn default_lambdas() -> Vec<f64> {
    vec![1.0]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub params: ParamsInput,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    /// Second-order fit, identities and limits (needs `r_max ≥ 1e3`).
    #[serde(default = "yes")]
    pub fit: bool,
    /// Write the `s, g, w, Φ, h` trace next to each profile.
    #[serde(default)]
    pub write_trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveGrid {
    pub h: f64,
    /// Outer radius; defaults to `50/λ_min` of the initial data.
    #[serde(default)]
    pub r_max: Option<f64>,
}

impl Default for EvolveGrid {
    fn default() -> Self {
        EvolveGrid { h: 0.0025, r_max: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    #[serde(default = "EnvelopeConfig::lo")]
    pub lam_lo: f64,
    pub lam_hi: f64,
    #[serde(default = "EnvelopeConfig::tol")]
    pub tol: f64,
    /// Radius to which the profile family is resolved.
    #[serde(default = "EnvelopeConfig::r_max")]
    pub r_max: f64,
}

impl EnvelopeConfig {
    fn lo() -> f64 {
        1e-3
    }
    fn tol() -> f64 {
        1e-12
    }
    fn r_max() -> f64 {
        1e3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionConfig {
    pub partner: InitialKind,
    /// `λ₂` of the upper profile entering the dissipation term.
    pub upper_lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingConfig {
    pub partner: InitialKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbConfig {
    #[serde(default = "AbConfig::big_t")]
    pub extinction_time: f64,
    /// Samples before this `τ` are skipped.
    #[serde(default = "AbConfig::tau_min")]
    pub tau_min: f64,
}

impl AbConfig {
    fn big_t() -> f64 {
        1.0
    }
    fn tau_min() -> f64 {
        0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub params: ParamsInput,
    pub initial: InitialKind,
    #[serde(default)]
    pub grid: EvolveGrid,
    pub tau_end: f64,
    pub sample_every: f64,
    #[serde(default)]
    pub dtau: Option<f64>,
    /// `λ` of the reference profile for `sup_dist`, `l1_dist` and `wl1_dist`.
    #[serde(default)]
    pub reference_lambda: Option<f64>,
    #[serde(default)]
    pub sup_radius: Option<f64>,
    #[serde(default)]
    pub envelope: Option<EnvelopeConfig>,
    #[serde(default)]
    pub contraction: Option<ContractionConfig>,
    #[serde(default)]
    pub ordering: Option<OrderingConfig>,
    #[serde(default)]
    pub aronson_benilan: Option<AbConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunCommand {
    Profile,
    Evolve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// Case table on an `(m, β)` grid per dimension.
    RegimeTable {
        dims: Vec<u32>,
        #[serde(default = "SweepConfig::points")]
        m_points: usize,
        #[serde(default = "SweepConfig::points")]
        beta_points: usize,
    },
    /// One base configuration run once per override (JSON merge patch).
    Runs { command: RunCommand, base: Value, overrides: Vec<Value> },
}

impl SweepConfig {
    fn points() -> usize {
        50
    }
}

pub fn parse<T: DeserializeOwned>(v: Value, what: &str) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| input(format!("invalid {what} config: {e}")))
}

pub fn read(path: &Path) -> CliResult<Value> {
    let text =
        std::fs::read_to_string(path).map_err(|e| input(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("config {} is not valid JSON: {e}", path.display())))
}

/// RFC 7396 merge patch.
pub fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                if v.is_null() {
                    b.remove(k);
                } else {
                    merge(b.entry(k.clone()).or_insert(Value::Null), v);
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn unknown_keys_rejected() {
        let v = json!({"params": {"n": 3, "m": 0.2, "beta": 3.0}, "lambdas": [1.0], "colour": 1});
        assert!(parse::<ProfileConfig>(v, "profile").is_err());
        let v = json!({"params": {"n": 3, "m": 0.2, "beta": 3.0, "gamma": 1}});
        assert!(parse::<ProfileConfig>(v, "profile").is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let v = json!({"params": {"n": 3, "m": 0.2, "beta": 3.0}});
        let c: ProfileConfig = parse(v, "profile").unwrap();
        assert_eq!(c.lambdas, vec![1.0]);
        assert!(c.fit);
        assert_eq!(c.grid, GridSpec::default());
    }

    #[test]
    fn merge_patch() {
        let mut a = json!({"grid": {"h": 0.01, "r_max": 5}, "tau_end": 1});
        merge(&mut a, &json!({"grid": {"h": 0.005, "r_max": null}, "x": [1]}));
        assert_eq!(a, json!({"grid": {"h": 0.005}, "tau_end": 1, "x": [1]}));
    }

    #[test]
    fn sweep_kinds() {
        let v = json!({"kind": "regime_table", "dims": [3]});
        assert_eq!(
            parse::<SweepConfig>(v, "sweep").unwrap(),
            SweepConfig::RegimeTable { dims: vec![3], m_points: 50, beta_points: 50 }
        );
        let v = json!({"kind": "runs", "command": "evolve", "base": {}, "overrides": [{}]});
        assert!(parse::<SweepConfig>(v, "sweep").is_ok());
    }

    #[test]
    fn bundled_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for e in std::fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            let v = read(&path).unwrap();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let ok = if v.get("kind").is_some() {
                parse::<SweepConfig>(v, &name).map(|_| ())
            } else if v.get("initial").is_some() {
                parse::<EvolveConfig>(v, &name).map(|_| ())
            } else if v.get("params").is_some() {
                parse::<ProfileConfig>(v, &name).map(|_| ())
            } else {
                parse::<ParamsInput>(v, &name).map(|_| ())
            };
            assert!(ok.is_ok(), "{name}: {:?}", ok.err());
            seen += 1;
        }
        assert!(seen >= 10);
    }
}

//! Run configuration: a JSON document, overlaid with command-line values.

use std::fmt;
use std::path::Path;

use chainstore::multimarket::{EntryMode, IncumbentPolicy, Schedule};
use chainstore::noisy::GainScaling;
use chainstore::scalar::{parse_scalar, Scalar};
use chainstore::sweep::SweepAxis;
use chainstore::{NoiseSpec, Payoffs, Protocol};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// A number kept as text so it can be read exactly in rational mode.
/// Accepts JSON numbers and strings such as `"5/7"` or `"1e-3"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Num(String);

impl Num {
    pub fn new(text: impl Into<String>) -> Self {
        Num(text.into())
    }

    pub fn get<S: Scalar>(&self, field: &str) -> Result<S, CliError> {
        parse_scalar(&self.0).map_err(|e| CliError::Config(format!("{field}: {e}")))
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => Ok(Num(n.to_string())),
            Value::String(s) => Ok(Num(s)),
            other => Err(serde::de::Error::custom(format!(
                "expected a number or numeric string, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffsConfig {
    #[serde(rename = "M")]
    pub m: Num,
    pub a: Num,
    pub c: Num,
    pub d: Num,
    pub v: Num,
}

impl Default for PayoffsConfig {
    fn default() -> Self {
        Self {
            m: Num::new("1"),
            a: Num::new("0.3"),
            c: Num::new("0.2"),
            d: Num::new("1"),
            v: Num::new("1"),
        }
    }
}

impl PayoffsConfig {
    pub fn build<S: Scalar>(&self) -> Result<Payoffs<S>, CliError> {
        Ok(Payoffs::new(
            self.m.get("payoffs.M")?,
            self.a.get("payoffs.a")?,
            self.c.get("payoffs.c")?,
            self.d.get("payoffs.d")?,
            self.v.get("payoffs.v")?,
        )?)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub p0: Num,
    pub pi: Num,
    pub protocol: Protocol,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            p0: Num::new("0.6"),
            pi: Num::new("0.8"),
            protocol: Protocol::Sequential,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "zero")]
    pub eps_f: Num,
    #[serde(default = "zero")]
    pub eps_a: Num,
}

fn zero() -> Num {
    Num::new("0")
}

impl NoiseConfig {
    pub fn build<S: Scalar>(&self) -> Result<NoiseSpec<S>, CliError> {
        Ok(NoiseSpec::new(
            self.eps_f.get("noise.eps_f")?,
            self.eps_a.get("noise.eps_a")?,
        )?)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub k: Num,
    /// Fight probability for `voi`; the equilibrium value when absent.
    #[serde(default)]
    pub q_a: Option<Num>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: String,
    /// Points along the sweep axis.
    pub points: usize,
    #[serde(default)]
    pub lo: Option<Num>,
    #[serde(default)]
    pub hi: Option<Num>,
    /// `PxQ` resolution of the `(p0, pi)` region grid.
    pub grid: String,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            axis: "pi".into(),
            points: 101,
            lo: None,
            hi: None,
            grid: "101x101".into(),
        }
    }
}

impl SweepConfig {
    pub fn axis(&self) -> Result<SweepAxis, CliError> {
        Ok(self.axis.parse()?)
    }

    pub fn grid(&self) -> Result<(usize, usize), CliError> {
        let bad = || CliError::Config(format!("grid `{}` is not of the form PxQ", self.grid));
        let lower = self.grid.to_ascii_lowercase();
        let (a, b) = lower.split_once('x').ok_or_else(bad)?;
        Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n_markets: usize,
    pub t_periods: usize,
    #[serde(deserialize_with = "policy_from_text", serialize_with = "policy_to_text")]
    pub policy: IncumbentPolicy,
    pub replications: usize,
    pub seed: u64,
    pub entry_mode: EntryMode,
    pub schedule: Schedule,
    pub gain_scaling: GainScaling,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n_markets: 2,
            t_periods: 2,
            policy: IncumbentPolicy::Threshold,
            replications: 10_000,
            seed: 0,
            entry_mode: EntryMode::default(),
            schedule: Schedule::default(),
            gain_scaling: GainScaling::default(),
        }
    }
}

fn policy_from_text<'de, D: Deserializer<'de>>(d: D) -> Result<IncumbentPolicy, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn policy_to_text<Ser: serde::Serializer>(p: &IncumbentPolicy, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    match p {
        IncumbentPolicy::Threshold => s.serialize_str("threshold"),
        IncumbentPolicy::Constant(r) => s.serialize_str(&format!("constant({r})")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Absolute tolerance for threshold comparisons in floating point.
    pub tolerance: f64,
    /// Exact rational arithmetic.
    pub rational: bool,
    /// Position of the reported representative inside a mixing interval.
    pub mix_selection: f64,
    /// Tolerance for the equilibrium check.
    pub verify_tolerance: f64,
    pub verify_grid: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            tolerance: chainstore::scalar::DEFAULT_TOLERANCE,
            rational: false,
            mix_selection: 0.5,
            verify_tolerance: chainstore::verifier::DEFAULT_VERIFY_TOLERANCE,
            verify_grid: chainstore::verifier::DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub payoffs: PayoffsConfig,
    pub model: ModelConfig,
    pub noise: Option<NoiseConfig>,
    pub acquisition: Option<AcquisitionConfig>,
    pub sweep: SweepConfig,
    pub simulate: SimulateConfig,
    pub output: OutputConfig,
    pub numerics: NumericsConfig,
    /// Run the equilibrium check after `solve`.
    pub verify: bool,
    /// Fight probability of a hand-built candidate for `verify`, replacing
    /// the solved one.
    pub candidate_q: Option<Num>,
}

/// Starts from the defaults, merges the file and then the overrides, each a
/// dotted path such as `model.p0` with a JSON or plain-text value.
pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig, CliError> {
    let mut doc = serde_json::to_value(RunConfig::default()).expect("defaults serialize");
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        merge(&mut doc, file);
    }
    for (key, raw) in overrides {
        set_path(&mut doc, key, raw)?;
    }
    serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, patch) => *slot = patch,
    }
}

/// Sets `a.b.c = raw`, reading `raw` as JSON when it parses and as a string
/// otherwise.
pub fn set_path(doc: &mut Value, key: &str, raw: &str) -> Result<(), CliError> {
    let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.into()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("malformed key `{key}`")));
        }
        if !node.is_object() {
            *node = Value::Object(Default::default());
        }
        let map = node.as_object_mut().expect("object");
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

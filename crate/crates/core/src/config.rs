//! Run configuration, read from a single TOML file. Every key is optional and
//! an empty file runs with the defaults.
//!
//! ```toml
//! seed = 42              # topology and traffic seed
//! scenarios = "all"      # or "1,4,15"
//!
//! [ports]                # omitted: ports of the generated topology
//! external = [1, 2]
//! internal = [3, 4, 5, 6, 7, 8, 9, 10]
//!
//! [prefixes]             # omitted or empty: bands of the generated topology
//! rows = ["2001:db8::/32 40 70", "2001:db8:1::/48 50 60"]
//!
//! [thresholds]           # theta = ceil((rate / active) * window_s * (1 + epsilon))
//! epsilon = 0.1
//! window_ext_ns = 1_000_000_000
//! window_int_ns = 1_000_000_000
//! ext_rate = 2000.0
//! ext_active = 20
//! int_unicast_rate = 1000.0
//! int_unicast_active = 20
//! int_multicast_rate = 200.0
//! int_multicast_active = 20
//! # theta_ext = 110      # explicit budgets override the derivation
//!
//! [binding]
//! cap_k = 8
//!
//! [sketch]               # seeds are hex strings
//! ext_width = 4096
//! int_width = 4096
//! bloom_bits = 65536
//! ext_seeds = ["0x9e3779b97f4a7c15", "0xc2b2ae3d27d4eb4f", "0x165667b19e3779f9"]
//!
//! [traffic]
//! duration_windows = 10  # scenario length, in external windows
//! [traffic.benign]       # packets per second per host
//! nd_per_host = 1.0
//! [traffic.attack]       # packets per second
//! ext_flood = 4400.0
//! [traffic.vectors]      # per-scenario vector override
//! 5 = ["ext_flood"]
//!
//! [output]
//! dir = "out"
//! emit_trace = false
//! emit_verdicts = false
//! format = "table"
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer};

use crate::binding::DEFAULT_CAP_K;
use crate::lpm::{LpmError, LpmTable, PrefixEntry};
use crate::metrics::Format;
use crate::packet::{PortId, PortRole, Vector};
use crate::pipeline::{compute_threshold, ConfigError, PipelineConfig, SketchParams};
use crate::scenario::{self, AttackRates, BenignRates, ScenarioError, ScenarioSpec, TopologySpec};
use crate::sketch::{self, DEPTH};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "ZTEDGE_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("prefix table: {0}")]
    Prefix(#[from] LpmError),
    #[error(transparent)]
    Pipeline(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("bad scenario selection {0:?}")]
    Selection(String),
    #[error("bad seed {0:?}")]
    Seed(String),
}

/// Which scenarios to run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ScenarioSelection {
    #[default]
    All,
    Ids(Vec<u8>),
}

impl ScenarioSelection {
    pub fn ids(&self) -> Vec<u8> {
        match self {
            ScenarioSelection::All => (1..=15).collect(),
            ScenarioSelection::Ids(ids) => ids.clone(),
        }
    }
}

impl FromStr for ScenarioSelection {
    type Err = ConfigFileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(ScenarioSelection::All);
        }
        let mut ids = BTreeSet::new();
        for part in s.split(',') {
            let id: u16 = part.trim().parse().map_err(|_| ConfigFileError::Selection(s.to_string()))?;
            if !(1..=15).contains(&id) {
                return Err(ScenarioError::UnknownId(id).into());
            }
            ids.insert(id as u8);
        }
        if ids.is_empty() {
            return Err(ConfigFileError::Selection(s.to_string()));
        }
        Ok(ScenarioSelection::Ids(ids.into_iter().collect()))
    }
}

impl<'de> Deserialize<'de> for ScenarioSelection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            List(Vec<u16>),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(t) => t,
            Raw::List(l) => l.iter().map(u16::to_string).collect::<Vec<_>>().join(","),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_seed(s: &str) -> Result<u64, ConfigFileError> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => t.replace('_', "").parse(),
    };
    parsed.map_err(|_| ConfigFileError::Seed(s.to_string()))
}

fn seeds<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[u64; DEPTH]>, D::Error> {
    let raw: Option<Vec<String>> = Option::deserialize(d)?;
    let Some(raw) = raw else { return Ok(None) };
    let parsed: Vec<u64> = raw.iter().map(|s| parse_seed(s)).collect::<Result<_, _>>().map_err(serde::de::Error::custom)?;
    parsed.try_into().map(Some).map_err(|_| serde::de::Error::custom(format!("expected {DEPTH} seeds")))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortsSection {
    #[serde(default)]
    pub external: Vec<PortId>,
    #[serde(default)]
    pub internal: Vec<PortId>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrefixSection {
    /// `prefix/length hl_min hl_max`
    pub rows: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    pub epsilon: f64,
    pub window_ext_ns: u64,
    pub window_int_ns: u64,
    pub ext_rate: f64,
    pub ext_active: u32,
    pub int_unicast_rate: f64,
    pub int_unicast_active: u32,
    pub int_multicast_rate: f64,
    pub int_multicast_active: u32,
    pub theta_ext: Option<u32>,
    pub theta_u: Option<u32>,
    pub theta_m: Option<u32>,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        ThresholdSection {
            epsilon: 0.1,
            window_ext_ns: scenario::DEFAULT_WINDOW_NS,
            window_int_ns: scenario::DEFAULT_WINDOW_NS,
            ext_rate: 2000.0,
            ext_active: 20,
            int_unicast_rate: 1000.0,
            int_unicast_active: 20,
            int_multicast_rate: 200.0,
            int_multicast_active: 20,
            theta_ext: None,
            theta_u: None,
            theta_m: None,
        }
    }
}

impl ThresholdSection {
    /// Resolved `(theta_ext, theta_u, theta_m)`.
    pub fn resolve(&self) -> Result<(u32, u32, u32), ConfigError> {
        if self.window_ext_ns == 0 {
            return Err(ConfigError::ZeroWindow("window_ext_ns"));
        }
        if self.window_int_ns == 0 {
            return Err(ConfigError::ZeroWindow("window_int_ns"));
        }
        let ext_s = self.window_ext_ns as f64 / 1e9;
        let int_s = self.window_int_ns as f64 / 1e9;
        let pick = |fixed: Option<u32>, rate, active, window| match fixed {
            Some(t) => Ok(t),
            None => compute_threshold(rate, active, window, self.epsilon),
        };
        Ok((
            pick(self.theta_ext, self.ext_rate, self.ext_active, ext_s)?,
            pick(self.theta_u, self.int_unicast_rate, self.int_unicast_active, int_s)?,
            pick(self.theta_m, self.int_multicast_rate, self.int_multicast_active, int_s)?,
        ))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BindingSection {
    pub cap_k: u32,
}

impl Default for BindingSection {
    fn default() -> Self {
        BindingSection { cap_k: DEFAULT_CAP_K }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SketchSection {
    pub ext_width: usize,
    pub int_width: usize,
    pub bloom_bits: usize,
    #[serde(deserialize_with = "seeds")]
    pub ext_seeds: Option<[u64; DEPTH]>,
    #[serde(deserialize_with = "seeds")]
    pub int_seeds: Option<[u64; DEPTH]>,
    #[serde(deserialize_with = "seeds")]
    pub bloom_seeds: Option<[u64; DEPTH]>,
}

impl Default for SketchSection {
    fn default() -> Self {
        SketchSection {
            ext_width: sketch::DEFAULT_CMS_WIDTH,
            int_width: sketch::DEFAULT_CMS_WIDTH,
            bloom_bits: sketch::DEFAULT_BLOOM_BITS,
            ext_seeds: None,
            int_seeds: None,
            bloom_seeds: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficSection {
    pub duration_windows: u64,
    pub benign: BenignRates,
    pub attack: AttackRates,
    /// Scenario id (as a string key) → active vectors.
    pub vectors: BTreeMap<String, Vec<Vector>>,
}

impl Default for TrafficSection {
    fn default() -> Self {
        TrafficSection {
            duration_windows: scenario::DEFAULT_DURATION_WINDOWS,
            benign: BenignRates::default(),
            attack: AttackRates::default(),
            vectors: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub emit_trace: bool,
    pub emit_verdicts: bool,
    #[serde(deserialize_with = "format")]
    pub format: Format,
}

fn format<'de, D: Deserializer<'de>>(d: D) -> Result<Format, D::Error> {
    String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), emit_trace: false, emit_verdicts: false, format: Format::Table }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub scenarios: ScenarioSelection,
    pub ports: Option<PortsSection>,
    pub prefixes: PrefixSection,
    pub thresholds: ThresholdSection,
    pub binding: BindingSection,
    pub sketch: SketchSection,
    pub traffic: TrafficSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: scenario::DEFAULT_SEED,
            scenarios: ScenarioSelection::All,
            ports: None,
            prefixes: PrefixSection::default(),
            thresholds: ThresholdSection::default(),
            binding: BindingSection::default(),
            sketch: SketchSection::default(),
            traffic: TrafficSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigFileError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.thresholds.resolve()?;
        for key in cfg.traffic.vectors.keys() {
            let id: u16 = key.parse().map_err(|_| ConfigFileError::Selection(key.clone()))?;
            if !(1..=15).contains(&id) {
                return Err(ScenarioError::UnknownId(id).into());
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Read { path: path.to_owned(), source })?;
        Self::from_toml(&text)
    }

    fn port_roles(&self, topo: &TopologySpec) -> Result<BTreeMap<PortId, PortRole>, ConfigError> {
        let Some(ports) = &self.ports else { return Ok(topo.port_roles.clone()) };
        let mut roles = BTreeMap::new();
        for (list, role) in [(&ports.external, PortRole::External), (&ports.internal, PortRole::Internal)] {
            for &p in list {
                if roles.insert(p, role).is_some_and(|prev| prev != role) {
                    return Err(ConfigError::ConflictingPortRole(p));
                }
            }
        }
        Ok(roles)
    }

    fn hl_table(&self, topo: &TopologySpec) -> Result<LpmTable, LpmError> {
        if self.prefixes.rows.is_empty() {
            return topo.hl_table();
        }
        let entries = self.prefixes.rows.iter().map(|r| PrefixEntry::parse_row(r)).collect::<Result<Vec<_>, _>>()?;
        LpmTable::load_from_config(entries)
    }

    /// Pipeline configuration; ports and bands fall back to `topo`.
    pub fn pipeline_config(&self, topo: &TopologySpec) -> Result<PipelineConfig, ConfigFileError> {
        let (theta_ext, theta_u, theta_m) = self.thresholds.resolve()?;
        let s = &self.sketch;
        let cfg = PipelineConfig {
            port_roles: self.port_roles(topo)?,
            hl_table: self.hl_table(topo)?,
            cap_k: self.binding.cap_k,
            theta_ext,
            theta_u,
            theta_m,
            window_ext_ns: self.thresholds.window_ext_ns,
            window_int_ns: self.thresholds.window_int_ns,
            ext_sketch: SketchParams { width: s.ext_width, seeds: s.ext_seeds.unwrap_or(sketch::DEFAULT_EXT_SEEDS) },
            int_sketch: SketchParams { width: s.int_width, seeds: s.int_seeds.unwrap_or(sketch::DEFAULT_INT_SEEDS) },
            bloom: SketchParams { width: s.bloom_bits, seeds: s.bloom_seeds.unwrap_or(sketch::DEFAULT_BLOOM_SEEDS) },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Scenario spec for `id` with this config's traffic overrides.
    pub fn scenario(&self, id: u8) -> Result<ScenarioSpec, ScenarioError> {
        let mut spec = ScenarioSpec::new(id)?;
        spec.seed = self.seed;
        spec.duration_ns = self.traffic.duration_windows * self.thresholds.window_ext_ns;
        spec.benign = self.traffic.benign;
        spec.attack = self.traffic.attack;
        if let Some(v) = self.traffic.vectors.get(&id.to_string()) {
            spec.vectors = v.clone();
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn topology(&self) -> TopologySpec {
        scenario::build_topology(self.seed)
    }
}

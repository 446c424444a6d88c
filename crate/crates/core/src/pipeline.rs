//! The four-stage per-packet decision engine.
//!
//! Stages run in a fixed order: external spoofing, internal spoofing,
//! external flooding, internal flooding. Identity checks come first so the
//! flooding sketches only ever count packets whose source survived them. The
//! first failing stage decides the verdict and later stages never see the
//! packet.

use std::collections::BTreeMap;
use std::fmt;
use std::net::Ipv6Addr;

use serde::{Deserialize, Serialize};

use crate::binding::{BindResult, BindingCheck, BindingTable};
use crate::lpm::{LpmTable, Prefix};
use crate::packet::{flow_key, is_multicast, registered_address, Packet, PortId, PortRole};
use crate::sketch::{self, BloomFilter, CountMinSketch, SketchError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Accept,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ExtSpoof,
    IntSpoof,
    ExtFlood,
    IntFlood,
    None,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::ExtSpoof => "ext_spoof",
            Stage::IntSpoof => "int_spoof",
            Stage::ExtFlood => "ext_flood",
            Stage::IntFlood => "int_flood",
            Stage::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    HlOutOfBand,
    NoPrefixMatch,
    BindingMismatch,
    UnknownUnbound,
    CapExceeded,
    PrefixRateExceeded,
    FlowRateExceededUnicast,
    FlowRateExceededMulticast,
    Accepted,
}

impl Reason {
    pub const ALL: [Reason; 9] = [
        Reason::HlOutOfBand,
        Reason::NoPrefixMatch,
        Reason::BindingMismatch,
        Reason::UnknownUnbound,
        Reason::CapExceeded,
        Reason::PrefixRateExceeded,
        Reason::FlowRateExceededUnicast,
        Reason::FlowRateExceededMulticast,
        Reason::Accepted,
    ];

    /// The stage that emits this reason.
    pub fn stage(self) -> Stage {
        match self {
            Reason::HlOutOfBand | Reason::NoPrefixMatch => Stage::ExtSpoof,
            Reason::BindingMismatch | Reason::UnknownUnbound | Reason::CapExceeded => Stage::IntSpoof,
            Reason::PrefixRateExceeded => Stage::ExtFlood,
            Reason::FlowRateExceededUnicast | Reason::FlowRateExceededMulticast => Stage::IntFlood,
            Reason::Accepted => Stage::None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Reason::HlOutOfBand => "hl_out_of_band",
            Reason::NoPrefixMatch => "no_prefix_match",
            Reason::BindingMismatch => "binding_mismatch",
            Reason::UnknownUnbound => "unknown_unbound",
            Reason::CapExceeded => "cap_exceeded",
            Reason::PrefixRateExceeded => "prefix_rate_exceeded",
            Reason::FlowRateExceededUnicast => "flow_rate_exceeded_unicast",
            Reason::FlowRateExceededMulticast => "flow_rate_exceeded_multicast",
            Reason::Accepted => "accepted",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A decision. Accept always carries `Stage::None` / `Reason::Accepted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Verdict {
    pub action: Action,
    pub stage: Stage,
    pub reason: Reason,
}

impl Verdict {
    pub const ACCEPT: Verdict = Verdict { action: Action::Accept, stage: Stage::None, reason: Reason::Accepted };

    pub fn drop(reason: Reason) -> Self {
        debug_assert_ne!(reason, Reason::Accepted);
        Verdict { action: Action::Drop, stage: reason.stage(), reason }
    }

    pub fn is_drop(&self) -> bool {
        self.action == Action::Drop
    }
}

/// Pass, or the reason the stage dropped the packet.
pub type StageResult = Result<(), Reason>;

/// The two windowed flooding modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FloodModule {
    External,
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("multicast budget theta_m={theta_m} must be below unicast budget theta_u={theta_u}")]
    MulticastNotStricter { theta_m: u32, theta_u: u32 },
    #[error("threshold `{0}` must be positive")]
    ZeroThreshold(&'static str),
    #[error("window `{0}` must be positive")]
    ZeroWindow(&'static str),
    #[error("binding cap must be positive")]
    ZeroCap,
    #[error("port {0} is assigned more than one role")]
    ConflictingPortRole(PortId),
    #[error("sketch parameters: {0}")]
    Sketch(#[from] SketchError),
    #[error("threshold inputs: {0}")]
    Threshold(#[from] ThresholdError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("timestamp {now} precedes previous timestamp {last}")]
    NonMonotonic { now: u64, last: u64 },
    #[error("ingress port {0} has no configured role")]
    UnknownPort(PortId),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThresholdError {
    #[error("active key count n must be at least 1")]
    ZeroActive,
    #[error("rate, window and margin must be finite with r > 0, window > 0, epsilon >= 0")]
    Domain,
    #[error("threshold {0} does not fit a 32-bit counter")]
    Overflow(f64),
}

/// Per-window packet budget `ceil((r / n) * window * (1 + epsilon))`.
///
/// Products that land within 1e-9 (relative) of an integer are taken as that
/// integer, so decimal inputs like `epsilon = 0.1` do not round up an extra
/// step through binary floating point.
pub fn compute_threshold(rate: f64, active: u32, window_secs: f64, epsilon: f64) -> Result<u32, ThresholdError> {
    if active == 0 {
        return Err(ThresholdError::ZeroActive);
    }
    if !(rate.is_finite() && rate > 0.0 && window_secs.is_finite() && window_secs > 0.0 && epsilon.is_finite() && epsilon >= 0.0) {
        return Err(ThresholdError::Domain);
    }
    let x = rate / f64::from(active) * window_secs * (1.0 + epsilon);
    let nearest = x.round();
    let theta = if (x - nearest).abs() <= 1e-9 * x.max(1.0) { nearest } else { x.ceil() };
    if theta > f64::from(u32::MAX) {
        return Err(ThresholdError::Overflow(theta));
    }
    Ok((theta as u32).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchParams {
    pub width: usize,
    pub seeds: [u64; sketch::DEPTH],
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub port_roles: BTreeMap<PortId, PortRole>,
    pub hl_table: LpmTable,
    pub cap_k: u32,
    pub theta_ext: u32,
    pub theta_u: u32,
    pub theta_m: u32,
    pub window_ext_ns: u64,
    pub window_int_ns: u64,
    pub ext_sketch: SketchParams,
    pub int_sketch: SketchParams,
    pub bloom: SketchParams,
}

impl PipelineConfig {
    /// Config with default sketch/bloom parameters, cap `k = 8` and the given
    /// ports, table and thresholds.
    pub fn new(
        port_roles: BTreeMap<PortId, PortRole>,
        hl_table: LpmTable,
        theta_ext: u32,
        theta_u: u32,
        theta_m: u32,
        window_ns: u64,
    ) -> Self {
        PipelineConfig {
            port_roles,
            hl_table,
            cap_k: crate::binding::DEFAULT_CAP_K,
            theta_ext,
            theta_u,
            theta_m,
            window_ext_ns: window_ns,
            window_int_ns: window_ns,
            ext_sketch: SketchParams { width: sketch::DEFAULT_CMS_WIDTH, seeds: sketch::DEFAULT_EXT_SEEDS },
            int_sketch: SketchParams { width: sketch::DEFAULT_CMS_WIDTH, seeds: sketch::DEFAULT_INT_SEEDS },
            bloom: SketchParams { width: sketch::DEFAULT_BLOOM_BITS, seeds: sketch::DEFAULT_BLOOM_SEEDS },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("theta_ext", self.theta_ext), ("theta_u", self.theta_u), ("theta_m", self.theta_m)] {
            if v == 0 {
                return Err(ConfigError::ZeroThreshold(name));
            }
        }
        if self.theta_m >= self.theta_u {
            return Err(ConfigError::MulticastNotStricter { theta_m: self.theta_m, theta_u: self.theta_u });
        }
        if self.window_ext_ns == 0 {
            return Err(ConfigError::ZeroWindow("window_ext_ns"));
        }
        if self.window_int_ns == 0 {
            return Err(ConfigError::ZeroWindow("window_int_ns"));
        }
        if self.cap_k == 0 {
            return Err(ConfigError::ZeroCap);
        }
        Ok(())
    }
}

/// Tumbling-window bookkeeping for one flooding module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowState {
    pub start_ns: u64,
    pub length_ns: u64,
}

#[derive(Debug, Clone)]
struct FloodState {
    sketch: CountMinSketch,
    window: WindowState,
}

impl FloodState {
    fn new(params: SketchParams, length_ns: u64) -> Result<Self, SketchError> {
        Ok(FloodState {
            sketch: CountMinSketch::new(params.width, params.seeds)?,
            window: WindowState { start_ns: 0, length_ns },
        })
    }

    fn rotate(&mut self, now: u64) {
        let elapsed = now.saturating_sub(self.window.start_ns);
        if elapsed >= self.window.length_ns {
            self.sketch.reset();
            self.window.start_ns += elapsed - elapsed % self.window.length_ns;
        }
    }
}

/// The stateful defense engine. One packet at a time, in timestamp order.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: PipelineConfig,
    bindings: BindingTable,
    learned: BloomFilter,
    ext_flood: FloodState,
    int_flood: FloodState,
    last_ts: Option<u64>,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        Ok(Pipeline {
            bindings: BindingTable::new(cfg.cap_k),
            learned: BloomFilter::new(cfg.bloom.width, cfg.bloom.seeds)?,
            ext_flood: FloodState::new(cfg.ext_sketch, cfg.window_ext_ns)?,
            int_flood: FloodState::new(cfg.int_sketch, cfg.window_int_ns)?,
            last_ts: None,
            cfg,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn bindings(&self) -> &BindingTable {
        &self.bindings
    }

    pub fn sketch(&self, module: FloodModule) -> &CountMinSketch {
        &self.flood(module).sketch
    }

    pub fn window(&self, module: FloodModule) -> WindowState {
        self.flood(module).window
    }

    fn flood(&self, module: FloodModule) -> &FloodState {
        match module {
            FloodModule::External => &self.ext_flood,
            FloodModule::Internal => &self.int_flood,
        }
    }

    fn role(&self, port: PortId) -> Result<PortRole, PipelineError> {
        self.cfg.port_roles.get(&port).copied().ok_or(PipelineError::UnknownPort(port))
    }

    /// Runs all four stages on `pkt` at time `now`.
    pub fn process(&mut self, pkt: &Packet, now: u64) -> Result<Verdict, PipelineError> {
        if let Some(last) = self.last_ts {
            if now < last {
                return Err(PipelineError::NonMonotonic { now, last });
            }
        }
        let role = self.role(pkt.ingress_port)?;
        self.last_ts = Some(now);

        let outcome = (|| {
            let matched = match role {
                PortRole::External => Some(self.ext_spoof(pkt)?),
                PortRole::Internal => None,
            };
            if role == PortRole::Internal {
                self.int_spoof(pkt, now)?;
            }
            self.maybe_rotate_window(FloodModule::External, now);
            if let Some(prefix) = matched {
                self.ext_flood(&prefix)?;
            }
            self.maybe_rotate_window(FloodModule::Internal, now);
            if role == PortRole::Internal {
                self.int_flood(pkt)?;
            }
            Ok(())
        })();
        Ok(match outcome {
            Ok(()) => Verdict::ACCEPT,
            Err(reason) => Verdict::drop(reason),
        })
    }

    /// Processes a packet at its own timestamp.
    pub fn process_packet(&mut self, pkt: &Packet) -> Result<Verdict, PipelineError> {
        self.process(pkt, pkt.ts_ns)
    }

    fn ext_spoof(&self, pkt: &Packet) -> Result<Prefix, Reason> {
        let entry = self.cfg.hl_table.lookup(&pkt.src).ok_or(Reason::NoPrefixMatch)?;
        if entry.band.contains(pkt.hop_limit) {
            Ok(entry.prefix)
        } else {
            Err(Reason::HlOutOfBand)
        }
    }

    /// Stage 1: Hop-Limit plausibility against the longest matching prefix.
    /// Packets on internal ports pass.
    pub fn external_spoof_check(&self, pkt: &Packet) -> Result<StageResult, PipelineError> {
        Ok(match self.role(pkt.ingress_port)? {
            PortRole::Internal => Ok(()),
            PortRole::External => self.ext_spoof(pkt).map(|_| ()),
        })
    }

    fn int_spoof(&mut self, pkt: &Packet, now: u64) -> StageResult {
        if let Ok(addr) = registered_address(pkt) {
            let key = addr.octets();
            if !self.learned.check(&key) {
                match self.bindings.try_register(addr, pkt.ingress_port, now) {
                    BindResult::Registered => {
                        self.learned.insert(&key);
                        return Ok(());
                    }
                    BindResult::CapExceeded => return Err(Reason::CapExceeded),
                    BindResult::AlreadyBound(_) => {}
                }
            }
            return self.binding_verdict(&addr, pkt.ingress_port);
        }
        self.binding_verdict(&pkt.src, pkt.ingress_port)
    }

    fn binding_verdict(&self, addr: &Ipv6Addr, port: PortId) -> StageResult {
        match self.bindings.check(addr, port) {
            BindingCheck::Match => Ok(()),
            BindingCheck::Mismatch => Err(Reason::BindingMismatch),
            BindingCheck::Unknown => Err(Reason::UnknownUnbound),
        }
    }

    /// Stage 2: DAD-anchored address/port binding. A first-seen DAD probe
    /// registers its target; any other packet must come from the port its
    /// source is bound to. Packets on external ports pass.
    pub fn internal_spoof_check(&mut self, pkt: &Packet, now: u64) -> Result<StageResult, PipelineError> {
        Ok(match self.role(pkt.ingress_port)? {
            PortRole::External => Ok(()),
            PortRole::Internal => self.int_spoof(pkt, now),
        })
    }

    fn ext_flood(&mut self, prefix: &Prefix) -> StageResult {
        let key = prefix.key_bytes();
        if self.ext_flood.sketch.estimate(&key) >= self.cfg.theta_ext {
            return Err(Reason::PrefixRateExceeded);
        }
        self.ext_flood.sketch.increment(&key);
        Ok(())
    }

    /// Stage 3: per-prefix windowed budget, keyed by the longest matching
    /// prefix and its length. Packets on internal ports (or with no matching
    /// prefix) pass.
    pub fn external_flood_check(&mut self, pkt: &Packet, now: u64) -> Result<StageResult, PipelineError> {
        if self.role(pkt.ingress_port)? == PortRole::Internal {
            return Ok(Ok(()));
        }
        self.maybe_rotate_window(FloodModule::External, now);
        Ok(match self.cfg.hl_table.lookup(&pkt.src).map(|e| e.prefix) {
            Some(prefix) => self.ext_flood(&prefix),
            None => Ok(()),
        })
    }

    fn int_flood(&mut self, pkt: &Packet) -> StageResult {
        let key = flow_key(pkt).to_bytes();
        let count = self.int_flood.sketch.estimate(&key);
        if is_multicast(&pkt.dst) {
            if count >= self.cfg.theta_m {
                return Err(Reason::FlowRateExceededMulticast);
            }
        } else if count >= self.cfg.theta_u {
            return Err(Reason::FlowRateExceededUnicast);
        }
        self.int_flood.sketch.increment(&key);
        Ok(())
    }

    /// Stage 4: per-flow windowed budget with a stricter multicast limit.
    /// Packets on external ports pass.
    pub fn internal_flood_check(&mut self, pkt: &Packet, now: u64) -> Result<StageResult, PipelineError> {
        if self.role(pkt.ingress_port)? == PortRole::External {
            return Ok(Ok(()));
        }
        self.maybe_rotate_window(FloodModule::Internal, now);
        Ok(self.int_flood(pkt))
    }

    /// Clears the module's sketch once `now` leaves the current window and
    /// moves the window start to the last boundary at or before `now`.
    pub fn maybe_rotate_window(&mut self, module: FloodModule, now: u64) {
        match module {
            FloodModule::External => self.ext_flood.rotate(now),
            FloodModule::Internal => self.int_flood.rotate(now),
        }
    }

    /// Whether a DAD probe for `addr` has already been learned.
    pub fn has_learned(&self, addr: &Ipv6Addr) -> bool {
        self.learned.check(&addr.octets())
    }
}

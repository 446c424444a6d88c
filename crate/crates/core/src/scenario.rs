//! Deterministic evaluation topology and labeled traffic for the fifteen
//! attack mixes.
//!
//! The topology is an edge switch with two upstream ports and eight internal
//! ports. Upstream there are five ISP /32s, each with nested /48, /56 and /64
//! allocations, and the hundred external hosts `h1..h100` live in them. Every
//! prefix gets a path profile (initial Hop Limit and hop count). Its band in
//! the HL table is the arrival value widened by the per-host jitter and a
//! margin of two.
//!
//! Each vector's attack traffic is shaped so that only its own stage can
//! catch it. Flood sources use bound addresses and in-band Hop Limits, and
//! they flood keys that carry no benign traffic, so the flooding budgets
//! never punish benign packets.

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv6Addr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lpm::{HlBand, LpmError, LpmTable, Prefix, PrefixEntry};
use crate::packet::{solicited_node, LabeledPacket, Packet, PortId, PortRole, Truth, Vector, L4};
use crate::sketch::hash_row;

pub const SEC_NS: u64 = 1_000_000_000;
pub const MS_NS: u64 = 1_000_000;

pub const EXTERNAL_PORTS: [PortId; 2] = [1, 2];
pub const INTERNAL_PORTS: [PortId; 8] = [3, 4, 5, 6, 7, 8, 9, 10];
const BENIGN_HOST_PORTS: [PortId; 6] = [3, 4, 5, 6, 7, 8];
const INT_FLOOD_PORT: PortId = 9;
const INT_SPOOF_PORT: PortId = 10;
const EXT_SPOOF_PORT: PortId = 2;

const EXTERNAL_HOSTS: usize = 100;
const INTERNAL_HOSTS: usize = 16;
const FLOOD_BOTS: usize = 8;
const INITIAL_HLS: [u8; 3] = [64, 128, 255];
const BAND_MARGIN: u8 = 2;
const HOST_JITTER: u8 = 1;
/// Spacing of the start-up DAD probes.
const DAD_SPACING_NS: u64 = MS_NS;
/// Steady traffic (benign and attack) starts after the DAD burst.
const TRAFFIC_START_NS: u64 = 100 * MS_NS;

const ICMPV6_ECHO_REQUEST: u8 = 128;
const HTTP: u16 = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefixKind {
    Isp,
    Customer,
    FloodSource,
}

/// One prefix of the external address plan and its path profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefixPlan {
    pub prefix: Prefix,
    pub kind: PrefixKind,
    pub initial_hl: u8,
    pub path_len: u8,
    pub port: PortId,
}

impl PrefixPlan {
    /// Nominal arrival Hop Limit (no per-host jitter).
    pub fn arrival_hl(&self) -> u8 {
        self.initial_hl - self.path_len
    }

    pub fn band(&self) -> HlBand {
        let hi = self.arrival_hl();
        let lo = hi - HOST_JITTER;
        HlBand { min: lo.saturating_sub(BAND_MARGIN), max: hi.saturating_add(BAND_MARGIN) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalHost {
    pub name: String,
    pub addr: Ipv6Addr,
    pub prefix: Prefix,
    pub port: PortId,
    pub initial_hl: u8,
    /// Full path length, prefix hops plus this host's jitter.
    pub path_len: u8,
}

impl ExternalHost {
    pub fn arrival_hl(&self) -> u8 {
        self.initial_hl - self.path_len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InternalHost {
    pub addr: Ipv6Addr,
    pub port: PortId,
    pub dad_at_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExternalAttacker {
    pub port: PortId,
    pub hop_limit: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologySpec {
    pub seed: u64,
    pub port_roles: BTreeMap<PortId, PortRole>,
    pub prefixes: Vec<PrefixPlan>,
    /// `h1..h100`.
    pub external_hosts: Vec<ExternalHost>,
    /// Benign internal hosts, the server first.
    pub internal_hosts: Vec<InternalHost>,
    pub server: Ipv6Addr,
    /// The edge router; target of benign ND keepalives.
    pub router: Ipv6Addr,
    pub flood_prefix: Prefix,
    pub flood_bots: Vec<ExternalHost>,
    pub int_flood_attacker: InternalHost,
    pub int_spoof_attacker: InternalHost,
    pub ext_spoof_attacker: ExternalAttacker,
}

fn isp_prefix(i: u16) -> Ipv6Addr {
    Ipv6Addr::new(0x2001, i * 0x1000, 0, 0, 0, 0, 0, 0)
}

fn with_iid(net: Ipv6Addr, iid: u64) -> Ipv6Addr {
    Ipv6Addr::from((u128::from(net) & !u128::from(u64::MAX)) | u128::from(iid))
}

fn substream_rng(seed: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(hash_row(seed, tag.as_bytes()))
}

/// Longest plan prefix covering `addr`, by exhaustive scan.
fn deepest(prefixes: &[PrefixPlan], addr: &Ipv6Addr) -> Option<Prefix> {
    prefixes.iter().filter(|p| p.prefix.contains(addr)).map(|p| p.prefix).max_by_key(|p| p.len())
}

/// A random address whose longest plan match is exactly `plan.prefix`.
fn host_in(rng: &mut ChaCha8Rng, plan: &PrefixPlan, all: &[PrefixPlan]) -> Ipv6Addr {
    let base = u128::from(plan.prefix.addr());
    let host_bits = 128 - u32::from(plan.prefix.len());
    loop {
        let r: u128 = rng.random();
        let addr = Ipv6Addr::from(base | (r & (u128::MAX >> (128 - host_bits))));
        if deepest(all, &addr) == Some(plan.prefix) {
            return addr;
        }
    }
}

/// Builds the deterministic evaluation topology for `seed`.
pub fn build_topology(seed: u64) -> TopologySpec {
    let mut rng = substream_rng(seed, "topology");
    let mut prefixes = Vec::new();
    for i in 1..=5u16 {
        let port = if i <= 3 { EXTERNAL_PORTS[0] } else { EXTERNAL_PORTS[1] };
        let isp_path: u8 = rng.random_range(3..=14);
        let mut push = |rng: &mut ChaCha8Rng, addr: Ipv6Addr, len: u8, kind: PrefixKind, extra: u8| {
            prefixes.push(PrefixPlan {
                prefix: Prefix::new(addr, len).expect("plan prefixes are canonical"),
                kind,
                initial_hl: *INITIAL_HLS.choose(rng).expect("non-empty"),
                path_len: isp_path + extra,
                port,
            });
        };
        let s = i * 0x1000;
        push(&mut rng, isp_prefix(i), 32, PrefixKind::Isp, 0);
        let n48: u16 = rng.random_range(1..=2);
        for j in 1..=n48 {
            let extra = rng.random_range(0..=4);
            push(&mut rng, Ipv6Addr::new(0x2001, s, j, 0, 0, 0, 0, 0), 48, PrefixKind::Customer, extra);
        }
        let extra = rng.random_range(0..=4);
        push(&mut rng, Ipv6Addr::new(0x2001, s, 1, 0x0100, 0, 0, 0, 0), 56, PrefixKind::Customer, extra);
        let extra = rng.random_range(0..=4);
        push(&mut rng, Ipv6Addr::new(0x2001, s, 1, 0x0101, 0, 0, 0, 0), 64, PrefixKind::Customer, extra);
        if rng.random_bool(0.5) {
            let extra = rng.random_range(0..=4);
            push(&mut rng, Ipv6Addr::new(0x2001, s, 0, 0x0042, 0, 0, 0, 0), 64, PrefixKind::Customer, extra);
        }
    }
    let flood_prefix = Prefix::new(Ipv6Addr::new(0x2001, 0x1000, 0x00ff, 0x0001, 0, 0, 0, 0), 64).expect("canonical");
    prefixes.push(PrefixPlan {
        prefix: flood_prefix,
        kind: PrefixKind::FloodSource,
        initial_hl: 64,
        path_len: rng.random_range(3..=14),
        port: EXTERNAL_PORTS[0],
    });

    let host_from = |rng: &mut ChaCha8Rng, name: String, plan: &PrefixPlan| ExternalHost {
        name,
        addr: host_in(rng, plan, &prefixes),
        prefix: plan.prefix,
        port: plan.port,
        initial_hl: plan.initial_hl,
        path_len: plan.path_len + rng.random_range(0..=HOST_JITTER),
    };
    let benign_plans: Vec<&PrefixPlan> = prefixes.iter().filter(|p| p.kind != PrefixKind::FloodSource).collect();
    let mut external_hosts = Vec::with_capacity(EXTERNAL_HOSTS);
    for n in 0..EXTERNAL_HOSTS {
        // Cover every prefix once, then spread the rest at random.
        let plan = if n < benign_plans.len() { benign_plans[n] } else { *benign_plans.choose(&mut rng).expect("non-empty") };
        external_hosts.push(host_from(&mut rng, format!("h{}", n + 1), plan));
    }
    let flood_plan = *prefixes.last().expect("flood prefix pushed last");
    let flood_bots = (0..FLOOD_BOTS).map(|n| host_from(&mut rng, format!("bot{}", n + 1), &flood_plan)).collect();

    let internal_net = Ipv6Addr::new(0xfd00, 0, 0, 0, 0, 0, 0, 0);
    let server = with_iid(internal_net, 0x80);
    let mut internal_hosts = vec![InternalHost { addr: server, port: BENIGN_HOST_PORTS[0], dad_at_start: true }];
    for n in 0..INTERNAL_HOSTS {
        internal_hosts.push(InternalHost {
            addr: with_iid(internal_net, 0x100 + n as u64),
            port: BENIGN_HOST_PORTS[n % BENIGN_HOST_PORTS.len()],
            dad_at_start: true,
        });
    }

    let port_roles = EXTERNAL_PORTS
        .iter()
        .map(|&p| (p, PortRole::External))
        .chain(INTERNAL_PORTS.iter().map(|&p| (p, PortRole::Internal)))
        .collect();

    TopologySpec {
        seed,
        port_roles,
        prefixes,
        external_hosts,
        internal_hosts,
        server,
        router: with_iid(internal_net, 1),
        flood_prefix,
        flood_bots,
        int_flood_attacker: InternalHost { addr: with_iid(internal_net, 0xbad1), port: INT_FLOOD_PORT, dad_at_start: true },
        int_spoof_attacker: InternalHost { addr: with_iid(internal_net, 0xbad2), port: INT_SPOOF_PORT, dad_at_start: true },
        ext_spoof_attacker: ExternalAttacker { port: EXT_SPOOF_PORT, hop_limit: 64 - 9 },
    }
}

impl TopologySpec {
    /// HL band rows for every plan prefix.
    pub fn hl_entries(&self) -> Vec<PrefixEntry> {
        self.prefixes.iter().map(|p| PrefixEntry { prefix: p.prefix, band: p.band() }).collect()
    }

    pub fn hl_table(&self) -> Result<LpmTable, LpmError> {
        LpmTable::load_from_config(self.hl_entries())
    }

    pub fn plan(&self, prefix: &Prefix) -> Option<&PrefixPlan> {
        self.prefixes.iter().find(|p| p.prefix == *prefix)
    }

    /// Band configured for the prefix `host` was allocated from.
    pub fn band_of(&self, host: &ExternalHost) -> HlBand {
        self.plan(&host.prefix).expect("host prefix is in the plan").band()
    }
}

/// Rates of the benign background traffic, per host, in packets per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenignRates {
    pub nd_per_host: f64,
    pub ext_syn_per_host: f64,
    pub int_syn_per_host: f64,
}

impl Default for BenignRates {
    fn default() -> Self {
        BenignRates { nd_per_host: 1.0, ext_syn_per_host: 2.0, int_syn_per_host: 1.0 }
    }
}

/// Attack packet rates in packets per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackRates {
    /// Aggregate rate of the flood bots.
    pub ext_flood: f64,
    pub ext_spoof: f64,
    pub int_flood_unicast: f64,
    pub int_flood_multicast: f64,
    pub int_spoof: f64,
}

impl Default for AttackRates {
    fn default() -> Self {
        AttackRates {
            ext_flood: 4400.0,
            ext_spoof: 500.0,
            int_flood_unicast: 2200.0,
            int_flood_multicast: 2200.0,
            int_spoof: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub id: u8,
    pub vectors: Vec<Vector>,
    pub duration_ns: u64,
    pub benign: BenignRates,
    pub attack: AttackRates,
    pub seed: u64,
}

/// Scenario id → active vectors, in the order they are named.
pub const SCENARIO_VECTORS: [&[Vector]; 15] = {
    use Vector::*;
    [
        &[IntFlood],
        &[ExtFlood],
        &[IntSpoof],
        &[ExtSpoof],
        &[ExtFlood, ExtSpoof],
        &[ExtFlood, IntSpoof],
        &[ExtFlood, IntFlood],
        &[ExtSpoof, IntFlood],
        &[IntSpoof, IntFlood],
        &[IntSpoof, ExtSpoof],
        &[IntFlood, ExtFlood, ExtSpoof],
        &[IntSpoof, ExtFlood, ExtSpoof],
        &[IntFlood, IntSpoof, ExtFlood],
        &[IntFlood, IntSpoof, ExtSpoof],
        &[IntFlood, IntSpoof, ExtFlood, ExtSpoof],
    ]
};

pub const DEFAULT_DURATION_WINDOWS: u64 = 10;
pub const DEFAULT_WINDOW_NS: u64 = SEC_NS;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario id {0} is outside 1..=15")]
    UnknownId(u16),
    #[error("scenario has no attack vectors")]
    NoVectors,
    #[error("rate `{0}` must be finite and non-negative")]
    BadRate(&'static str),
    #[error("no external host has a band excluding the spoofer's hop limit {0}")]
    NoSpoofTarget(u8),
}

impl ScenarioSpec {
    /// Default spec for a scenario id.
    pub fn new(id: u8) -> Result<Self, ScenarioError> {
        let vectors = SCENARIO_VECTORS.get(usize::from(id).wrapping_sub(1)).ok_or(ScenarioError::UnknownId(id.into()))?;
        Ok(ScenarioSpec {
            id,
            vectors: vectors.to_vec(),
            duration_ns: DEFAULT_DURATION_WINDOWS * DEFAULT_WINDOW_NS,
            benign: BenignRates::default(),
            attack: AttackRates::default(),
            seed: DEFAULT_SEED,
        })
    }

    pub fn has(&self, v: Vector) -> bool {
        self.vectors.contains(&v)
    }

    /// Row label, e.g. `Ext. Flood + Int. Spoof`.
    pub fn name(&self) -> String {
        if self.vectors.len() == 1 {
            return match self.vectors[0] {
                Vector::IntFlood => "Internal Flooding",
                Vector::ExtFlood => "External Flooding",
                Vector::IntSpoof => "Internal Spoofing",
                Vector::ExtSpoof => "External Spoofing",
            }
            .to_string();
        }
        if self.vectors.len() == 4 {
            return "Full Combined Attack (All 4 Vectors)".to_string();
        }
        let short = |v: &Vector| match v {
            Vector::IntFlood => "Int. Flood",
            Vector::ExtFlood => "Ext. Flood",
            Vector::IntSpoof => "Int. Spoof",
            Vector::ExtSpoof => "Ext. Spoof",
        };
        self.vectors.iter().map(short).collect::<Vec<_>>().join(" + ")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(1..=15).contains(&self.id) {
            return Err(ScenarioError::UnknownId(self.id.into()));
        }
        if self.vectors.is_empty() {
            return Err(ScenarioError::NoVectors);
        }
        let rates = [
            ("nd_per_host", self.benign.nd_per_host),
            ("ext_syn_per_host", self.benign.ext_syn_per_host),
            ("int_syn_per_host", self.benign.int_syn_per_host),
            ("ext_flood", self.attack.ext_flood),
            ("ext_spoof", self.attack.ext_spoof),
            ("int_flood_unicast", self.attack.int_flood_unicast),
            ("int_flood_multicast", self.attack.int_flood_multicast),
            ("int_spoof", self.attack.int_spoof),
        ];
        for (name, r) in rates {
            if !(r.is_finite() && r >= 0.0) {
                return Err(ScenarioError::BadRate(name));
            }
        }
        Ok(())
    }
}

/// All fifteen scenarios with default parameters.
pub fn list_scenarios() -> Vec<ScenarioSpec> {
    (1..=15).map(|id| ScenarioSpec::new(id).expect("ids 1..=15 are valid")).collect()
}

/// Jittered periodic arrival times at `rate` packets/s over `[start, end)`.
fn arrivals(rng: &mut ChaCha8Rng, rate: f64, start: u64, end: u64) -> Vec<u64> {
    if rate <= 0.0 || end <= start {
        return Vec::new();
    }
    let gap = SEC_NS as f64 / rate;
    let n = ((end - start) as f64 / gap).floor() as u64;
    (0..n)
        .map(|i| start + ((i as f64 + rng.random::<f64>()) * gap) as u64)
        .map(|t| t.min(end - 1))
        .collect()
}

struct Emitter {
    out: Vec<(u64, u64, LabeledPacket)>,
    seq: u64,
}

impl Emitter {
    fn push(&mut self, packet: Packet, truth: Truth) {
        self.out.push((packet.ts_ns, self.seq, LabeledPacket { packet, truth: Some(truth) }));
        self.seq += 1;
    }
}

fn dad_packet(ts_ns: u64, host: &InternalHost) -> Packet {
    Packet {
        ts_ns,
        ingress_port: host.port,
        src: Ipv6Addr::UNSPECIFIED,
        dst: solicited_node(&host.addr),
        hop_limit: 255,
        l4: L4::neighbor_solicitation(host.addr),
    }
}

/// Generates the timestamp-ordered labeled stream for `scenario`.
pub fn generate(scenario: &ScenarioSpec, topo: &TopologySpec) -> Result<Vec<LabeledPacket>, ScenarioError> {
    scenario.validate()?;
    let end = scenario.duration_ns;
    let seed = scenario.seed;
    let mut em = Emitter { out: Vec::new(), seq: 0 };

    // Start-up DAD burst: benign hosts, then any active internal attackers.
    let mut registrants: Vec<InternalHost> = topo.internal_hosts.iter().copied().filter(|h| h.dad_at_start).collect();
    if scenario.has(Vector::IntFlood) {
        registrants.push(topo.int_flood_attacker);
    }
    if scenario.has(Vector::IntSpoof) {
        registrants.push(topo.int_spoof_attacker);
    }
    for (i, host) in registrants.iter().enumerate() {
        em.push(dad_packet(i as u64 * DAD_SPACING_NS, host), Truth::Benign);
    }

    // Benign internal: ND keepalives to the router and SYNs to the server.
    let router_group = solicited_node(&topo.router);
    for (i, host) in topo.internal_hosts.iter().enumerate() {
        let mut rng = substream_rng(seed, &format!("nd/{i}"));
        for t in arrivals(&mut rng, scenario.benign.nd_per_host, TRAFFIC_START_NS, end) {
            let pkt = Packet {
                ts_ns: t,
                ingress_port: host.port,
                src: host.addr,
                dst: router_group,
                hop_limit: 255,
                l4: L4::neighbor_solicitation(topo.router),
            };
            em.push(pkt, Truth::Benign);
        }
        if host.addr == topo.server {
            continue;
        }
        let mut rng = substream_rng(seed, &format!("int-syn/{i}"));
        for t in arrivals(&mut rng, scenario.benign.int_syn_per_host, TRAFFIC_START_NS, end) {
            let pkt = Packet {
                ts_ns: t,
                ingress_port: host.port,
                src: host.addr,
                dst: topo.server,
                hop_limit: 64,
                l4: L4::tcp_syn(rng.random_range(49152..=65535), HTTP),
            };
            em.push(pkt, Truth::Benign);
        }
    }

    // Benign external web clients.
    for host in &topo.external_hosts {
        let mut rng = substream_rng(seed, &format!("ext-syn/{}", host.name));
        for t in arrivals(&mut rng, scenario.benign.ext_syn_per_host, TRAFFIC_START_NS, end) {
            let pkt = Packet {
                ts_ns: t,
                ingress_port: host.port,
                src: host.addr,
                dst: topo.server,
                hop_limit: host.arrival_hl(),
                l4: L4::tcp_syn(rng.random_range(49152..=65535), HTTP),
            };
            em.push(pkt, Truth::Benign);
        }
    }

    if scenario.has(Vector::ExtFlood) {
        let mut rng = substream_rng(seed, "attack/ext-flood");
        for t in arrivals(&mut rng, scenario.attack.ext_flood, TRAFFIC_START_NS, end) {
            let bot = topo.flood_bots.choose(&mut rng).expect("bots exist");
            let pkt = Packet {
                ts_ns: t,
                ingress_port: bot.port,
                src: bot.addr,
                dst: topo.server,
                hop_limit: bot.arrival_hl(),
                l4: L4::tcp_syn(rng.random_range(1024..=65535), HTTP),
            };
            em.push(pkt, Truth::Attack(Vector::ExtFlood));
        }
    }

    if scenario.has(Vector::ExtSpoof) {
        let attacker = topo.ext_spoof_attacker;
        let victims: Vec<&ExternalHost> =
            topo.external_hosts.iter().filter(|h| !topo.band_of(h).contains(attacker.hop_limit)).collect();
        if victims.is_empty() {
            return Err(ScenarioError::NoSpoofTarget(attacker.hop_limit));
        }
        let mut rng = substream_rng(seed, "attack/ext-spoof");
        for t in arrivals(&mut rng, scenario.attack.ext_spoof, TRAFFIC_START_NS, end) {
            let victim = victims.choose(&mut rng).expect("non-empty");
            let pkt = Packet {
                ts_ns: t,
                ingress_port: attacker.port,
                src: victim.addr,
                dst: topo.server,
                hop_limit: attacker.hop_limit,
                l4: L4::tcp_syn(rng.random_range(1024..=65535), HTTP),
            };
            em.push(pkt, Truth::Attack(Vector::ExtSpoof));
        }
    }

    if scenario.has(Vector::IntFlood) {
        let attacker = topo.int_flood_attacker;
        let mut rng = substream_rng(seed, "attack/int-flood/unicast");
        for t in arrivals(&mut rng, scenario.attack.int_flood_unicast, TRAFFIC_START_NS, end) {
            let pkt = Packet {
                ts_ns: t,
                ingress_port: attacker.port,
                src: attacker.addr,
                dst: topo.server,
                hop_limit: 64,
                l4: L4::tcp_syn(rng.random_range(1024..=65535), HTTP),
            };
            em.push(pkt, Truth::Attack(Vector::IntFlood));
        }
        let all_nodes = Ipv6Addr::new(0xff02, 0, 0, 0, 0, 0, 0, 1);
        let mut rng = substream_rng(seed, "attack/int-flood/multicast");
        for t in arrivals(&mut rng, scenario.attack.int_flood_multicast, TRAFFIC_START_NS, end) {
            let pkt = Packet {
                ts_ns: t,
                ingress_port: attacker.port,
                src: attacker.addr,
                dst: all_nodes,
                hop_limit: 255,
                l4: L4::Icmpv6 { icmp_type: ICMPV6_ECHO_REQUEST, ns_target: None },
            };
            em.push(pkt, Truth::Attack(Vector::IntFlood));
        }
    }

    if scenario.has(Vector::IntSpoof) {
        let attacker = topo.int_spoof_attacker;
        let victims: Vec<&InternalHost> = topo.internal_hosts.iter().filter(|h| h.port != attacker.port).collect();
        let mut rng = substream_rng(seed, "attack/int-spoof");
        for t in arrivals(&mut rng, scenario.attack.int_spoof, TRAFFIC_START_NS, end) {
            let victim = victims.choose(&mut rng).expect("benign hosts exist");
            let (dst, l4) = if rng.random_bool(0.5) {
                (router_group, L4::neighbor_solicitation(topo.router))
            } else {
                (Ipv6Addr::new(0xff02, 0, 0, 0, 0, 0, 0, 1), L4::neighbor_advertisement())
            };
            let pkt = Packet { ts_ns: t, ingress_port: attacker.port, src: victim.addr, dst, hop_limit: 255, l4 };
            em.push(pkt, Truth::Attack(Vector::IntSpoof));
        }
    }

    em.out.sort_unstable_by_key(|&(ts, seq, _)| (ts, seq));
    Ok(em.out.into_iter().map(|(_, _, lp)| lp).collect())
}

/// Vectors active in a stream, from its labels.
pub fn vectors_present(stream: &[LabeledPacket]) -> BTreeSet<Vector> {
    stream
        .iter()
        .filter_map(|lp| match lp.truth {
            Some(Truth::Attack(v)) => Some(v),
            _ => None,
        })
        .collect()
}

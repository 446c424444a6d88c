//! Reference oracles shared by the integration tests. Each one is written
//! against plain maps and linear scans, not the library's data structures.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::net::Ipv6Addr;

use ztedge::packet::{LabeledPacket, Packet, PortId, PortRole, L4};
use ztedge::{PipelineConfig, PrefixEntry, Reason, Verdict};

pub fn covers(prefix: Ipv6Addr, len: u8, addr: &Ipv6Addr) -> bool {
    if len == 0 {
        return true;
    }
    let shift = 128 - u32::from(len);
    (u128::from(prefix) >> shift) == (u128::from(*addr) >> shift)
}

/// Longest covering entry by linear scan.
pub fn brute_lpm<'a>(entries: &'a [PrefixEntry], addr: &Ipv6Addr) -> Option<&'a PrefixEntry> {
    entries
        .iter()
        .filter(|e| covers(e.prefix.addr(), e.prefix.len(), addr))
        .max_by_key(|e| e.prefix.len())
}

/// Scalar flood counter over one window: admits until `theta` packets passed.
pub fn scalar_admission(theta: u32, arrivals: usize) -> (usize, usize) {
    let mut count = 0u32;
    let (mut accepted, mut dropped) = (0, 0);
    for _ in 0..arrivals {
        if count >= theta {
            dropped += 1;
        } else {
            count += 1;
            accepted += 1;
        }
    }
    (accepted, dropped)
}

fn dad_target(pkt: &Packet) -> Option<Ipv6Addr> {
    match pkt.l4 {
        L4::Icmpv6 { icmp_type: 135, ns_target: Some(t) } if pkt.src == Ipv6Addr::UNSPECIFIED => Some(t),
        _ => None,
    }
}

/// Exact-counting model of the whole pipeline: linear-scan prefix lookup,
/// hash-map bindings and per-window exact counters.
pub struct ReferenceModel {
    entries: Vec<PrefixEntry>,
    roles: BTreeMap<PortId, PortRole>,
    cap_k: u32,
    theta_ext: u32,
    theta_u: u32,
    theta_m: u32,
    window_ext_ns: u64,
    window_int_ns: u64,
    bindings: HashMap<Ipv6Addr, PortId>,
    per_port: HashMap<PortId, u32>,
    ext_counts: HashMap<(u64, Ipv6Addr, u8), u32>,
    int_counts: HashMap<(u64, Ipv6Addr, Ipv6Addr), u32>,
    /// Increments made by each flooding stage.
    pub ext_increments: u64,
    pub int_increments: u64,
}

impl ReferenceModel {
    pub fn new(cfg: &PipelineConfig) -> Self {
        ReferenceModel {
            entries: cfg.hl_table.entries().to_vec(),
            roles: cfg.port_roles.clone(),
            cap_k: cfg.cap_k,
            theta_ext: cfg.theta_ext,
            theta_u: cfg.theta_u,
            theta_m: cfg.theta_m,
            window_ext_ns: cfg.window_ext_ns,
            window_int_ns: cfg.window_int_ns,
            bindings: HashMap::new(),
            per_port: HashMap::new(),
            ext_counts: HashMap::new(),
            int_counts: HashMap::new(),
            ext_increments: 0,
            int_increments: 0,
        }
    }

    fn bound(&self, addr: &Ipv6Addr, port: PortId) -> Result<(), Reason> {
        match self.bindings.get(addr) {
            Some(&p) if p == port => Ok(()),
            Some(_) => Err(Reason::BindingMismatch),
            None => Err(Reason::UnknownUnbound),
        }
    }

    fn decide(&mut self, pkt: &Packet) -> Result<(), Reason> {
        let external = self.roles[&pkt.ingress_port] == PortRole::External;
        if external {
            let entry = brute_lpm(&self.entries, &pkt.src).ok_or(Reason::NoPrefixMatch)?;
            if pkt.hop_limit < entry.band.min || pkt.hop_limit > entry.band.max {
                return Err(Reason::HlOutOfBand);
            }
            let key = (pkt.ts_ns / self.window_ext_ns, entry.prefix.addr(), entry.prefix.len());
            let c = self.ext_counts.entry(key).or_default();
            if *c >= self.theta_ext {
                return Err(Reason::PrefixRateExceeded);
            }
            *c += 1;
            self.ext_increments += 1;
            return Ok(());
        }
        match dad_target(pkt) {
            Some(addr) if !self.bindings.contains_key(&addr) => {
                let used = self.per_port.entry(pkt.ingress_port).or_default();
                if *used >= self.cap_k {
                    return Err(Reason::CapExceeded);
                }
                *used += 1;
                self.bindings.insert(addr, pkt.ingress_port);
            }
            Some(addr) => self.bound(&addr, pkt.ingress_port)?,
            None => self.bound(&pkt.src, pkt.ingress_port)?,
        }
        let multicast = pkt.dst.segments()[0] >> 8 == 0xff;
        let theta = if multicast { self.theta_m } else { self.theta_u };
        let c = self.int_counts.entry((pkt.ts_ns / self.window_int_ns, pkt.src, pkt.dst)).or_default();
        if *c >= theta {
            return Err(if multicast { Reason::FlowRateExceededMulticast } else { Reason::FlowRateExceededUnicast });
        }
        *c += 1;
        self.int_increments += 1;
        Ok(())
    }

    pub fn process(&mut self, pkt: &Packet) -> Verdict {
        match self.decide(pkt) {
            Ok(()) => Verdict::ACCEPT,
            Err(r) => Verdict::drop(r),
        }
    }
}

/// Attack flood packets the budgets must admit: per window and flood key,
/// `min(theta, arrivals)`, summed.
pub fn warmup_admissions(stream: &[LabeledPacket], cfg: &PipelineConfig) -> u64 {
    use ztedge::packet::{Truth, Vector};
    let entries = cfg.hl_table.entries();
    let mut ext: HashMap<(u64, Ipv6Addr, u8), u64> = HashMap::new();
    let mut int: HashMap<(u64, Ipv6Addr, Ipv6Addr), u64> = HashMap::new();
    for lp in stream {
        let p = &lp.packet;
        match lp.truth {
            Some(Truth::Attack(Vector::ExtFlood)) => {
                let e = brute_lpm(entries, &p.src).expect("flood sources are covered");
                *ext.entry((p.ts_ns / cfg.window_ext_ns, e.prefix.addr(), e.prefix.len())).or_default() += 1;
            }
            Some(Truth::Attack(Vector::IntFlood)) => {
                *int.entry((p.ts_ns / cfg.window_int_ns, p.src, p.dst)).or_default() += 1;
            }
            _ => {}
        }
    }
    let ext_sum: u64 = ext.values().map(|&n| n.min(u64::from(cfg.theta_ext))).sum();
    let int_sum: u64 = int
        .iter()
        .map(|(&(_, _, dst), &n)| {
            let theta = if dst.segments()[0] >> 8 == 0xff { cfg.theta_m } else { cfg.theta_u };
            n.min(u64::from(theta))
        })
        .sum();
    ext_sum + int_sum
}

//! Address-to-port bindings learned from Duplicate Address Detection, with a
//! per-port cap on learned addresses.

use std::collections::{BTreeMap, HashMap};
use std::net::Ipv6Addr;

use serde::{Deserialize, Serialize};

use crate::packet::PortId;

pub const DEFAULT_CAP_K: u32 = 8;

/// Outcome of a registration attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindResult {
    Registered,
    CapExceeded,
    AlreadyBound(PortId),
}

/// Outcome of checking a source address against its binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingCheck {
    Match,
    Mismatch,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingRecord {
    pub address: Ipv6Addr,
    pub port: PortId,
    pub registered_ts_ns: u64,
}

#[derive(Debug, Clone)]
pub struct BindingTable {
    bindings: HashMap<Ipv6Addr, (PortId, u64)>,
    addr_count: BTreeMap<PortId, u32>,
    cap_k: u32,
}

impl BindingTable {
    /// # Panics
    /// If `cap_k` is zero.
    pub fn new(cap_k: u32) -> Self {
        assert!(cap_k > 0, "binding cap must be positive");
        BindingTable { bindings: HashMap::new(), addr_count: BTreeMap::new(), cap_k }
    }

    pub fn cap_k(&self) -> u32 {
        self.cap_k
    }

    /// First writer wins; an already-bound address is never rebound.
    pub fn try_register(&mut self, addr: Ipv6Addr, port: PortId, ts_ns: u64) -> BindResult {
        if let Some(&(existing, _)) = self.bindings.get(&addr) {
            return BindResult::AlreadyBound(existing);
        }
        let count = self.addr_count.entry(port).or_insert(0);
        if *count >= self.cap_k {
            return BindResult::CapExceeded;
        }
        *count += 1;
        self.bindings.insert(addr, (port, ts_ns));
        BindResult::Registered
    }

    pub fn check(&self, addr: &Ipv6Addr, port: PortId) -> BindingCheck {
        match self.bindings.get(addr) {
            Some(&(bound, _)) if bound == port => BindingCheck::Match,
            Some(_) => BindingCheck::Mismatch,
            None => BindingCheck::Unknown,
        }
    }

    pub fn port_of(&self, addr: &Ipv6Addr) -> Option<PortId> {
        self.bindings.get(addr).map(|&(p, _)| p)
    }

    /// Per-port `(learned count, cap)` for every port seen so far.
    pub fn port_utilization(&self) -> BTreeMap<PortId, (u32, u32)> {
        self.addr_count.iter().map(|(&p, &c)| (p, (c, self.cap_k))).collect()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// All bindings sorted by registration time, then address.
    pub fn dump(&self) -> Vec<BindingRecord> {
        let mut out: Vec<BindingRecord> = self
            .bindings
            .iter()
            .map(|(&address, &(port, registered_ts_ns))| BindingRecord { address, port, registered_ts_ns })
            .collect();
        out.sort_by_key(|r| (r.registered_ts_ns, r.address));
        out
    }
}

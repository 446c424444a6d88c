//! Longest-prefix-match table from source prefixes to Hop-Limit bands.
//!
//! The table is a plain binary trie over the 128 address bits, one node per
//! bit. Configured prefixes sit at depth `length`; a lookup walks the address
//! bits and remembers the deepest entry it passed.

use std::fmt;
use std::net::Ipv6Addr;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpmError {
    #[error("prefix length {0} exceeds 128")]
    LengthTooLong(u8),
    #[error("{prefix}/{length} has host bits set")]
    HostBitsSet { prefix: Ipv6Addr, length: u8 },
    #[error("inverted hop-limit band [{hl_min}, {hl_max}]")]
    InvertedBand { hl_min: u8, hl_max: u8 },
    #[error("duplicate prefix {prefix}/{length}")]
    Duplicate { prefix: Ipv6Addr, length: u8 },
    #[error("cannot parse prefix row {0:?}")]
    BadRow(String),
}

/// Network mask with the top `length` bits set.
pub fn mask(length: u8) -> u128 {
    match length {
        0 => 0,
        l if l >= 128 => u128::MAX,
        l => u128::MAX << (128 - u32::from(l)),
    }
}

/// `addr` with every bit past `length` cleared.
pub fn truncate(addr: Ipv6Addr, length: u8) -> Ipv6Addr {
    Ipv6Addr::from(u128::from(addr) & mask(length))
}

/// An IPv6 prefix in canonical form (host bits zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prefix {
    addr: Ipv6Addr,
    length: u8,
}

impl Prefix {
    pub fn new(addr: Ipv6Addr, length: u8) -> Result<Self, LpmError> {
        if length > 128 {
            return Err(LpmError::LengthTooLong(length));
        }
        if truncate(addr, length) != addr {
            return Err(LpmError::HostBitsSet { prefix: addr, length });
        }
        Ok(Prefix { addr, length })
    }

    pub fn addr(&self) -> Ipv6Addr {
        self.addr
    }

    pub fn len(&self) -> u8 {
        self.length
    }

    pub fn contains(&self, addr: &Ipv6Addr) -> bool {
        (u128::from(*addr) & mask(self.length)) == u128::from(self.addr)
    }

    /// `prefix bytes || length`, the key used by the prefix flood sketch.
    pub fn key_bytes(&self) -> [u8; 17] {
        let mut out = [0u8; 17];
        out[..16].copy_from_slice(&self.addr.octets());
        out[16] = self.length;
        out
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.addr, self.length)
    }
}

impl FromStr for Prefix {
    type Err = LpmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LpmError::BadRow(s.to_string());
        let (a, l) = s.split_once('/').ok_or_else(bad)?;
        let addr: Ipv6Addr = a.parse().map_err(|_| bad())?;
        let length: u8 = l.parse().map_err(|_| bad())?;
        Prefix::new(addr, length)
    }
}

/// Accepted arrival Hop-Limit interval, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HlBand {
    pub min: u8,
    pub max: u8,
}

impl HlBand {
    pub fn new(min: u8, max: u8) -> Result<Self, LpmError> {
        if min > max {
            return Err(LpmError::InvertedBand { hl_min: min, hl_max: max });
        }
        Ok(HlBand { min, max })
    }

    pub fn contains(&self, hl: u8) -> bool {
        self.min <= hl && hl <= self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrefixEntry {
    pub prefix: Prefix,
    pub band: HlBand,
}

impl PrefixEntry {
    pub fn new(prefix: Ipv6Addr, length: u8, hl_min: u8, hl_max: u8) -> Result<Self, LpmError> {
        Ok(PrefixEntry { prefix: Prefix::new(prefix, length)?, band: HlBand::new(hl_min, hl_max)? })
    }

    /// Parses a config row of the form `prefix/length hl_min hl_max`.
    pub fn parse_row(row: &str) -> Result<Self, LpmError> {
        let bad = || LpmError::BadRow(row.to_string());
        let mut parts = row.split_whitespace();
        let prefix: Prefix = parts.next().ok_or_else(bad)?.parse()?;
        let min: u8 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let max: u8 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(PrefixEntry { prefix, band: HlBand::new(min, max)? })
    }

    pub fn to_row(&self) -> String {
        format!("{} {} {}", self.prefix, self.band.min, self.band.max)
    }
}

#[derive(Debug, Clone, Default)]
struct Node {
    children: [Option<u32>; 2],
    entry: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LpmTable {
    nodes: Vec<Node>,
    entries: Vec<PrefixEntry>,
}

impl Default for LpmTable {
    fn default() -> Self {
        Self::new()
    }
}

fn bit(addr: u128, depth: u8) -> usize {
    ((addr >> (127 - u32::from(depth))) & 1) as usize
}

impl LpmTable {
    pub fn new() -> Self {
        LpmTable { nodes: vec![Node::default()], entries: Vec::new() }
    }

    /// Builds a table from control-plane rows; a repeated (prefix, length)
    /// is an error.
    pub fn load_from_config<I>(entries: I) -> Result<Self, LpmError>
    where
        I: IntoIterator<Item = PrefixEntry>,
    {
        let mut table = LpmTable::new();
        for entry in entries {
            if table.get(&entry.prefix).is_some() {
                return Err(LpmError::Duplicate { prefix: entry.prefix.addr, length: entry.prefix.length });
            }
            table.insert(entry);
        }
        Ok(table)
    }

    /// Inserts an entry, replacing the band of an existing identical prefix.
    pub fn insert(&mut self, entry: PrefixEntry) {
        let key = u128::from(entry.prefix.addr);
        let mut node = 0usize;
        for depth in 0..entry.prefix.length {
            let b = bit(key, depth);
            node = match self.nodes[node].children[b] {
                Some(child) => child as usize,
                None => {
                    let child = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[node].children[b] = Some(child as u32);
                    child
                }
            };
        }
        match self.nodes[node].entry {
            Some(idx) => self.entries[idx] = entry,
            None => {
                self.nodes[node].entry = Some(self.entries.len());
                self.entries.push(entry);
            }
        }
    }

    /// Exact-match fetch of a configured prefix.
    pub fn get(&self, prefix: &Prefix) -> Option<&PrefixEntry> {
        let key = u128::from(prefix.addr);
        let mut node = 0usize;
        for depth in 0..prefix.length {
            node = self.nodes[node].children[bit(key, depth)]? as usize;
        }
        self.nodes[node].entry.map(|i| &self.entries[i])
    }

    /// Longest configured prefix covering `addr`.
    pub fn lookup(&self, addr: &Ipv6Addr) -> Option<&PrefixEntry> {
        let key = u128::from(*addr);
        let mut node = 0usize;
        let mut best = self.nodes[0].entry;
        for depth in 0..128u8 {
            match self.nodes[node].children[bit(key, depth)] {
                Some(child) => {
                    node = child as usize;
                    if let Some(e) = self.nodes[node].entry {
                        best = Some(e);
                    }
                }
                None => break,
            }
        }
        best.map(|i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[PrefixEntry] {
        &self.entries
    }
}

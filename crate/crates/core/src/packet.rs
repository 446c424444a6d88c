//! Packet representation shared by every stage of the pipeline.
//!
//! A [`Packet`] is the header view the data plane is allowed to see. Ground
//! truth for evaluation lives beside it in [`LabeledPacket`], so the pipeline
//! can only ever be handed the truth-free view.

use std::fmt;
use std::net::Ipv6Addr;

use serde::{Deserialize, Serialize};

/// Switch port identifier.
pub type PortId = u16;

/// ICMPv6 Neighbor Solicitation.
pub const ICMPV6_NEIGHBOR_SOLICITATION: u8 = 135;
/// ICMPv6 Neighbor Advertisement.
pub const ICMPV6_NEIGHBOR_ADVERTISEMENT: u8 = 136;

/// Whether a port faces the internal domain or upstream networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortRole {
    Internal,
    External,
}

/// Transport-layer summary carried by a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum L4 {
    Tcp { src_port: u16, dst_port: u16, syn: bool },
    Udp { src_port: u16, dst_port: u16 },
    /// `ns_target` is only meaningful for Neighbor Solicitations; use
    /// [`L4::icmpv6`] to build one with the invariant checked.
    Icmpv6 { icmp_type: u8, ns_target: Option<Ipv6Addr> },
    Other,
}

impl L4 {
    pub fn tcp_syn(src_port: u16, dst_port: u16) -> Self {
        L4::Tcp { src_port, dst_port, syn: true }
    }

    /// Builds an ICMPv6 header, rejecting a target on non-NS types or a
    /// missing target on an NS.
    pub fn icmpv6(icmp_type: u8, ns_target: Option<Ipv6Addr>) -> Result<Self, PacketError> {
        let is_ns = icmp_type == ICMPV6_NEIGHBOR_SOLICITATION;
        if is_ns != ns_target.is_some() {
            return Err(PacketError::NsTargetMismatch { icmp_type });
        }
        Ok(L4::Icmpv6 { icmp_type, ns_target })
    }

    pub fn neighbor_solicitation(target: Ipv6Addr) -> Self {
        L4::Icmpv6 { icmp_type: ICMPV6_NEIGHBOR_SOLICITATION, ns_target: Some(target) }
    }

    pub fn neighbor_advertisement() -> Self {
        L4::Icmpv6 { icmp_type: ICMPV6_NEIGHBOR_ADVERTISEMENT, ns_target: None }
    }
}

/// Parsed IPv6 header view as seen by the data plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Packet {
    /// Logical nanoseconds since the start of the stream.
    pub ts_ns: u64,
    pub ingress_port: PortId,
    pub src: Ipv6Addr,
    pub dst: Ipv6Addr,
    pub hop_limit: u8,
    pub l4: L4,
}

/// Threat vectors the pipeline defends against, one per stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vector {
    ExtSpoof,
    IntSpoof,
    ExtFlood,
    IntFlood,
}

impl Vector {
    pub const ALL: [Vector; 4] = [Vector::ExtSpoof, Vector::IntSpoof, Vector::ExtFlood, Vector::IntFlood];

    pub fn as_str(self) -> &'static str {
        match self {
            Vector::ExtSpoof => "ext_spoof",
            Vector::IntSpoof => "int_spoof",
            Vector::ExtFlood => "ext_flood",
            Vector::IntFlood => "int_flood",
        }
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evaluation-only ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    Benign,
    Attack(Vector),
}

impl Truth {
    pub fn is_attack(self) -> bool {
        matches!(self, Truth::Attack(_))
    }
}

/// A packet together with its (optional) ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledPacket {
    pub packet: Packet,
    pub truth: Option<Truth>,
}

/// Flow identifier: source address followed by destination address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowKey {
    pub src: Ipv6Addr,
    pub dst: Ipv6Addr,
}

impl FlowKey {
    /// The 32-byte `src || dst` encoding fed to the flow sketch.
    pub fn to_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        out[..16].copy_from_slice(&self.src.octets());
        out[16..].copy_from_slice(&self.dst.octets());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PacketError {
    #[error("ICMPv6 type {icmp_type}: ns_target must be present exactly for Neighbor Solicitation")]
    NsTargetMismatch { icmp_type: u8 },
    #[error("packet is not a DAD Neighbor Solicitation")]
    NotDad,
}

/// True iff `addr` lies in ff00::/8.
pub fn is_multicast(addr: &Ipv6Addr) -> bool {
    addr.octets()[0] == 0xff
}

/// True for a Duplicate Address Detection probe: an NS sent from `::`.
pub fn is_dad_ns(pkt: &Packet) -> bool {
    matches!(
        pkt.l4,
        L4::Icmpv6 { icmp_type: ICMPV6_NEIGHBOR_SOLICITATION, ns_target: Some(_) }
    ) && pkt.src.is_unspecified()
}

/// The tentative address a DAD probe is registering (its NS target).
pub fn registered_address(pkt: &Packet) -> Result<Ipv6Addr, PacketError> {
    match pkt.l4 {
        L4::Icmpv6 { icmp_type: ICMPV6_NEIGHBOR_SOLICITATION, ns_target: Some(target) }
            if pkt.src.is_unspecified() =>
        {
            Ok(target)
        }
        _ => Err(PacketError::NotDad),
    }
}

pub fn flow_key(pkt: &Packet) -> FlowKey {
    FlowKey { src: pkt.src, dst: pkt.dst }
}

/// Solicited-node multicast group (ff02::1:ffXX:XXXX) for `addr`.
pub fn solicited_node(addr: &Ipv6Addr) -> Ipv6Addr {
    let o = addr.octets();
    let mut g = [0u8; 16];
    g[0] = 0xff;
    g[1] = 0x02;
    g[11] = 0x01;
    g[12] = 0xff;
    g[13..].copy_from_slice(&o[13..]);
    Ipv6Addr::from(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Ipv6Addr {
        s.parse().unwrap()
    }

    fn pkt(src: &str, dst: &str, l4: L4) -> Packet {
        Packet { ts_ns: 0, ingress_port: 3, src: a(src), dst: a(dst), hop_limit: 255, l4 }
    }

    #[test]
    fn multicast_examples() {
        assert!(is_multicast(&a("ff02::1")));
        assert!(!is_multicast(&a("2001:db8::1")));
        assert!(!is_multicast(&a("fe80::1")));
    }

    #[test]
    fn multicast_iff_first_octet_ff() {
        for first in 0..=255u8 {
            let mut o = [0u8; 16];
            o[0] = first;
            o[15] = 1;
            assert_eq!(is_multicast(&Ipv6Addr::from(o)), first == 0xff, "first octet {first:#x}");
        }
    }

    #[test]
    fn dad_detection() {
        let dad = pkt("::", "ff02::1:ff00:10", L4::neighbor_solicitation(a("fd00::10")));
        assert!(is_dad_ns(&dad));
        assert_eq!(registered_address(&dad).unwrap(), a("fd00::10"));

        let dad2 = pkt("::", "ff02::1:ff0a:b", L4::neighbor_solicitation(a("fd00::a:b")));
        assert_eq!(registered_address(&dad2).unwrap(), a("fd00::a:b"));

        // Address resolution NS: sourced from an assigned address.
        let ns = pkt("fd00::10", "ff02::1:ff00:1", L4::neighbor_solicitation(a("fd00::1")));
        assert!(!is_dad_ns(&ns));
        assert_eq!(registered_address(&ns), Err(PacketError::NotDad));

        let syn = pkt("::", "fd00::1", L4::tcp_syn(40000, 80));
        assert!(!is_dad_ns(&syn));
        assert_eq!(registered_address(&syn), Err(PacketError::NotDad));
    }

    #[test]
    fn ns_target_only_on_solicitations() {
        assert!(L4::icmpv6(135, Some(a("fd00::1"))).is_ok());
        assert!(L4::icmpv6(136, None).is_ok());
        assert_eq!(L4::icmpv6(135, None), Err(PacketError::NsTargetMismatch { icmp_type: 135 }));
        assert_eq!(
            L4::icmpv6(128, Some(a("fd00::1"))),
            Err(PacketError::NsTargetMismatch { icmp_type: 128 })
        );
    }

    #[test]
    fn flow_key_is_directional_and_ignores_ports() {
        let ab = pkt("2001:db8::a", "2001:db8::b", L4::tcp_syn(1000, 80));
        let ab2 = pkt("2001:db8::a", "2001:db8::b", L4::Udp { src_port: 5, dst_port: 53 });
        let ba = pkt("2001:db8::b", "2001:db8::a", L4::tcp_syn(80, 1000));
        assert_eq!(flow_key(&ab), FlowKey { src: ab.src, dst: ab.dst });
        assert_eq!(flow_key(&ab), flow_key(&ab2));
        assert_ne!(flow_key(&ab), flow_key(&ba));
        assert_ne!(flow_key(&ab).to_bytes(), flow_key(&ba).to_bytes());
    }

    #[test]
    fn solicited_node_group() {
        assert_eq!(solicited_node(&a("fd00::12:3456")), a("ff02::1:ff12:3456"));
        assert!(is_multicast(&solicited_node(&a("2001:db8::1"))));
    }
}

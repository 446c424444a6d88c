//! One packet of each kind through the four stages, with the verdict and
//! the stage that decided it.
//!
//! cargo run --example pipeline_basics

use std::collections::BTreeMap;
use std::net::Ipv6Addr;

use ztedge::packet::{PortRole, L4};
use ztedge::{LpmTable, Packet, Pipeline, PipelineConfig, PrefixEntry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = LpmTable::load_from_config([PrefixEntry::parse_row("2001:db8::/32 50 60")?])?;
    let roles = BTreeMap::from([(1, PortRole::External), (3, PortRole::Internal)]);
    let mut pipeline = Pipeline::new(PipelineConfig::new(roles, table, 110, 55, 11, 1_000_000_000))?;

    let server: Ipv6Addr = "fd00::80".parse()?;
    let host: Ipv6Addr = "fd00::10".parse()?;
    let packets = [
        ("external client, plausible HL", Packet { ts_ns: 0, ingress_port: 1, src: "2001:db8::5".parse()?, dst: server, hop_limit: 55, l4: L4::tcp_syn(40000, 80) }),
        ("external, spoofed HL", Packet { ts_ns: 1, ingress_port: 1, src: "2001:db8::5".parse()?, dst: server, hop_limit: 12, l4: L4::tcp_syn(40000, 80) }),
        ("external, unknown prefix", Packet { ts_ns: 2, ingress_port: 1, src: "2001:db9::5".parse()?, dst: server, hop_limit: 55, l4: L4::tcp_syn(40000, 80) }),
        ("internal, before DAD", Packet { ts_ns: 3, ingress_port: 3, src: host, dst: server, hop_limit: 64, l4: L4::tcp_syn(40000, 80) }),
        ("internal DAD probe", Packet { ts_ns: 4, ingress_port: 3, src: Ipv6Addr::UNSPECIFIED, dst: "ff02::1:ff00:10".parse()?, hop_limit: 255, l4: L4::neighbor_solicitation(host) }),
        ("internal, after DAD", Packet { ts_ns: 5, ingress_port: 3, src: host, dst: server, hop_limit: 64, l4: L4::tcp_syn(40000, 80) }),
    ];
    for (what, pkt) in &packets {
        let v = pipeline.process_packet(pkt)?;
        println!("{what:<32} {:?} at {} ({})", v.action, v.stage.as_str(), v.reason);
    }
    Ok(())
}

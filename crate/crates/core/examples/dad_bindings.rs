//! DAD-anchored address/port bindings: first writer wins, capped per port.
//!
//! cargo run --example dad_bindings

use std::collections::BTreeMap;
use std::net::Ipv6Addr;

use ztedge::packet::{PortRole, L4};
use ztedge::{LpmTable, Packet, Pipeline, PipelineConfig};

fn send(p: &mut Pipeline, ts_ns: u64, port: u16, src: Ipv6Addr, l4: L4) {
    let pkt = Packet { ts_ns, ingress_port: port, src, dst: "ff02::1".parse().unwrap(), hop_limit: 255, l4 };
    let what = match l4 {
        L4::Icmpv6 { ns_target: Some(t), .. } => format!("DAD for {t}"),
        _ => "SYN".to_string(),
    };
    let v = p.process_packet(&pkt).expect("known port, ordered timestamps");
    println!("t={ts_ns:<3} port {port} src {:<10} {what:<20} -> {:?} {}", src.to_string(), v.action, v.reason);
}

fn main() {
    let roles = BTreeMap::from([(3, PortRole::Internal), (4, PortRole::Internal)]);
    let mut cfg = PipelineConfig::new(roles, LpmTable::new(), 110, 55, 11, 1_000_000_000);
    cfg.cap_k = 2;
    let mut p = Pipeline::new(cfg).unwrap();

    let host: Ipv6Addr = "fd00::10".parse().unwrap();
    send(&mut p, 1, 3, Ipv6Addr::UNSPECIFIED, L4::neighbor_solicitation(host));
    send(&mut p, 2, 3, host, L4::tcp_syn(50000, 80));
    // Another port claiming the same address.
    send(&mut p, 3, 4, Ipv6Addr::UNSPECIFIED, L4::neighbor_solicitation(host));
    send(&mut p, 4, 4, host, L4::tcp_syn(50000, 80));
    // Never registered.
    send(&mut p, 5, 4, "fd00::99".parse().unwrap(), L4::tcp_syn(50000, 80));
    // Cap of two addresses on port 3.
    for (i, a) in ["fd00::11", "fd00::12"].iter().enumerate() {
        send(&mut p, 10 + i as u64, 3, Ipv6Addr::UNSPECIFIED, L4::neighbor_solicitation(a.parse().unwrap()));
    }

    println!("\nbindings:");
    for b in p.bindings().dump() {
        println!("  {} -> port {} (t={})", b.address, b.port, b.registered_ts_ns);
    }
    for (port, (used, cap)) in p.bindings().port_utilization() {
        println!("  port {port}: {used}/{cap}");
    }
}

//! Deriving a flood budget and watching it bite across tumbling windows.
//!
//! cargo run --example flood_threshold

use std::collections::BTreeMap;

use ztedge::packet::{PortRole, L4};
use ztedge::{compute_threshold, Action, LpmTable, Packet, Pipeline, PipelineConfig, PrefixEntry};

const SEC: u64 = 1_000_000_000;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 1000 pkt/s shared by 10 active prefixes, 1 s windows, 10% headroom.
    let theta = compute_threshold(1000.0, 10, 1.0, 0.1)?;
    println!("theta = {theta} packets per prefix per window");

    let table = LpmTable::load_from_config([PrefixEntry::parse_row("2001:db8::/32 50 70")?])?;
    let roles = BTreeMap::from([(1, PortRole::External)]);
    let mut pipeline = Pipeline::new(PipelineConfig::new(roles, table, theta, 55, 11, SEC))?;

    // 500 packets per second for three seconds.
    for window in 0..3u64 {
        let mut accepted = 0;
        for i in 0..500u64 {
            let pkt = Packet {
                ts_ns: window * SEC + i * 2_000_000,
                ingress_port: 1,
                src: format!("2001:db8::{:x}", i + 1).parse()?,
                dst: "fd00::80".parse()?,
                hop_limit: 60,
                l4: L4::tcp_syn(40000, 80),
            };
            accepted += usize::from(pipeline.process_packet(&pkt)?.action == Action::Accept);
        }
        println!("window {window}: {accepted} accepted, {} dropped", 500 - accepted);
    }
    Ok(())
}

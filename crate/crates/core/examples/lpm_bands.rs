//! Longest-prefix lookup of Hop-Limit bands.
//!
//! cargo run --example lpm_bands

use std::net::Ipv6Addr;

use ztedge::{LpmTable, PrefixEntry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = ["2001:db8::/32 40 70", "2001:db8:1::/48 55 60", "2001:db8:1:100::/56 57 58"];
    let entries = rows.iter().map(|r| PrefixEntry::parse_row(r)).collect::<Result<Vec<_>, _>>()?;
    let table = LpmTable::load_from_config(entries)?;

    for (addr, hl) in [("2001:db8:1:100::7", 57u8), ("2001:db8:1:200::7", 57), ("2001:db8:9::1", 65), ("2001:db9::1", 64)] {
        let addr: Ipv6Addr = addr.parse()?;
        match table.lookup(&addr) {
            Some(e) => println!(
                "{addr:<22} hl={hl:<3} -> {:<22} band [{}, {}] {}",
                e.prefix.to_string(),
                e.band.min,
                e.band.max,
                if e.band.contains(hl) { "in band" } else { "OUT OF BAND" }
            ),
            None => println!("{addr:<22} hl={hl:<3} -> no prefix (dropped)"),
        }
    }
    Ok(())
}

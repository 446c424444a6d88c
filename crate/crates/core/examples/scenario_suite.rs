//! Runs all fifteen evaluation scenarios with the default configuration and
//! prints the report table and per-stage drop counts.
//!
//! cargo run --release --example scenario_suite

use ztedge::config::RunConfig;
use ztedge::harness::run_scenario;
use ztedge::metrics::{render, Format};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::default();
    let topo = cfg.topology();
    let pcfg = cfg.pipeline_config(&topo)?;
    println!(
        "{} external prefixes, {} external hosts, theta_ext={} theta_u={} theta_m={}\n",
        topo.prefixes.len(),
        topo.external_hosts.len(),
        pcfg.theta_ext,
        pcfg.theta_u,
        pcfg.theta_m
    );

    let mut reports = Vec::new();
    for id in 1..=15 {
        let run = run_scenario(&cfg.scenario(id)?, &topo, &pcfg)?;
        reports.push(run.report);
    }
    print!("{}", render(&reports, Format::Table));

    println!("\ndrops by stage:");
    for r in &reports {
        let parts: Vec<String> =
            r.stages.iter().flat_map(|(stage, reasons)| reasons.iter().map(move |(why, n)| format!("{stage}/{why}={n}"))).collect();
        println!("  {:>2}: {}", r.scenario, parts.join(" "));
    }
    Ok(())
}

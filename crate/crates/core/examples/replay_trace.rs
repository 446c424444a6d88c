//! Writes a scenario to a JSON-lines trace, reads it back and replays it on
//! a fresh pipeline.
//!
//! cargo run --example replay_trace

use std::fs::File;
use std::io::{BufReader, BufWriter};

use ztedge::config::RunConfig;
use ztedge::harness::{labeled_report, run_stream};
use ztedge::scenario::generate;
use ztedge::trace::{read_trace, write_trace};
use ztedge::Pipeline;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::default();
    let topo = cfg.topology();
    let spec = cfg.scenario(8)?;
    let stream = generate(&spec, &topo)?;

    let path = std::env::temp_dir().join("ztedge_scenario_08.jsonl");
    write_trace(&stream, BufWriter::new(File::create(&path)?))?;
    println!("wrote {} packets to {}", stream.len(), path.display());

    let replayed = read_trace(BufReader::new(File::open(&path)?))?;
    assert_eq!(replayed, stream);
    let mut pipeline = Pipeline::new(cfg.pipeline_config(&topo)?)?;
    let verdicts = run_stream(&mut pipeline, &replayed)?;
    let report = labeled_report(spec.id, &spec.name(), &replayed, &verdicts, &pipeline).expect("labeled trace");
    println!("{}: {:?}", report.name, report.confusion);
    println!("{} addresses bound", report.bindings.len());
    std::fs::remove_file(path)?;
    Ok(())
}

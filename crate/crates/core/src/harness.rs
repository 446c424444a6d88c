//! Drives labeled streams through a pipeline and scores the result.

use crate::metrics::ScenarioReport;
use crate::packet::{LabeledPacket, Truth};
use crate::pipeline::{ConfigError, Pipeline, PipelineConfig, PipelineError, Verdict};
use crate::scenario::{generate, ScenarioError, ScenarioSpec, TopologySpec};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("packet {index}: {source}")]
    Stream {
        index: usize,
        #[source]
        source: PipelineError,
    },
}

/// Runs every packet at its own timestamp. Only the truth-free header view
/// reaches the pipeline.
pub fn run_stream(pipeline: &mut Pipeline, stream: &[LabeledPacket]) -> Result<Vec<Verdict>, HarnessError> {
    stream
        .iter()
        .enumerate()
        .map(|(index, lp)| pipeline.process_packet(&lp.packet).map_err(|source| HarnessError::Stream { index, source }))
        .collect()
}

/// Report over a stream whose packets all carry labels, or `None`.
pub fn labeled_report(
    id: u8,
    name: &str,
    stream: &[LabeledPacket],
    verdicts: &[Verdict],
    pipeline: &Pipeline,
) -> Option<ScenarioReport> {
    let pairs: Option<Vec<(Truth, Verdict)>> = stream.iter().zip(verdicts).map(|(lp, v)| lp.truth.map(|t| (t, *v))).collect();
    let mut report = ScenarioReport::new(id, name, &pairs?);
    report.bindings = pipeline.bindings().dump();
    Some(report)
}

/// Everything produced by one scenario run.
#[derive(Debug)]
pub struct ScenarioRun {
    pub spec: ScenarioSpec,
    pub stream: Vec<LabeledPacket>,
    pub verdicts: Vec<Verdict>,
    pub pipeline: Pipeline,
    pub report: ScenarioReport,
}

/// Generates, processes and scores one scenario on a fresh pipeline.
pub fn run_scenario(spec: &ScenarioSpec, topo: &TopologySpec, cfg: &PipelineConfig) -> Result<ScenarioRun, HarnessError> {
    let stream = generate(spec, topo)?;
    let mut pipeline = Pipeline::new(cfg.clone())?;
    let verdicts = run_stream(&mut pipeline, &stream)?;
    let report = labeled_report(spec.id, &spec.name(), &stream, &verdicts, &pipeline)
        .expect("generated streams are fully labeled");
    Ok(ScenarioRun { spec: spec.clone(), stream, verdicts, pipeline, report })
}

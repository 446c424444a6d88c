//! `ztedge run | gen | replay`.
//!
//! Exit status: 0 on success, 2 for configuration or input errors, 3 for I/O
//! errors, 4 when a replayed trace cannot be processed (non-monotone
//! timestamps, unconfigured ports).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{ConfigFileError, RunConfig, ScenarioSelection, CONFIG_ENV};
use crate::harness::{self, HarnessError};
use crate::metrics::{render, Format, ScenarioReport};
use crate::packet::LabeledPacket;
use crate::pipeline::{Action, Pipeline, Reason, Stage, Verdict};
use crate::scenario::{generate, ScenarioError, ScenarioSpec};
use crate::trace::{self, TraceError};

#[derive(Debug, Parser)]
#[command(name = "ztedge", version, about = "Zero-trust IPv6 edge defense pipeline")]
pub struct Cli {
    /// TOML config file; defaults apply when absent.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate, process and score scenarios.
    Run(RunArgs),
    /// Write one scenario's labeled trace without processing it.
    Gen(GenArgs),
    /// Process an existing JSON-lines trace.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// `all` or a comma-separated list of ids in 1..=15.
    #[arg(long)]
    pub scenarios: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub emit_trace: bool,
    #[arg(long)]
    pub emit_verdicts: bool,
    /// Report format printed to stdout: json, csv or table.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Scenario id in 1..=15.
    #[arg(long, alias = "scenarios")]
    pub scenario: u16,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trace file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// JSON-lines trace to process.
    #[arg(long)]
    pub trace: PathBuf,
    /// Scenario id used to label the report.
    #[arg(long, alias = "scenarios")]
    pub scenario: Option<u16>,
    /// Topology seed for default ports and bands.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigFileError),
    #[error("{0}")]
    Usage(String),
    #[error("trace: {0}")]
    Trace(TraceError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigFileError::Read { .. }) => 2,
            CliError::Config(_) | CliError::Usage(_) | CliError::Trace(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Harness(HarnessError::Stream { .. }) => 4,
            CliError::Harness(_) => 2,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e.into())
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_owned(), source }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

#[derive(Serialize)]
struct VerdictRecord {
    ts_ns: u64,
    action: Action,
    stage: Stage,
    reason: Reason,
}

/// Verdicts as JSON lines: `{"ts_ns":…,"action":…,"stage":…,"reason":…}`.
pub fn write_verdicts<W: Write>(stream: &[LabeledPacket], verdicts: &[Verdict], mut sink: W) -> io::Result<()> {
    for (lp, v) in stream.iter().zip(verdicts) {
        let rec = VerdictRecord { ts_ns: lp.packet.ts_ns, action: v.action, stage: v.stage, reason: v.reason };
        serde_json::to_writer(&mut sink, &rec)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn parse_format(cli: Option<&str>, cfg: &RunConfig) -> Result<Format, CliError> {
    match cli {
        Some(f) => f.parse().map_err(|e: crate::metrics::UnknownFormat| CliError::Usage(e.to_string())),
        None => Ok(cfg.output.format),
    }
}

fn scenario_id(id: u16) -> Result<u8, CliError> {
    if (1..=15).contains(&id) {
        Ok(id as u8)
    } else {
        Err(ScenarioError::UnknownId(id).into())
    }
}

fn write_trace_file(path: &Path, stream: &[LabeledPacket]) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    trace::write_trace(stream, BufWriter::new(file)).map_err(io_err(path))
}

fn write_verdict_file(path: &Path, stream: &[LabeledPacket], verdicts: &[Verdict]) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    write_verdicts(stream, verdicts, BufWriter::new(file)).map_err(io_err(path))
}

fn write_reports(dir: &Path, reports: &[ScenarioReport]) -> Result<(), CliError> {
    write_file(&dir.join("report.json"), &render(reports, Format::Json))?;
    write_file(&dir.join("report.csv"), &render(reports, Format::Csv))
}

pub fn trace_file_name(id: u8) -> String {
    format!("scenario_{id:02}.trace.jsonl")
}

pub fn verdict_file_name(id: u8) -> String {
    format!("scenario_{id:02}.verdicts.jsonl")
}

pub fn cmd_run(config: Option<&Path>, args: &RunArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = load_config(config)?;
    if let Some(sel) = &args.scenarios {
        cfg.scenarios = sel.parse::<ScenarioSelection>()?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let emit_trace = args.emit_trace || cfg.output.emit_trace;
    let emit_verdicts = args.emit_verdicts || cfg.output.emit_verdicts;
    let format = parse_format(args.format.as_deref(), &cfg)?;

    let topo = cfg.topology();
    let pcfg = cfg.pipeline_config(&topo)?;
    let specs = cfg.scenarios.ids().into_iter().map(|id| cfg.scenario(id)).collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(&out).map_err(io_err(&out))?;

    // Each scenario is an independent job on its own pipeline.
    let runs: Vec<Result<harness::ScenarioRun, HarnessError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs.iter().map(|spec| scope.spawn(|| harness::run_scenario(spec, &topo, &pcfg))).collect();
        handles.into_iter().map(|h| h.join().expect("scenario job panicked")).collect()
    });

    let mut reports = Vec::with_capacity(runs.len());
    for run in runs {
        let run = run?;
        if emit_trace {
            write_trace_file(&out.join(trace_file_name(run.spec.id)), &run.stream)?;
        }
        if emit_verdicts {
            write_verdict_file(&out.join(verdict_file_name(run.spec.id)), &run.stream, &run.verdicts)?;
        }
        reports.push(run.report);
    }
    write_reports(&out, &reports)?;
    stdout.write_all(render(&reports, format).as_bytes()).map_err(io_err(Path::new("<stdout>")))
}

pub fn cmd_gen(config: Option<&Path>, args: &GenArgs) -> Result<PathBuf, CliError> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let id = scenario_id(args.scenario)?;
    let spec: ScenarioSpec = cfg.scenario(id)?;
    let stream = generate(&spec, &cfg.topology())?;
    let path = args.out.clone().unwrap_or_else(|| cfg.output.dir.join(trace_file_name(id)));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    write_trace_file(&path, &stream)?;
    Ok(path)
}

pub fn cmd_replay(config: Option<&Path>, args: &ReplayArgs, stdout: &mut dyn Write) -> Result<Option<ScenarioReport>, CliError> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let format = parse_format(args.format.as_deref(), &cfg)?;
    let id = args.scenario.map(scenario_id).transpose()?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());

    let file = File::open(&args.trace).map_err(io_err(&args.trace))?;
    let stream = trace::read_trace(BufReader::new(file)).map_err(|e| match e {
        TraceError::Io(source) => CliError::Io { path: args.trace.clone(), source },
        other => CliError::Trace(other),
    })?;

    let topo = cfg.topology();
    let mut pipeline = Pipeline::new(cfg.pipeline_config(&topo)?).map_err(HarnessError::from)?;
    let verdicts = harness::run_stream(&mut pipeline, &stream)?;

    fs::create_dir_all(&out).map_err(io_err(&out))?;
    write_verdict_file(&out.join("verdicts.jsonl"), &stream, &verdicts)?;

    let name = match id {
        Some(id) => ScenarioSpec::new(id)?.name(),
        None => "replay".to_string(),
    };
    let report = harness::labeled_report(id.unwrap_or(0), &name, &stream, &verdicts, &pipeline);
    if let Some(r) = &report {
        let reports = std::slice::from_ref(r);
        write_reports(&out, reports)?;
        stdout.write_all(render(reports, format).as_bytes()).map_err(io_err(Path::new("<stdout>")))?;
    }
    Ok(report)
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let config = cli.config.as_deref();
    let mut stdout = io::stdout().lock();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(config, args, &mut stdout),
        Command::Gen(args) => cmd_gen(config, args).map(|path| eprintln!("wrote {}", path.display())),
        Command::Replay(args) => cmd_replay(config, args, &mut stdout).map(|report| {
            if report.is_none() {
                eprintln!("trace carries no ground truth; wrote verdicts only");
            }
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ztedge: {e}");
            e.exit_code()
        }
    }
}

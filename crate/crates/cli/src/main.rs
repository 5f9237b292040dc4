//! `crisismesh run | query | sniff | validate | serve`
//!
//! Exit codes: 0 success, 1 expectation mismatch or run failure, 2 bad input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crisismesh_core::agents::sniffer_export;
use crisismesh_core::ontology::{build_domain_ontology, materialize_types, validate};
use crisismesh_core::pipeline::PipelineConfig;
use crisismesh_core::scenario::{run, Engine, Mode, RunReport, Scenario};
use crisismesh_core::store::{evaluate, load_document, parse_query, QueryError, TripleStore};
use crisismesh_gateway::{Credentials, Gateway};

#[derive(Parser)]
#[command(name = "crisismesh", version, about = "Crisis decision support: scenario runs, store queries and the operator gateway")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario under the automated policy.
    Run {
        scenario: PathBuf,
        /// Pipeline configuration (TOML).
        #[arg(long, env = "CRISISMESH_CONFIG")]
        config: Option<PathBuf>,
        /// Where to write the run report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate a query against a triple document; prints TSV.
    Query { store: PathBuf, query: String },
    /// Print the sequence diagram of a run report.
    Sniff { report: PathBuf },
    /// Check a triple document against the domain schema.
    Validate { store: PathBuf },
    /// Serve a scenario to the human decision-maker over HTTP.
    Serve {
        scenario: PathBuf,
        #[arg(long, default_value_t = 7878)]
        port: u16,
        /// `operator:sha256hex` lines.
        #[arg(long)]
        credentials: PathBuf,
        /// Decide automatically instead of pausing at Decision.
        #[arg(long)]
        auto: bool,
        #[arg(long, env = "CRISISMESH_CONFIG")]
        config: Option<PathBuf>,
        /// Where to write the run report once the run finishes.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// Error that maps to exit code 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Usage> {
    std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Usage> {
    match path {
        Some(p) => PipelineConfig::from_toml(&read(p)?).map_err(|e| Usage(format!("{}: {e}", p.display()))),
        None => Ok(PipelineConfig::default()),
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, Usage> {
    Scenario::load(&read(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn load_store(path: &Path) -> Result<TripleStore, Usage> {
    let mut store = TripleStore::new();
    load_document(&mut store, &read(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    Ok(store)
}

fn cmd_run(scenario: &Path, config: Option<&Path>, report_path: Option<&Path>) -> Result<u8, Usage> {
    let config = load_config(config)?;
    let scenario = load_scenario(scenario)?;
    let report = run(&scenario, Some(&config));
    if let Some(p) = report_path {
        std::fs::write(p, report.serialize()).map_err(|e| Usage(format!("{}: {e}", p.display())))?;
    }
    println!(
        "{}: final phase {}, {} messages, {} recommendation(s)",
        report.scenario,
        report.final_phase,
        report.message_trace.len(),
        report.recommendations.len()
    );
    let mut problems: Vec<String> = report.violations().iter().map(|v| format!("protocol violation: {v}")).collect();
    if let Some(f) = &report.failure {
        problems.push(format!("run failed at tick {}: {}", f.tick, f.error));
    }
    if let Some(expected) = &scenario.expected {
        problems.extend(report.mismatches(expected));
    }
    for p in &problems {
        eprintln!("{p}");
    }
    Ok(u8::from(!problems.is_empty()))
}

fn cmd_query(store: &Path, query: &str) -> Result<u8, Usage> {
    let mut store = load_store(store)?;
    let (schema, _) = build_domain_ontology();
    materialize_types(&mut store, &schema);
    let query = parse_query(query).map_err(|e| match e {
        QueryError::Parse(p) => Usage(format!("query: {p}")),
        other => Usage(format!("query: {other}")),
    })?;
    let rows = evaluate(&store, &query)?;
    print!("{}", rows.to_tsv());
    Ok(0)
}

fn cmd_sniff(report: &Path) -> Result<u8, Usage> {
    let report = RunReport::parse(&read(report)?).map_err(|e| Usage(format!("{}: {e}", report.display())))?;
    print!("{}", sniffer_export(&report.message_trace));
    Ok(0)
}

fn cmd_validate(store: &Path) -> Result<u8, Usage> {
    let store = load_store(store)?;
    let (schema, _) = build_domain_ontology();
    let violations = validate(&store, &schema);
    for v in &violations {
        println!("{v}");
    }
    Ok(u8::from(!violations.is_empty()))
}

fn cmd_serve(
    scenario: &Path,
    port: u16,
    credentials: &Path,
    auto: bool,
    config: Option<&Path>,
    report: Option<PathBuf>,
) -> Result<u8, Usage> {
    let config = load_config(config)?;
    let scenario = load_scenario(scenario)?;
    let credentials = Credentials::load(credentials)?;
    let mode = if auto { Mode::Auto } else { Mode::AwaitHuman };
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        println!("listening on http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        let gateway = Gateway::with_report(Engine::new(scenario, config, mode), credentials, report);
        crisismesh_gateway::serve(listener, gateway).await?;
        Ok::<u8, Usage>(0)
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, config, report } => cmd_run(scenario, config.as_deref(), report.as_deref()),
        Command::Query { store, query } => cmd_query(store, query),
        Command::Sniff { report } => cmd_sniff(report),
        Command::Validate { store } => cmd_validate(store),
        Command::Serve { scenario, port, credentials, auto, config, report } => {
            cmd_serve(scenario, *port, credentials, *auto, config.as_deref(), report.clone())
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

//! Command-line front-end for the resilience simulator.
//!
//! The binary is a thin wrapper around [`execute`]; everything here is also
//! usable from tests without spawning a process.

pub mod plot;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use resilience::scenario::{self, Variant};
use resilience::{run_monte_carlo_with, Ensemble, Metric, RunOptions, Scenario, StateVar};
use thiserror::Error;

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "RESILIENCE_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// Process exit status: 1 validation, 2 I/O, 3 internal.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::NotFound(_) | CliError::Io { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            CliError::NotFound(path.to_path_buf())
        } else {
            CliError::Io { path: path.to_path_buf(), source }
        }
    }
}

impl From<resilience::Error> for CliError {
    fn from(e: resilience::Error) -> Self {
        match e {
            resilience::Error::Config(_) | resilience::Error::Data(_) => CliError::Validation(e.to_string()),
            resilience::Error::NonFinite(_) => CliError::Internal(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "resilience", version, about = "Community resilience simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a built-in or file scenario and write metrics.csv.
    Run(RunArgs),
    /// Run one sub-run per value of a scenario parameter.
    Sweep(SweepArgs),
    /// Run catalog disaster types and write the well-being series.
    Emdat(EmdatArgs),
    /// Regenerate the SVG charts from a metrics.csv.
    Plot(PlotArgs),
    /// List built-in scenario names.
    List,
    /// Print the scenario document of a built-in or file scenario.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Built-in scenario, e.g. `case1:flexibility` (see `list`).
    #[arg(long)]
    pub builtin: Option<String>,
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Number of time steps [default: the scenario's horizon, 300 for built-ins].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Monte Carlo replications [default: the scenario's count, 100 for built-ins].
    #[arg(long)]
    pub replications: Option<usize>,
    /// Base seed [default: the scenario's seed, 0 for built-ins].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
    /// Write one SVG line chart per metric.
    #[arg(long)]
    pub emit_plots: bool,
    /// Write agents.csv with every agent's state at every step of replication 0.
    #[arg(long)]
    pub dump_agents: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Dotted parameter path, e.g. `community.1.M_C.mean`.
    #[arg(long)]
    pub path: String,
    /// Comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    pub values: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EmdatArgs {
    /// Disaster type (case-insensitive); every catalog row when omitted.
    #[arg(long)]
    pub disaster: Option<String>,
    /// Catalog CSV replacing the bundled one.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// A metrics.csv written by `run`, `sweep` or `emdat`.
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub steps: Option<usize>,
}

/// Where a scenario comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Builtin(String),
    File(PathBuf),
}

impl From<&SourceArgs> for Source {
    fn from(a: &SourceArgs) -> Self {
        match (&a.builtin, &a.scenario) {
            (Some(name), _) => Source::Builtin(name.clone()),
            (None, Some(path)) => Source::File(path.clone()),
            (None, None) => unreachable!("clap enforces exactly one source"),
        }
    }
}

/// Resolved overrides shared by the simulating commands.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub dump_agents: bool,
}

impl From<&OutputArgs> for Overrides {
    fn from(a: &OutputArgs) -> Self {
        Overrides { steps: a.steps, replications: a.replications, seed: a.seed, dump_agents: a.dump_agents }
    }
}

/// CSV text produced by a simulation command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub metrics_csv: String,
    pub agents_csv: Option<String>,
}

pub fn load_variants(source: &Source) -> Result<Vec<Variant>, CliError> {
    match source {
        Source::Builtin(name) => Ok(scenario::builtin(name)?),
        Source::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let s = Scenario::parse(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(vec![Variant { label, scenario: s }])
        }
    }
}

fn apply(mut s: Scenario, o: &Overrides) -> Result<Scenario, CliError> {
    if let Some(steps) = o.steps {
        s = s.with_horizon(steps);
    }
    if let Some(r) = o.replications {
        s.replications = r;
    }
    if let Some(seed) = o.seed {
        s.seed = seed;
    }
    s.validate()?;
    Ok(s)
}

/// Runs every variant and formats the results. `metrics` restricts the rows
/// written; an empty slice means all of them.
pub fn simulate(variants: &[Variant], o: &Overrides, metrics: &[Metric]) -> Result<Outcome, CliError> {
    let metrics = if metrics.is_empty() { &Metric::ALL[..] } else { metrics };
    let labelled = variants.len() > 1;
    let mut results = Vec::with_capacity(variants.len());
    for (k, v) in variants.iter().enumerate() {
        let s = apply(v.scenario.clone(), o)?;
        eprintln!(
            "[{}/{}] {}: {} agents, {} replications, {} steps",
            k + 1,
            variants.len(),
            v.label,
            s.population(),
            s.replications,
            s.horizon
        );
        let ensemble =
            run_monte_carlo_with(&s, s.replications, s.seed, RunOptions { dump_agents: o.dump_agents })?;
        results.push((v.label.as_str(), s, ensemble));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step", "community", "metric", "mean", "std"];
    if labelled {
        header.insert(0, "run");
    }
    w.write_record(&header).map_err(internal)?;
    for (label, s, ensemble) in &results {
        write_metrics(&mut w, labelled.then_some(*label), s, ensemble, metrics)?;
    }
    let metrics_csv = finish(w)?;

    let agents_csv = if o.dump_agents {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = vec!["step", "community", "agent"];
        if labelled {
            header.insert(0, "run");
        }
        header.extend(StateVar::ALL[..8].iter().map(|v| v.key()));
        header.extend(["der_nominal", "der_fraction", "q_total"]);
        w.write_record(&header).map_err(internal)?;
        for (label, s, ensemble) in &results {
            for a in ensemble.runs[0].agents.iter().flatten() {
                let mut row: Vec<String> = Vec::with_capacity(header.len());
                if labelled {
                    row.push(label.to_string());
                }
                row.push(a.step.to_string());
                row.push(s.communities[a.community].id.clone());
                row.push(a.agent.to_string());
                row.extend(StateVar::ALL[..8].iter().map(|&v| a.state.get(v).get().to_string()));
                row.push(a.state.der_nominal.get().to_string());
                row.push(a.state.der_fraction.get().to_string());
                row.push(a.q_total.get().to_string());
                w.write_record(&row).map_err(internal)?;
            }
        }
        Some(finish(w)?)
    } else {
        None
    };
    Ok(Outcome { metrics_csv, agents_csv })
}

fn write_metrics(
    w: &mut csv::Writer<Vec<u8>>,
    label: Option<&str>,
    s: &Scenario,
    ensemble: &Ensemble,
    metrics: &[Metric],
) -> Result<(), CliError> {
    for (step, m) in ensemble.summary.iter().enumerate() {
        for (c, cm) in m.communities.iter().enumerate() {
            for &metric in metrics {
                let stat = cm.get(metric);
                let mut row = Vec::with_capacity(6);
                if let Some(l) = label {
                    row.push(l.to_string());
                }
                row.push(step.to_string());
                row.push(s.communities[c].id.clone());
                row.push(metric.name().to_string());
                row.push(stat.mean.to_string());
                row.push(stat.std.to_string());
                w.write_record(&row).map_err(internal)?;
            }
        }
    }
    Ok(())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(internal)?;
    String::from_utf8(bytes).map_err(internal)
}

/// One variant per value, labelled `path=value`.
pub fn sweep_variants(base: &[Variant], path: &str, values: &str) -> Result<Vec<Variant>, CliError> {
    let values: Vec<f64> = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|_| CliError::Validation(format!("sweep value `{v}` is not a number"))))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Validation("sweep needs at least one value".into()));
    }
    let mut out = Vec::with_capacity(base.len() * values.len());
    for b in base {
        for &x in &values {
            let mut s = b.scenario.clone();
            s.set_path(path, x)?;
            let label =
                if base.len() == 1 { format!("{path}={x}") } else { format!("{} {path}={x}", b.label) };
            out.push(Variant { label, scenario: s });
        }
    }
    Ok(out)
}

/// Catalog variants for one disaster type, or all of them.
pub fn emdat_variants(disaster: Option<&str>, catalog: Option<&Path>) -> Result<Vec<Variant>, CliError> {
    let catalog = match catalog {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            scenario::load_disaster_catalog(&text)?
        }
        None => scenario::bundled_catalog(),
    };
    let pick = |p: &resilience::DisasterProfile| Variant {
        label: p.disaster_type.clone(),
        scenario: scenario::emdat_scenario(p),
    };
    match disaster {
        None => Ok(catalog.values().map(pick).collect()),
        Some(name) => catalog
            .values()
            .find(|p| p.disaster_type.eq_ignore_ascii_case(name))
            .map(|p| vec![pick(p)])
            .ok_or_else(|| {
                let known: Vec<&str> = catalog.keys().map(String::as_str).collect();
                CliError::Validation(format!("unknown disaster type `{name}`; known types: {}", known.join(", ")))
            }),
    }
}

pub const EMDAT_METRICS: [Metric; 3] = [Metric::MentalWb, Metric::PhysicalWb, Metric::Resilience];

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// Writes `metrics.csv`, optional `agents.csv` and optional charts.
pub fn write_outcome(outcome: &Outcome, out: &Path, emit_plots: bool) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io { path: out.to_path_buf(), source: e })?;
    let metrics = out.join("metrics.csv");
    write_file(&metrics, &outcome.metrics_csv)?;
    eprintln!("wrote {}", metrics.display());
    if let Some(agents) = &outcome.agents_csv {
        let path = out.join("agents.csv");
        write_file(&path, agents)?;
        eprintln!("wrote {}", path.display());
    }
    if emit_plots {
        write_plots(&outcome.metrics_csv, out)?;
    }
    Ok(())
}

fn write_plots(csv: &str, out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io { path: out.to_path_buf(), source: e })?;
    let charts = plot::charts_from_csv(csv)?;
    for c in &charts {
        write_file(&out.join(format!("{}.svg", c.metric)), &c.svg)?;
    }
    eprintln!("wrote {} charts to {}", charts.len(), out.display());
    Ok(())
}

/// Runs a parsed command line. Text output goes to `stdout`.
pub fn execute(cli: Cli, stdout: &mut impl io::Write) -> Result<(), CliError> {
    let stdout_err = |e: io::Error| CliError::Io { path: PathBuf::from("<stdout>"), source: e };
    match cli.command {
        Command::Run(a) => {
            let variants = load_variants(&Source::from(&a.source))?;
            let outcome = simulate(&variants, &Overrides::from(&a.output), &[])?;
            write_outcome(&outcome, &a.output.out, a.output.emit_plots)
        }
        Command::Sweep(a) => {
            let base = load_variants(&Source::from(&a.source))?;
            let variants = sweep_variants(&base, &a.path, &a.values)?;
            let outcome = simulate(&variants, &Overrides::from(&a.output), &[])?;
            write_outcome(&outcome, &a.output.out, a.output.emit_plots)
        }
        Command::Emdat(a) => {
            let variants = emdat_variants(a.disaster.as_deref(), a.catalog.as_deref())?;
            let outcome = simulate(&variants, &Overrides::from(&a.output), &EMDAT_METRICS)?;
            write_outcome(&outcome, &a.output.out, a.output.emit_plots)
        }
        Command::Plot(a) => {
            let csv = fs::read_to_string(&a.csv).map_err(|e| CliError::io(&a.csv, e))?;
            write_plots(&csv, &a.out)
        }
        Command::List => {
            for name in scenario::builtin_names() {
                writeln!(stdout, "{name}").map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::Render(a) => {
            let o = Overrides { steps: a.steps, ..Overrides::default() };
            for v in load_variants(&Source::from(&a.source))? {
                let s = apply(v.scenario, &o)?;
                writeln!(stdout, "# {}\n{}", v.label, s.render()).map_err(stdout_err)?;
            }
            Ok(())
        }
    }
}

//! The `igss` command line: record, evolve, simulate, prune, eval, compare
//! and replay.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 internal error.

mod config;
mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use config::{Config, TaskSpec};
pub use manifest::RunManifest;

use crate::error::{Error, Result};
use crate::expr::{parse_rule_file, prune_rule, prune_rule_with_ranges, Rule};
use crate::gp::evolve_with_workers;
use crate::hawkdove::{self, hd_fitness_compiled, make_reference, WealthDistribution};
use crate::rebellion::{self, classify_fitness, ClassifierData, Rules, Trace};
use crate::refdata::ReferenceDataset;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "igss", version, about = "Evolve, prune and test agent behaviour rules")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Master seed; overrides every seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fitness worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Build a reference dataset (rebellion snapshots or a hawk-dove target).
    Record {
        #[arg(long)]
        target: Option<String>,
    },
    /// Evolve a rule against a reference dataset.
    Evolve {
        /// hawkdove, rebellion:M, rebellion:A or rebellion:C.
        #[arg(long)]
        task: Option<TaskSpec>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Overrides gp.max_generations.
        #[arg(long)]
        generations: Option<usize>,
        /// Overrides gp.population_size.
        #[arg(long)]
        population: Option<usize>,
    },
    /// Run a model and write its output series.
    Simulate {
        /// hawkdove or rebellion.
        #[arg(long)]
        model: Option<String>,
        /// Rule file: one rule for hawk-dove, M, A and C (in that order) for
        /// rebellion. Rebellion runs its native rules when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Simplify every rule in a file.
    Prune {
        rules: PathBuf,
        /// TOML variable ranges for range-aware pruning.
        #[arg(long)]
        ranges: Option<PathBuf>,
        /// Use the hawk-dove ranges of the configured model.
        #[arg(long, conflicts_with = "ranges")]
        hawkdove_ranges: bool,
    },
    /// Score the first rule of a file against a dataset.
    Eval {
        rules: PathBuf,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        task: Option<TaskSpec>,
    },
    /// Compare two rebellion traces.
    Compare { left: PathBuf, right: PathBuf },
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Record { .. } => "record",
            Command::Evolve { .. } => "evolve",
            Command::Simulate { .. } => "simulate",
            Command::Prune { .. } => "prune",
            Command::Eval { .. } => "eval",
            Command::Compare { .. } => "compare",
            Command::Replay { .. } => "replay",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) | Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::MissingRange(_) => {
            EXIT_USAGE
        }
        Error::Data(_)
        | Error::Schema { .. }
        | Error::Table { .. }
        | Error::LengthMismatch { .. }
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => EXIT_DATA,
        Error::UnboundVariable(_) | Error::Rule { .. } => EXIT_INTERNAL,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Messages go to `stdout` and `stderr`.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, cli.common.out.as_deref(), cli.common.workers, stdout);
    }
    let mut config = match &cli.common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    config.resolve_seed(cli.common.seed);
    execute(&cli.command, config, cli.common.out.as_deref(), cli.common.workers, stdout)
}

fn replay(path: &Path, out: Option<&Path>, workers: Option<usize>, stdout: &mut dyn Write) -> Result<()> {
    let m = RunManifest::load(path)?;
    let out = out.map(Path::to_path_buf).or(m.out.clone());
    execute(&m.invocation, m.config, out.as_deref(), workers, stdout)
}

fn execute(
    command: &Command,
    mut config: Config,
    out: Option<&Path>,
    workers: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let mut manifest = RunManifest::start(command.clone(), &config, out);
    let outputs = match command {
        Command::Record { target } => {
            if target.is_some() {
                config.target = target.clone();
            }
            record(&config, out.unwrap_or(Path::new("reference.csv")))?
        }
        Command::Evolve {
            task,
            dataset,
            generations,
            population,
        } => {
            config.task = task.or(config.task);
            config.dataset = dataset.clone().or(config.dataset);
            if let Some(g) = generations {
                config.gp.max_generations = *g;
            }
            if let Some(p) = population {
                config.gp.population_size = *p;
            }
            if matches!(config.task, Some(TaskSpec::Rebellion(_))) && config.gp.target_fitness.is_none() {
                config.gp.target_fitness = Some(1.0);
            }
            evolve(&config, out.unwrap_or(Path::new("evolve-out")), workers, stdout)?
        }
        Command::Simulate { model, rules } => {
            if model.is_some() {
                config.model = model.clone();
            }
            simulate(&config, rules.as_deref(), out.unwrap_or(Path::new("simulate-out")))?
        }
        Command::Prune {
            rules,
            ranges,
            hawkdove_ranges,
        } => {
            if let Some(p) = ranges {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read ranges {}: {e}", p.display())))?;
                config.ranges = Some(toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?);
            } else if *hawkdove_ranges {
                config.ranges = Some(hawkdove::ranges(&config.hawkdove));
            }
            prune(&config, rules, out, stdout)?
        }
        Command::Eval { rules, dataset, task } => {
            config.task = task.or(config.task);
            config.dataset = dataset.clone().or(config.dataset);
            eval(&config, rules, out, stdout)?
        }
        Command::Compare { left, right } => compare(left, right, out, stdout)?,
        Command::Replay { .. } => return Err(Error::Config("a manifest cannot replay another replay".into())),
    };
    if let Some(path) = manifest_path(command, out, &outputs) {
        manifest.config = config;
        manifest.finish(outputs);
        manifest.save(&path)?;
    }
    Ok(())
}

/// Manifests sit next to file outputs or inside output directories. Commands
/// that only print write none.
fn manifest_path(command: &Command, out: Option<&Path>, outputs: &[PathBuf]) -> Option<PathBuf> {
    if outputs.is_empty() {
        return None;
    }
    match command {
        Command::Evolve { .. } | Command::Simulate { .. } => outputs[0].parent().map(|d| d.join("manifest.json")),
        _ => {
            let file = out.map(Path::to_path_buf).unwrap_or_else(|| outputs[0].clone());
            Some(file.with_extension("manifest.json"))
        }
    }
}

fn read_rules(path: &Path) -> Result<Vec<Rule>> {
    let text = std::fs::read_to_string(path)?;
    let rules = parse_rule_file(&text)?;
    if rules.is_empty() {
        return Err(Error::Data(format!("{} contains no rules", path.display())));
    }
    Ok(rules)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    ensure_parent(path)?;
    std::fs::write(path, contents)?;
    Ok(())
}

fn record(config: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let target = config.target.as_deref().unwrap_or("rebellion");
    let dataset = match target {
        "rebellion" => {
            let runs = match &config.runs {
                Some(r) => r.clone(),
                None => rebellion::default_configs(config.master_seed()),
            };
            rebellion::record_dataset(&runs)?
        }
        "hawkdove" => {
            let spec = config
                .reference
                .as_ref()
                .ok_or_else(|| Error::Config("hawkdove record needs a [reference] section".into()))?;
            make_reference(spec, &config.hawkdove)?.to_dataset(&format!("hawkdove {spec:?}"))?
        }
        other => return Err(Error::Config(format!("unknown record target `{other}`"))),
    };
    ensure_parent(out)?;
    dataset.save_csv(out)?;
    Ok(vec![out.to_path_buf()])
}

fn required_task(config: &Config) -> Result<TaskSpec> {
    config
        .task
        .ok_or_else(|| Error::Config("no task given (use --task or `task` in the config)".into()))
}

fn load_dataset(config: &Config) -> Result<ReferenceDataset> {
    let path = config
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("no dataset given (use --dataset or `dataset` in the config)".into()))?;
    ReferenceDataset::load_csv(path)
}

fn hawkdove_reference(config: &Config) -> Result<WealthDistribution> {
    match (&config.dataset, &config.reference) {
        (Some(_), _) => WealthDistribution::from_dataset(&load_dataset(config)?),
        (None, Some(spec)) => make_reference(spec, &config.hawkdove),
        (None, None) => Err(Error::Config("hawkdove needs a dataset or a [reference] section".into())),
    }
}

fn evolve(config: &Config, out: &Path, workers: Option<usize>, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let task = required_task(config)?;
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = match task {
        TaskSpec::HawkDove => {
            let reference = hawkdove_reference(config)?;
            let hd = config.hawkdove.clone();
            let grammar = hawkdove::rule_grammar().with_max_depth(config.gp.max_depth);
            evolve_with_workers(&config.gp, &grammar, workers, |rule, ctx| {
                let compiled = hawkdove::compile(rule)?;
                hd_fitness_compiled(&compiled, &reference, &hd.with_seed(ctx.seed), config.n_repeats)
            })?
        }
        TaskSpec::Rebellion(t) => {
            let data = ClassifierData::new(&load_dataset(config)?, t)?;
            let grammar = t.grammar().with_max_depth(config.gp.max_depth);
            let ground = classify_fitness(&t.ground_truth(), &data, config.metric);
            if let Err(e) = ground {
                return Err(Error::in_rule(t.ground_truth(), e));
            }
            evolve_with_workers(&config.gp, &grammar, workers, |rule, _| {
                classify_fitness(rule, &data, config.metric)
            })?
        }
    };
    std::fs::create_dir_all(out)?;
    let log = out.join("generations.csv");
    let mut buf = Vec::new();
    result.write_log_csv(&mut buf)?;
    write_file(&log, &buf)?;
    let hof = out.join("hall_of_fame.rules");
    write_file(&hof, result.hall_of_fame_text().as_bytes())?;
    writeln!(
        stdout,
        "{task}: best fitness {:.6} after {} generations ({:?})\n{}",
        result.best_fitness,
        result.log.len(),
        result.stop_reason,
        result.best_pruned
    )?;
    Ok(vec![log, hof])
}

fn simulate(config: &Config, rules: Option<&Path>, out: &Path) -> Result<Vec<PathBuf>> {
    let model = config.model.as_deref().unwrap_or(match config.task {
        Some(TaskSpec::HawkDove) => "hawkdove",
        _ => "rebellion",
    });
    std::fs::create_dir_all(out)?;
    match model {
        "hawkdove" => {
            let path = rules.ok_or_else(|| Error::Config("hawkdove simulation needs --rules".into()))?;
            let rule = read_rules(path)?.remove(0);
            let dist = hawkdove::run(&config.hawkdove, &rule)?;
            let values = out.join("distribution.csv");
            dist.to_dataset(&format!("hawkdove rule: {rule}"))?.save_csv(&values)?;
            let hist = out.join("histogram.csv");
            let mut buf = Vec::new();
            hawkdove::write_histogram(&hawkdove::histogram(dist.values(), config.bins), &mut buf)?;
            write_file(&hist, &buf)?;
            Ok(vec![values, hist])
        }
        "rebellion" => {
            let trace = match rules {
                None => rebellion::run_original(&config.rebellion)?.0,
                Some(path) => {
                    let mut r = read_rules(path)?;
                    if r.len() != 3 {
                        return Err(Error::Data(format!(
                            "{} must hold three rules (M, A, C), found {}",
                            path.display(),
                            r.len()
                        )));
                    }
                    let enforcement = r.pop().expect("three rules");
                    let activation = r.pop().expect("three rules");
                    let moves = r.pop().expect("three rules");
                    rebellion::run_evolved(
                        &config.rebellion,
                        &Rules {
                            moves,
                            activation,
                            enforcement,
                        },
                    )?
                }
            };
            let path = out.join("trace.csv");
            trace.save_csv(&path)?;
            Ok(vec![path])
        }
        other => Err(Error::Config(format!("unknown model `{other}`"))),
    }
}

fn prune(config: &Config, rules: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let mut text = String::new();
    for rule in read_rules(rules)? {
        let pruned = match &config.ranges {
            Some(r) => prune_rule_with_ranges(&rule, r)?,
            None => prune_rule(&rule),
        };
        text += &format!("{pruned}\n");
    }
    match out {
        Some(p) => {
            write_file(p, text.as_bytes())?;
            Ok(vec![p.to_path_buf()])
        }
        None => {
            stdout.write_all(text.as_bytes())?;
            Ok(Vec::new())
        }
    }
}

fn eval(config: &Config, rules: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let rule = read_rules(rules)?.remove(0);
    let score = match required_task(config)? {
        TaskSpec::HawkDove => {
            let reference = hawkdove_reference(config)?;
            let compiled = hawkdove::compile(&rule).map_err(|e| Error::in_rule(&rule, e))?;
            hd_fitness_compiled(&compiled, &reference, &config.hawkdove, config.n_repeats)?
        }
        TaskSpec::Rebellion(t) => {
            let data = ClassifierData::new(&load_dataset(config)?, t)?;
            classify_fitness(&rule, &data, config.metric)?
        }
    };
    let line = format!("{score:.6}\n");
    stdout.write_all(line.as_bytes())?;
    match out {
        Some(p) => {
            write_file(p, line.as_bytes())?;
            Ok(vec![p.to_path_buf()])
        }
        None => Ok(Vec::new()),
    }
}

fn compare(left: &Path, right: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let summary = rebellion::compare_traces(&Trace::load_csv(left)?, &Trace::load_csv(right)?)?;
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    stdout.write_all(json.as_bytes())?;
    match out {
        Some(p) => {
            write_file(p, json.as_bytes())?;
            Ok(vec![p.to_path_buf()])
        }
        None => Ok(Vec::new()),
    }
}

//! The `ltlinfer` command line.
//!
//! Exit status: 0 success, 1 usage error, 2 bad input, 3 runtime failure
//! (automaton budget, non-convergence, unwritable output).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ltlinfer_core::automata::{compile_with_budget, CompileError};
use ltlinfer_core::domains::{generate_demos, DomainSpec, PlanError};
use ltlinfer_core::ltl::{parse, Alphabet, Formula};
use ltlinfer_core::mdp::{Mdp, Trajectory};
use ltlinfer_core::objective::{FormulaAnalysis, IterationOptions, ObjectiveKind};
use ltlinfer_core::search::{aggregate, run_single, SearchConfig};
use ltlinfer_core::DEFAULT_STATE_BUDGET;
use serde_json::json;

use crate::dot::dra_to_dot;
use crate::formats::{load_mdp, load_trajectories, write_json, MdpFile, TrajectoryFile};
use crate::manifest::{manifest_path_for, RunManifest};
use crate::parallel::ThreadedEvaluator;
use crate::report::{classification_dump, report_rows, write_csv};
use crate::InputError;

#[derive(Debug, Parser)]
#[command(name = "ltlinfer", version, about = "Infer LTL specifications from demonstrations in labeled MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a formula to a Rabin automaton.
    Compile(CompileArgs),
    /// Write a built-in domain as an MDP file.
    Domain(DomainArgs),
    /// Plan for a formula in a built-in domain and sample demonstrations.
    Demos(DemosArgs),
    /// Search for formulas explaining demonstrations.
    Infer(InferArgs),
    /// Score a single formula.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct CompileArgs {
    #[arg(long)]
    formula: String,
    /// Comma-separated proposition names.
    #[arg(long, value_delimiter = ',', required = true)]
    alphabet: Vec<String>,
    #[arg(long)]
    out_dot: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    budget: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DomainName {
    Slimchance,
    Cleaningworld,
}

#[derive(Debug, Args)]
struct DomainParams {
    #[arg(long, value_enum)]
    domain: DomainName,
    /// SlimChance: probability that `try` succeeds.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// CleaningWorld: initial dirt.
    #[arg(long, default_value_t = 5)]
    dirt: u32,
    /// CleaningWorld: initial battery.
    #[arg(long, default_value_t = 3)]
    battery: u32,
    /// CleaningWorld: battery capacity.
    #[arg(long, default_value_t = 3)]
    capacity: u32,
}

impl DomainParams {
    fn spec(&self) -> DomainSpec {
        match self.domain {
            DomainName::Slimchance => DomainSpec::SlimChance { epsilon: self.epsilon },
            DomainName::Cleaningworld => {
                DomainSpec::CleaningWorld { dirt: self.dirt, battery: self.battery, capacity: self.capacity }
            }
        }
    }

    fn echo(&self) -> serde_json::Value {
        match self.domain {
            DomainName::Slimchance => json!({"domain": "slimchance", "epsilon": self.epsilon}),
            DomainName::Cleaningworld => json!({
                "domain": "cleaningworld",
                "dirt": self.dirt,
                "battery": self.battery,
                "capacity": self.capacity,
            }),
        }
    }
}

#[derive(Debug, Args)]
struct DomainArgs {
    #[command(flatten)]
    params: DomainParams,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DemosArgs {
    #[command(flatten)]
    params: DomainParams,
    #[arg(long)]
    formula: String,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    horizon: u64,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Objective {
    State,
    Action,
}

impl Objective {
    fn kind(self) -> ObjectiveKind {
        match self {
            Objective::State => ObjectiveKind::State,
            Objective::Action => ObjectiveKind::Action,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Objective::State => "state",
            Objective::Action => "action",
        }
    }
}

#[derive(Debug, Args)]
struct InferArgs {
    #[arg(long)]
    mdp: PathBuf,
    #[arg(long)]
    demos: PathBuf,
    #[arg(long, value_enum, default_value_t = Objective::Action)]
    objective: Objective,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long, default_value_t = 100)]
    pop: usize,
    #[arg(long, default_value_t = 50)]
    gens: usize,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_csv: PathBuf,
    /// Worker threads for formula scoring; defaults to the available cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    #[arg(long, default_value_t = 0.9)]
    crossover: f64,
    #[arg(long, default_value_t = 0.1)]
    mutation: f64,
    /// Search over all formulas instead of only `G` bodies.
    #[arg(long)]
    unrestricted: bool,
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    budget: usize,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    mdp: PathBuf,
    #[arg(long)]
    demos: PathBuf,
    #[arg(long)]
    formula: String,
    #[arg(long, value_enum, default_value_t = Objective::Action)]
    objective: Objective,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    budget: usize,
    /// Write the product-state classification to this file.
    #[arg(long)]
    dump_classification: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::UnknownProposition(_) => CliError::Input(InputError::Invalid(e.to_string())),
            _ => CliError::Runtime(e.into()),
        }
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` (program name first), runs the subcommand, and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Compile(a) => cmd_compile(a),
        Command::Domain(a) => cmd_domain(a),
        Command::Demos(a) => cmd_demos(a),
        Command::Infer(a) => cmd_infer(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            e.exit_code()
        }
    }
}

fn check_gamma(gamma: f64) -> CliResult {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--gamma must lie in (0, 1), got {gamma}")))
    }
}

fn parse_formula(text: &str, alphabet: &Alphabet) -> Result<Formula, CliError> {
    parse(text, alphabet).map_err(|e| InputError::Invalid(format!("formula `{text}`: {e}")).into())
}

fn write_output(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn write_manifest(manifest: &RunManifest, output: &Path) -> CliResult {
    let path = manifest_path_for(output);
    manifest.write(&path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn cmd_compile(a: CompileArgs) -> CliResult {
    let alphabet = Alphabet::new(a.alphabet.iter().map(String::as_str))
        .map_err(|e| CliError::Usage(format!("--alphabet: {e}")))?;
    let f = parse_formula(&a.formula, &alphabet)?;
    let d = compile_with_budget(&f, &alphabet, a.budget)?;
    println!("states={} pairs={} accepts_nothing={}", d.state_count(), d.pairs().len(), d.accepts_nothing());
    if let Some(path) = &a.out_dot {
        write_output(path, &dra_to_dot(&d, &alphabet))?;
    }
    Ok(())
}

fn build_domain(params: &DomainParams) -> Result<Mdp, CliError> {
    params.spec().build().map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_domain(a: DomainArgs) -> CliResult {
    let m = build_domain(&a.params)?;
    write_json(&a.out, &MdpFile::from_mdp(&m)).with_context(|| format!("cannot write {}", a.out.display()))?;
    println!("states={} actions={}", m.state_count(), m.action_count());
    Ok(())
}

fn cmd_demos(a: DemosArgs) -> CliResult {
    check_gamma(a.gamma)?;
    let m = build_domain(&a.params)?;
    let f = parse_formula(&a.formula, m.alphabet())?;
    let start = Instant::now();
    let demos = generate_demos(&m, &f, a.gamma, a.count as usize, a.horizon as usize, a.seed).map_err(|e| match e {
        PlanError::InvalidArgument(msg) => CliError::Usage(msg.to_string()),
        PlanError::Compile(e) => e.into(),
        other => CliError::Runtime(other.into()),
    })?;
    let seconds = start.elapsed().as_secs_f64();
    write_json(&a.out, &TrajectoryFile::from_trajectories(&m, &demos))
        .with_context(|| format!("cannot write {}", a.out.display()))?;
    let mut config = a.params.echo();
    let extra = json!({
        "formula": f.to_string(),
        "count": a.count,
        "horizon": a.horizon,
        "gamma": a.gamma,
        "seed": a.seed,
    });
    config.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
    let mut manifest = RunManifest::new("demos", config);
    manifest.run_seconds.push(seconds);
    manifest.outputs.push(a.out.display().to_string());
    write_manifest(&manifest, &a.out)
}

fn load_inputs(mdp: &Path, demos: &Path) -> Result<(Mdp, Vec<Trajectory>), CliError> {
    let m = load_mdp(mdp)?;
    let demos = load_trajectories(demos, &m)?;
    if demos.is_empty() {
        return Err(InputError::Invalid("the demonstration file has no trajectories".into()).into());
    }
    Ok((m, demos))
}

fn cmd_infer(a: InferArgs) -> CliResult {
    let cfg = SearchConfig {
        population: a.pop,
        generations: a.gens,
        runs: a.runs,
        objective: a.objective.kind(),
        gamma: a.gamma,
        seed: a.seed,
        max_depth: a.max_depth,
        crossover_probability: a.crossover,
        mutation_probability: a.mutation,
        require_always_root: !a.unrestricted,
        budget: a.budget,
        iteration: IterationOptions::default(),
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let threads = match a.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let (m, demos) = load_inputs(&a.mdp, &a.demos)?;
    let ctx = ltlinfer_core::objective::ScoringContext {
        mdp: &m,
        demos: &demos,
        kind: cfg.objective,
        gamma: cfg.gamma,
        budget: cfg.budget,
        options: cfg.iteration,
    };
    let mut eval = ThreadedEvaluator::new(ctx, threads);
    let mut fronts = Vec::with_capacity(cfg.runs);
    let mut seconds = Vec::with_capacity(cfg.runs);
    for run in 0..cfg.runs {
        let start = Instant::now();
        fronts.push(run_single(&cfg, m.alphabet(), run, &mut eval));
        seconds.push(start.elapsed().as_secs_f64());
        log::info!("run {run} finished in {:.3} s", seconds[run]);
    }
    if eval.failures() > 0 {
        log::warn!("{} formulas could not be scored and received the worst score", eval.failures());
    }
    let rows = report_rows(&aggregate(fronts));
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).context("cannot format the report")?;
    fs::write(&a.out_csv, buf).with_context(|| format!("cannot write {}", a.out_csv.display()))?;

    let mut manifest = RunManifest::new(
        "infer",
        json!({
            "objective": a.objective.name(),
            "gamma": cfg.gamma,
            "population": cfg.population,
            "generations": cfg.generations,
            "runs": cfg.runs,
            "seed": cfg.seed,
            "max_depth": cfg.max_depth,
            "crossover": cfg.crossover_probability,
            "mutation": cfg.mutation_probability,
            "always_root": cfg.require_always_root,
            "budget": cfg.budget,
            "threads": threads,
        }),
    );
    manifest.add_input(&a.mdp)?;
    manifest.add_input(&a.demos)?;
    manifest.run_seconds = seconds;
    manifest.outputs.push(a.out_csv.display().to_string());
    write_manifest(&manifest, &a.out_csv)
}

fn cmd_eval(a: EvalArgs) -> CliResult {
    check_gamma(a.gamma)?;
    let (m, demos) = load_inputs(&a.mdp, &a.demos)?;
    let f = parse_formula(&a.formula, m.alphabet())?;
    let d = compile_with_budget(&f, m.alphabet(), a.budget)?;
    let analysis = FormulaAnalysis::new(&m, &d, a.gamma, IterationOptions::default()).map_err(anyhow::Error::from)?;
    let obj = analysis.objective(a.objective.kind(), &demos).map_err(anyhow::Error::from)?;
    if let Some(path) = &a.dump_classification {
        write_output(path, &classification_dump(&analysis))?;
    }
    println!("obj={obj} fc={}", f.complexity());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run(["ltlinfer"]), 1);
        assert_eq!(run(["ltlinfer", "compile", "--formula", "G p"]), 1);
        assert_eq!(run(["ltlinfer", "frobnicate"]), 1);
    }

    #[test]
    fn compile_reports_parse_position() {
        assert_eq!(run(["ltlinfer", "compile", "--formula", "G (p &", "--alphabet", "p"]), 2);
        assert_eq!(run(["ltlinfer", "compile", "--formula", "G p", "--alphabet", "p,q"]), 0);
    }

    #[test]
    fn over_budget_is_a_runtime_failure() {
        assert_eq!(run(["ltlinfer", "compile", "--formula", "G F p", "--alphabet", "p", "--budget", "1"]), 3);
    }
}

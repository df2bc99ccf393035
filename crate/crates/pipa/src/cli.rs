// Copyright 2026
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

//! Command-line front end.
//!
//! Exit codes: 0 ok, 2 parse/usage, 3 semantic error, 4 runtime error,
//! 5 budget exceeded. Every command is deterministic given its full flag
//! set (including the seed), so identical invocations produce identical
//! bytes.

use crate::automaton::{AutomatonError, ProbAutomaton};
use crate::election::{
    build_network, guarded_variant, monte_carlo, with_bounds, ElectionConfig, ElectionError,
};
use crate::measure::{parse_event, MeasureError};
use crate::parser::{parse, ParseError};
use crate::pretty::{pp, pp_action, pp_prob};
use crate::pts::{transition_groups, PtsError, RuleMode};
use crate::scheduler::{
    search, simulate, AdversaryOpts, Objective, Registry, SchedError, StopReason,
};
use crate::term::{Branch, Name, Prefix, Process};
use clap::{Parser, Subcommand, ValueEnum};
use num::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "pipa", about = "Workbench for a probabilistic asynchronous pi-calculus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Standard,
    ComPrime,
}

impl From<Mode> for RuleMode {
    fn from(m: Mode) -> RuleMode {
        match m {
            Mode::Standard => RuleMode::Standard,
            Mode::ComPrime => RuleMode::ComPrime,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Obj {
    Max,
    Min,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a term file and print it back (canonical text or JSON AST).
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the transition groups of a term.
    Groups {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "standard")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Sample one execution under an adversary; emits one record per step.
    Run {
        file: PathBuf,
        #[arg(long)]
        adversary: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        max_steps: usize,
        #[arg(long, value_enum, default_value = "standard")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Exact event bounds by exhaustive adversary search at bounded depth.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        event: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, value_enum, default_value = "max")]
        objective: Obj,
        #[arg(long, value_enum, default_value = "standard")]
        mode: Mode,
        /// Cap on distinct (state, memory, depth) configurations explored.
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Monte Carlo study of the two-node leader election network.
    Election {
        /// Backtrack probability, an exact rational such as 1/10.
        #[arg(long, default_value = "1/10")]
        epsilon: String,
        #[arg(long, default_value = "round-robin")]
        adversary: String,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..))]
        runs: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Largest draw-count tail reported.
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        /// Use the input-guarded variant instead of the blind-choice network.
        #[arg(long)]
        guarded: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

enum CliError {
    Parse(String),
    Semantics(String),
    Runtime(String),
    Budget(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Semantics(_) => 3,
            CliError::Runtime(_) => 4,
            CliError::Budget(_) => 5,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Parse(m)
            | CliError::Semantics(m)
            | CliError::Runtime(m)
            | CliError::Budget(m) => m,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        if e.is_semantic() {
            CliError::Semantics(e.to_string())
        } else {
            CliError::Parse(e.to_string())
        }
    }
}

impl From<PtsError> for CliError {
    fn from(e: PtsError) -> Self {
        CliError::Semantics(e.to_string())
    }
}

impl From<AutomatonError> for CliError {
    fn from(e: AutomatonError) -> Self {
        match e {
            AutomatonError::Pts(p) => p.into(),
            AutomatonError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<SchedError> for CliError {
    fn from(e: SchedError) -> Self {
        match e {
            SchedError::Automaton(a) => a.into(),
            SchedError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<ElectionError> for CliError {
    fn from(e: ElectionError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn read_term(file: &PathBuf) -> Result<Process, CliError> {
    let src = std::fs::read_to_string(file)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", file.display())))?;
    Ok(parse(&src)?)
}

// ------------------------------------------------------------- JSON views

fn name_json(n: &Name) -> Value {
    match n {
        Name::Id(s) => json!({ "id": s }),
        Name::Lit(l) => json!({ "lit": l.text() }),
    }
}

fn branch_json(b: &Branch) -> Value {
    let prefix = match &b.prefix {
        Prefix::Input(x, y) => json!({ "input": [name_json(x), name_json(y)] }),
        Prefix::Tau(l) => json!({ "tau": l }),
    };
    json!({ "prob": pp_prob(&b.prob), "prefix": prefix, "cont": ast_json(&b.cont) })
}

fn ast_json(p: &Process) -> Value {
    match p {
        Process::Output(x, y) => json!({ "output": [name_json(x), name_json(y)] }),
        Process::Sum(bs) => json!({ "sum": bs.iter().map(branch_json).collect::<Vec<_>>() }),
        Process::Par(l, r) => json!({ "par": [ast_json(l), ast_json(r)] }),
        Process::Res(x, b) => json!({ "res": [name_json(x), ast_json(b)] }),
        Process::Var(x) => json!({ "var": x.0 }),
        Process::Rec(x, b) => json!({ "rec": [x.0.clone(), ast_json(b)] }),
        Process::If(c, t, e) => {
            json!({ "if": [name_json(c), ast_json(t), ast_json(e)] })
        }
    }
}

fn groups_json(p: &Process, groups: &[crate::pts::TransitionGroup]) -> Value {
    json!({
        "state": pp(p),
        "groups": groups
            .iter()
            .map(|g| {
                json!({
                    "entries": g
                        .entries
                        .iter()
                        .map(|e| {
                            json!({
                                "prob": pp_prob(&e.prob),
                                "action": pp_action(&e.action),
                                "target": pp(&e.target),
                            })
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect::<Vec<_>>(),
    })
}

// ----------------------------------------------------------------- commands

fn cmd_parse(file: PathBuf, format: Format) -> Result<(), CliError> {
    let term = read_term(&file)?;
    match format {
        Format::Text => println!("{}", pp(&term)),
        Format::Json => println!("{}", json!({ "ast": ast_json(&term) })),
    }
    Ok(())
}

fn cmd_groups(file: PathBuf, mode: Mode, format: Format) -> Result<(), CliError> {
    let term = read_term(&file)?;
    let groups = transition_groups(&term, mode.into())?;
    match format {
        Format::Text => {
            println!("{} group(s) of {}", groups.len(), pp(&term));
            for (i, g) in groups.iter().enumerate() {
                println!("group {}:", i + 1);
                for e in &g.entries {
                    println!("  {}  {}  ->  {}", pp_prob(&e.prob), pp_action(&e.action), pp(&e.target));
                }
            }
        }
        Format::Json => println!("{}", groups_json(&term, &groups)),
    }
    Ok(())
}

fn cmd_run(
    file: PathBuf,
    adversary: String,
    seed: Option<u64>,
    max_steps: usize,
    mode: Mode,
    format: Format,
) -> Result<(), CliError> {
    let term = read_term(&file)?;
    let mut adv = make_adversary(&adversary, seed)?;
    let m = ProbAutomaton::from_rules(mode.into());
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let (trace, why) =
        simulate(&m, adv.as_mut(), &term, &mut rng, max_steps, |_, _| false)?;
    let stop = match why {
        StopReason::Deadlock => "deadlock",
        StopReason::StepBudget => "step-budget",
        StopReason::Stopped => "stopped",
    };
    match format {
        Format::Json => {
            for (i, (a, p, s)) in trace.iter().enumerate() {
                println!(
                    "{}",
                    json!({
                        "node": i + 1,
                        "parent": i,
                        "action": pp_action(a),
                        "prob": pp_prob(p),
                        "state": pp(s),
                    })
                );
            }
            println!(
                "{}",
                json!({ "stop": stop, "steps": trace.len(), "scriptExhausted": adv.exhausted() })
            );
        }
        Format::Text => {
            for (i, (a, p, s)) in trace.iter().enumerate() {
                println!("{}: {} ({})  {}", i + 1, pp_action(a), pp_prob(p), pp(s));
            }
            println!(
                "stopped: {stop} after {} step(s){}",
                trace.len(),
                if adv.exhausted() { " [script exhausted]" } else { "" }
            );
        }
    }
    Ok(())
}

fn make_adversary(
    token: &str,
    seed: Option<u64>,
) -> Result<Box<dyn crate::scheduler::Adversary>, CliError> {
    let reg = Registry::builtin();
    // `scripted:FILE` takes its indices from a file, one per line.
    let opts = if let Some(path) = token.strip_prefix("scripted:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("{path}: {e}")))?;
        return Ok(reg.make("scripted", AdversaryOpts { arg: Some(text), seed })?);
    } else {
        AdversaryOpts { arg: None, seed }
    };
    Ok(reg.make(token, opts)?)
}

fn cmd_analyze(
    file: PathBuf,
    event: String,
    depth: usize,
    objective: Obj,
    mode: Mode,
    max_states: usize,
    format: Format,
) -> Result<(), CliError> {
    let term = read_term(&file)?;
    let ev = parse_event(&event)?;
    let m = ProbAutomaton::from_rules(mode.into());
    let obj = match objective {
        Obj::Max => Objective::Max,
        Obj::Min => Objective::Min,
    };
    let r = search(&m, &term, ev.as_ref(), depth, obj, max_states)?;
    let obj_name = match objective {
        Obj::Max => "max",
        Obj::Min => "min",
    };
    match format {
        Format::Text => {
            println!("event: {}", ev.name());
            println!("objective: {obj_name}  depth: {depth}");
            println!("lower: {}", pp_prob(&r.lower));
            println!("upper: {}", pp_prob(&r.upper));
            println!("configurations: {}  policy entries: {}", r.configs, r.policy_lower.len());
        }
        Format::Json => println!(
            "{}",
            json!({
                "event": ev.name(),
                "objective": obj_name,
                "depth": depth,
                "lower": pp_prob(&r.lower),
                "upper": pp_prob(&r.upper),
                "configs": r.configs,
                "policyEntries": r.policy_lower.len(),
            })
        ),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_election(
    epsilon: String,
    adversary: String,
    runs: u32,
    seed: u64,
    max_steps: usize,
    n_max: u32,
    guarded: bool,
    format: Format,
) -> Result<(), CliError> {
    let eps = BigRational::from_str(&epsilon)
        .map_err(|e| CliError::Parse(format!("bad epsilon {epsilon:?}: {e}")))?;
    let cfg = ElectionConfig { epsilon: eps, ..ElectionConfig::default() };
    let net = if guarded { guarded_variant(&cfg)? } else { build_network(&cfg)? };
    let m = ProbAutomaton::from_rules(RuleMode::Standard);
    let reg = Registry::builtin();
    let stats = monte_carlo(
        &m,
        &net,
        &|run_seed| reg.make(&adversary, AdversaryOpts { arg: None, seed: Some(run_seed) }),
        runs as usize,
        seed,
        max_steps,
        n_max,
    )?;
    let stats = with_bounds(stats, &cfg);
    match format {
        Format::Text => {
            println!(
                "runs: {}  elected0: {}  elected1: {}  undecided: {}  disagreement: {}",
                stats.runs, stats.elected0, stats.elected1, stats.undecided, stats.disagreement
            );
            println!(
                "electionRate: {:.4}  meanDraws: {:.3}  stepBudgetHits: {}",
                stats.election_rate(),
                stats.mean_draws,
                stats.step_budget_hits
            );
            println!("{:>3} {:>7} {:>9} {:>9} {:>9} {:>11} {:>9}", "n", "count", "fraction", "bound", "sigma", "alternated", "expected");
            for r in &stats.rows {
                println!(
                    "{:>3} {:>7} {:>9.4} {:>9.4} {:>9.4} {:>11.4} {:>9.4}",
                    r.n, r.at_least, r.fraction, r.bound, r.sigma, r.alternated, r.alternated_expected
                );
            }
        }
        Format::Json => println!(
            "{}",
            json!({
                "runs": stats.runs,
                "elected0": stats.elected0,
                "elected1": stats.elected1,
                "undecided": stats.undecided,
                "disagreement": stats.disagreement,
                "stepBudgetHits": stats.step_budget_hits,
                "electionRate": stats.election_rate(),
                "meanDraws": stats.mean_draws,
                "rows": stats.rows.iter().map(|r| json!({
                    "n": r.n,
                    "count": r.at_least,
                    "fraction": r.fraction,
                    "bound": r.bound,
                    "sigma": r.sigma,
                    "alternated": r.alternated,
                    "alternatedExpected": r.alternated_expected,
                    "alternatedSigma": r.alternated_sigma,
                })).collect::<Vec<_>>(),
            })
        ),
    }
    Ok(())
}

/// Parses the process arguments and runs one command; returns the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Parse { file, format } => cmd_parse(file, format),
        Cmd::Groups { file, mode, format } => cmd_groups(file, mode, format),
        Cmd::Run { file, adversary, seed, max_steps, mode, format } => {
            cmd_run(file, adversary, seed, max_steps, mode, format)
        }
        Cmd::Analyze { file, event, depth, objective, mode, max_states, format } => {
            cmd_analyze(file, event, depth, objective, mode, max_states, format)
        }
        Cmd::Election { epsilon, adversary, runs, seed, max_steps, n_max, guarded, format } => {
            cmd_election(epsilon, adversary, runs, seed, max_steps, n_max, guarded, format)
        }
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

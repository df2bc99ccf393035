//! Randomized two-process leader election.
//!
//! Two symmetric processes share two restricted channels `x0`, `x1`, each
//! initially carrying a token `t`. A process blindly commits to one channel
//! (a fair coin, recorded as an internal move labeled `draw(i,j)`), reads it,
//! and on `t` tries to grab the other channel too; holding both it announces
//! itself leader on the free channels `o0`, `o1` and releases `f` so the
//! peer learns it lost. A small ε-branch undoes a blocked attempt. A
//! variant replaces the blind commitment by input-guarded choice, which a
//! hostile scheduler can starve forever.

use crate::automaton::ProbAutomaton;
use crate::measure::{announce_step, election_status};
use crate::scheduler::{simulate, Adversary, SchedError, StopReason};
use crate::term::{
    rat, Action, Branch, Lit, Name, Prefix, Process, ProcessId, Rat,
};
use num::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ElectionError {
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    BadEpsilon(String),
    #[error("blind split must lie strictly between 0 and 1, got {0}")]
    BadSplit(String),
    #[error(transparent)]
    Sched(#[from] SchedError),
}

#[derive(Clone, Debug)]
pub struct ElectionConfig {
    /// Probability of undoing a blocked leadership attempt.
    pub epsilon: Rat,
    /// Probability of committing to one's own channel; 1/2 is optimal.
    pub blind_split: Rat,
}

impl Default for ElectionConfig {
    fn default() -> Self {
        ElectionConfig { epsilon: rat(1, 10), blind_split: rat(1, 2) }
    }
}

impl ElectionConfig {
    pub fn validate(&self) -> Result<(), ElectionError> {
        let (zero, one) = (rat(0, 1), rat(1, 1));
        if self.epsilon <= zero || self.epsilon >= one {
            return Err(ElectionError::BadEpsilon(self.epsilon.to_string()));
        }
        if self.blind_split <= zero || self.blind_split >= one {
            return Err(ElectionError::BadSplit(self.blind_split.to_string()));
        }
        Ok(())
    }
}

fn x(i: usize) -> Name {
    Name::id(&format!("x{i}"))
}

fn o(i: usize) -> Name {
    Name::id(&format!("o{i}"))
}

fn leader_lit(i: usize) -> Name {
    Name::Lit(if i == 0 { Lit::Zero } else { Lit::One })
}

fn guard1(prefix: Prefix, cont: Process) -> Process {
    Process::Sum(vec![Branch { prob: rat(1, 1), prefix, cont }])
}

/// The continuation of process `i` after committing to channel `j`: read
/// `j`; on `t`, either grab the other channel and announce leadership
/// (releasing `f` on `j`), or with probability ε put the token back and
/// start over; on `f`, announce the peer.
fn committed_body(cfg: &ElectionConfig, i: usize, j: usize, pid: &ProcessId) -> Process {
    let win = Process::par(
        Process::Output(o(i), leader_lit(i)),
        Process::Output(x(j), Name::Lit(Lit::False)),
    );
    let retry = Process::par(
        Process::Output(x(j), Name::Lit(Lit::True)),
        Process::Var(pid.clone()),
    );
    let inner = Process::Sum(vec![
        Branch {
            prob: rat(1, 1) - cfg.epsilon.clone(),
            prefix: Prefix::Input(x(j ^ 1), Name::id("c")),
            cont: win,
        },
        Branch { prob: cfg.epsilon.clone(), prefix: Prefix::Tau(None), cont: retry },
    ]);
    let lose = Process::Output(o(i), leader_lit(i ^ 1));
    Process::If(Name::id("b"), Box::new(inner), Box::new(lose))
}

fn process_body(cfg: &ElectionConfig, i: usize, blind: bool) -> Process {
    let pid = ProcessId(format!("X{i}"));
    let branch = |j: usize, prob: Rat| {
        let after_read = committed_body(cfg, i, j, &pid);
        if blind {
            Branch {
                prob,
                prefix: Prefix::Tau(Some(format!("draw({i},{j})"))),
                cont: guard1(Prefix::Input(x(j), Name::id("b")), after_read),
            }
        } else {
            Branch { prob, prefix: Prefix::Input(x(j), Name::id("b")), cont: after_read }
        }
    };
    let rec = Process::Rec(
        pid.clone(),
        Box::new(Process::Sum(vec![
            branch(i, cfg.blind_split.clone()),
            branch(i ^ 1, rat(1, 1) - cfg.blind_split.clone()),
        ])),
    );
    Process::par(Process::Output(x(i), Name::Lit(Lit::True)), rec)
}

/// The full network: both channels restricted, each carrying an initial
/// token, announcements on free `o0`/`o1`.
pub fn build_network(cfg: &ElectionConfig) -> Result<Process, ElectionError> {
    cfg.validate()?;
    Ok(Process::res(
        x(0),
        Process::res(x(1), Process::par(process_body(cfg, 0, true), process_body(cfg, 1, true))),
    ))
}

/// The input-guarded variant: the commitment coin is fused with the first
/// read, so a scheduler can starve the election forever.
pub fn guarded_variant(cfg: &ElectionConfig) -> Result<Process, ElectionError> {
    cfg.validate()?;
    Ok(Process::res(
        x(0),
        Process::res(x(1), Process::par(process_body(cfg, 0, false), process_body(cfg, 1, false))),
    ))
}

/// `(process, channel)` of one random commitment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Draw {
    pub process: u8,
    pub channel: u8,
}

/// Reads the `draw(i,j)` labels off an action sequence, in order.
pub fn extract_draws(actions: &[Action]) -> Vec<Draw> {
    actions
        .iter()
        .filter_map(|a| match a {
            Action::Tau(Some(l)) => {
                let body = l.strip_prefix("draw(")?.strip_suffix(')')?;
                let (i, j) = body.split_once(',')?;
                Some(Draw {
                    process: i.trim().parse().ok()?,
                    channel: j.trim().parse().ok()?,
                })
            }
            _ => None,
        })
        .collect()
}

/// A draw sequence is alternated when each draw either repeats its
/// predecessor or flips both the process and the channel.
pub fn is_alternated(draws: &[Draw]) -> bool {
    draws.windows(2).all(|w| {
        let (d, e) = (w[0], w[1]);
        (e.process == d.process && e.channel == d.channel)
            || (e.process == d.process ^ 1 && e.channel == d.channel ^ 1)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElectionOutcome {
    /// Both announcement channels agree on this leader.
    Elected { leader: u8 },
    Undecided { draws_so_far: usize },
    /// The announcements disagree — must never happen.
    Disagreement { payloads: (String, String) },
}

/// Reads the outcome off a final state, the fired-announcement memory, and
/// the draw history.
pub fn classify(mem: u64, state: &Process, draws: &[Draw]) -> ElectionOutcome {
    match election_status(mem, state) {
        Ok(Some(lit)) => ElectionOutcome::Elected {
            leader: if lit == Lit::Zero { 0 } else { 1 },
        },
        Ok(None) => ElectionOutcome::Undecided { draws_so_far: draws.len() },
        Err(payloads) => ElectionOutcome::Disagreement { payloads },
    }
}

/// The tail bound on the probability of `n` or more draws.
pub fn draw_bound(cfg: &ElectionConfig, n: u32) -> Rat {
    if n <= 2 {
        return rat(1, 1);
    }
    let base = (rat(1, 1) + cfg.epsilon.clone()) / rat(2, 1);
    let mut b = rat(1, 1);
    for _ in 0..(n - 2) {
        b *= base.clone();
    }
    b
}

/// Per-`n` Monte Carlo statistics.
#[derive(Clone, Debug)]
pub struct NRow {
    pub n: u32,
    /// Runs with at least `n` draws.
    pub at_least: usize,
    pub fraction: f64,
    /// The tail bound for comparison.
    pub bound: f64,
    /// Binomial standard error of `fraction`.
    pub sigma: f64,
    /// Unbiased estimate of P(first `n` draws alternated): runs that broke
    /// alternation within their first `n` draws score 0; runs that ended
    /// unbroken after only `k < n` draws score the exact conditional mass
    /// 2^(k−n) of the never-flipped coins, keeping the estimator exact
    /// under every scheduler.
    pub alternated: f64,
    pub alternated_expected: f64,
    pub alternated_sigma: f64,
}

#[derive(Clone, Debug, Default)]
pub struct McStats {
    pub runs: usize,
    pub elected0: usize,
    pub elected1: usize,
    pub undecided: usize,
    pub disagreement: usize,
    /// Undecided runs that hit the step budget (subset of `undecided`).
    pub step_budget_hits: usize,
    pub mean_draws: f64,
    pub rows: Vec<NRow>,
}

impl McStats {
    pub fn election_rate(&self) -> f64 {
        (self.elected0 + self.elected1) as f64 / self.runs as f64
    }
}

struct RunRecord {
    outcome: ElectionOutcome,
    draws: Vec<Draw>,
    budget_hit: bool,
}

fn alternation_credit(draws: &[Draw], n: usize) -> f64 {
    let k = draws.len().min(n);
    if !is_alternated(&draws[..k]) {
        return 0.0;
    }
    if draws.len() >= n {
        1.0
    } else {
        // Unrealized consecutive pairs would each have survived w.p. 1/2.
        let missing = (n - 1) - k.saturating_sub(1);
        0.5f64.powi(missing as i32)
    }
}

/// Simulates `runs` independent executions of `start` and aggregates draw
/// and outcome statistics. Each run gets its own adversary instance and
/// random stream derived from `seed` and the run index, so the whole batch
/// is reproducible and order-independent under parallel execution.
pub fn monte_carlo(
    m: &ProbAutomaton,
    start: &Process,
    adv_factory: &(dyn Fn(u64) -> Result<Box<dyn Adversary>, SchedError> + Sync),
    runs: usize,
    seed: u64,
    max_steps: usize,
    n_max: u32,
) -> Result<McStats, ElectionError> {
    let records: Vec<Result<RunRecord, SchedError>> = (0..runs as u64)
        .into_par_iter()
        .map(|run| {
            let run_seed = seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(run.wrapping_mul(0xd1342543de82ef95));
            let mut adv = adv_factory(run_seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed ^ 0xa076_1d64_78bd_642f);
            let mut mem = 0u64;
            let (trace, reason) = simulate(m, adv.as_mut(), start, &mut rng, max_steps, |s, a| {
                if let Some(a) = a {
                    mem = announce_step(mem, a);
                }
                !matches!(election_status(mem, s), Ok(None))
            })?;
            let actions: Vec<Action> = trace.iter().map(|(a, _, _)| a.clone()).collect();
            let draws = extract_draws(&actions);
            let final_state = trace
                .last()
                .map(|(_, _, s)| s.clone())
                .unwrap_or_else(|| start.clone());
            Ok(RunRecord {
                outcome: classify(mem, &final_state, &draws),
                draws,
                budget_hit: reason == StopReason::StepBudget,
            })
        })
        .collect();

    let mut stats = McStats { runs, ..Default::default() };
    let mut total_draws = 0usize;
    let mut at_least = vec![0usize; (n_max + 1) as usize];
    let mut alt_sum = vec![0.0f64; (n_max + 1) as usize];
    let mut alt_sq = vec![0.0f64; (n_max + 1) as usize];
    for r in records {
        let r = r?;
        match r.outcome {
            ElectionOutcome::Elected { leader: 0 } => stats.elected0 += 1,
            ElectionOutcome::Elected { .. } => stats.elected1 += 1,
            ElectionOutcome::Undecided { .. } => stats.undecided += 1,
            ElectionOutcome::Disagreement { .. } => stats.disagreement += 1,
        }
        if r.budget_hit {
            stats.step_budget_hits += 1;
        }
        total_draws += r.draws.len();
        for n in 2..=n_max {
            if r.draws.len() >= n as usize {
                at_least[n as usize] += 1;
            }
            let c = alternation_credit(&r.draws, n as usize);
            alt_sum[n as usize] += c;
            alt_sq[n as usize] += c * c;
        }
    }
    stats.mean_draws = total_draws as f64 / runs.max(1) as f64;
    for n in 2..=n_max {
        let frac = at_least[n as usize] as f64 / runs as f64;
        let alt = alt_sum[n as usize] / runs as f64;
        let alt_var =
            (alt_sq[n as usize] / runs as f64 - alt * alt).max(0.0) / runs as f64;
        stats.rows.push(NRow {
            n,
            at_least: at_least[n as usize],
            fraction: frac,
            bound: f64::NAN, // filled in by with_bounds, which knows ε
            sigma: (frac * (1.0 - frac) / runs as f64).sqrt(),
            alternated: alt,
            alternated_expected: 0.5f64.powi(n as i32 - 1),
            alternated_sigma: alt_var.sqrt(),
        });
    }
    Ok(stats)
}

/// Fills the per-`n` tail bounds for a given configuration.
pub fn with_bounds(mut stats: McStats, cfg: &ElectionConfig) -> McStats {
    for row in &mut stats.rows {
        row.bound = draw_bound(cfg, row.n).to_f64().unwrap_or(f64::NAN);
    }
    stats
}

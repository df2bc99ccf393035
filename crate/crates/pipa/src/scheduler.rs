// Copyright 2026
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

//! Adversaries: resolvers of the nondeterministic group choice.
//!
//! An adversary sees the whole history (actions taken so far) plus the
//! current state and its available groups, and picks one group. Built-in
//! strategies live in a registry keyed by CLI token; worst- and best-case
//! quantification over *all* adversaries is realized by exhaustive backward
//! induction on the depth-truncated tree, with the optimal policy returned
//! for exact replay.

use crate::automaton::{unfold, AutomatonError, ProbAutomaton, Tree};
use crate::measure::{event_probability, Event};
use crate::pts::TransitionGroup;
use crate::term::{congruent, rat, trim_spine, Action, Name, Process, Rat};
use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchedError {
    #[error("unknown adversary {0:?}")]
    UnknownAdversary(String),
    #[error("adversary {0:?} requires a seed")]
    SeedRequired(String),
    #[error("bad script: {0}")]
    BadScript(String),
    #[error("search budget exceeded after {0} configurations")]
    BudgetExceeded(usize),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Everything an adversary may look at when choosing a group.
pub struct ChoicePoint<'a> {
    pub state: &'a Process,
    pub groups: &'a [TransitionGroup],
    /// Actions from the start of the execution to here.
    pub history: &'a [Action],
}

pub trait Adversary {
    fn name(&self) -> String;
    /// Index of the chosen group; must be `< cp.groups.len()`.
    fn choose(&mut self, cp: &ChoicePoint) -> usize;
    /// True once a scripted adversary has run past its script.
    fn exhausted(&self) -> bool {
        false
    }
}

/// Builds the fully probabilistic tree induced by `adv` from `start`.
pub fn etree(
    m: &ProbAutomaton,
    adv: &mut dyn Adversary,
    start: &Process,
    depth: usize,
) -> Result<Tree, AutomatonError> {
    unfold(m, start, depth, |state, groups, history| {
        adv.choose(&ChoicePoint { state, groups, history })
    })
}

// ---------------------------------------------------------------- builtins

/// Cycles through the available group indices.
#[derive(Default)]
pub struct RoundRobin {
    visits: usize,
}

impl Adversary for RoundRobin {
    fn name(&self) -> String {
        "round-robin".into()
    }
    fn choose(&mut self, cp: &ChoicePoint) -> usize {
        let i = self.visits % cp.groups.len();
        self.visits += 1;
        i
    }
}

/// Picks uniformly among the available groups; reproducible from the seed.
pub struct UniformRandom {
    rng: ChaCha8Rng,
}

impl UniformRandom {
    pub fn new(seed: u64) -> Self {
        UniformRandom { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Adversary for UniformRandom {
    fn name(&self) -> String {
        "uniform-random".into()
    }
    fn choose(&mut self, cp: &ChoicePoint) -> usize {
        self.rng.gen_range(0..cp.groups.len())
    }
}

/// Follows a fixed list of group indices; past the end it falls back to
/// group 0 and raises its `exhausted` flag.
pub struct Scripted {
    script: Vec<usize>,
    cursor: usize,
    exhausted: bool,
}

impl Scripted {
    pub fn new(script: Vec<usize>) -> Self {
        Scripted { script, cursor: 0, exhausted: false }
    }

    /// One group index per line; blank lines and `#` comments ignored.
    pub fn from_text(text: &str) -> Result<Self, SchedError> {
        let mut script = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            script.push(line.parse::<usize>().map_err(|_| {
                SchedError::BadScript(format!("line {}: {:?} is not an index", ln + 1, line))
            })?);
        }
        Ok(Scripted::new(script))
    }
}

impl Adversary for Scripted {
    fn name(&self) -> String {
        "scripted".into()
    }
    fn choose(&mut self, _cp: &ChoicePoint) -> usize {
        match self.script.get(self.cursor) {
            Some(&i) => {
                self.cursor += 1;
                i
            }
            None => {
                self.exhausted = true;
                0
            }
        }
    }
    fn exhausted(&self) -> bool {
        self.exhausted
    }
}

/// A group that merely forces a retry: a single certain internal move whose
/// target also appears as an entry target of some richer group at the same
/// state. Such a group is the restriction-collapsed shadow of a choice whose
/// interesting alternative is available right now; a scheduler bent on
/// progress never takes it.
pub fn is_forced_retry(groups: &[TransitionGroup], i: usize) -> bool {
    let g = &groups[i];
    if g.entries.len() != 1 || g.entries[0].prob != rat(1, 1) {
        return false;
    }
    if !matches!(g.entries[0].action, Action::Tau(_)) {
        return false;
    }
    let t = trim_spine(&g.entries[0].target);
    groups.iter().enumerate().any(|(j, h)| {
        j != i
            && h.entries.len() > 1
            && h.entries.iter().any(|e| congruent(&trim_spine(&e.target), &t))
    })
}

fn admissible_indices(groups: &[TransitionGroup]) -> Vec<usize> {
    let keep: Vec<usize> = (0..groups.len())
        .filter(|&i| !is_forced_retry(groups, i))
        .collect();
    if keep.is_empty() {
        (0..groups.len()).collect()
    } else {
        keep
    }
}

fn has_draw(g: &TransitionGroup) -> bool {
    g.entries
        .iter()
        .any(|e| matches!(&e.action, Action::Tau(Some(l)) if l.starts_with("draw")))
}

/// Does any entry of the group announce on a free `o` channel — either by
/// firing the output or by reaching a state where it is pending?
fn advances_election(g: &TransitionGroup) -> bool {
    let is_announce =
        |x: &Name| *x == Name::id("o0") || *x == Name::id("o1");
    g.entries.iter().any(|e| {
        if let Action::FreeOutput(x, _) = &e.action {
            if is_announce(x) {
                return true;
            }
        }
        let mut outs = Vec::new();
        crate::measure::pending_outputs(&e.target, &mut outs);
        outs.iter().any(|(x, _)| is_announce(x))
    })
}

fn prefer(cand: Vec<usize>, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    let kept: Vec<usize> = cand.iter().copied().filter(|&i| keep(i)).collect();
    if kept.is_empty() {
        cand
    } else {
        kept
    }
}

/// Delays the election as long as possible: avoids any group that puts an
/// announcement on the table, prefers fresh random draws, and never takes a
/// pure forced-retry group when a real alternative exists.
pub struct GreedyDelay;

impl Adversary for GreedyDelay {
    fn name(&self) -> String {
        "greedy-delay".into()
    }
    fn choose(&mut self, cp: &ChoicePoint) -> usize {
        let cand = admissible_indices(cp.groups);
        let cand = prefer(cand, |i| !advances_election(&cp.groups[i]));
        let cand = prefer(cand, |i| has_draw(&cp.groups[i]));
        cand[0]
    }
}

/// Multiset of parallel components under the outer restrictions, as
/// canonical strings.  Literal conditionals are resolved first so that a
/// component reads the same before and after the engine simplifies it.
fn component_keys(p: &Process) -> BTreeMap<String, usize> {
    fn strip(p: &Process, out: &mut Vec<Process>) {
        match p {
            Process::Res(_, body) => strip(body, out),
            Process::Par(l, r) => {
                strip(l, out);
                strip(r, out);
            }
            Process::If(Name::Lit(crate::term::Lit::True), t, _) => strip(t, out),
            Process::If(Name::Lit(crate::term::Lit::False), _, e) => strip(e, out),
            other => out.push(other.clone()),
        }
    }
    let mut comps = Vec::new();
    strip(&trim_spine(p), &mut comps);
    let mut m = BTreeMap::new();
    for c in comps {
        *m.entry(crate::automaton::state_key(&c)).or_insert(0) += 1;
    }
    m
}

/// Which of two symmetric processes a group belongs to, judged by its draw
/// labels or, failing that, by which announcement-bearing component it
/// changes.
pub fn attribute_group(state: &Process, g: &TransitionGroup) -> Option<usize> {
    for e in &g.entries {
        if let Action::Tau(Some(l)) = &e.action {
            if let Some(rest) = l.strip_prefix("draw(") {
                if let Some(i) = rest.chars().next().and_then(|c| c.to_digit(10)) {
                    return Some(i as usize);
                }
            }
        }
    }
    let before = component_keys(state);
    let probe = |chan: &str, comp_key: &str| -> bool {
        // A component mentioning the announcement channel oX belongs to
        // process X; cheap containment check on the canonical string.
        comp_key.contains(chan)
    };
    for e in &g.entries {
        let after = component_keys(&e.target);
        for (k, n) in &before {
            if after.get(k).copied().unwrap_or(0) < *n {
                if probe("o0", k) {
                    return Some(0);
                }
                if probe("o1", k) {
                    return Some(1);
                }
            }
        }
    }
    None
}

/// Does the state still carry any blind-choice tau label?  Distinguishes the
/// blind election network from its input-guarded variant.
fn has_draw_labels(p: &Process) -> bool {
    match p {
        Process::Sum(branches) => branches.iter().any(|b| {
            matches!(&b.prefix, crate::term::Prefix::Tau(Some(l)) if l.starts_with("draw"))
                || has_draw_labels(&b.cont)
        }),
        Process::Par(l, r) => has_draw_labels(l) || has_draw_labels(r),
        Process::Res(_, b) | Process::Rec(_, b) => has_draw_labels(b),
        Process::If(_, t, e) => has_draw_labels(t) || has_draw_labels(e),
        Process::Output(..) | Process::Var(_) => false,
    }
}

/// Serves the two symmetric processes in strict alternation — the hostile
/// schedule of the closing counterexample.  On the input-guarded variant a
/// draw commits a process to one channel, so serving the other process lets
/// it snatch the remaining token and both must then back out, forever.  On
/// the blind network the same activation order is harmless and the election
/// goes through.
pub struct Alternating {
    turn: usize,
}

impl Alternating {
    pub fn new() -> Self {
        Alternating { turn: 0 }
    }
}

impl Default for Alternating {
    fn default() -> Self {
        Alternating::new()
    }
}

impl Adversary for Alternating {
    fn name(&self) -> String {
        "alternating".into()
    }
    fn choose(&mut self, cp: &ChoicePoint) -> usize {
        // Guarded variant: the schedule may lean on renormalised backtracks
        // (that is the whole point of the counterexample), so consider every
        // group.  Blind network: stick to admissible groups like the other
        // strategies do.
        let guarded = !has_draw_labels(cp.state);
        let cand: Vec<usize> = if guarded {
            (0..cp.groups.len()).collect()
        } else {
            admissible_indices(cp.groups)
        };
        let owned: Vec<usize> = cand
            .iter()
            .copied()
            .filter(|&i| attribute_group(cp.state, &cp.groups[i]) == Some(self.turn))
            .collect();
        if owned.is_empty() {
            // The served process has no move of its own; let the other one
            // run without giving up the turn.
            let other: Vec<usize> = cand
                .iter()
                .copied()
                .filter(|&i| attribute_group(cp.state, &cp.groups[i]) != Some(self.turn))
                .collect();
            return other.first().copied().unwrap_or(cand[0]);
        }
        let picked = if guarded {
            // Suspend a process as soon as it has drawn; never hand it a
            // group that would put an announcement on the table when it can
            // back out instead, and let a fresh draw resolve fairly.
            let c = prefer(owned, |i| !advances_election(&cp.groups[i]));
            let c = prefer(c, |i| cp.groups[i].entries.len() > 1);
            c[0]
        } else {
            let c = prefer(owned, |i| has_draw(&cp.groups[i]));
            c[0]
        };
        self.turn ^= 1;
        picked
    }
}

// ---------------------------------------------------------------- registry

pub struct AdversaryOpts {
    /// Text after `name:` in the CLI token (script body for `scripted`).
    pub arg: Option<String>,
    pub seed: Option<u64>,
}

type Maker = Box<dyn Fn(&AdversaryOpts) -> Result<Box<dyn Adversary>, SchedError> + Sync>;

/// Name-indexed adversary constructors; strategies register once and are
/// selected by CLI token.
pub struct Registry {
    makers: BTreeMap<&'static str, Maker>,
}

impl Registry {
    pub fn builtin() -> Self {
        let mut makers: BTreeMap<&'static str, Maker> = BTreeMap::new();
        makers.insert(
            "round-robin",
            Box::new(|_| Ok(Box::new(RoundRobin { visits: 0 }) as Box<dyn Adversary>)),
        );
        makers.insert(
            "uniform-random",
            Box::new(|o| {
                let seed = o
                    .seed
                    .ok_or_else(|| SchedError::SeedRequired("uniform-random".into()))?;
                Ok(Box::new(UniformRandom::new(seed)) as Box<dyn Adversary>)
            }),
        );
        makers.insert(
            "scripted",
            Box::new(|o| {
                let text = o
                    .arg
                    .as_deref()
                    .ok_or_else(|| SchedError::BadScript("no script given".into()))?;
                Ok(Box::new(Scripted::from_text(text)?) as Box<dyn Adversary>)
            }),
        );
        makers.insert("greedy-delay", Box::new(|_| Ok(Box::new(GreedyDelay) as Box<dyn Adversary>)));
        makers.insert(
            "alternating",
            Box::new(|_| Ok(Box::new(Alternating { turn: 0 }) as Box<dyn Adversary>)),
        );
        Registry { makers }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.makers.keys().copied().collect()
    }

    /// Resolves `name` or `name:arg` tokens.
    pub fn make(&self, token: &str, opts: AdversaryOpts) -> Result<Box<dyn Adversary>, SchedError> {
        let (name, arg) = match token.split_once(':') {
            Some((n, a)) => (n, Some(a.to_string())),
            None => (token, None),
        };
        let maker = self
            .makers
            .get(name)
            .ok_or_else(|| SchedError::UnknownAdversary(token.to_string()))?;
        maker(&AdversaryOpts { arg: arg.or(opts.arg), seed: opts.seed })
    }
}

// --------------------------------------------------------------- sampling

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Deadlock,
    StepBudget,
    /// The caller's stop predicate fired.
    Stopped,
}

/// One sampled execution: the adversary resolves groups, the probabilistic
/// branch is drawn from `rng`. Returns the trace and why it ended. The stop
/// predicate is called once per state with the action that led there (`None`
/// at the start), so it can fold history incrementally.
pub fn simulate<R: Rng>(
    m: &ProbAutomaton,
    adv: &mut dyn Adversary,
    start: &Process,
    rng: &mut R,
    max_steps: usize,
    mut stop: impl FnMut(&Process, Option<&Action>) -> bool,
) -> Result<(Vec<(Action, Rat, Process)>, StopReason), SchedError> {
    let mut state = trim_spine(start);
    let mut trace: Vec<(Action, Rat, Process)> = Vec::new();
    let mut history: Vec<Action> = Vec::new();
    loop {
        if stop(&state, history.last()) {
            return Ok((trace, StopReason::Stopped));
        }
        if trace.len() >= max_steps {
            return Ok((trace, StopReason::StepBudget));
        }
        let groups = m.groups_of(&state)?;
        if groups.is_empty() {
            return Ok((trace, StopReason::Deadlock));
        }
        let pick = adv.choose(&ChoicePoint { state: &state, groups: &groups, history: &history });
        if pick >= groups.len() {
            return Err(AutomatonError::AdversaryRange { index: pick, available: groups.len() }
                .into());
        }
        let g = &groups[pick];
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = g.entries.last().expect("nonempty group");
        for e in &g.entries {
            acc += e.prob.to_f64().unwrap_or(0.0);
            if r < acc {
                chosen = e;
                break;
            }
        }
        state = trim_spine(&chosen.target);
        history.push(chosen.action.clone());
        trace.push((chosen.action.clone(), chosen.prob.clone(), state.clone()));
    }
}

// ----------------------------------------------------------------- search

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Max,
    Min,
}

type ConfigKey = (String, u64, usize);

/// Outcome of exhaustive adversary quantification at a truncated horizon.
/// Open leaves are scored 0 for the lower and 1 for the upper bound, so the
/// true infinite-horizon optimum lies in `[lower, upper]`.
pub struct SearchResult {
    pub objective: Objective,
    pub lower: Rat,
    pub upper: Rat,
    /// Group choices certifying `lower` / `upper`, keyed by
    /// (state, event memory, remaining depth).
    pub policy_lower: HashMap<ConfigKey, usize>,
    pub policy_upper: HashMap<ConfigKey, usize>,
    pub configs: usize,
}

/// Backward induction over all adversaries for a prefix-monotone event.
pub fn search(
    m: &ProbAutomaton,
    start: &Process,
    event: &dyn Event,
    depth: usize,
    objective: Objective,
    max_configs: usize,
) -> Result<SearchResult, SchedError> {
    let mut s = Searcher {
        m,
        event,
        objective,
        memo: HashMap::new(),
        policy_lower: HashMap::new(),
        policy_upper: HashMap::new(),
        max_configs,
    };
    let (lower, upper) = s.value(&trim_spine(start), event.init(), depth)?;
    Ok(SearchResult {
        objective,
        lower,
        upper,
        policy_lower: s.policy_lower,
        policy_upper: s.policy_upper,
        configs: s.memo.len(),
    })
}

struct Searcher<'a> {
    m: &'a ProbAutomaton,
    event: &'a dyn Event,
    objective: Objective,
    memo: HashMap<ConfigKey, (Rat, Rat)>,
    policy_lower: HashMap<ConfigKey, usize>,
    policy_upper: HashMap<ConfigKey, usize>,
    max_configs: usize,
}

impl Searcher<'_> {
    fn value(&mut self, state: &Process, mem: u64, remaining: usize) -> Result<(Rat, Rat), SchedError> {
        let key = (crate::automaton::state_key(state), mem, remaining);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        if self.memo.len() >= self.max_configs {
            return Err(SchedError::BudgetExceeded(self.memo.len()));
        }
        // Reserve the slot to keep the budget check monotone; overwritten
        // below. Cycles cannot occur because `remaining` decreases.
        self.memo.insert(key.clone(), (rat(0, 1), rat(1, 1)));
        let groups = self.m.groups_of(state)?;
        let deadlocked = groups.is_empty();
        let v = if self.event.holds(mem, state, deadlocked) {
            (rat(1, 1), rat(1, 1))
        } else if deadlocked {
            (rat(0, 1), rat(0, 1))
        } else if remaining == 0 {
            (rat(0, 1), rat(1, 1))
        } else {
            let mut best: Option<(Rat, Rat)> = None;
            for (gi, g) in groups.iter().enumerate() {
                let mut lo = rat(0, 1);
                let mut hi = rat(0, 1);
                for e in g.entries.iter() {
                    let mem2 = self.event.step(mem, &e.action);
                    let (l, h) = self.value(&trim_spine(&e.target), mem2, remaining - 1)?;
                    lo += e.prob.clone() * l;
                    hi += e.prob.clone() * h;
                }
                let better = |new: &Rat, old: &Rat| match self.objective {
                    Objective::Max => new > old,
                    Objective::Min => new < old,
                };
                match &mut best {
                    None => {
                        best = Some((lo, hi));
                        self.policy_lower.insert(key.clone(), gi);
                        self.policy_upper.insert(key.clone(), gi);
                    }
                    Some((bl, bh)) => {
                        if better(&lo, bl) {
                            *bl = lo;
                            self.policy_lower.insert(key.clone(), gi);
                        }
                        if better(&hi, bh) {
                            *bh = hi;
                            self.policy_upper.insert(key.clone(), gi);
                        }
                    }
                }
            }
            best.expect("nonempty groups")
        };
        self.memo.insert(key, v.clone());
        Ok(v)
    }
}

/// Replays a search policy as an adversary; recomputes the event memory from
/// the history so it is sound in tree traversals too.
pub struct PolicyAdversary<'a> {
    pub policy: &'a HashMap<ConfigKey, usize>,
    pub event: &'a dyn Event,
    pub depth: usize,
}

impl Adversary for PolicyAdversary<'_> {
    fn name(&self) -> String {
        "policy".into()
    }
    fn choose(&mut self, cp: &ChoicePoint) -> usize {
        let mem = cp
            .history
            .iter()
            .fold(self.event.init(), |m, a| self.event.step(m, a));
        let remaining = self.depth.saturating_sub(cp.history.len());
        let key = (crate::automaton::state_key(cp.state), mem, remaining);
        self.policy.get(&key).copied().unwrap_or(0)
    }
}

/// Exact probability of `event` under a given adversary, by building the
/// pruned tree and measuring: returns (lower, upper).
pub fn adversary_value(
    m: &ProbAutomaton,
    adv: &mut dyn Adversary,
    start: &Process,
    event: &dyn Event,
    depth: usize,
) -> Result<(Rat, Rat), SchedError> {
    let t = etree(m, adv, start, depth)?;
    let em = event_probability(&t, event);
    Ok((em.lower, em.upper))
}

/// Registry tokens in registry order.
pub const BUILTIN_NAMES: [&str; 5] =
    ["alternating", "greedy-delay", "round-robin", "scripted", "uniform-random"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{parse_event, Always, DeadlockReached};
    use crate::parser::parse;
    use crate::pts::RuleMode;

    const LOOP: &str = "new x in (rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!y)";

    #[test]
    fn round_robin_cycles() {
        let mut a = RoundRobin { visits: 0 };
        let gs = vec![
            TransitionGroup { entries: vec![] },
            TransitionGroup { entries: vec![] },
            TransitionGroup { entries: vec![] },
        ];
        let st = Process::nil();
        let picks: Vec<usize> = (0..4)
            .map(|_| a.choose(&ChoicePoint { state: &st, groups: &gs, history: &[] }))
            .collect();
        assert_eq!(picks, vec![0, 1, 2, 0]);
    }

    #[test]
    fn uniform_random_reproducible() {
        let gs: Vec<TransitionGroup> =
            (0..5).map(|_| TransitionGroup { entries: vec![] }).collect();
        let st = Process::nil();
        let run = |seed| {
            let mut a = UniformRandom::new(seed);
            (0..20)
                .map(|_| a.choose(&ChoicePoint { state: &st, groups: &gs, history: &[] }))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn scripted_falls_back_and_flags() {
        let mut a = Scripted::from_text("1\n# comment\n0\n").unwrap();
        let gs: Vec<TransitionGroup> =
            (0..2).map(|_| TransitionGroup { entries: vec![] }).collect();
        let st = Process::nil();
        let cp = |_: ()| ChoicePoint { state: &st, groups: &gs, history: &[] };
        assert_eq!(a.choose(&cp(())), 1);
        assert_eq!(a.choose(&cp(())), 0);
        assert!(!a.exhausted());
        assert_eq!(a.choose(&cp(())), 0);
        assert!(a.exhausted());
        assert!(Scripted::from_text("zap").is_err());
    }

    #[test]
    fn registry_resolves_builtins() {
        let reg = Registry::builtin();
        assert_eq!(reg.names(), BUILTIN_NAMES.to_vec());
        assert!(reg
            .make("round-robin", AdversaryOpts { arg: None, seed: None })
            .is_ok());
        assert!(matches!(
            reg.make("uniform-random", AdversaryOpts { arg: None, seed: None }),
            Err(SchedError::SeedRequired(_))
        ));
        assert!(matches!(
            reg.make("nope", AdversaryOpts { arg: None, seed: None }),
            Err(SchedError::UnknownAdversary(_))
        ));
    }

    #[test]
    fn search_trivial_cases() {
        let m = ProbAutomaton::from_rules(RuleMode::Standard);
        let p = parse(LOOP).unwrap();
        // Always-true: value 1 under both objectives.
        for obj in [Objective::Max, Objective::Min] {
            let r = search(&m, &p, &Always, 3, obj, 10_000).unwrap();
            assert_eq!((r.lower, r.upper), (rat(1, 1), rat(1, 1)));
        }
        // Deadlock on 0 at depth 0: certain.
        let r = search(&m, &Process::nil(), &DeadlockReached, 0, Objective::Max, 10).unwrap();
        assert_eq!((r.lower, r.upper), (rat(1, 1), rat(1, 1)));
    }

    #[test]
    fn search_bounds_bracket_builtins_and_replay_matches() {
        let m = ProbAutomaton::from_rules(RuleMode::Standard);
        let p = parse(LOOP).unwrap();
        let ev = parse_event("deadlock").unwrap();
        let depth = 6;
        let max = search(&m, &p, ev.as_ref(), depth, Objective::Max, 100_000).unwrap();
        let min = search(&m, &p, ev.as_ref(), depth, Objective::Min, 100_000).unwrap();
        // The mixed group deadlocks with mass 1 - 2^-depth; the retry group
        // never does.
        assert_eq!(max.lower, rat(1, 1) - rat(1, 64));
        assert_eq!(min.lower, rat(0, 1));
        // Replay of the lower-certifying policy reproduces the exact value.
        let mut pa = PolicyAdversary { policy: &max.policy_lower, event: ev.as_ref(), depth };
        let (lo, _hi) = adversary_value(&m, &mut pa, &p, ev.as_ref(), depth).unwrap();
        assert_eq!(lo, max.lower);
        // Every builtin's exact value lies between min and max.
        let reg = Registry::builtin();
        for name in ["round-robin", "greedy-delay", "alternating"] {
            let mut adv = reg.make(name, AdversaryOpts { arg: None, seed: None }).unwrap();
            let (lo, _) = adversary_value(&m, adv.as_mut(), &p, ev.as_ref(), depth).unwrap();
            assert!(min.lower <= lo && lo <= max.lower, "{name}: {lo}");
        }
    }

    #[test]
    fn forced_retry_detection() {
        let p = parse(LOOP).unwrap();
        let gs = crate::pts::transition_groups(&p, RuleMode::Standard).unwrap();
        let retry: Vec<bool> = (0..gs.len()).map(|i| is_forced_retry(&gs, i)).collect();
        // Exactly the singleton self-loop group is flagged.
        assert_eq!(retry.iter().filter(|&&b| b).count(), 1);
        let flagged = retry.iter().position(|&b| b).unwrap();
        assert_eq!(gs[flagged].entries.len(), 1);
    }

    #[test]
    fn simulate_terminates_and_respects_budget() {
        let m = ProbAutomaton::from_rules(RuleMode::Standard);
        let p = parse(LOOP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut adv = GreedyDelay;
        let (trace, reason) =
            simulate(&m, &mut adv, &p, &mut rng, 10_000, |_, _| false).unwrap();
        assert_eq!(reason, StopReason::Deadlock);
        assert!(!trace.is_empty());
        let (trace, reason) = simulate(&m, &mut adv, &p, &mut rng, 0, |_, _| false).unwrap();
        assert_eq!(reason, StopReason::StepBudget);
        assert!(trace.is_empty());
    }
}

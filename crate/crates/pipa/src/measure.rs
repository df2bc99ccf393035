// Copyright 2026
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

//! The cone-based probability measure on executions.
//!
//! The basic measurable sets are *cones*: all executions extending a finite
//! fragment. Events are prefix-monotone predicates (once satisfied on a
//! prefix, satisfied on every extension), so the minimal satisfying prefixes
//! of a truncated execution tree form a disjoint cone cover and give an exact
//! lower bound; open leaves that have not yet decided the event account for
//! the gap to the upper bound. All arithmetic is exact rational.

use crate::automaton::{ExecutionFragment, NodeKind, Tree};
use crate::pretty::pp_action;
use crate::term::{rat, Action, Lit, Name, Process, Rat};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("cones {0} and {1} are not disjoint (one prefixes the other)")]
    NotDisjoint(usize, usize),
    #[error("unknown event {0:?}")]
    UnknownEvent(String),
}

/// The set of executions extending a finite prefix.
#[derive(Clone, Debug)]
pub struct Cone {
    pub prefix: ExecutionFragment,
}

impl Cone {
    /// pb of the cone = pb of its prefix.
    pub fn pb(&self) -> Rat {
        self.prefix.prob()
    }
}

/// Product of step probabilities; 1 for the empty fragment.
pub fn pb_fragment(x: &ExecutionFragment) -> Rat {
    x.prob()
}

/// Probability of a disjoint union of cones. Disjointness is checked as
/// prefix-freeness of the underlying `(action, state)` sequences: no two
/// equal, neither a prefix of the other.
pub fn disjoint_union_pb(cones: &[Cone]) -> Result<Rat, MeasureError> {
    let key = |f: &ExecutionFragment| -> Vec<(Action, Process)> {
        f.actions.iter().cloned().zip(f.states.iter().cloned()).collect()
    };
    let keys: Vec<_> = cones.iter().map(|c| key(&c.prefix)).collect();
    for i in 0..keys.len() {
        for j in (i + 1)..keys.len() {
            let n = keys[i].len().min(keys[j].len());
            if keys[i][..n] == keys[j][..n] {
                return Err(MeasureError::NotDisjoint(i, j));
            }
        }
    }
    Ok(cones.iter().map(Cone::pb).sum())
}

/// Complement with respect to the whole space.
pub fn complement_pb(p: &Rat) -> Rat {
    rat(1, 1) - p.clone()
}

/// A prefix-monotone event over executions. Implementations carry their
/// history digest in a small integer memory threaded along the path; `holds`
/// may additionally inspect the current state and whether it is deadlocked.
pub trait Event: Sync {
    fn name(&self) -> String;
    fn init(&self) -> u64;
    fn step(&self, mem: u64, action: &Action) -> u64;
    fn holds(&self, mem: u64, state: &Process, deadlocked: bool) -> bool;
}

/// Trivially true everywhere.
pub struct Always;

impl Event for Always {
    fn name(&self) -> String {
        "always".into()
    }
    fn init(&self) -> u64 {
        0
    }
    fn step(&self, mem: u64, _: &Action) -> u64 {
        mem
    }
    fn holds(&self, _: u64, _: &Process, _: bool) -> bool {
        true
    }
}

/// The run reaches a state with no transition groups.
pub struct DeadlockReached;

impl Event for DeadlockReached {
    fn name(&self) -> String {
        "deadlock".into()
    }
    fn init(&self) -> u64 {
        0
    }
    fn step(&self, mem: u64, _: &Action) -> u64 {
        mem
    }
    fn holds(&self, _: u64, _: &Process, deadlocked: bool) -> bool {
        deadlocked
    }
}

/// Some action along the run renders to the pattern (a trailing `*` matches
/// any suffix).
pub struct ActionOccurs {
    pub pattern: String,
}

impl ActionOccurs {
    fn matches(&self, a: &Action) -> bool {
        let s = pp_action(a);
        match self.pattern.strip_suffix('*') {
            Some(pre) => s.starts_with(pre),
            None => s == self.pattern,
        }
    }
}

impl Event for ActionOccurs {
    fn name(&self) -> String {
        format!("action:{}", self.pattern)
    }
    fn init(&self) -> u64 {
        0
    }
    fn step(&self, mem: u64, action: &Action) -> u64 {
        if mem == 1 || self.matches(action) {
            1
        } else {
            0
        }
    }
    fn holds(&self, mem: u64, _: &Process, _: bool) -> bool {
        mem == 1
    }
}

/// Unguarded free outputs of the process, seen through restrictions and
/// parallel composition.
pub fn pending_outputs(p: &Process, out: &mut Vec<(Name, Name)>) {
    match p {
        Process::Output(x, y) => out.push((x.clone(), y.clone())),
        Process::Par(l, r) => {
            pending_outputs(l, out);
            pending_outputs(r, out);
        }
        Process::Res(n, body) => {
            let mut inner = Vec::new();
            pending_outputs(body, &mut inner);
            out.extend(inner.into_iter().filter(|(x, y)| x != n && y != n));
        }
        _ => {}
    }
}

/// Both announcement channels emitted (or still offer) an output with the
/// same payload. A fired announcement is gone from the state, so the memory
/// records announcements seen as actions; either source counts.
pub struct LeaderElected;

/// Announcement memory: bit 0/2 = o0/o1 seen, bit 1/3 = its payload.
pub fn announce_step(mem: u64, action: &Action) -> u64 {
    let Action::FreeOutput(x, y) = action else { return mem };
    let bit = match y {
        Name::Lit(Lit::Zero) => 0,
        Name::Lit(Lit::One) => 1,
        _ => return mem,
    };
    if *x == Name::id("o0") {
        mem | 1 | (bit << 1)
    } else if *x == Name::id("o1") {
        mem | 4 | (bit << 3)
    } else {
        mem
    }
}

/// Returns the agreed leader announced on `o0`/`o1` — whether already fired
/// (per `mem`) or still pending in the state; `Err` carries the two payloads
/// on disagreement.
pub fn election_status(mem: u64, state: &Process) -> Result<Option<Lit>, (String, String)> {
    let mut outs = Vec::new();
    pending_outputs(state, &mut outs);
    let pending = |chan: &str| {
        outs.iter()
            .find(|(x, _)| *x == Name::id(chan))
            .and_then(|(_, y)| match y {
                Name::Lit(l) => Some(*l),
                _ => None,
            })
    };
    let fired = |seen: u64, payload: u64| {
        if mem & seen != 0 {
            Some(if mem & payload != 0 { Lit::One } else { Lit::Zero })
        } else {
            None
        }
    };
    let o0 = fired(1, 2).or_else(|| pending("o0"));
    let o1 = fired(4, 8).or_else(|| pending("o1"));
    match (o0, o1) {
        (Some(a), Some(b)) if a == b => Ok(Some(a)),
        (Some(a), Some(b)) => Err((a.text().to_string(), b.text().to_string())),
        _ => Ok(None),
    }
}

impl Event for LeaderElected {
    fn name(&self) -> String {
        "leader-elected".into()
    }
    fn init(&self) -> u64 {
        0
    }
    fn step(&self, mem: u64, action: &Action) -> u64 {
        announce_step(mem, action)
    }
    fn holds(&self, mem: u64, state: &Process, _: bool) -> bool {
        matches!(election_status(mem, state), Ok(Some(_)))
    }
}

/// At least `n` internal moves labeled `draw(..)` have occurred.
pub struct DrawsAtLeast {
    pub n: u64,
}

impl Event for DrawsAtLeast {
    fn name(&self) -> String {
        format!("draws-at-least:{}", self.n)
    }
    fn init(&self) -> u64 {
        0
    }
    fn step(&self, mem: u64, action: &Action) -> u64 {
        match action {
            Action::Tau(Some(l)) if l.starts_with("draw") => mem.saturating_add(1),
            _ => mem,
        }
    }
    fn holds(&self, mem: u64, _: &Process, _: bool) -> bool {
        mem >= self.n
    }
}

/// Resolves an event token: `always`, `deadlock`, `leader-elected`,
/// `draws-at-least:N`, `action:PATTERN`.
pub fn parse_event(token: &str) -> Result<Box<dyn Event>, MeasureError> {
    match token {
        "always" => Ok(Box::new(Always)),
        "deadlock" => Ok(Box::new(DeadlockReached)),
        "leader-elected" => Ok(Box::new(LeaderElected)),
        _ => {
            if let Some(n) = token.strip_prefix("draws-at-least:") {
                let n = n
                    .parse::<u64>()
                    .map_err(|_| MeasureError::UnknownEvent(token.to_string()))?;
                Ok(Box::new(DrawsAtLeast { n }))
            } else if let Some(pat) = token.strip_prefix("action:") {
                Ok(Box::new(ActionOccurs { pattern: pat.to_string() }))
            } else {
                Err(MeasureError::UnknownEvent(token.to_string()))
            }
        }
    }
}

/// Exact measurement of a prefix-monotone event on a truncated tree.
pub struct EventMeasure {
    /// Mass of the minimal satisfying prefixes (a disjoint cone set).
    pub lower: Rat,
    /// `lower` plus the mass of open leaves that have not decided the event.
    pub upper: Rat,
    /// Mass of closed executions that never satisfy the event.
    pub falsified: Rat,
    /// Mass of undecided open leaves (= upper − lower).
    pub undecided: Rat,
    /// The minimal satisfying prefixes.
    pub cones: Vec<Cone>,
}

/// Walks a truncated tree and measures `e` exactly, pruning below the
/// minimal satisfying prefixes (monotonicity makes descending pointless).
pub fn event_probability(t: &Tree, e: &dyn Event) -> EventMeasure {
    let mut m = EventMeasure {
        lower: rat(0, 1),
        upper: rat(0, 1),
        falsified: rat(0, 1),
        undecided: rat(0, 1),
        cones: Vec::new(),
    };
    walk(t, 0, e.init(), e, &mut m);
    m.upper = m.lower.clone() + m.undecided.clone();
    m
}

fn walk(t: &Tree, idx: usize, mem: u64, e: &dyn Event, m: &mut EventMeasure) {
    let node = &t.nodes[idx];
    let deadlocked = node.kind == NodeKind::DeadlockLeaf;
    if e.holds(mem, &node.state, deadlocked) {
        m.lower += t.path_prob(idx);
        m.cones.push(Cone {
            prefix: ExecutionFragment {
                actions: t.path_actions(idx),
                steps: t.path_steps(idx),
                states: t.path_states(idx),
                open: node.kind == NodeKind::DepthLeaf,
                leaf_state: node.state.clone(),
            },
        });
        return;
    }
    match node.kind {
        NodeKind::Internal => {
            for &c in &node.children {
                let (_, a, _) = t.nodes[c].parent.as_ref().expect("child has parent");
                walk(t, c, e.step(mem, a), e, m);
            }
        }
        NodeKind::DeadlockLeaf => m.falsified += t.path_prob(idx),
        NodeKind::DepthLeaf => m.undecided += t.path_prob(idx),
    }
}

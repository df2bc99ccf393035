// Copyright 2026
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

//! Probabilistic transition-group semantics.
//!
//! A state offers a *set of transition groups*; picking a group is the
//! scheduler's (nondeterministic) move, while the entries inside one group
//! form a probability distribution over `(action, next state)` pairs.
//!
//! Communication is closed under commutativity and associativity of `|`:
//! groups of a parallel composition are computed over the flattened multiset
//! of components, merging any pending output into any group derivable from
//! the remaining components. Recursion is unfolded once, on demand, and
//! alpha-conversion is applied eagerly wherever a side condition requires
//! bound names to be distinct from free ones.

use crate::pretty::{pp, pp_action};
use crate::term::{
    canonical_labeled, free_names, fresh_name, rat, substitute, trim_spine, unfold_rec, Action,
    Branch, Lit, Name, Prefix, Process, Rat,
};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

/// Which communication rule family to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleMode {
    /// Keep non-matching branches alongside the pending output.
    Standard,
    /// Communication wins: only matching input branches survive, renormalized.
    ComPrime,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub prob: Rat,
    pub action: Action,
    pub target: Process,
}

/// One probability distribution over `(action, target)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGroup {
    pub entries: Vec<Entry>,
}

impl TransitionGroup {
    /// Total probability mass; 1 for every well-formed group.
    pub fn mass(&self) -> Rat {
        self.entries.iter().map(|e| e.prob.clone()).sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PtsError {
    #[error("conditional with non-literal condition {0:?} in active position")]
    StuckConditional(String),
}

/// Key identifying an entry up to alpha-conversion of its bound name jointly
/// with the target; used for merging and deterministic ordering.
fn entry_key(e: &Entry) -> (String, String) {
    let marker = Name::Id("#bound".to_string());
    let (action_str, target) = match &e.action {
        Action::Input(x, z) => (
            format!("{}?(#bound)", x.text()),
            substitute(&e.target, &marker, z),
        ),
        Action::BoundOutput(x, z) => (
            format!("{}!(#bound)", x.text()),
            substitute(&e.target, &marker, z),
        ),
        a => (pp_action(a), e.target.clone()),
    };
    (action_str, pp(&canonical_labeled(&target)))
}

/// Sorts entries deterministically and merges duplicates (same action up to
/// alpha, congruent target) by summing their probabilities.
fn normalize_group(mut entries: Vec<Entry>) -> TransitionGroup {
    let mut keyed: Vec<((String, String), Entry)> =
        entries.drain(..).map(|e| (entry_key(&e), e)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.prob.cmp(&b.1.prob)));
    let mut out: Vec<((String, String), Entry)> = Vec::new();
    for (k, e) in keyed {
        match out.last_mut() {
            Some((lk, le)) if *lk == k => le.prob += e.prob,
            _ => out.push((k, e)),
        }
    }
    TransitionGroup { entries: out.into_iter().map(|(_, e)| e).collect() }
}

fn group_key(g: &TransitionGroup) -> Vec<(String, String, String)> {
    g.entries
        .iter()
        .map(|e| {
            let (a, t) = entry_key(e);
            (a, t, e.prob.to_string())
        })
        .collect()
}

fn dedup_and_sort(groups: Vec<TransitionGroup>) -> Vec<TransitionGroup> {
    let mut keyed: Vec<(Vec<(String, String, String)>, TransitionGroup)> =
        groups.into_iter().map(|g| (group_key(&g), g)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    keyed.into_iter().map(|(_, g)| g).collect()
}

/// The multiset rule for probabilistic choice: branches become one group,
/// entries with identical guard and congruent continuation are summed.
pub fn sum_group(branches: &[Branch]) -> TransitionGroup {
    let entries = branches
        .iter()
        .map(|b| Entry {
            prob: b.prob.clone(),
            action: match &b.prefix {
                Prefix::Input(x, f) => Action::Input(x.clone(), f.clone()),
                Prefix::Tau(l) => Action::Tau(l.clone()),
            },
            target: b.cont.clone(),
        })
        .collect();
    normalize_group(entries)
}

/// Restriction of a group under `new y`: entries whose bound name collides
/// with `y` are alpha-renamed first, entries mentioning `y` free are dropped,
/// the survivors are renormalized and their targets wrapped in the
/// restriction. Returns `None` when nothing survives.
pub fn res_renormalize(group: &TransitionGroup, y: &Name) -> Option<TransitionGroup> {
    let mut kept: Vec<Entry> = Vec::new();
    for e in &group.entries {
        let e = if e.action.bound_name() == Some(y) {
            // Rename the bound name of the label away from the restricted one.
            let mut avoid = free_names(&e.target);
            avoid.extend(e.action.free_names());
            avoid.insert(y.clone());
            let y2 = fresh_name(y, &avoid);
            let action = match &e.action {
                Action::Input(x, _) => Action::Input(x.clone(), y2.clone()),
                Action::BoundOutput(x, _) => Action::BoundOutput(x.clone(), y2.clone()),
                a => a.clone(),
            };
            Entry { prob: e.prob.clone(), action, target: substitute(&e.target, &y2, y) }
        } else {
            e.clone()
        };
        if !e.action.free_names().contains(y) {
            kept.push(e);
        }
    }
    if kept.is_empty() {
        return None;
    }
    let total: Rat = kept.iter().map(|e| e.prob.clone()).sum();
    let entries = kept
        .into_iter()
        .map(|e| Entry {
            prob: e.prob / total.clone(),
            action: e.action,
            target: Process::res(y.clone(), e.target),
        })
        .collect();
    Some(normalize_group(entries))
}

/// Computes the set of transition groups of `p`, canonically ordered.
pub fn transition_groups(p: &Process, mode: RuleMode) -> Result<Vec<TransitionGroup>, PtsError> {
    let mut ctx = Ctx { mode, memo: HashMap::new() };
    let gs = ctx.groups(p)?;
    Ok(dedup_and_sort(gs))
}

struct Ctx {
    mode: RuleMode,
    /// Memoized groups for parallel sub-multisets, keyed by canonical text.
    memo: HashMap<String, Vec<TransitionGroup>>,
}

/// Resolves conditionals with literal boolean conditions in active position.
fn resolve_if(p: &Process) -> Result<Process, PtsError> {
    let mut cur = p.clone();
    loop {
        match cur {
            Process::If(Name::Lit(Lit::True), t, _) => cur = *t,
            Process::If(Name::Lit(Lit::False), _, e) => cur = *e,
            Process::If(c, ..) => return Err(PtsError::StuckConditional(c.text())),
            other => return Ok(other),
        }
    }
}

/// Flattens the unguarded parallel spine into components, resolving literal
/// conditionals along the way.
fn flatten(p: &Process, out: &mut Vec<Process>) -> Result<(), PtsError> {
    let q = resolve_if(p)?;
    if let Process::Par(l, r) = &q {
        flatten(l, out)?;
        flatten(r, out)?;
    } else {
        out.push(q);
    }
    Ok(())
}

fn compose(comps: &[Process]) -> Process {
    let mut it = comps.iter();
    match it.next() {
        None => Process::nil(),
        Some(first) => it.fold(first.clone(), |acc, c| Process::par(acc, c.clone())),
    }
}

/// A pending output usable as the deterministic premise of a communication.
struct PendingOutput {
    bound: bool,
    chan: Name,
    payload: Name,
    /// What is left of the emitting side once the output has fired.
    cont: Process,
}

fn as_output_group(g: &TransitionGroup) -> Option<PendingOutput> {
    if g.entries.len() != 1 || g.entries[0].prob != rat(1, 1) {
        return None;
    }
    let e = &g.entries[0];
    match &e.action {
        Action::FreeOutput(x, y) => Some(PendingOutput {
            bound: false,
            chan: x.clone(),
            payload: y.clone(),
            cont: e.target.clone(),
        }),
        Action::BoundOutput(x, y) => Some(PendingOutput {
            bound: true,
            chan: x.clone(),
            payload: y.clone(),
            cont: e.target.clone(),
        }),
        _ => None,
    }
}

impl Ctx {
    fn groups(&mut self, p: &Process) -> Result<Vec<TransitionGroup>, PtsError> {
        let q = resolve_if(p)?;
        match &q {
            Process::Output(x, y) => Ok(vec![TransitionGroup {
                entries: vec![Entry {
                    prob: rat(1, 1),
                    action: Action::FreeOutput(x.clone(), y.clone()),
                    target: Process::nil(),
                }],
            }]),
            Process::Sum(bs) => {
                if bs.is_empty() {
                    Ok(vec![])
                } else {
                    Ok(vec![sum_group(bs)])
                }
            }
            Process::Var(_) => Ok(vec![]),
            Process::Rec(x, body) => self.groups(&unfold_rec(x, body)),
            Process::Res(y, body) => {
                let inner = self.groups(body)?;
                let mut out = Vec::new();
                for g in inner {
                    if let Some(o) = as_output_group(&g) {
                        // Open: a free output of the restricted name becomes a
                        // bound output, provided the subject differs.
                        if !o.bound && o.payload == *y && o.chan != *y {
                            out.push(TransitionGroup {
                                entries: vec![Entry {
                                    prob: rat(1, 1),
                                    action: Action::BoundOutput(o.chan, o.payload),
                                    target: o.cont,
                                }],
                            });
                            continue;
                        }
                    }
                    if let Some(g2) = res_renormalize(&g, y) {
                        out.push(g2);
                    }
                }
                Ok(out)
            }
            Process::Par(..) => {
                let mut comps = Vec::new();
                flatten(&q, &mut comps)?;
                self.par_groups(&comps)
            }
            Process::If(..) => unreachable!("resolved above"),
        }
    }

    fn par_groups(&mut self, comps: &[Process]) -> Result<Vec<TransitionGroup>, PtsError> {
        if comps.is_empty() {
            return Ok(vec![]);
        }
        if comps.len() == 1 {
            return self.groups(&comps[0]);
        }
        let key = pp(&canonical_labeled(&compose(comps)));
        if let Some(cached) = self.memo.get(&key) {
            return Ok(cached.clone());
        }
        let mut out: Vec<TransitionGroup> = Vec::new();
        for (i, c) in comps.iter().enumerate() {
            let rest: Vec<Process> = comps
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| p.clone())
                .collect();
            let rest_term = compose(&rest);
            let own = self.groups(c)?;
            // Interleaving: lift each group of the component over the rest.
            for g in &own {
                out.push(lift_group(g, comps, i));
            }
            // Communication: a pending output of this component merges with
            // any group derivable from the remaining components.
            let rest_groups = self.par_groups(&rest)?;
            for g in &own {
                if let Some(o) = as_output_group(g) {
                    for rg in &rest_groups {
                        if let Some(m) = com_merge(&o, c, rg, self.mode) {
                            out.push(m);
                        }
                    }
                }
            }
            let _ = rest_term;
        }
        let out = dedup_and_sort(out);
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

/// Lifts a group of component `i` over the remaining components, renaming
/// bound action names that would clash with free names of the context.
fn lift_group(g: &TransitionGroup, comps: &[Process], i: usize) -> TransitionGroup {
    let mut ctx_free: BTreeSet<Name> = BTreeSet::new();
    for (j, c) in comps.iter().enumerate() {
        if j != i {
            ctx_free.extend(free_names(c));
        }
    }
    let entries = g
        .entries
        .iter()
        .map(|e| {
            let (action, target) = freshen_entry(&e.action, &e.target, &ctx_free);
            let mut parts: Vec<Process> = Vec::with_capacity(comps.len());
            for (j, c) in comps.iter().enumerate() {
                parts.push(if j == i { target.clone() } else { c.clone() });
            }
            Entry { prob: e.prob.clone(), action, target: compose(&parts) }
        })
        .collect();
    normalize_group(entries)
}

/// Renames the bound name of an action (jointly with the target) away from a
/// set of names to avoid.
fn freshen_entry(action: &Action, target: &Process, avoid: &BTreeSet<Name>) -> (Action, Process) {
    let Some(b) = action.bound_name() else {
        return (action.clone(), target.clone());
    };
    if !avoid.contains(b) {
        return (action.clone(), target.clone());
    }
    let mut all = avoid.clone();
    all.extend(free_names(target));
    all.extend(action.free_names());
    let b2 = fresh_name(b, &all);
    let action2 = match action {
        Action::Input(x, _) => Action::Input(x.clone(), b2.clone()),
        Action::BoundOutput(x, _) => Action::BoundOutput(x.clone(), b2.clone()),
        a => a.clone(),
    };
    (action2, substitute(target, &b2, b))
}

/// Merges a pending output into a partner group. Matching inputs become
/// internal moves with late payload instantiation; in `Standard` mode the
/// other branches survive unchanged next to the unconsumed output, in
/// `ComPrime` mode only the matching branches survive, renormalized.
fn com_merge(
    o: &PendingOutput,
    emitter: &Process,
    partner: &TransitionGroup,
    mode: RuleMode,
) -> Option<TransitionGroup> {
    let mut matched: Vec<Entry> = Vec::new();
    let mut others: Vec<Entry> = Vec::new();
    for e in &partner.entries {
        match &e.action {
            Action::Input(x, z) if *x == o.chan => {
                let target = if o.bound {
                    // Scope of the transmitted restricted name closes over the
                    // receiver; rename it first if it would collide.
                    let mut avoid = free_names(&e.target);
                    avoid.remove(z);
                    avoid.extend(free_names(&o.cont));
                    avoid.insert(o.chan.clone());
                    let (y, cont) = if avoid.contains(&o.payload) {
                        let y2 = fresh_name(&o.payload, &avoid);
                        (y2.clone(), substitute(&o.cont, &y2, &o.payload))
                    } else {
                        (o.payload.clone(), o.cont.clone())
                    };
                    Process::res(y.clone(), Process::par(cont, substitute(&e.target, &y, z)))
                } else {
                    Process::par(o.cont.clone(), substitute(&e.target, &o.payload, z))
                };
                matched.push(Entry { prob: e.prob.clone(), action: Action::Tau(None), target });
            }
            _ => others.push(Entry {
                prob: e.prob.clone(),
                action: e.action.clone(),
                target: Process::par(emitter.clone(), e.target.clone()),
            }),
        }
    }
    match mode {
        RuleMode::Standard => {
            if matched.is_empty() && others.is_empty() {
                None
            } else {
                matched.extend(others);
                Some(normalize_group(matched))
            }
        }
        RuleMode::ComPrime => {
            if matched.is_empty() {
                return None;
            }
            let total: Rat = matched.iter().map(|e| e.prob.clone()).sum();
            Some(normalize_group(
                matched
                    .into_iter()
                    .map(|e| Entry { prob: e.prob / total.clone(), ..e })
                    .collect(),
            ))
        }
    }
}

/// Convenience: groups of the compact execution form of a state (dead `0`
/// components removed). Same observable behavior, smaller cache keys.
pub fn transition_groups_trimmed(
    p: &Process,
    mode: RuleMode,
) -> Result<Vec<TransitionGroup>, PtsError> {
    transition_groups(&trim_spine(p), mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::term::congruent;

    fn groups_of(src: &str, mode: RuleMode) -> Vec<TransitionGroup> {
        transition_groups(&parse(src).unwrap(), mode).unwrap()
    }

    fn probs(g: &TransitionGroup) -> Vec<Rat> {
        g.entries.iter().map(|e| e.prob.clone()).collect()
    }

    /// R = P | x!y with P = rec X. 1/2 x?(y).0 + 1/2 tau.X: three groups.
    #[test]
    fn running_example_parallel() {
        let r = "rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!y";
        let gs = groups_of(r, RuleMode::Standard);
        assert_eq!(gs.len(), 3, "{gs:#?}");
        let r_term = parse(r).unwrap();
        // Group shapes: {1/2 input, 1/2 tau}, {1/2 tau, 1/2 tau}, {1 output}.
        let mut seen_input = false;
        let mut seen_two_tau = false;
        let mut seen_out = false;
        for g in &gs {
            let acts: Vec<_> = g.entries.iter().map(|e| e.action.clone()).collect();
            if acts.iter().any(|a| matches!(a, Action::Input(..))) {
                seen_input = true;
                assert_eq!(probs(g), vec![rat(1, 2), rat(1, 2)]);
                // The tau branch loops back to R itself.
                let tau = g
                    .entries
                    .iter()
                    .find(|e| matches!(e.action, Action::Tau(_)))
                    .unwrap();
                assert!(congruent(&tau.target, &r_term));
            } else if acts.len() == 2 {
                seen_two_tau = true;
                assert!(acts.iter().all(|a| matches!(a, Action::Tau(_))));
                assert_eq!(probs(g), vec![rat(1, 2), rat(1, 2)]);
            } else {
                seen_out = true;
                assert!(matches!(acts[0], Action::FreeOutput(..)));
                assert_eq!(probs(g), vec![rat(1, 1)]);
            }
        }
        assert!(seen_input && seen_two_tau && seen_out);
    }

    /// Restriction of the running example: two groups.
    #[test]
    fn running_example_restricted() {
        let r = "new x in (rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!y)";
        let gs = groups_of(r, RuleMode::Standard);
        assert_eq!(gs.len(), 2, "{gs:#?}");
        let r_term = parse(r).unwrap();
        let mut seen_loop = false;
        let mut seen_mixed = false;
        for g in &gs {
            assert!(g.entries.iter().all(|e| matches!(e.action, Action::Tau(_))));
            if g.entries.len() == 1 {
                seen_loop = true;
                assert_eq!(probs(g), vec![rat(1, 1)]);
                assert!(congruent(&g.entries[0].target, &r_term));
            } else {
                seen_mixed = true;
                assert_eq!(probs(g), vec![rat(1, 2), rat(1, 2)]);
                let back = g
                    .entries
                    .iter()
                    .any(|e| congruent(&trim_spine(&e.target), &r_term));
                let dead = g
                    .entries
                    .iter()
                    .any(|e| trim_spine(&e.target).is_nil());
                assert!(back && dead, "{g:#?}");
            }
        }
        assert!(seen_loop && seen_mixed);
    }

    /// Two pending outputs against a two-way input choice: three groups in
    /// standard mode, two when communication wins.
    #[test]
    fn two_outputs_one_choice() {
        let r = "new x1 x2 in (x1!y | x2!z | (1/3: x1?(u). u!a + 2/3: x2?(u). u!b))";
        let gs = groups_of(r, RuleMode::Standard);
        assert_eq!(gs.len(), 3, "{gs:#?}");
        let mut singletons = 0;
        let mut merged = 0;
        for g in &gs {
            assert!(g.entries.iter().all(|e| matches!(e.action, Action::Tau(_))));
            match g.entries.len() {
                1 => {
                    singletons += 1;
                    assert_eq!(probs(g), vec![rat(1, 1)]);
                }
                2 => {
                    merged += 1;
                    let mut ps = probs(g);
                    ps.sort();
                    assert_eq!(ps, vec![rat(1, 3), rat(2, 3)]);
                }
                n => panic!("unexpected group size {n}"),
            }
        }
        assert_eq!((singletons, merged), (2, 1));

        let gs = groups_of(r, RuleMode::ComPrime);
        assert_eq!(gs.len(), 2, "{gs:#?}");
        for g in &gs {
            assert_eq!(g.entries.len(), 1);
            assert_eq!(probs(g), vec![rat(1, 1)]);
            assert!(matches!(g.entries[0].action, Action::Tau(_)));
        }
    }

    #[test]
    fn res_renormalize_example() {
        // {(1/3, x?(u), P), (2/3, z?(u), Q)} restricted on x
        // -> {(1, z?(u), new x in Q)}
        let p = parse("p!p").unwrap();
        let q = parse("q!q").unwrap();
        let g = TransitionGroup {
            entries: vec![
                Entry {
                    prob: rat(1, 3),
                    action: Action::Input(Name::id("x"), Name::id("u")),
                    target: p,
                },
                Entry {
                    prob: rat(2, 3),
                    action: Action::Input(Name::id("z"), Name::id("u")),
                    target: q.clone(),
                },
            ],
        };
        let r = res_renormalize(&g, &Name::id("x")).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].prob, rat(1, 1));
        assert_eq!(r.entries[0].action, Action::Input(Name::id("z"), Name::id("u")));
        assert_eq!(r.entries[0].target, Process::res(Name::id("x"), q));
        // Nothing survives when every label mentions the restricted name.
        let g2 = TransitionGroup {
            entries: vec![Entry {
                prob: rat(1, 1),
                action: Action::Input(Name::id("x"), Name::id("u")),
                target: Process::nil(),
            }],
        };
        assert!(res_renormalize(&g2, &Name::id("x")).is_none());
    }

    #[test]
    fn sum_merges_congruent_branches() {
        let p = parse("1/2: x?(y). 0 + 1/2: x?(y). 0").unwrap();
        let gs = transition_groups(&p, RuleMode::Standard).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].entries.len(), 1);
        assert_eq!(gs[0].entries[0].prob, rat(1, 1));
    }

    #[test]
    fn open_and_close_scope_extrusion() {
        // new y in x!y  emits a bound output.
        let p = parse("new y in x!y").unwrap();
        let gs = transition_groups(&p, RuleMode::Standard).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(
            gs[0].entries[0].action,
            Action::BoundOutput(Name::id("x"), Name::id("y"))
        );
        // Close: the received restricted name is re-restricted around both.
        let r = parse("new y in x!y | 1: x?(z). z!w").unwrap();
        let gs = transition_groups(&r, RuleMode::Standard).unwrap();
        let tau_group = gs
            .iter()
            .find(|g| g.entries.iter().any(|e| matches!(e.action, Action::Tau(_))))
            .expect("close group");
        let t = &tau_group.entries[0].target;
        match t {
            Process::Res(n, body) => {
                assert!(free_names(body).contains(&Name::id("w")));
                let expect = Process::par(
                    Process::nil(),
                    Process::Output(n.clone(), Name::id("w")),
                );
                assert!(congruent(body, &expect), "{}", pp(t));
            }
            other => panic!("expected restriction, got {}", pp(other)),
        }
    }

    #[test]
    fn stuck_conditional_reported() {
        let p = parse("if b then x!y else 0").unwrap();
        assert!(matches!(
            transition_groups(&p, RuleMode::Standard),
            Err(PtsError::StuckConditional(_))
        ));
        // Literal conditions resolve.
        let p = parse("if true then x!y else 0").unwrap();
        let gs = transition_groups(&p, RuleMode::Standard).unwrap();
        assert!(matches!(gs[0].entries[0].action, Action::FreeOutput(..)));
    }

    #[test]
    fn group_masses_are_one() {
        for src in [
            "rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!y",
            "new x in (rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!y)",
            "new x1 x2 in (x1!y | x2!z | (1/3: x1?(u). u!a + 2/3: x2?(u). u!b))",
        ] {
            for mode in [RuleMode::Standard, RuleMode::ComPrime] {
                for g in groups_of(src, mode) {
                    assert_eq!(g.mass(), rat(1, 1), "{src}");
                }
            }
        }
    }

    #[test]
    fn association_does_not_matter() {
        let a = "x1!y | (x2!z | (1/3: x1?(u). u!a + 2/3: x2?(u). u!b))";
        let b = "(x1!y | x2!z) | (1/3: x1?(u). u!a + 2/3: x2?(u). u!b)";
        let ga = groups_of(a, RuleMode::Standard);
        let gb = groups_of(b, RuleMode::Standard);
        assert_eq!(ga.len(), gb.len());
        for (x, y) in ga.iter().zip(&gb) {
            assert_eq!(group_key(x), group_key(y));
        }
    }
}

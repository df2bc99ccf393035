// Copyright 2026
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

//! Core term representation: names, processes, actions and the structural
//! operations (free names, substitution, alpha-normalization, congruence)
//! everything else is built on.

use num::BigRational;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

/// Exact probability type used throughout the term and transition layers.
pub type Rat = BigRational;

/// Builds an exact rational from an integer pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Literal payload values. Usable only in payload position of an output or as
/// the condition of a conditional once substituted in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lit {
    True,
    False,
    Zero,
    One,
}

impl Lit {
    pub fn text(self) -> &'static str {
        match self {
            Lit::True => "true",
            Lit::False => "false",
            Lit::Zero => "0",
            Lit::One => "1",
        }
    }
}

/// A channel name: either an identifier or a literal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Name {
    Id(String),
    Lit(Lit),
}

impl Name {
    pub fn id(s: &str) -> Name {
        Name::Id(s.to_string())
    }

    pub fn is_lit(&self) -> bool {
        matches!(self, Name::Lit(_))
    }

    pub fn text(&self) -> String {
        match self {
            Name::Id(s) => s.clone(),
            Name::Lit(l) => l.text().to_string(),
        }
    }
}

/// Process variable bound by `rec`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessId(pub String);

/// Guard of a probabilistic choice branch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prefix {
    /// `x?(y)` — input on `x` binding `y` in the continuation.
    Input(Name, Name),
    /// `tau` with an optional inert label.
    Tau(Option<String>),
}

/// One branch of a probabilistic guarded choice.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub prob: Rat,
    pub prefix: Prefix,
    pub cont: Process,
}

/// Process terms. `Sum(vec![])` is inaction `0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    /// Asynchronous output particle `x!y`.
    Output(Name, Name),
    /// Probabilistic guarded choice; probabilities must sum to one.
    Sum(Vec<Branch>),
    Par(Box<Process>, Box<Process>),
    /// `new x in P`.
    Res(Name, Box<Process>),
    Var(ProcessId),
    Rec(ProcessId, Box<Process>),
    If(Name, Box<Process>, Box<Process>),
}

impl Process {
    pub fn nil() -> Process {
        Process::Sum(vec![])
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Sum(b) if b.is_empty())
    }

    pub fn par(l: Process, r: Process) -> Process {
        Process::Par(Box::new(l), Box::new(r))
    }

    pub fn res(n: Name, body: Process) -> Process {
        Process::Res(n, Box::new(body))
    }
}

/// Transition labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    /// `x?(y)` — the bound name `y` binds into the target (late instantiation).
    Input(Name, Name),
    /// `x!y`.
    FreeOutput(Name, Name),
    /// `x!(y)` — output of a restricted name; `y` binds into the target.
    BoundOutput(Name, Name),
    Tau(Option<String>),
}

impl Action {
    /// Free names of the label.
    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut s = BTreeSet::new();
        match self {
            Action::Input(x, _) => {
                insert_id(&mut s, x);
            }
            Action::FreeOutput(x, y) => {
                insert_id(&mut s, x);
                insert_id(&mut s, y);
            }
            Action::BoundOutput(x, _) => {
                insert_id(&mut s, x);
            }
            Action::Tau(_) => {}
        }
        s
    }

    /// Bound name of the label, if any.
    pub fn bound_name(&self) -> Option<&Name> {
        match self {
            Action::Input(_, y) | Action::BoundOutput(_, y) => Some(y),
            _ => None,
        }
    }
}

fn insert_id(s: &mut BTreeSet<Name>, n: &Name) {
    if !n.is_lit() {
        s.insert(n.clone());
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("branch probabilities of a sum must total 1, got {got}")]
    SumNotNormalized { got: String },
    #[error("process variable {0:?} occurs unguarded under its rec binder")]
    UnguardedRecursion(String),
    #[error("literal {0} used outside payload position")]
    LiteralMisuse(String),
}

/// Free names of a term. Literals are never reported.
pub fn free_names(p: &Process) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(p, &mut out);
    out
}

fn collect_free(p: &Process, out: &mut BTreeSet<Name>) {
    match p {
        Process::Output(x, y) => {
            insert_id(out, x);
            insert_id(out, y);
        }
        Process::Sum(bs) => {
            for b in bs {
                match &b.prefix {
                    Prefix::Input(x, f) => {
                        insert_id(out, x);
                        let mut inner = BTreeSet::new();
                        collect_free(&b.cont, &mut inner);
                        inner.remove(f);
                        out.extend(inner);
                    }
                    Prefix::Tau(_) => collect_free(&b.cont, out),
                }
            }
        }
        Process::Par(l, r) => {
            collect_free(l, out);
            collect_free(r, out);
        }
        Process::Res(n, body) => {
            let mut inner = BTreeSet::new();
            collect_free(body, &mut inner);
            inner.remove(n);
            out.extend(inner);
        }
        Process::Var(_) => {}
        Process::Rec(_, body) => collect_free(body, out),
        Process::If(c, t, e) => {
            insert_id(out, c);
            collect_free(t, out);
            collect_free(e, out);
        }
    }
}

/// Free process variables of a term.
pub fn free_pids(p: &Process) -> BTreeSet<ProcessId> {
    let mut out = BTreeSet::new();
    collect_pids(p, &mut out);
    out
}

fn collect_pids(p: &Process, out: &mut BTreeSet<ProcessId>) {
    match p {
        Process::Output(..) => {}
        Process::Sum(bs) => {
            for b in bs {
                collect_pids(&b.cont, out);
            }
        }
        Process::Par(l, r) => {
            collect_pids(l, out);
            collect_pids(r, out);
        }
        Process::Res(_, body) => collect_pids(body, out),
        Process::Var(x) => {
            out.insert(x.clone());
        }
        Process::Rec(x, body) => {
            let mut inner = BTreeSet::new();
            collect_pids(body, &mut inner);
            inner.remove(x);
            out.extend(inner);
        }
        Process::If(_, t, e) => {
            collect_pids(t, out);
            collect_pids(e, out);
        }
    }
}

/// Picks an identifier based on `base` that avoids every name in `avoid`.
pub fn fresh_name(base: &Name, avoid: &BTreeSet<Name>) -> Name {
    let stem = match base {
        Name::Id(s) => s.clone(),
        Name::Lit(l) => l.text().to_string(),
    };
    let mut k = 1u64;
    loop {
        let cand = Name::Id(format!("{stem}_{k}"));
        if !avoid.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

/// Capture-avoiding replacement of the free name `old` by `new` in `p`.
pub fn substitute(p: &Process, new: &Name, old: &Name) -> Process {
    if new == old {
        return p.clone();
    }
    let map = |n: &Name| if n == old { new.clone() } else { n.clone() };
    match p {
        Process::Output(x, y) => Process::Output(map(x), map(y)),
        Process::Sum(bs) => Process::Sum(
            bs.iter()
                .map(|b| match &b.prefix {
                    Prefix::Input(x, f) => {
                        let ch = map(x);
                        if f == old {
                            // `old` is shadowed in the continuation.
                            Branch {
                                prob: b.prob.clone(),
                                prefix: Prefix::Input(ch, f.clone()),
                                cont: b.cont.clone(),
                            }
                        } else if f == new && free_names(&b.cont).contains(old) {
                            // Renaming would capture `new`; alpha-convert first.
                            let mut avoid = free_names(&b.cont);
                            avoid.insert(new.clone());
                            avoid.insert(old.clone());
                            let f2 = fresh_name(f, &avoid);
                            let cont = substitute(&b.cont, &f2, f);
                            Branch {
                                prob: b.prob.clone(),
                                prefix: Prefix::Input(ch, f2),
                                cont: substitute(&cont, new, old),
                            }
                        } else {
                            Branch {
                                prob: b.prob.clone(),
                                prefix: Prefix::Input(ch, f.clone()),
                                cont: substitute(&b.cont, new, old),
                            }
                        }
                    }
                    Prefix::Tau(l) => Branch {
                        prob: b.prob.clone(),
                        prefix: Prefix::Tau(l.clone()),
                        cont: substitute(&b.cont, new, old),
                    },
                })
                .collect(),
        ),
        Process::Par(l, r) => Process::par(substitute(l, new, old), substitute(r, new, old)),
        Process::Res(n, body) => {
            if n == old {
                Process::Res(n.clone(), body.clone())
            } else if n == new && free_names(body).contains(old) {
                let mut avoid = free_names(body);
                avoid.insert(new.clone());
                avoid.insert(old.clone());
                let n2 = fresh_name(n, &avoid);
                let body2 = substitute(body, &n2, n);
                Process::res(n2, substitute(&body2, new, old))
            } else {
                Process::res(n.clone(), substitute(body, new, old))
            }
        }
        Process::Var(x) => Process::Var(x.clone()),
        Process::Rec(x, body) => Process::Rec(x.clone(), Box::new(substitute(body, new, old))),
        Process::If(c, t, e) => Process::If(
            map(c),
            Box::new(substitute(t, new, old)),
            Box::new(substitute(e, new, old)),
        ),
    }
}

/// Capture-avoiding replacement of the free process variable `pid` by `r`.
pub fn substitute_pid(p: &Process, pid: &ProcessId, r: &Process) -> Process {
    let fnr = free_names(r);
    let fpr = free_pids(r);
    subst_pid_inner(p, pid, r, &fnr, &fpr)
}

fn subst_pid_inner(
    p: &Process,
    pid: &ProcessId,
    r: &Process,
    fnr: &BTreeSet<Name>,
    fpr: &BTreeSet<ProcessId>,
) -> Process {
    match p {
        Process::Output(..) => p.clone(),
        Process::Sum(bs) => Process::Sum(
            bs.iter()
                .map(|b| match &b.prefix {
                    Prefix::Input(x, f) => {
                        if fnr.contains(f) && free_pids(&b.cont).contains(pid) {
                            let mut avoid = free_names(&b.cont);
                            avoid.extend(fnr.iter().cloned());
                            let f2 = fresh_name(f, &avoid);
                            let cont = substitute(&b.cont, &f2, f);
                            Branch {
                                prob: b.prob.clone(),
                                prefix: Prefix::Input(x.clone(), f2),
                                cont: subst_pid_inner(&cont, pid, r, fnr, fpr),
                            }
                        } else {
                            Branch {
                                prob: b.prob.clone(),
                                prefix: b.prefix.clone(),
                                cont: subst_pid_inner(&b.cont, pid, r, fnr, fpr),
                            }
                        }
                    }
                    Prefix::Tau(_) => Branch {
                        prob: b.prob.clone(),
                        prefix: b.prefix.clone(),
                        cont: subst_pid_inner(&b.cont, pid, r, fnr, fpr),
                    },
                })
                .collect(),
        ),
        Process::Par(l, r2) => Process::par(
            subst_pid_inner(l, pid, r, fnr, fpr),
            subst_pid_inner(r2, pid, r, fnr, fpr),
        ),
        Process::Res(n, body) => {
            if fnr.contains(n) && free_pids(body).contains(pid) {
                let mut avoid = free_names(body);
                avoid.extend(fnr.iter().cloned());
                let n2 = fresh_name(n, &avoid);
                let body2 = substitute(body, &n2, n);
                Process::res(n2, subst_pid_inner(&body2, pid, r, fnr, fpr))
            } else {
                Process::res(n.clone(), subst_pid_inner(body, pid, r, fnr, fpr))
            }
        }
        Process::Var(x) => {
            if x == pid {
                r.clone()
            } else {
                p.clone()
            }
        }
        Process::Rec(x, body) => {
            if x == pid {
                p.clone()
            } else if fpr.contains(x) && free_pids(body).contains(pid) {
                let mut k = 1u64;
                let x2 = loop {
                    let cand = ProcessId(format!("{}_{k}", x.0));
                    if !fpr.contains(&cand) && !free_pids(body).contains(&cand) {
                        break cand;
                    }
                    k += 1;
                };
                let body2 = substitute_pid(body, x, &Process::Var(x2.clone()));
                Process::Rec(x2, Box::new(subst_pid_inner(&body2, pid, r, fnr, fpr)))
            } else {
                Process::Rec(x.clone(), Box::new(subst_pid_inner(body, pid, r, fnr, fpr)))
            }
        }
        Process::If(c, t, e) => Process::If(
            c.clone(),
            Box::new(subst_pid_inner(t, pid, r, fnr, fpr)),
            Box::new(subst_pid_inner(e, pid, r, fnr, fpr)),
        ),
    }
}

/// Unfolds `rec X. P` one step into `P[rec X. P / X]`.
pub fn unfold_rec(pid: &ProcessId, body: &Process) -> Process {
    let whole = Process::Rec(pid.clone(), Box::new(body.clone()));
    substitute_pid(body, pid, &whole)
}

#[derive(Clone, Copy)]
struct NormOpts {
    sort_par: bool,
    strip_labels: bool,
}

/// Deterministic alpha-normal form: bound names and bound process variables
/// are renamed positionally (`#k` where `k` is the number of enclosing
/// binders). Two terms are alpha-equivalent iff their normal forms are
/// structurally identical.
pub fn alpha_normalize(p: &Process) -> Process {
    norm(
        p,
        &HashMap::new(),
        &HashMap::new(),
        0,
        0,
        NormOpts { sort_par: false, strip_labels: false },
    )
}

/// Canonical form modulo alpha-conversion plus commutativity and
/// associativity of parallel composition; tau labels are dropped, as the
/// congruence ignores them.
pub fn canonical(p: &Process) -> Process {
    norm(
        p,
        &HashMap::new(),
        &HashMap::new(),
        0,
        0,
        NormOpts { sort_par: true, strip_labels: true },
    )
}

/// Canonical form that keeps tau labels; used for state and group keys where
/// labels must remain observable.
pub fn canonical_labeled(p: &Process) -> Process {
    norm(
        p,
        &HashMap::new(),
        &HashMap::new(),
        0,
        0,
        NormOpts { sort_par: true, strip_labels: false },
    )
}

/// Decidable structural congruence: alpha-conversion plus commutativity and
/// associativity of `|`. Recursion unfolding is deliberately excluded.
pub fn congruent(p: &Process, q: &Process) -> bool {
    canonical(p) == canonical(q)
}

fn norm(
    p: &Process,
    env: &HashMap<Name, Name>,
    penv: &HashMap<ProcessId, ProcessId>,
    lvl: usize,
    plvl: usize,
    o: NormOpts,
) -> Process {
    let look = |n: &Name| env.get(n).cloned().unwrap_or_else(|| n.clone());
    match p {
        Process::Output(x, y) => Process::Output(look(x), look(y)),
        Process::Sum(bs) => Process::Sum(
            bs.iter()
                .map(|b| match &b.prefix {
                    Prefix::Input(x, f) => {
                        let ch = look(x);
                        let f2 = Name::Id(format!("#{lvl}"));
                        let mut env2 = env.clone();
                        env2.insert(f.clone(), f2.clone());
                        Branch {
                            prob: b.prob.clone(),
                            prefix: Prefix::Input(ch, f2),
                            cont: norm(&b.cont, &env2, penv, lvl + 1, plvl, o),
                        }
                    }
                    Prefix::Tau(l) => Branch {
                        prob: b.prob.clone(),
                        prefix: Prefix::Tau(if o.strip_labels { None } else { l.clone() }),
                        cont: norm(&b.cont, env, penv, lvl, plvl, o),
                    },
                })
                .collect(),
        ),
        Process::Par(..) => {
            if o.sort_par {
                let mut comps = Vec::new();
                flatten_norm(p, env, penv, lvl, plvl, o, &mut comps);
                comps.sort();
                // Right-nested canonical composition.
                let mut it = comps.into_iter().rev();
                let last = it.next().expect("par has components");
                it.fold(last, |acc, c| Process::par(c, acc))
            } else if let Process::Par(l, r) = p {
                Process::par(norm(l, env, penv, lvl, plvl, o), norm(r, env, penv, lvl, plvl, o))
            } else {
                unreachable!()
            }
        }
        Process::Res(n, body) => {
            let n2 = Name::Id(format!("#{lvl}"));
            let mut env2 = env.clone();
            env2.insert(n.clone(), n2.clone());
            Process::res(n2, norm(body, &env2, penv, lvl + 1, plvl, o))
        }
        Process::Var(x) => Process::Var(penv.get(x).cloned().unwrap_or_else(|| x.clone())),
        Process::Rec(x, body) => {
            let x2 = ProcessId(format!("#{plvl}"));
            let mut penv2 = penv.clone();
            penv2.insert(x.clone(), x2.clone());
            Process::Rec(x2, Box::new(norm(body, env, &penv2, lvl, plvl + 1, o)))
        }
        Process::If(c, t, e) => Process::If(
            look(c),
            Box::new(norm(t, env, penv, lvl, plvl, o)),
            Box::new(norm(e, env, penv, lvl, plvl, o)),
        ),
    }
}

fn flatten_norm(
    p: &Process,
    env: &HashMap<Name, Name>,
    penv: &HashMap<ProcessId, ProcessId>,
    lvl: usize,
    plvl: usize,
    o: NormOpts,
    out: &mut Vec<Process>,
) {
    if let Process::Par(l, r) = p {
        flatten_norm(l, env, penv, lvl, plvl, o, out);
        flatten_norm(r, env, penv, lvl, plvl, o, out);
    } else {
        out.push(norm(p, env, penv, lvl, plvl, o));
    }
}

/// Removes dead `0` components on the unguarded spine of a term. The result
/// has the same transition groups modulo the deleted components; used as an
/// internal execution-state compaction, never as the published congruence.
pub fn trim_spine(p: &Process) -> Process {
    match p {
        Process::Par(l, r) => {
            let l2 = trim_spine(l);
            let r2 = trim_spine(r);
            match (l2.is_nil(), r2.is_nil()) {
                (true, true) => Process::nil(),
                (true, false) => r2,
                (false, true) => l2,
                (false, false) => Process::par(l2, r2),
            }
        }
        Process::Res(n, body) => {
            let b2 = trim_spine(body);
            if b2.is_nil() {
                Process::nil()
            } else {
                Process::res(n.clone(), b2)
            }
        }
        _ => p.clone(),
    }
}

/// Structural well-formedness checks shared by the parser and by programmatic
/// construction: sums normalized, recursion guarded, literals only in payload
/// or condition position.
pub fn validate(p: &Process) -> Result<(), TermError> {
    match p {
        Process::Output(x, _) => {
            if x.is_lit() {
                return Err(TermError::LiteralMisuse(x.text()));
            }
            Ok(())
        }
        Process::Sum(bs) => {
            if !bs.is_empty() {
                let total: Rat = bs.iter().map(|b| b.prob.clone()).sum();
                if total != rat(1, 1) {
                    return Err(TermError::SumNotNormalized { got: total.to_string() });
                }
            }
            for b in bs {
                if let Prefix::Input(x, f) = &b.prefix {
                    if x.is_lit() {
                        return Err(TermError::LiteralMisuse(x.text()));
                    }
                    if f.is_lit() {
                        return Err(TermError::LiteralMisuse(f.text()));
                    }
                }
                validate(&b.cont)?;
            }
            Ok(())
        }
        Process::Par(l, r) => {
            validate(l)?;
            validate(r)
        }
        Process::Res(n, body) => {
            if n.is_lit() {
                return Err(TermError::LiteralMisuse(n.text()));
            }
            validate(body)
        }
        Process::Var(_) => Ok(()),
        Process::Rec(x, body) => {
            if occurs_unguarded(body, x) {
                return Err(TermError::UnguardedRecursion(x.0.clone()));
            }
            validate(body)
        }
        Process::If(_, t, e) => {
            validate(t)?;
            validate(e)
        }
    }
}

fn occurs_unguarded(p: &Process, pid: &ProcessId) -> bool {
    match p {
        Process::Output(..) => false,
        // Branch continuations sit behind a prefix and are guarded.
        Process::Sum(_) => false,
        Process::Par(l, r) => occurs_unguarded(l, pid) || occurs_unguarded(r, pid),
        Process::Res(_, body) => occurs_unguarded(body, pid),
        Process::Var(x) => x == pid,
        Process::Rec(x, body) => x != pid && occurs_unguarded(body, pid),
        Process::If(_, t, e) => occurs_unguarded(t, pid) || occurs_unguarded(e, pid),
    }
}

// Copyright 2026
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

//! Randomized structural properties of the calculus: every invariant here is
//! quantified over machine-generated well-formed terms.

use num::{BigRational, One};
use pipa::automaton::{state_key, ProbAutomaton};
use pipa::measure::{event_probability, DeadlockReached};
use pipa::pretty::{pp_action, pp_prob};
use pipa::pts::{transition_groups, RuleMode, TransitionGroup};
use pipa::scheduler::{etree, RoundRobin};
use pipa::term::{
    alpha_normalize, congruent, free_names, rat, substitute, validate, Process,
};
use proptest::prelude::*;

mod common;
use common::{chan, payload, term};

fn mass(g: &TransitionGroup) -> BigRational {
    g.entries.iter().map(|e| e.prob.clone()).sum()
}

fn group_fingerprint(g: &TransitionGroup) -> Vec<(String, String, String)> {
    let mut v: Vec<_> = g
        .entries
        .iter()
        .map(|e| (pp_prob(&e.prob), pp_action(&e.action), state_key(&e.target)))
        .collect();
    v.sort();
    v
}

// ------------------------------------------------------------- properties

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn generated_terms_are_well_formed(p in term(5)) {
        prop_assert!(validate(&p).is_ok(), "{:?}", validate(&p));
    }

    #[test]
    fn groups_are_distributions(p in term(5)) {
        for mode in [RuleMode::Standard, RuleMode::ComPrime] {
            let groups = transition_groups(&p, mode).unwrap();
            for g in &groups {
                prop_assert!(mass(g).is_one(), "mass {} in {:?} mode", mass(g), mode);
                prop_assert!(!g.entries.is_empty());
            }
        }
    }

    #[test]
    fn restriction_preserves_distributions(p in term(4), x in chan()) {
        let r = Process::res(x, p);
        for g in transition_groups(&r, RuleMode::Standard).unwrap() {
            prop_assert!(mass(&g).is_one(), "mass {}", mass(&g));
        }
    }

    #[test]
    fn outputs_transition_in_singleton_groups(x in chan(), y in payload()) {
        let p = Process::Output(x, y);
        let groups = transition_groups(&p, RuleMode::Standard).unwrap();
        prop_assert_eq!(groups.len(), 1);
        prop_assert_eq!(groups[0].entries.len(), 1);
        prop_assert!(groups[0].entries[0].prob.is_one());
    }

    #[test]
    fn substitution_bounds_free_names(p in term(4), x in chan(), y in chan()) {
        // replace free occurrences of `x` by `y`
        let q = substitute(&p, &y, &x);
        let before = free_names(&p);
        let after = free_names(&q);
        for n in &after {
            prop_assert!(
                *n == y || (before.contains(n) && *n != x),
                "unexpected free name {n:?}"
            );
        }
    }

    #[test]
    fn alpha_normalization_is_idempotent_and_sound(p in term(4)) {
        let n1 = alpha_normalize(&p);
        let n2 = alpha_normalize(&n1);
        prop_assert_eq!(&n1, &n2);
        prop_assert!(congruent(&p, &n1));
    }

    #[test]
    fn congruent_states_have_identical_groups(p in term(4), q in term(3)) {
        // commuting a parallel composition never changes the group set
        let l = Process::par(p.clone(), q.clone());
        let r = Process::par(q, p);
        let gl = transition_groups(&l, RuleMode::Standard).unwrap();
        let gr = transition_groups(&r, RuleMode::Standard).unwrap();
        let mut fl: Vec<_> = gl.iter().map(group_fingerprint).collect();
        let mut fr: Vec<_> = gr.iter().map(group_fingerprint).collect();
        fl.sort();
        fr.sort();
        prop_assert_eq!(fl, fr);
    }

    #[test]
    fn association_is_immaterial(p in term(3), q in term(3), r in term(3)) {
        let l = Process::par(p.clone(), Process::par(q.clone(), r.clone()));
        let rr = Process::par(Process::par(p, q), r);
        let gl = transition_groups(&l, RuleMode::Standard).unwrap();
        let gr = transition_groups(&rr, RuleMode::Standard).unwrap();
        let mut fl: Vec<_> = gl.iter().map(group_fingerprint).collect();
        let mut fr: Vec<_> = gr.iter().map(group_fingerprint).collect();
        fl.sort();
        fr.sort();
        prop_assert_eq!(fl, fr);
    }

    #[test]
    fn measure_is_coherent_and_monotone(p in term(4)) {
        let m = ProbAutomaton::from_rules(RuleMode::Standard);
        let one = rat(1, 1);
        let mut prev_lower = rat(0, 1);
        let mut prev_upper = one.clone();
        for depth in [1usize, 3, 5] {
            let mut adv = RoundRobin::default();
            let t = etree(&m, &mut adv, &p, depth).unwrap();
            let em = event_probability(&t, &DeadlockReached);
            prop_assert_eq!(
                em.lower.clone() + em.undecided.clone() + em.falsified.clone(),
                one.clone()
            );
            prop_assert_eq!(em.upper.clone() - em.lower.clone(), em.undecided.clone());
            // deeper trees can only tighten the bracket
            prop_assert!(em.lower >= prev_lower);
            prop_assert!(em.upper <= prev_upper);
            prev_lower = em.lower;
            prev_upper = em.upper;
        }
    }
}

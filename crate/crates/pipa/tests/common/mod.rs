//! Shared random-term generator for the integration suites.

use pipa::term::{rat, Branch, Lit, Name, Prefix, Process};
use proptest::prelude::*;

pub fn chan() -> impl Strategy<Value = Name> {
    prop_oneof![
        Just(Name::id("a")),
        Just(Name::id("b")),
        Just(Name::id("c")),
        Just(Name::id("x")),
        Just(Name::id("y")),
    ]
}

pub fn payload() -> impl Strategy<Value = Name> {
    prop_oneof![
        4 => chan(),
        1 => Just(Name::Lit(Lit::True)),
        1 => Just(Name::Lit(Lit::Zero)),
    ]
}

pub fn prefix() -> impl Strategy<Value = Prefix> {
    prop_oneof![
        (chan(), chan()).prop_map(|(x, y)| Prefix::Input(x, y)),
        Just(Prefix::Tau(None)),
        Just(Prefix::Tau(Some("draw(0,1)".into()))),
    ]
}

/// Exact weights normalized so the branch probabilities sum to one.
fn sum_from(parts: Vec<(u32, Prefix, Process)>) -> Process {
    let total: u32 = parts.iter().map(|(w, _, _)| *w).sum();
    Process::Sum(
        parts
            .into_iter()
            .map(|(w, prefix, cont)| Branch {
                prob: rat(w as i64, total as i64),
                prefix,
                cont,
            })
            .collect(),
    )
}

/// Closed, guarded, well-formed terms of bounded depth.
pub fn term(depth: u32) -> BoxedStrategy<Process> {
    let leaf = prop_oneof![
        Just(Process::nil()),
        (chan(), payload()).prop_map(|(x, y)| Process::Output(x, y)),
    ];
    leaf.prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            // probabilistic guarded choice
            prop::collection::vec((1u32..4, prefix(), inner.clone()), 1..4).prop_map(sum_from),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Process::par(l, r)),
            (chan(), inner.clone()).prop_map(|(x, p)| Process::res(x, p)),
            (any::<bool>(), inner.clone(), inner.clone())
                .prop_map(|(c, t, e)| Process::If(
                    Name::Lit(if c { Lit::True } else { Lit::False }),
                    Box::new(t),
                    Box::new(e),
                )),
            // recursion, kept guarded: the variable may only appear as a
            // whole branch continuation
            prop::collection::vec((1u32..4, prefix(), inner, any::<bool>()), 1..4).prop_map(
                |parts| {
                    let xid = pipa::ProcessId("X".into());
                    let parts = parts
                        .into_iter()
                        .map(|(w, pre, cont, use_var)| {
                            let cont =
                                if use_var { Process::Var(xid.clone()) } else { cont };
                            (w, pre, cont)
                        })
                        .collect();
                    Process::Rec(xid, Box::new(sum_from(parts)))
                }
            ),
        ]
    })
    .boxed()
}

/// A reproducible stream of generated terms outside of a proptest harness.
#[allow(dead_code)] // not every test target draws from the stream
pub fn sample_terms(depth: u32, count: usize, seed_tag: &[u8; 32]) -> Vec<Process> {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let mut runner =
        TestRunner::new_with_rng(Config::default(), TestRng::from_seed(RngAlgorithm::ChaCha, seed_tag));
    let strat = term(depth);
    (0..count)
        .map(|_| strat.new_tree(&mut runner).expect("generation").current())
        .collect()
}

//! Probabilistic automata over process states.
//!
//! States are identified up to structural congruence (with internal-move
//! labels kept apart, since observers may care about them). Transition groups
//! are derived lazily from the semantics, or looked up in an explicit table
//! for hand-built automata.

use crate::pretty::pp;
use crate::pts::{transition_groups, PtsError, RuleMode, TransitionGroup};
use crate::term::{canonical_labeled, trim_spine, Action, Process, Rat};
use std::collections::HashMap;
use std::sync::RwLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AutomatonError {
    #[error(transparent)]
    Pts(#[from] PtsError),
    #[error("state budget exceeded: {states} states reached at depth {depth}")]
    BudgetExceeded { states: usize, depth: usize },
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("adversary chose group {index} but only {available} groups are available")]
    AdversaryRange { index: usize, available: usize },
}

/// Canonical key of a state.
pub fn state_key(p: &Process) -> String {
    pp(&canonical_labeled(&trim_spine(p)))
}

enum Source {
    /// Groups computed from the reduction rules.
    Rules(RuleMode),
    /// Explicit table, for hand-built automata.
    Table(HashMap<String, Vec<TransitionGroup>>),
}

/// A probabilistic automaton with lazily materialized transition groups.
pub struct ProbAutomaton {
    source: Source,
    cache: RwLock<HashMap<String, Vec<TransitionGroup>>>,
}

impl ProbAutomaton {
    pub fn from_rules(mode: RuleMode) -> Self {
        ProbAutomaton { source: Source::Rules(mode), cache: RwLock::new(HashMap::new()) }
    }

    /// Builds an automaton from explicit per-state groups, keyed by state.
    pub fn from_parts(parts: Vec<(Process, Vec<TransitionGroup>)>) -> Self {
        let table = parts
            .into_iter()
            .map(|(p, gs)| (state_key(&p), gs))
            .collect();
        ProbAutomaton { source: Source::Table(table), cache: RwLock::new(HashMap::new()) }
    }

    /// Transition groups available at `p`.
    pub fn groups_of(&self, p: &Process) -> Result<Vec<TransitionGroup>, AutomatonError> {
        let key = state_key(p);
        if let Some(gs) = self.cache.read().unwrap().get(&key) {
            return Ok(gs.clone());
        }
        let gs = match &self.source {
            Source::Rules(mode) => transition_groups(&trim_spine(p), *mode)?,
            Source::Table(t) => t
                .get(&key)
                .cloned()
                .ok_or_else(|| AutomatonError::UnknownState(key.clone()))?,
        };
        self.cache.write().unwrap().insert(key, gs.clone());
        Ok(gs)
    }

    /// Number of distinct states materialized so far.
    pub fn cached_states(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    /// Eagerly explores the reachable portion of the automaton from `start`,
    /// stopping with an error if the state budget is exhausted before
    /// `max_depth` is reached. Returns the distinct reachable states in
    /// breadth-first order.
    pub fn build(
        &self,
        start: &Process,
        max_states: usize,
        max_depth: usize,
    ) -> Result<Vec<Process>, AutomatonError> {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut order: Vec<Process> = Vec::new();
        let mut frontier = vec![trim_spine(start)];
        seen.insert(state_key(start), 0);
        order.push(frontier[0].clone());
        for depth in 0..max_depth {
            let mut next = Vec::new();
            for p in &frontier {
                for g in self.groups_of(p)? {
                    for e in &g.entries {
                        let t = trim_spine(&e.target);
                        let k = state_key(&t);
                        if !seen.contains_key(&k) {
                            if order.len() >= max_states {
                                return Err(AutomatonError::BudgetExceeded {
                                    states: order.len(),
                                    depth,
                                });
                            }
                            seen.insert(k, order.len());
                            order.push(t.clone());
                            next.push(t);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(order)
    }
}

/// One node of an unfolded scheduling tree.
#[derive(Clone, Debug)]
pub struct TreeNode {
    pub state: Process,
    /// Parent index and the edge that led here; `None` at the root.
    pub parent: Option<(usize, Action, Rat)>,
    pub depth: usize,
    pub kind: NodeKind,
    pub children: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Internal,
    /// No transition group at all: the run is complete.
    DeadlockLeaf,
    /// Cut off by the depth bound; the run continues beyond the tree.
    DepthLeaf,
}

/// The tree of executions induced by one adversary from one start state:
/// each internal node has exactly the children of the group the adversary
/// picked there.
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Probability of the unique path from the root to `idx`.
    pub fn path_prob(&self, mut idx: usize) -> Rat {
        let mut p = crate::term::rat(1, 1);
        while let Some((parent, _, ref w)) = self.nodes[idx].parent {
            p *= w.clone();
            idx = parent;
        }
        p
    }

    /// Actions along the path from the root to `idx`, in order.
    pub fn path_actions(&self, mut idx: usize) -> Vec<Action> {
        let mut acts = Vec::new();
        while let Some((parent, ref a, _)) = self.nodes[idx].parent {
            acts.push(a.clone());
            idx = parent;
        }
        acts.reverse();
        acts
    }

    /// Step probabilities along the path from the root to `idx`, in order.
    pub fn path_steps(&self, mut idx: usize) -> Vec<Rat> {
        let mut ps = Vec::new();
        while let Some((parent, _, ref w)) = self.nodes[idx].parent {
            ps.push(w.clone());
            idx = parent;
        }
        ps.reverse();
        ps
    }

    /// States visited after each step from the root to `idx` (the root state
    /// itself is not included).
    pub fn path_states(&self, mut idx: usize) -> Vec<Process> {
        let mut ss = Vec::new();
        while let Some((parent, _, _)) = self.nodes[idx].parent {
            ss.push(self.nodes[idx].state.clone());
            idx = parent;
        }
        ss.reverse();
        ss
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &TreeNode)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind != NodeKind::Internal)
    }

    /// Maximal execution fragments of the tree: one per leaf. Fragments
    /// ending at a depth cutoff are marked open.
    pub fn fragments(&self) -> Vec<ExecutionFragment> {
        self.leaves()
            .map(|(i, n)| ExecutionFragment {
                actions: self.path_actions(i),
                steps: self.path_steps(i),
                states: self.path_states(i),
                open: n.kind == NodeKind::DepthLeaf,
                leaf_state: n.state.clone(),
            })
            .collect()
    }
}

/// A finite execution fragment: the actions taken and the probability of
/// each step.
#[derive(Clone, Debug)]
pub struct ExecutionFragment {
    pub actions: Vec<Action>,
    pub steps: Vec<Rat>,
    /// State reached after each step.
    pub states: Vec<Process>,
    /// True when the fragment was cut off by the depth bound rather than
    /// ending in a deadlocked state.
    pub open: bool,
    pub leaf_state: Process,
}

impl ExecutionFragment {
    /// Product of the step probabilities.
    pub fn prob(&self) -> Rat {
        self.steps.iter().cloned().product()
    }
}

/// Unfolds the executions of `adv` from `start` down to `depth`. The chooser
/// receives the current state, the available groups and the path from the
/// root, and returns the index of the chosen group.
pub fn unfold<F>(
    m: &ProbAutomaton,
    start: &Process,
    depth: usize,
    mut choose: F,
) -> Result<Tree, AutomatonError>
where
    F: FnMut(&Process, &[TransitionGroup], &[Action]) -> usize,
{
    let mut nodes = vec![TreeNode {
        state: trim_spine(start),
        parent: None,
        depth: 0,
        kind: NodeKind::Internal,
        children: Vec::new(),
    }];
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        let (state, d) = (nodes[i].state.clone(), nodes[i].depth);
        let groups = m.groups_of(&state)?;
        if groups.is_empty() {
            nodes[i].kind = NodeKind::DeadlockLeaf;
            continue;
        }
        if d >= depth {
            nodes[i].kind = NodeKind::DepthLeaf;
            continue;
        }
        let path = {
            let mut acts = Vec::new();
            let mut j = i;
            while let Some((p, ref a, _)) = nodes[j].parent {
                acts.push(a.clone());
                j = p;
            }
            acts.reverse();
            acts
        };
        let pick = choose(&state, &groups, &path);
        if pick >= groups.len() {
            return Err(AutomatonError::AdversaryRange { index: pick, available: groups.len() });
        }
        let g = &groups[pick];
        for e in &g.entries {
            let child = nodes.len();
            nodes.push(TreeNode {
                state: trim_spine(&e.target),
                parent: Some((i, e.action.clone(), e.prob.clone())),
                depth: d + 1,
                kind: NodeKind::Internal,
                children: Vec::new(),
            });
            nodes[i].children.push(child);
            stack.push(child);
        }
    }
    Ok(Tree { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::term::rat;

    #[test]
    fn build_counts_reachable_states() {
        let p = parse("new x in (rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!y)").unwrap();
        let m = ProbAutomaton::from_rules(RuleMode::Standard);
        let states = m.build(&p, 100, 16).unwrap();
        // R itself and 0: communication consumes both sides at once, the
        // blind branch loops back.
        assert_eq!(states.len(), 2, "{:?}", states.iter().map(pp).collect::<Vec<_>>());
    }

    #[test]
    fn build_respects_budget() {
        let p = parse("rec X. 1: tau. (X | a!b)").unwrap();
        let m = ProbAutomaton::from_rules(RuleMode::Standard);
        assert!(matches!(
            m.build(&p, 4, 64),
            Err(AutomatonError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn fragment_probabilities_from_unfold() {
        // Always pick the mixed group: leaf probabilities 1/2, 1/4, 1/8, 1/8.
        let p = parse("new x in (rec X. 1/2: x?(y). 0 + 1/2: tau. X | x!y)").unwrap();
        let m = ProbAutomaton::from_rules(RuleMode::Standard);
        let tree = unfold(&m, &p, 3, |_, gs, _| {
            gs.iter().position(|g| g.entries.len() == 2).unwrap_or(0)
        })
        .unwrap();
        let mut probs: Vec<Rat> = tree.fragments().iter().map(|f| f.prob()).collect();
        probs.sort();
        assert_eq!(probs, vec![rat(1, 8), rat(1, 8), rat(1, 4), rat(1, 2)]);
        let open: Rat = tree
            .fragments()
            .iter()
            .filter(|f| f.open)
            .map(|f| f.prob())
            .sum();
        assert_eq!(open, rat(1, 8));
    }

    #[test]
    fn table_source_serves_explicit_groups() {
        let s = parse("a!b").unwrap();
        let g = TransitionGroup {
            entries: vec![crate::pts::Entry {
                prob: rat(1, 1),
                action: Action::Tau(None),
                target: Process::nil(),
            }],
        };
        let m = ProbAutomaton::from_parts(vec![(s.clone(), vec![g])]);
        assert_eq!(m.groups_of(&s).unwrap().len(), 1);
        assert!(matches!(
            m.groups_of(&parse("c!d").unwrap()),
            Err(AutomatonError::UnknownState(_))
        ));
    }
}

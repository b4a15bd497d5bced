//! Brute-force ground truth: the concrete state space of a model and an
//! independent maximal-reachability solver over it.
//!
//! Nothing here depends on the abstraction graph or the solver module.

mod oracle;

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::model::{EvalError, TargetedMdp, Valuation};

pub use oracle::{oracle_pmax, OracleResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExplicitError {
    #[error("command {command} in state ({state}): {source}")]
    Eval {
        command: usize,
        state: String,
        source: EvalError,
    },
    #[error("state budget of {limit} exceeded")]
    StateBudget { limit: usize },
    #[error("value iteration did not converge within {limit} sweeps (bounds [{lower}, {upper}])")]
    Iterations { limit: u64, lower: f64, upper: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitAction {
    /// Command index in the targeted model; `None` for the self-loop added to
    /// targets and deadlocks.
    pub command: Option<usize>,
    pub successors: Vec<(usize, f64)>,
}

/// Enumerated state space. States are numbered in breadth-first discovery
/// order from the initial valuation, which is state 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitMdp {
    pub states: Vec<Valuation>,
    pub actions: Vec<Vec<ExplicitAction>>,
    pub target: Vec<bool>,
    pub initial: usize,
}

impl ExplicitMdp {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, val: &Valuation) -> Option<usize> {
        self.states.iter().position(|s| s == val)
    }
}

/// Breadth-first closure of the initial valuation under all enabled commands.
///
/// Successors of target states are explored too, but in the returned MDP a
/// target state only has a self-loop. States without enabled commands get a
/// self-loop as well.
pub fn enumerate(model: &TargetedMdp, cap: usize) -> Result<ExplicitMdp, ExplicitError> {
    let m = model.model();
    let init = m.initial();
    let mut index: HashMap<Valuation, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    index.insert(init.clone(), 0);
    states.push(init.clone());
    queue.push_back(init);
    let mut actions = Vec::new();
    let mut target = Vec::new();

    while let Some(state) = queue.pop_front() {
        let eval_err = |command, source| ExplicitError::Eval {
            command,
            state: m.show(&state),
            source,
        };
        let is_target = model
            .is_target(&state)
            .map_err(|e| eval_err(model.target_command(), e))?;
        let enabled = m.enabled_commands(&state).map_err(|e| eval_err(usize::MAX, e))?;
        let id = target.len();
        let mut acts = Vec::new();
        for c in enabled {
            let dist = m.eval_distribution(c, &state).map_err(|e| eval_err(c, e))?;
            let mut successors = Vec::with_capacity(dist.len());
            for (next, p) in dist {
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if states.len() >= cap {
                            return Err(ExplicitError::StateBudget { limit: cap });
                        }
                        let j = states.len();
                        index.insert(next.clone(), j);
                        states.push(next.clone());
                        queue.push_back(next);
                        j
                    }
                };
                successors.push((j, *p.numer() as f64 / *p.denom() as f64));
            }
            acts.push(ExplicitAction {
                command: Some(c),
                successors,
            });
        }
        if is_target || acts.is_empty() {
            acts = vec![ExplicitAction {
                command: None,
                successors: vec![(id, 1.0)],
            }];
        }
        actions.push(acts);
        target.push(is_target);
    }
    Ok(ExplicitMdp {
        states,
        actions,
        target,
        initial: 0,
    })
}

/// Number of reachable concrete states.
pub fn count_reachable(model: &TargetedMdp, cap: usize) -> Result<usize, ExplicitError> {
    enumerate(model, cap).map(|e| e.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::bundled;
    use crate::model::{Assignment, Command, Expr, ReachabilityQuery, SymbolicMdp, VarDecl};
    use std::collections::HashSet;

    fn targeted(name: &str) -> TargetedMdp {
        let (m, q) = bundled(name).unwrap();
        TargetedMdp::new(&m, &q).unwrap()
    }

    /// Independent depth-first count of reachable valuations.
    fn dfs_count(tm: &TargetedMdp) -> usize {
        let m = tm.model();
        let mut seen = HashSet::new();
        let mut stack = vec![m.initial()];
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            for c in m.enabled_commands(&s).unwrap() {
                for b in &m.commands()[c].branches {
                    stack.push(m.eval_assignment(&b.assignment, &s).unwrap());
                }
            }
        }
        seen.len()
    }

    #[test]
    fn bundled_state_counts() {
        let running = targeted("running_example_bounded");
        let e = enumerate(&running, 1000).unwrap();
        assert_eq!(e.len(), dfs_count(&running));
        assert_eq!(e.len(), 9);
        assert_eq!(count_reachable(&targeted("coin"), 10), Ok(3));
        assert_eq!(count_reachable(&targeted("irrelevant"), 1000), Ok(100));
    }

    #[test]
    fn bfs_order_and_absorbing_targets() {
        let e = enumerate(&targeted("coin"), 10).unwrap();
        assert_eq!(
            e.states,
            vec![
                Valuation::new(vec![0]),
                Valuation::new(vec![1]),
                Valuation::new(vec![2])
            ]
        );
        assert_eq!(e.target, vec![false, true, false]);
        assert_eq!(e.actions[1][0].successors, vec![(1, 1.0)]);
        assert_eq!(e.actions[2][0].command, None);
        assert_eq!(e.actions[0][0].successors, vec![(1, 0.5), (2, 0.5)]);
    }

    #[test]
    fn trivial_models() {
        let m = SymbolicMdp::new(
            vec![VarDecl::int("x", 0, 1, 0)],
            vec![Command::dirac(
                Expr::eq(Expr::int_var(0), Expr::Int(1)),
                Assignment::identity(),
            )],
        )
        .unwrap();
        let tm = TargetedMdp::new(&m, &ReachabilityQuery { target: Expr::Bool(false) }).unwrap();
        let e = enumerate(&tm, 10).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.actions[0].len(), 1);
        assert_eq!(e.actions[0][0].command, None);
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            count_reachable(&targeted("irrelevant"), 50),
            Err(ExplicitError::StateBudget { limit: 50 })
        );
    }
}

use crate::explicit::ExplicitMdp;
use crate::pasg::{NodeStatus, Pasg};

use super::SolveError;

/// Read-only access to a finite MDP with double-precision probabilities.
/// Target states are absorbing.
pub trait MdpView {
    fn num_states(&self) -> usize;

    fn initial(&self) -> usize;

    fn is_target(&self, s: usize) -> bool;

    fn num_actions(&self, s: usize) -> usize;

    fn successors(&self, s: usize, a: usize) -> &[(usize, f64)];
}

/// Compressed adjacency storage for an [`MdpView`].
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMdp {
    initial: usize,
    target: Vec<bool>,
    /// `action_start[s]..action_start[s + 1]` are the actions of `s`.
    action_start: Vec<usize>,
    /// `succ_start[a]..succ_start[a + 1]` index `succ` for global action `a`.
    succ_start: Vec<usize>,
    succ: Vec<(usize, f64)>,
}

impl SparseMdp {
    /// Builds a view from per-state action lists. Actions of target states
    /// are replaced by a self-loop, as is an empty action list.
    pub fn from_actions(
        initial: usize,
        target: Vec<bool>,
        actions: Vec<Vec<Vec<(usize, f64)>>>,
    ) -> Result<Self, SolveError> {
        let n = target.len();
        if actions.len() != n || initial >= n {
            return Err(SolveError::Contract(format!(
                "{} action lists and initial state {initial} for {n} states",
                actions.len()
            )));
        }
        let mut action_start = Vec::with_capacity(n + 1);
        let mut succ_start = vec![0];
        let mut succ = Vec::new();
        for (s, acts) in actions.into_iter().enumerate() {
            action_start.push(succ_start.len() - 1);
            let acts = if target[s] || acts.is_empty() {
                vec![vec![(s, 1.0)]]
            } else {
                acts
            };
            for dist in acts {
                let total: f64 = dist.iter().map(|&(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-12 || dist.iter().any(|&(t, p)| t >= n || p < 0.0) {
                    return Err(SolveError::Contract(format!(
                        "state {s}: malformed distribution {dist:?}"
                    )));
                }
                succ.extend(dist);
                succ_start.push(succ.len());
            }
        }
        action_start.push(succ_start.len() - 1);
        Ok(SparseMdp {
            initial,
            target,
            action_start,
            succ_start,
            succ,
        })
    }

    pub fn from_explicit(e: &ExplicitMdp) -> Self {
        let actions = e
            .actions
            .iter()
            .map(|acts| acts.iter().map(|a| a.successors.clone()).collect())
            .collect();
        SparseMdp::from_actions(e.initial, e.target.clone(), actions)
            .expect("enumerated MDPs are well formed")
    }
}

impl MdpView for SparseMdp {
    fn num_states(&self) -> usize {
        self.target.len()
    }

    fn initial(&self) -> usize {
        self.initial
    }

    fn is_target(&self, s: usize) -> bool {
        self.target[s]
    }

    fn num_actions(&self, s: usize) -> usize {
        self.action_start[s + 1] - self.action_start[s]
    }

    fn successors(&self, s: usize, a: usize) -> &[(usize, f64)] {
        let g = self.action_start[s] + a;
        &self.succ[self.succ_start[g]..self.succ_start[g + 1]]
    }
}

pub(crate) fn prob_f64(p: &crate::model::Prob) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

/// The MDP induced by a finished graph: one action per transition edge of a
/// non-covered node, a single cover action for covered nodes. Targets and
/// deadlocks become self-loops. State `i` is node `i`.
pub fn pasg_as_mdp<S>(pasg: &Pasg<S>) -> Result<SparseMdp, SolveError> {
    if !pasg.is_finished() {
        return Err(SolveError::Contract(
            "graph still has waiting nodes".into(),
        ));
    }
    let mut target = Vec::with_capacity(pasg.len());
    let mut actions = Vec::with_capacity(pasg.len());
    for id in pasg.node_ids() {
        let node = pasg.node(id);
        target.push(node.target);
        let acts = match node.status {
            NodeStatus::Covered => vec![vec![(node.coverer.expect("covered node").0, 1.0)]],
            _ => node
                .out_edges
                .iter()
                .map(|&e| {
                    pasg.edge(e)
                        .branches
                        .iter()
                        .map(|b| (b.target.0, prob_f64(&b.prob)))
                        .collect()
                })
                .collect(),
        };
        actions.push(acts);
    }
    SparseMdp::from_actions(pasg.root().0, target, actions)
}

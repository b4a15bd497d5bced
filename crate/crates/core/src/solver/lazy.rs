use std::time::Instant;

use crate::domain::AbstractDomain;
use crate::model::TargetedMdp;
use crate::pasg::{construct, ExploreConfig, Explorer, NodeId, NodeStatus, Pasg, PasgError};

use super::brtdp::{run, Step, TraceSpace};
use super::view::prob_f64;
use super::{bounded_value_iteration, pasg_as_mdp, BrtdpConfig, SolveError, SolveResult, TraceEvent};

/// A solver run on an abstraction graph, with the graph as far as it was
/// built.
#[derive(Debug)]
pub struct LazyRun<S> {
    pub pasg: Pasg<S>,
    pub outcome: Result<SolveResult, SolveError>,
}

fn budget_error(e: PasgError, partial: SolveResult) -> SolveError {
    match e {
        PasgError::NodeBudget { limit } => SolveError::Budget {
            what: "node",
            limit: limit as u64,
            partial,
        },
        other => SolveError::Pasg(other),
    }
}

fn unsolved(start: Instant) -> SolveResult {
    SolveResult {
        lower: 0.0,
        upper: 1.0,
        iterations: 0,
        states: 0,
        time_ms: start.elapsed().as_millis() as u64,
    }
}

/// Builds the finished graph, then runs bounded value iteration on it.
pub fn lazy_bvi<D: AbstractDomain>(
    model: &TargetedMdp,
    domain: &D,
    explore: ExploreConfig,
    eps: f64,
    max_sweeps: u64,
) -> LazyRun<D::State> {
    let start = Instant::now();
    let pasg = match construct(model, domain, explore) {
        Ok(p) => p,
        Err(partial) => {
            let partial = *partial;
            return LazyRun {
                pasg: partial.pasg,
                outcome: Err(budget_error(partial.error, unsolved(start))),
            };
        }
    };
    let outcome = pasg_as_mdp(&pasg)
        .and_then(|view| bounded_value_iteration(&view, eps, max_sweeps))
        .map(|mut r| {
            r.time_ms = start.elapsed().as_millis() as u64;
            r
        });
    LazyRun { pasg, outcome }
}

struct LazySpace<'a, D: AbstractDomain> {
    explorer: Explorer<'a, D>,
}

impl<D: AbstractDomain> TraceSpace for LazySpace<'_, D> {
    fn initial(&self) -> usize {
        0
    }

    fn materialize(&mut self, s: usize) -> Result<(), SolveError> {
        let n = NodeId(s);
        if self.explorer.pasg().node(n).status != NodeStatus::Waiting {
            return Ok(());
        }
        self.explorer
            .process(n)
            .map_err(|e| budget_error(e, unsolved(Instant::now())))
    }

    fn step(&self, s: usize) -> Step {
        let pasg = self.explorer.pasg();
        let node = pasg.node(NodeId(s));
        match node.status {
            NodeStatus::Waiting => Step::Unexplored,
            NodeStatus::Covered => {
                Step::Choices(vec![vec![(node.coverer.expect("covered node").0, 1.0)]])
            }
            NodeStatus::Expanded if node.target => Step::Target,
            NodeStatus::Expanded if node.out_edges.is_empty() => Step::Deadlock,
            NodeStatus::Expanded => Step::Choices(
                node.out_edges
                    .iter()
                    .map(|&e| {
                        pasg.edge(e)
                            .branches
                            .iter()
                            .map(|b| (b.target.0, prob_f64(&b.prob)))
                            .collect()
                    })
                    .collect(),
            ),
        }
    }

    fn num_states(&self) -> usize {
        self.explorer.pasg().len()
    }
}

/// BRTDP whose traces drive graph construction: stepping into a waiting node
/// covers or expands it first. `on_trace` sees the graph and the bounds of
/// the root after every trace.
pub fn lazy_brtdp<D: AbstractDomain>(
    model: &TargetedMdp,
    domain: &D,
    explore: ExploreConfig,
    config: &BrtdpConfig,
    mut on_trace: impl FnMut(&Pasg<D::State>, &TraceEvent),
) -> LazyRun<D::State> {
    let mut space = LazySpace {
        explorer: Explorer::new(model, domain, explore),
    };
    let outcome = run(&mut space, config, |s, e| on_trace(s.explorer.pasg(), e));
    LazyRun {
        pasg: space.explorer.into_pasg(),
        outcome,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ExplDomain, PredDomain};
    use crate::explicit::{enumerate, oracle_pmax};
    use crate::harness::bundled;
    use crate::pasg::{check_well_labeled, A2Mode};
    use crate::solver::{Heuristic, MdpView};

    fn setup(name: &str) -> (TargetedMdp, f64) {
        let (m, q) = bundled(name).unwrap();
        let tm = TargetedMdp::new(&m, &q).unwrap();
        let exact = oracle_pmax(&enumerate(&tm, 10_000).unwrap(), 1e-12)
            .unwrap()
            .value();
        (tm, exact)
    }

    #[test]
    fn lazy_bvi_matches_oracle() {
        for name in ["coin", "running_example_bounded", "irrelevant"] {
            let (tm, exact) = setup(name);
            let expl = ExplDomain::new(tm.model());
            let r = lazy_bvi(&tm, &expl, ExploreConfig::default(), 1e-9, 1_000_000);
            let res = r.outcome.unwrap();
            assert!(res.lower - 1e-9 <= exact && exact <= res.upper + 1e-9, "{name}: {res:?}");
            let pred = PredDomain::new(tm.model());
            let r = lazy_bvi(&tm, &pred, ExploreConfig::default(), 1e-9, 1_000_000);
            let res = r.outcome.unwrap();
            assert!(res.lower - 1e-9 <= exact && exact <= res.upper + 1e-9, "{name}: {res:?}");
        }
    }

    #[test]
    fn lazy_brtdp_brackets_and_keeps_graph_well_labeled() {
        for name in ["coin", "running_example_bounded", "irrelevant"] {
            let (tm, exact) = setup(name);
            let pred = PredDomain::new(tm.model());
            for heuristic in [Heuristic::Random, Heuristic::DiffBased] {
                let cfg = BrtdpConfig {
                    heuristic,
                    seed: 3,
                    ..Default::default()
                };
                let mut n = 0;
                let r = lazy_brtdp(&tm, &pred, ExploreConfig::default(), &cfg, |p, e| {
                    assert!(e.lower - 1e-9 <= exact && exact <= e.upper + 1e-9);
                    if n % 50 == 0 {
                        assert_eq!(check_well_labeled(p, &tm, &pred, A2Mode::Exact), vec![]);
                    }
                    n += 1;
                });
                let res = r.outcome.unwrap();
                assert!(res.upper - res.lower <= 1e-6, "{name}: {res:?}");
            }
        }
    }

    #[test]
    fn lazy_brtdp_may_leave_irrelevant_parts_unbuilt() {
        let (tm, _) = setup("irrelevant");
        let expl = ExplDomain::new(tm.model());
        let full = construct(&tm, &expl, ExploreConfig::default()).unwrap();
        let r = lazy_brtdp(&tm, &expl, ExploreConfig::default(), &BrtdpConfig::default(), |_, _| {});
        assert!(r.outcome.is_ok());
        assert!(r.pasg.len() <= full.len());
    }

    #[test]
    fn node_budget_is_reported() {
        let (tm, _) = setup("irrelevant");
        let expl = ExplDomain::new(tm.model());
        let tight = ExploreConfig {
            max_nodes: 5,
            ..Default::default()
        };
        let r = lazy_bvi(&tm, &expl, tight, 1e-6, 1000);
        assert!(matches!(r.outcome, Err(SolveError::Budget { what: "node", .. })));
        assert!(r.pasg.len() <= 5);
        let r = lazy_brtdp(&tm, &expl, tight, &BrtdpConfig::default(), |_, _| {});
        assert!(matches!(r.outcome, Err(SolveError::Budget { what: "node", .. })));
    }

    #[test]
    fn pasg_view_shape() {
        let (tm, _) = setup("running_example_bounded");
        let expl = ExplDomain::new(tm.model());
        let p = construct(&tm, &expl, ExploreConfig::default()).unwrap();
        let v = pasg_as_mdp(&p).unwrap();
        assert_eq!(v.num_states(), p.len());
        for id in p.node_ids() {
            let node = p.node(id);
            if let Some(c) = node.coverer {
                assert_eq!(v.successors(id.0, 0), &[(c.0, 1.0)]);
                assert_eq!(v.num_actions(id.0), 1);
            } else if node.target {
                assert!(v.is_target(id.0));
                assert_eq!(v.successors(id.0, 0), &[(id.0, 1.0)]);
            } else {
                assert_eq!(v.num_actions(id.0), node.out_edges.len().max(1));
            }
        }
        let unfinished = Explorer::new(&tm, &expl, ExploreConfig::default());
        assert!(matches!(
            pasg_as_mdp(unfinished.pasg()),
            Err(SolveError::Contract(_))
        ));
    }
}

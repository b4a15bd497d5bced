use crate::domain::AbstractDomain;
use crate::model::{TargetedMdp, Valuation};

use super::{NodeId, Pasg};

/// Checks that every concrete trace of length at most `k` from the initial
/// valuation is matched by a graph trace (with cover steps dropped) whose
/// nodes contain the visited states.
pub fn trace_correspondence<D: AbstractDomain>(
    pasg: &Pasg<D::State>,
    model: &TargetedMdp,
    domain: &D,
    k: usize,
) -> bool {
    let init = model.model().initial();
    let root = pasg.root();
    if !domain.contains(&pasg.node(root).label, &init) {
        return false;
    }
    extend(pasg, model, domain, &init, &[root], k)
}

/// `candidates` are the graph nodes that can end a matching trace of the
/// prefix leading to `state`.
fn extend<D: AbstractDomain>(
    pasg: &Pasg<D::State>,
    model: &TargetedMdp,
    domain: &D,
    state: &Valuation,
    candidates: &[NodeId],
    remaining: usize,
) -> bool {
    if remaining == 0 {
        return true;
    }
    let m = model.model();
    let Ok(enabled) = m.enabled_commands(state) else {
        return false;
    };
    for c in enabled {
        let command = &m.commands()[c];
        let mut successors: Vec<Valuation> = Vec::new();
        for b in &command.branches {
            let Ok(next) = m.eval_assignment(&b.assignment, state) else {
                return false;
            };
            if !successors.contains(&next) {
                successors.push(next);
            }
        }
        for next in successors {
            let mut matched: Vec<NodeId> = Vec::new();
            for &n in candidates {
                let source = pasg.node(n).coverer.unwrap_or(n);
                for &e in &pasg.node(source).out_edges {
                    let edge = pasg.edge(e);
                    if edge.command != c {
                        continue;
                    }
                    for b in &edge.branches {
                        let assignment = &command.branches[b.assignment].assignment;
                        let image = m.eval_assignment(assignment, state);
                        if image.as_ref() == Ok(&next)
                            && domain.contains(&pasg.node(b.target).label, &next)
                            && !matched.contains(&b.target)
                        {
                            matched.push(b.target);
                        }
                    }
                }
            }
            if matched.is_empty() || !extend(pasg, model, domain, &next, &matched, remaining - 1) {
                return false;
            }
        }
    }
    true
}

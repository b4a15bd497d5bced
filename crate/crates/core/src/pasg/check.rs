use std::collections::HashMap;
use std::fmt;

use crate::domain::{exact_eval_bool, AbstractDomain, TriBool};
use crate::model::{TargetedMdp, Valuation};

use super::{EdgeId, NodeId, NodeStatus, Pasg};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    A1,
    A2,
    B1,
    B2,
    C1,
    C2,
    C3,
    D1,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.constraint, self.message)
    }
}

/// How guards are evaluated on abstract labels when checking A2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum A2Mode {
    /// Exact three-valued evaluation by enumerating the label's members.
    Exact,
    /// The domain's own, possibly conservative, evaluation.
    Domain,
}

/// Evaluates the well-labeledness constraints and returns every violation.
///
/// A2 and D1 are only checked on nodes that are not waiting: waitlist nodes
/// have not been refined yet. On a finished graph this is the full
/// constraint set.
pub fn check_well_labeled<D: AbstractDomain>(
    pasg: &Pasg<D::State>,
    model: &TargetedMdp,
    domain: &D,
    mode: A2Mode,
) -> Vec<Violation> {
    let m = model.model();
    let mut out = Vec::new();
    let mut report = |constraint, message: String| out.push(Violation { constraint, message });

    for id in pasg.node_ids() {
        let node = pasg.node(id);
        if !domain.contains(&node.label, &node.concrete) {
            report(
                Constraint::A1,
                format!("{id}: concrete label ({}) not in abstract label", node.concrete),
            );
        }
        if node.status == NodeStatus::Waiting {
            continue;
        }
        for (ci, c) in m.commands().iter().enumerate() {
            let concrete = match c.guard.eval_bool(&node.concrete) {
                Ok(v) => TriBool::from(v),
                Err(e) => {
                    report(Constraint::A2, format!("{id}: guard of command {ci}: {e}"));
                    continue;
                }
            };
            let abstract_value = match mode {
                A2Mode::Exact => exact_eval_bool(domain, m, &c.guard, &node.label),
                A2Mode::Domain => match domain.eval_bool(&c.guard, &node.label) {
                    Ok(v) => v,
                    Err(e) => {
                        report(Constraint::A2, format!("{id}: command {ci}: {e}"));
                        continue;
                    }
                },
            };
            if abstract_value != concrete {
                report(
                    Constraint::A2,
                    format!("{id}: guard of command {ci} is {concrete:?} on the concrete label but {abstract_value:?} on the abstract label"),
                );
            }
        }
    }

    for (ei, e) in pasg.edges.iter().enumerate() {
        let edge = EdgeId(ei);
        let source = pasg.node(e.source);
        let Some(command) = m.commands().get(e.command) else {
            report(Constraint::B1, format!("edge {ei}: unknown command {}", e.command));
            continue;
        };
        if command.guard.eval_bool(&source.concrete) != Ok(true) {
            report(
                Constraint::B1,
                format!("edge {ei}: command {} not enabled at {}", e.command, e.source),
            );
        }
        if e.branches.len() != command.branches.len() {
            report(
                Constraint::B2,
                format!("edge {ei}: {} result nodes for {} assignments", e.branches.len(), command.branches.len()),
            );
        }
        let members: Vec<Valuation> = m
            .all_valuations()
            .filter(|v| domain.contains(&source.label, v))
            .collect();
        for (i, (b, cb)) in e.branches.iter().zip(&command.branches).enumerate() {
            if b.assignment != i || b.prob != cb.prob {
                report(
                    Constraint::B2,
                    format!("edge {ei} branch {i}: probability {} / assignment {} do not match the command", b.prob, b.assignment),
                );
            }
            let child = pasg.node(b.target);
            if child.parent != Some((edge, i)) {
                report(
                    Constraint::B2,
                    format!("edge {ei} branch {i}: {} does not record this edge as its parent", b.target),
                );
            }
            match m.eval_assignment(&cb.assignment, &source.concrete) {
                Ok(next) if next == child.concrete => {}
                Ok(next) => report(
                    Constraint::B2,
                    format!("edge {ei} branch {i}: concrete label of {} is ({}), expected ({next})", b.target, child.concrete),
                ),
                Err(err) => report(Constraint::B2, format!("edge {ei} branch {i}: {err}")),
            }
            for val in &members {
                let ok = m
                    .eval_assignment(&cb.assignment, val)
                    .map(|next| domain.contains(&child.label, &next));
                if ok != Ok(true) {
                    report(
                        Constraint::B2,
                        format!("edge {ei} branch {i}: image of ({val}) escapes the abstract label of {}", b.target),
                    );
                    break;
                }
            }
        }
    }

    for (covered, coverer) in pasg.cover_edges() {
        let n = pasg.node(covered);
        let c = pasg.node(coverer);
        if covered == coverer {
            report(Constraint::C1, format!("{covered} covers itself"));
        }
        if !domain.contains(&c.label, &n.concrete) {
            report(
                Constraint::C1,
                format!("cover {covered} -> {coverer}: concrete label not in coverer's abstract label"),
            );
        }
        match domain.leq(&n.label, &c.label) {
            Ok(true) => {}
            Ok(false) => report(
                Constraint::C2,
                format!("cover {covered} -> {coverer}: abstract label not below the coverer's"),
            ),
            Err(e) => report(Constraint::C2, format!("cover {covered} -> {coverer}: {e}")),
        }
        if c.coverer.is_some() {
            report(
                Constraint::C3,
                format!("cover {covered} -> {coverer}: coverer is itself covered"),
            );
        }
    }

    let mut by_concrete: HashMap<&Valuation, NodeId> = HashMap::new();
    for id in pasg.node_ids() {
        let node = pasg.node(id);
        if node.status != NodeStatus::Expanded {
            continue;
        }
        if let Some(other) = by_concrete.insert(&node.concrete, id) {
            report(
                Constraint::D1,
                format!("{other} and {id} share concrete label ({}) and are both non-covered", node.concrete),
            );
        }
    }
    out
}

//! Probabilistic adaptive simulation graphs.
//!
//! Nodes carry a concrete valuation and an abstract label. Transition edges
//! mirror command distributions branch by branch; cover edges redirect a node
//! to a representative whose abstract label subsumes it. [`Explorer`] grows
//! the graph one waitlist node at a time and repairs labels with the block
//! cascade whenever an abstract label is strengthened.

mod check;
mod export;
mod trace;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::domain::{AbstractDomain, DomainError, TriBool};
use crate::model::{EvalError, Expr, Prob, TargetedMdp, Valuation};

pub use check::{check_well_labeled, A2Mode, Constraint, Violation};
pub use export::write_debug;
pub use trace::trace_correspondence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeStatus {
    Waiting,
    Expanded,
    Covered,
}

impl NodeStatus {
    pub fn name(self) -> &'static str {
        match self {
            NodeStatus::Waiting => "waiting",
            NodeStatus::Expanded => "expanded",
            NodeStatus::Covered => "covered",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node<S> {
    pub concrete: Valuation,
    pub label: S,
    pub status: NodeStatus,
    pub target: bool,
    /// Incoming transition edge and the branch index that created this node.
    pub parent: Option<(EdgeId, usize)>,
    pub out_edges: Vec<EdgeId>,
    /// Outgoing cover edge.
    pub coverer: Option<NodeId>,
    /// Nodes covered by this one.
    pub covering: BTreeSet<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeBranch {
    pub prob: Prob,
    /// Index into the command's branch list.
    pub assignment: usize,
    pub target: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionEdge {
    pub source: NodeId,
    pub command: usize,
    pub branches: Vec<EdgeBranch>,
}

/// Graph data; mutated only through [`Explorer`] (or directly in tests that
/// build negative cases).
#[derive(Clone, Debug)]
pub struct Pasg<S> {
    pub nodes: Vec<Node<S>>,
    pub edges: Vec<TransitionEdge>,
    waitlist: VecDeque<NodeId>,
    queued: Vec<bool>,
}

impl<S> Pasg<S> {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, n: NodeId) -> &Node<S> {
        &self.nodes[n.0]
    }

    pub fn node_mut(&mut self, n: NodeId) -> &mut Node<S> {
        &mut self.nodes[n.0]
    }

    pub fn edge(&self, e: EdgeId) -> &TransitionEdge {
        &self.edges[e.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn covered_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.status == NodeStatus::Covered)
            .count()
    }

    pub fn cover_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.coverer.map(|c| (NodeId(i), c)))
    }

    /// Waiting nodes still queued, in queue order.
    pub fn waitlist(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        self.waitlist
            .iter()
            .copied()
            .filter(|n| {
                let live = self.queued[n.0] && !seen[n.0];
                seen[n.0] = true;
                live
            })
            .collect()
    }

    /// No node is waiting: every node is expanded or covered.
    pub fn is_finished(&self) -> bool {
        self.nodes.iter().all(|n| n.status != NodeStatus::Waiting)
    }

    fn enqueue(&mut self, n: NodeId) {
        if !self.queued[n.0] {
            self.queued[n.0] = true;
            self.waitlist.push_back(n);
        }
    }

    fn dequeue(&mut self, n: NodeId) {
        self.queued[n.0] = false;
    }

    fn pop(&mut self, policy: WaitlistPolicy) -> Option<NodeId> {
        loop {
            let n = match policy {
                WaitlistPolicy::Lifo => self.waitlist.pop_back(),
                WaitlistPolicy::Fifo => self.waitlist.pop_front(),
            }?;
            if self.queued[n.0] {
                self.queued[n.0] = false;
                return Some(n);
            }
        }
    }

    /// Removes cover edge `(covered, coverer)` and re-queues the covered node.
    pub fn uncover(&mut self, covered: NodeId) {
        if let Some(c) = self.nodes[covered.0].coverer.take() {
            self.nodes[c.0].covering.remove(&covered);
            self.nodes[covered.0].status = NodeStatus::Waiting;
            self.enqueue(covered);
        }
    }

    /// Adds cover edge `(covered, coverer)`.
    pub fn cover(&mut self, covered: NodeId, coverer: NodeId) {
        self.dequeue(covered);
        let node = &mut self.nodes[covered.0];
        node.coverer = Some(coverer);
        node.status = NodeStatus::Covered;
        self.nodes[coverer.0].covering.insert(covered);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum WaitlistPolicy {
    /// Depth-first.
    #[default]
    Lifo,
    /// Breadth-first.
    Fifo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreConfig {
    pub policy: WaitlistPolicy,
    pub max_nodes: usize,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            policy: WaitlistPolicy::Lifo,
            max_nodes: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PasgError {
    #[error("command {command} in state ({state}): {source}")]
    Eval {
        command: usize,
        state: String,
        source: EvalError,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("PASG contract violated: {0}")]
    Contract(String),
    #[error("node budget of {limit} exceeded")]
    NodeBudget { limit: usize },
}

impl PasgError {
    pub fn is_budget(&self) -> bool {
        matches!(self, PasgError::NodeBudget { .. })
    }
}

/// Failed construction, with the graph as it was when the error surfaced.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct Partial<S: fmt::Debug> {
    pub error: PasgError,
    pub pasg: Pasg<S>,
}

/// Builds a finished PASG for the targeted model.
pub fn construct<D: AbstractDomain>(
    model: &TargetedMdp,
    domain: &D,
    config: ExploreConfig,
) -> Result<Pasg<D::State>, Box<Partial<D::State>>> {
    let mut ex = Explorer::new(model, domain, config);
    match ex.run(|_| ()) {
        Ok(()) => Ok(ex.into_pasg()),
        Err(error) => Err(Box::new(Partial {
            error,
            pasg: ex.into_pasg(),
        })),
    }
}

/// Step-wise PASG construction.
pub struct Explorer<'a, D: AbstractDomain> {
    model: &'a TargetedMdp,
    domain: &'a D,
    config: ExploreConfig,
    pasg: Pasg<D::State>,
    by_concrete: HashMap<Valuation, Vec<NodeId>>,
    /// Expanded nodes in expansion order; expanded nodes never change status.
    expanded: Vec<NodeId>,
}

impl<'a, D: AbstractDomain> Explorer<'a, D> {
    /// A graph with the root `L_c = val₀, L_a = ⊤` on the waitlist.
    pub fn new(model: &'a TargetedMdp, domain: &'a D, config: ExploreConfig) -> Self {
        let mut ex = Explorer {
            model,
            domain,
            config,
            pasg: Pasg {
                nodes: Vec::new(),
                edges: Vec::new(),
                waitlist: VecDeque::new(),
                queued: Vec::new(),
            },
            by_concrete: HashMap::new(),
            expanded: Vec::new(),
        };
        let root = ex.add_node(model.model().initial(), None);
        ex.pasg.enqueue(root);
        ex
    }

    pub fn pasg(&self) -> &Pasg<D::State> {
        &self.pasg
    }

    pub fn into_pasg(self) -> Pasg<D::State> {
        self.pasg
    }

    pub fn model(&self) -> &TargetedMdp {
        self.model
    }

    pub fn domain(&self) -> &D {
        self.domain
    }

    fn add_node(&mut self, concrete: Valuation, parent: Option<(EdgeId, usize)>) -> NodeId {
        let id = NodeId(self.pasg.nodes.len());
        self.by_concrete.entry(concrete.clone()).or_default().push(id);
        self.pasg.nodes.push(Node {
            concrete,
            label: self.domain.top(),
            status: NodeStatus::Waiting,
            target: false,
            parent,
            out_edges: Vec::new(),
            coverer: None,
            covering: BTreeSet::new(),
        });
        self.pasg.queued.push(false);
        id
    }

    /// Processes waitlist nodes until none is left, calling `on_boundary`
    /// after each one (once its block cascades have settled).
    pub fn run(&mut self, mut on_boundary: impl FnMut(&Pasg<D::State>)) -> Result<(), PasgError> {
        while let Some(n) = self.pasg.pop(self.config.policy) {
            self.process(n)?;
            on_boundary(&self.pasg);
        }
        Ok(())
    }

    /// Covers `n` if possible, otherwise expands it. `n` must be waiting.
    pub fn process(&mut self, n: NodeId) -> Result<(), PasgError> {
        self.pasg.dequeue(n);
        if self.try_cover(n)?.is_none() {
            self.expand(n)?;
        }
        Ok(())
    }

    /// Looks for an expanded node whose abstract label contains `L_c(n)`;
    /// exact concrete-label matches are tried first.
    fn find_coverer(&self, n: NodeId) -> Option<NodeId> {
        let concrete = &self.pasg.node(n).concrete;
        let eligible = |c: NodeId| {
            c != n
                && self.pasg.node(c).status == NodeStatus::Expanded
                && self.domain.contains(&self.pasg.node(c).label, concrete)
        };
        if let Some(same) = self.by_concrete.get(concrete) {
            if let Some(&c) = same.iter().find(|&&c| eligible(c)) {
                return Some(c);
            }
        }
        self.expanded.iter().copied().find(|&c| eligible(c))
    }

    /// Adds a cover edge from `n` when an eligible coverer exists, then
    /// strengthens `n` so that its label is below the coverer's.
    pub fn try_cover(&mut self, n: NodeId) -> Result<Option<NodeId>, PasgError> {
        if self.pasg.node(n).status != NodeStatus::Waiting {
            return Err(PasgError::Contract(format!("try_cover on non-waiting node {n}")));
        }
        let Some(coverer) = self.find_coverer(n) else {
            return Ok(None);
        };
        self.pasg.cover(n, coverer);
        let phi = Expr::not(self.domain.to_expr(&self.pasg.node(coverer).label));
        self.block_node(n, phi)?;
        Ok(Some(coverer))
    }

    /// Expands waiting node `n`: one transition edge per command enabled in
    /// `L_c(n)`, strengthening `L_a(n)` until every guard has a definite value
    /// on it.
    pub fn expand(&mut self, n: NodeId) -> Result<(), PasgError> {
        if self.pasg.node(n).status != NodeStatus::Waiting {
            return Err(PasgError::Contract(format!("expand on non-waiting node {n}")));
        }
        self.pasg.dequeue(n);
        let model = self.model.model();
        let concrete = self.pasg.node(n).concrete.clone();
        let enabled = model
            .enabled_commands(&concrete)
            .map_err(|source| self.eval_error(usize::MAX, &concrete, source))?;
        let new_nodes: usize = enabled
            .iter()
            .map(|&c| model.commands()[c].branches.len())
            .sum();
        if self.pasg.len() + new_nodes > self.config.max_nodes {
            return Err(PasgError::NodeBudget {
                limit: self.config.max_nodes,
            });
        }

        let mut children = Vec::new();
        for (ci, command) in model.commands().iter().enumerate() {
            let is_enabled = enabled.contains(&ci);
            let abstract_value = self
                .domain
                .eval_bool(&command.guard, &self.pasg.node(n).label)?;
            if is_enabled {
                if ci == self.model.target_command() {
                    self.pasg.node_mut(n).target = true;
                }
                if abstract_value == TriBool::Unknown {
                    self.block_node(n, Expr::not(command.guard.clone()))?;
                }
                let mut targets = Vec::with_capacity(command.branches.len());
                for b in &command.branches {
                    let next = model
                        .eval_assignment(&b.assignment, &concrete)
                        .map_err(|source| self.eval_error(ci, &concrete, source))?;
                    targets.push(next);
                }
                let edge = EdgeId(self.pasg.edges.len());
                let mut branches = Vec::with_capacity(targets.len());
                for (i, next) in targets.into_iter().enumerate() {
                    let child = self.add_node(next, Some((edge, i)));
                    children.push(child);
                    branches.push(EdgeBranch {
                        prob: command.branches[i].prob,
                        assignment: i,
                        target: child,
                    });
                }
                self.pasg.edges.push(TransitionEdge {
                    source: n,
                    command: ci,
                    branches,
                });
                self.pasg.node_mut(n).out_edges.push(edge);
            } else if abstract_value == TriBool::Unknown {
                self.block_node(n, command.guard.clone())?;
            }
        }
        self.pasg.node_mut(n).status = NodeStatus::Expanded;
        self.expanded.push(n);
        for c in children {
            self.pasg.enqueue(c);
        }
        Ok(())
    }

    fn eval_error(&self, command: usize, state: &Valuation, source: EvalError) -> PasgError {
        PasgError::Eval {
            command,
            state: self.model.model().show(state),
            source,
        }
    }

    /// Removes the models of `phi` from `L_a(n)` and restores the cover and
    /// parent constraints that the strengthening may break. Requires
    /// `phi(L_c(n)) = false`.
    pub fn block_node(&mut self, n: NodeId, phi: Expr) -> Result<(), PasgError> {
        let mut stack = vec![(n, phi)];
        while let Some((n, phi)) = stack.pop() {
            let node = self.pasg.node(n);
            match phi.eval_bool(&node.concrete) {
                Ok(false) => {}
                Ok(true) => {
                    return Err(PasgError::Contract(format!(
                        "block on {n} with a formula true in its concrete label"
                    )))
                }
                Err(e) => return Err(PasgError::Contract(format!("block on {n}: {e}"))),
            }
            let label = self.domain.block(&node.label, &phi, &node.concrete)?;
            if label == node.label {
                continue;
            }
            let label_expr = self.domain.to_expr(&label);
            self.pasg.node_mut(n).label = label;

            let mut tasks = Vec::new();
            let covering: Vec<NodeId> = self.pasg.node(n).covering.iter().copied().collect();
            for c in covering {
                if self
                    .domain
                    .contains(&self.pasg.node(n).label, &self.pasg.node(c).concrete)
                {
                    tasks.push((c, Expr::not(label_expr.clone())));
                } else {
                    self.pasg.uncover(c);
                }
            }
            if let Some((edge, i)) = self.pasg.node(n).parent {
                let e = self.pasg.edge(edge);
                let assignment = &self.model.model().commands()[e.command].branches
                    [e.branches[i].assignment]
                    .assignment;
                let wp = assignment.weakest_precondition(&label_expr);
                tasks.push((e.source, Expr::not(wp).simplify()));
            }
            stack.extend(tasks.into_iter().rev());
        }
        Ok(())
    }
}

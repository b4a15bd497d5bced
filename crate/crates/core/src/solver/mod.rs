//! Numerical back-ends: qualitative precomputation, bounded value
//! iteration, BRTDP and the lazy variants that solve the abstraction graph.

mod brtdp;
mod bvi;
mod graph;
mod lazy;
mod view;

use thiserror::Error;

use crate::pasg::PasgError;

pub use brtdp::{brtdp, BrtdpConfig, Heuristic, TraceEvent};
pub use bvi::bounded_value_iteration;
pub use graph::{mec_decomposition, prob0, prob1max};
pub use lazy::{lazy_brtdp, lazy_bvi, LazyRun};
pub use view::{pasg_as_mdp, MdpView, SparseMdp};

/// Bounds on the maximal reachability probability of the initial state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveResult {
    pub lower: f64,
    pub upper: f64,
    /// Sweeps for value iteration, traces for BRTDP.
    pub iterations: u64,
    /// States of the view (value iteration) or states visited (BRTDP).
    pub states: usize,
    pub time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("{what} budget of {limit} exhausted")]
    Budget {
        what: &'static str,
        limit: u64,
        partial: SolveResult,
    },
    #[error("solver contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Pasg(PasgError),
}

impl SolveError {
    pub fn is_budget(&self) -> bool {
        matches!(self, SolveError::Budget { .. })
    }
}

//! Maximal reachability probabilities for symbolic MDPs, computed on a lazily
//! refined abstraction of the state space.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: expressions, valuations and guarded-command MDPs.
//! * [`domain`]: the explicit-value and predicate abstract domains.
//! * [`pasg`]: construction and checking of the abstraction graph.
//! * [`solver`]: qualitative precomputations, bounded value iteration and
//!   BRTDP, including the variant that grows the graph on demand.
//! * [`explicit`]: brute-force state enumeration and an independent
//!   value-iteration oracle.
//! * [`harness`]: the `.gmc` model format, run configuration and statistics.

pub mod domain;
pub mod explicit;
pub mod harness;
pub mod model;
pub mod pasg;
pub mod solver;

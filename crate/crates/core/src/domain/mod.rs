//! Abstract domains used to label PASG nodes.
//!
//! A domain never exposes abstraction or concretisation functions directly;
//! the engine only needs membership, ordering, three-valued evaluation of
//! guards, the `block` strengthening and a boolean-expression view.

mod entail;
mod expl;
mod pred;

use std::fmt::Debug;

use thiserror::Error;

use crate::model::{Expr, SymbolicMdp, Valuation};

pub use entail::{EntailmentBackend, EnumerationBackend, FallbackBackend, SmtBackend};
pub use expl::{ExplDomain, ExplState};
pub use pred::PredDomain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TriBool {
    True,
    False,
    Unknown,
}

impl From<bool> for TriBool {
    fn from(b: bool) -> Self {
        if b {
            TriBool::True
        } else {
            TriBool::False
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    /// A caller broke an operation's precondition.
    #[error("domain contract violated: {0}")]
    Contract(String),
    /// The entailment backend could not answer.
    #[error("entailment oracle failure: {0}")]
    Oracle(String),
}

/// Which domain implementation to use; handy for dispatching from
/// configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainKind {
    Expl,
    Pred,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Expl => "expl",
            DomainKind::Pred => "pred",
        }
    }
}

pub trait AbstractDomain {
    type State: Clone + Debug + PartialEq;

    fn kind(&self) -> DomainKind;

    fn top(&self) -> Self::State;

    fn bottom(&self) -> Self::State;

    /// Membership of a concrete valuation.
    fn contains(&self, s: &Self::State, val: &Valuation) -> bool;

    /// Partial order: `a` describes no more states than `b`.
    fn leq(&self, a: &Self::State, b: &Self::State) -> Result<bool, DomainError>;

    /// Three-valued evaluation of `b` over every state in `s`. `True`/`False`
    /// are only returned when they hold for all members; implementations may
    /// answer `Unknown` conservatively. Bottom yields `False`.
    fn eval_bool(&self, b: &Expr, s: &Self::State) -> Result<TriBool, DomainError>;

    /// Strengthens `s` so that `b` is false everywhere in the result while
    /// keeping `val`. Requires `val ∈ s` and `b(val) = false`.
    fn block(&self, s: &Self::State, b: &Expr, val: &Valuation) -> Result<Self::State, DomainError>;

    /// Boolean expression whose models are exactly the members of `s`.
    fn to_expr(&self, s: &Self::State) -> Expr;
}

/// Shared precondition check for `block`.
pub(crate) fn check_block_pre<D: AbstractDomain + ?Sized>(
    d: &D,
    s: &D::State,
    b: &Expr,
    val: &Valuation,
) -> Result<(), DomainError> {
    if !d.contains(s, val) {
        return Err(DomainError::Contract(format!(
            "block: valuation {val} is not contained in {s:?}"
        )));
    }
    match b.eval_bool(val) {
        Ok(false) => Ok(()),
        Ok(true) => Err(DomainError::Contract(format!(
            "block: expression holds in the kept valuation {val}"
        ))),
        Err(e) => Err(DomainError::Contract(format!("block: {e}"))),
    }
}

/// Exact three-valued evaluation by enumerating every valuation of the model
/// that `contains` accepts. Independent of the domain's own `eval_bool`;
/// used by the well-labeledness checker and in tests.
pub fn exact_eval_bool<D: AbstractDomain>(
    d: &D,
    m: &SymbolicMdp,
    b: &Expr,
    s: &D::State,
) -> TriBool {
    let mut seen_true = false;
    let mut seen_false = false;
    for val in m.all_valuations() {
        if !d.contains(s, &val) {
            continue;
        }
        match b.eval_bool(&val) {
            Ok(true) => seen_true = true,
            _ => seen_false = true,
        }
        if seen_true && seen_false {
            return TriBool::Unknown;
        }
    }
    if seen_true {
        TriBool::True
    } else {
        TriBool::False
    }
}

use crate::model::{Expr, SymbolicMdp, Ty, Valuation, VarDecl, VarId};

use super::{check_block_pre, AbstractDomain, DomainError, DomainKind, TriBool};

/// Explicit-value domain: a partial valuation, or the contradiction element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExplState {
    Bottom,
    /// `tracked[i]` is the value of variable `i` if it is tracked.
    Partial(Vec<Option<i64>>),
}

impl ExplState {
    pub fn tracked(&self) -> impl Iterator<Item = (VarId, i64)> + '_ {
        let slice: &[Option<i64>] = match self {
            ExplState::Bottom => &[],
            ExplState::Partial(vals) => vals,
        };
        slice
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (VarId(i), v)))
    }

    pub fn value(&self, id: VarId) -> Option<i64> {
        match self {
            ExplState::Bottom => None,
            ExplState::Partial(vals) => vals[id.0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExplDomain {
    vars: Vec<VarDecl>,
}

impl ExplDomain {
    pub fn new(m: &SymbolicMdp) -> Self {
        ExplDomain {
            vars: m.vars().to_vec(),
        }
    }

    /// Partial valuation tracking exactly the given variables.
    pub fn state(&self, tracked: &[(VarId, i64)]) -> ExplState {
        let mut vals = vec![None; self.vars.len()];
        for (id, v) in tracked {
            vals[id.0] = Some(*v);
        }
        ExplState::Partial(vals)
    }
}

impl AbstractDomain for ExplDomain {
    type State = ExplState;

    fn kind(&self) -> DomainKind {
        DomainKind::Expl
    }

    fn top(&self) -> ExplState {
        ExplState::Partial(vec![None; self.vars.len()])
    }

    fn bottom(&self) -> ExplState {
        ExplState::Bottom
    }

    fn contains(&self, s: &ExplState, val: &Valuation) -> bool {
        match s {
            ExplState::Bottom => false,
            ExplState::Partial(_) => s.tracked().all(|(id, v)| val.get(id) == v),
        }
    }

    fn leq(&self, a: &ExplState, b: &ExplState) -> Result<bool, DomainError> {
        Ok(match (a, b) {
            (ExplState::Bottom, _) => true,
            (_, ExplState::Bottom) => false,
            (a, b) => b.tracked().all(|(id, v)| a.value(id) == Some(v)),
        })
    }

    fn eval_bool(&self, b: &Expr, s: &ExplState) -> Result<TriBool, DomainError> {
        if *s == ExplState::Bottom {
            return Ok(TriBool::False);
        }
        // only constant folding after substitution; no satisfiability search
        let residual = b.partial_eval(&|id| s.value(id));
        Ok(match residual.as_bool_const() {
            Some(c) => c.into(),
            None => TriBool::Unknown,
        })
    }

    fn block(&self, s: &ExplState, b: &Expr, val: &Valuation) -> Result<ExplState, DomainError> {
        check_block_pre(self, s, b, val)?;
        if self.eval_bool(b, s)? == TriBool::False {
            return Ok(s.clone());
        }
        let ExplState::Partial(mut vals) = s.clone() else {
            unreachable!("bottom contains no valuation")
        };
        for id in b.vars() {
            if vals[id.0].is_some() {
                continue;
            }
            vals[id.0] = Some(val.get(id));
            let next = ExplState::Partial(vals.clone());
            if self.eval_bool(b, &next)? == TriBool::False {
                return Ok(next);
            }
        }
        // every variable of b is tracked, so the residual is the constant b(val)
        Err(DomainError::Contract(
            "block: expression did not fold to a constant with all its variables tracked".into(),
        ))
    }

    fn to_expr(&self, s: &ExplState) -> Expr {
        match s {
            ExplState::Bottom => Expr::Bool(false),
            ExplState::Partial(_) => {
                let parts: Vec<Expr> = s
                    .tracked()
                    .map(|(id, v)| match self.vars[id.0].kind.ty() {
                        Ty::Bool if v != 0 => Expr::Var(id, Ty::Bool),
                        Ty::Bool => Expr::not(Expr::Var(id, Ty::Bool)),
                        Ty::Int => Expr::eq(Expr::Var(id, Ty::Int), Expr::Int(v)),
                    })
                    .collect();
                match parts.len() {
                    0 => Expr::Bool(true),
                    1 => parts.into_iter().next().unwrap(),
                    _ => Expr::And(parts),
                }
            }
        }
    }
}

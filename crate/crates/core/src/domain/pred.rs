use crate::model::{Expr, SymbolicMdp, Valuation};

use super::{
    check_block_pre, AbstractDomain, DomainError, DomainKind, EntailmentBackend,
    EnumerationBackend, TriBool,
};

/// Predicate domain: abstract states are boolean expressions over the model
/// variables, ordered by implication.
pub struct PredDomain {
    backend: Box<dyn EntailmentBackend>,
}

impl PredDomain {
    /// Predicate domain deciding entailment by enumeration.
    pub fn new(m: &SymbolicMdp) -> Self {
        Self::with_backend(Box::new(EnumerationBackend::new(m)))
    }

    pub fn with_backend(backend: Box<dyn EntailmentBackend>) -> Self {
        PredDomain { backend }
    }

    /// Flattens a conjunction and drops conjuncts implied by the others.
    fn tidy(&self, e: Expr) -> Result<Expr, DomainError> {
        let Expr::And(mut parts) = e.simplify() else {
            return Ok(e.simplify());
        };
        let mut i = parts.len();
        while i > 0 && parts.len() > 1 {
            i -= 1;
            let rest = Expr::And(
                parts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, p)| p.clone())
                    .collect(),
            );
            if self.backend.entails(&rest, &parts[i])? {
                parts.remove(i);
            }
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::And(parts)
        })
    }
}

impl AbstractDomain for PredDomain {
    type State = Expr;

    fn kind(&self) -> DomainKind {
        DomainKind::Pred
    }

    fn top(&self) -> Expr {
        Expr::Bool(true)
    }

    fn bottom(&self) -> Expr {
        Expr::Bool(false)
    }

    fn contains(&self, s: &Expr, val: &Valuation) -> bool {
        s.eval_bool(val).unwrap_or(false)
    }

    fn leq(&self, a: &Expr, b: &Expr) -> Result<bool, DomainError> {
        self.backend.entails(a, b)
    }

    fn eval_bool(&self, b: &Expr, s: &Expr) -> Result<TriBool, DomainError> {
        self.backend.classify(s, b)
    }

    fn block(&self, s: &Expr, b: &Expr, val: &Valuation) -> Result<Expr, DomainError> {
        check_block_pre(self, s, b, val)?;
        if self.backend.classify(s, b)? == TriBool::False {
            return Ok(s.clone());
        }
        self.tidy(Expr::and([s.clone(), Expr::not(b.clone())]))
    }

    fn to_expr(&self, s: &Expr) -> Expr {
        s.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CmpOp, VarDecl};

    fn model() -> SymbolicMdp {
        SymbolicMdp::new(
            vec![VarDecl::int("x", 0, 3, 0), VarDecl::int("y", 0, 3, 0)],
            vec![],
        )
        .unwrap()
    }

    fn x() -> Expr {
        Expr::int_var(0)
    }

    fn y() -> Expr {
        Expr::int_var(1)
    }

    #[test]
    fn ordering_is_implication() {
        let d = PredDomain::new(&model());
        let x1y2 = Expr::and([Expr::eq(x(), Expr::Int(1)), Expr::eq(y(), Expr::Int(2))]);
        assert_eq!(d.leq(&x1y2, &Expr::eq(x(), Expr::Int(1))), Ok(true));
        assert_eq!(d.leq(&x1y2, &d.top()), Ok(true));
        assert_eq!(d.leq(&d.top(), &x1y2), Ok(false));
    }

    #[test]
    fn block_conjoins_negation() {
        let d = PredDomain::new(&model());
        let kept = Valuation::new(vec![1, 0]);
        let b = Expr::eq(x(), Expr::Int(0));
        let s = d.block(&d.top(), &b, &kept).unwrap();
        assert_eq!(s, Expr::cmp(CmpOp::Ne, x(), Expr::Int(0)));
        assert!(d.contains(&s, &kept));
        assert_eq!(d.eval_bool(&b, &s), Ok(TriBool::False));
        assert_eq!(d.leq(&s, &d.top()), Ok(true));
    }

    #[test]
    fn block_drops_redundant_conjuncts() {
        let d = PredDomain::new(&model());
        let kept = Valuation::new(vec![0, 0]);
        let s = d
            .block(&d.top(), &Expr::cmp(CmpOp::Gt, x(), Expr::Int(1)), &kept)
            .unwrap();
        let s = d
            .block(&s, &Expr::cmp(CmpOp::Gt, x(), Expr::Int(0)), &kept)
            .unwrap();
        assert_eq!(s, Expr::cmp(CmpOp::Le, x(), Expr::Int(0)));
    }

    #[test]
    fn identity_representation() {
        let d = PredDomain::new(&model());
        let e = Expr::eq(y(), Expr::Int(3));
        assert_eq!(d.to_expr(&e), e);
        assert_eq!(d.eval_bool(&e, &d.bottom()), Ok(TriBool::False));
    }
}

//! Expression language over model variables.
//!
//! Expressions are typed at construction: every variable reference carries the
//! type of its declaration, so evaluation never needs the model at hand.

use std::fmt;

use thiserror::Error;

use super::valuation::Valuation;

/// Dense index of a declared variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Bool,
    Int,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Bool => f.write_str("bool"),
            Ty::Int => f.write_str("int"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn apply(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    /// Storage form inside a [`Valuation`]: booleans are 0/1.
    pub fn raw(self) -> i64 {
        match self {
            Value::Int(v) => v,
            Value::Bool(b) => b as i64,
        }
    }

    pub fn from_raw(ty: Ty, raw: i64) -> Value {
        match ty {
            Ty::Int => Value::Int(raw),
            Ty::Bool => Value::Bool(raw != 0),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("integer overflow while evaluating expression")]
    Overflow,
    #[error("type mismatch: expected {expected}")]
    Type { expected: Ty },
    #[error("value {value} of variable `{var}` is outside its range {lo}..{hi}")]
    OutOfRange {
        var: String,
        value: i64,
        lo: i64,
        hi: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type error: {0}")]
pub struct TypeError(pub String);

/// Abstract syntax tree of integer and boolean expressions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(VarId, Ty),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int_var(id: usize) -> Expr {
        Expr::Var(VarId(id), Ty::Int)
    }

    pub fn bool_var(id: usize) -> Expr {
        Expr::Var(VarId(id), Ty::Bool)
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::cmp(CmpOp::Eq, a, b)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(parts: impl IntoIterator<Item = Expr>) -> Expr {
        Expr::And(parts.into_iter().collect())
    }

    pub fn or(parts: impl IntoIterator<Item = Expr>) -> Expr {
        Expr::Or(parts.into_iter().collect())
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    pub fn as_bool_const(&self) -> Option<bool> {
        match self {
            Expr::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Type of the expression, checking operand types on the way.
    pub fn ty(&self) -> Result<Ty, TypeError> {
        match self {
            Expr::Int(_) => Ok(Ty::Int),
            Expr::Bool(_) => Ok(Ty::Bool),
            Expr::Var(_, ty) => Ok(*ty),
            Expr::Neg(e) => {
                expect(e, Ty::Int, "operand of unary minus")?;
                Ok(Ty::Int)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                expect(a, Ty::Int, "arithmetic operand")?;
                expect(b, Ty::Int, "arithmetic operand")?;
                Ok(Ty::Int)
            }
            Expr::Cmp(op, a, b) => {
                let ta = a.ty()?;
                let tb = b.ty()?;
                if ta != tb {
                    return Err(TypeError(format!(
                        "cannot compare {ta} with {tb} using `{}`",
                        op.symbol()
                    )));
                }
                if ta == Ty::Bool && !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                    return Err(TypeError(format!(
                        "ordering comparison `{}` on booleans",
                        op.symbol()
                    )));
                }
                Ok(Ty::Bool)
            }
            Expr::Not(e) => {
                expect(e, Ty::Bool, "operand of negation")?;
                Ok(Ty::Bool)
            }
            Expr::And(es) | Expr::Or(es) => {
                for e in es {
                    expect(e, Ty::Bool, "operand of a connective")?;
                }
                Ok(Ty::Bool)
            }
            Expr::Implies(a, b) => {
                expect(a, Ty::Bool, "operand of implication")?;
                expect(b, Ty::Bool, "operand of implication")?;
                Ok(Ty::Bool)
            }
        }
    }

    pub fn eval(&self, val: &Valuation) -> Result<Value, EvalError> {
        match self {
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Int(_)
            | Expr::Neg(_)
            | Expr::Add(..)
            | Expr::Sub(..)
            | Expr::Mul(..)
            | Expr::Var(_, Ty::Int) => self.eval_int(val).map(Value::Int),
            _ => self.eval_bool(val).map(Value::Bool),
        }
    }

    pub fn eval_int(&self, val: &Valuation) -> Result<i64, EvalError> {
        match self {
            Expr::Int(v) => Ok(*v),
            Expr::Var(id, Ty::Int) => Ok(val.get(*id)),
            Expr::Neg(e) => e.eval_int(val)?.checked_neg().ok_or(EvalError::Overflow),
            Expr::Add(a, b) => a
                .eval_int(val)?
                .checked_add(b.eval_int(val)?)
                .ok_or(EvalError::Overflow),
            Expr::Sub(a, b) => a
                .eval_int(val)?
                .checked_sub(b.eval_int(val)?)
                .ok_or(EvalError::Overflow),
            Expr::Mul(a, b) => a
                .eval_int(val)?
                .checked_mul(b.eval_int(val)?)
                .ok_or(EvalError::Overflow),
            _ => Err(EvalError::Type { expected: Ty::Int }),
        }
    }

    pub fn eval_bool(&self, val: &Valuation) -> Result<bool, EvalError> {
        match self {
            Expr::Bool(b) => Ok(*b),
            Expr::Var(id, Ty::Bool) => Ok(val.get(*id) != 0),
            Expr::Cmp(op, a, b) => match (a.eval(val)?, b.eval(val)?) {
                (Value::Int(x), Value::Int(y)) => Ok(op.apply(x, y)),
                (Value::Bool(x), Value::Bool(y)) => Ok(op.apply(x as i64, y as i64)),
                _ => Err(EvalError::Type { expected: Ty::Int }),
            },
            Expr::Not(e) => Ok(!e.eval_bool(val)?),
            Expr::And(es) => {
                for e in es {
                    if !e.eval_bool(val)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Expr::Or(es) => {
                for e in es {
                    if e.eval_bool(val)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Expr::Implies(a, b) => Ok(!a.eval_bool(val)? || b.eval_bool(val)?),
            _ => Err(EvalError::Type { expected: Ty::Bool }),
        }
    }

    /// Simultaneous substitution: every variable for which `f` yields an
    /// expression is replaced by it.
    pub fn substitute(&self, f: &impl Fn(VarId, Ty) -> Option<Expr>) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(f));
        match self {
            Expr::Int(_) | Expr::Bool(_) => self.clone(),
            Expr::Var(id, ty) => f(*id, *ty).unwrap_or_else(|| self.clone()),
            Expr::Neg(e) => Expr::Neg(sub(e)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, sub(a), sub(b)),
            Expr::Not(e) => Expr::Not(sub(e)),
            Expr::And(es) => Expr::And(es.iter().map(|e| e.substitute(f)).collect()),
            Expr::Or(es) => Expr::Or(es.iter().map(|e| e.substitute(f)).collect()),
            Expr::Implies(a, b) => Expr::Implies(sub(a), sub(b)),
        }
    }

    /// Replaces the variables known to `lookup` by their values and folds
    /// the result.
    pub fn partial_eval(&self, lookup: &impl Fn(VarId) -> Option<i64>) -> Expr {
        self.substitute(&|id, ty| {
            lookup(id).map(|raw| match ty {
                Ty::Bool => Expr::Bool(raw != 0),
                Ty::Int => Expr::Int(raw),
            })
        })
        .simplify()
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(VarId, Ty)) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Var(id, ty) => f(*id, *ty),
            Expr::Neg(e) | Expr::Not(e) => e.visit_vars(f),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Cmp(_, a, b)
            | Expr::Implies(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.visit_vars(f)),
        }
    }

    /// Variables in order of first occurrence, without duplicates.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.visit_vars(&mut |id, _| {
            if !out.contains(&id) {
                out.push(id);
            }
        });
        out
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(..) => 1,
            Expr::Neg(e) | Expr::Not(e) => 1 + e.size(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Cmp(_, a, b)
            | Expr::Implies(a, b) => 1 + a.size() + b.size(),
            Expr::And(es) | Expr::Or(es) => 1 + es.iter().map(Expr::size).sum::<usize>(),
        }
    }

    /// Constant folding and flattening. The result is equivalent under
    /// evaluation for every valuation; no minimality is promised.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(..) => self.clone(),
            Expr::Neg(e) => match e.simplify() {
                Expr::Int(v) => v
                    .checked_neg()
                    .map(Expr::Int)
                    .unwrap_or_else(|| Expr::Neg(Box::new(Expr::Int(v)))),
                Expr::Neg(inner) => *inner,
                other => Expr::Neg(Box::new(other)),
            },
            Expr::Add(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Int(x), Expr::Int(y)) if x.checked_add(y).is_some() => Expr::Int(x + y),
                (Expr::Int(0), e) | (e, Expr::Int(0)) => e,
                (x, y) => Expr::add(x, y),
            },
            Expr::Sub(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Int(x), Expr::Int(y)) if x.checked_sub(y).is_some() => Expr::Int(x - y),
                (e, Expr::Int(0)) => e,
                (x, y) if x == y => Expr::Int(0),
                (x, y) => Expr::sub(x, y),
            },
            Expr::Mul(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Int(x), Expr::Int(y)) if x.checked_mul(y).is_some() => Expr::Int(x * y),
                (Expr::Int(0), _) | (_, Expr::Int(0)) => Expr::Int(0),
                (Expr::Int(1), e) | (e, Expr::Int(1)) => e,
                (x, y) => Expr::mul(x, y),
            },
            Expr::Cmp(op, a, b) => simplify_cmp(*op, a.simplify(), b.simplify()),
            Expr::Not(e) => negate(e.simplify()),
            Expr::And(es) => simplify_junction(es, true),
            Expr::Or(es) => simplify_junction(es, false),
            Expr::Implies(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Bool(false), _) | (_, Expr::Bool(true)) => Expr::Bool(true),
                (Expr::Bool(true), e) => e,
                (e, Expr::Bool(false)) => negate(e),
                (x, y) if x == y => Expr::Bool(true),
                (x, y) => Expr::implies(x, y),
            },
        }
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

fn expect(e: &Expr, ty: Ty, what: &str) -> Result<(), TypeError> {
    let got = e.ty()?;
    if got == ty {
        Ok(())
    } else {
        Err(TypeError(format!("{what} must be {ty}, found {got}")))
    }
}

fn simplify_cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Int(x), Expr::Int(y)) => Expr::Bool(op.apply(*x, *y)),
        (Expr::Bool(x), Expr::Bool(y)) => Expr::Bool(op.apply(*x as i64, *y as i64)),
        (Expr::Bool(c), e) | (e, Expr::Bool(c)) => {
            // `e == true`, `e != false` and friends collapse to `e` or `!e`
            if (op == CmpOp::Eq) == *c {
                e.clone()
            } else {
                negate(e.clone())
            }
        }
        _ if a == b => Expr::Bool(matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge)),
        _ => Expr::cmp(op, a, b),
    }
}

/// Negation pushed one level down where that does not grow the term.
fn negate(e: Expr) -> Expr {
    match e {
        Expr::Bool(b) => Expr::Bool(!b),
        Expr::Not(inner) => *inner,
        Expr::Cmp(op, a, b) => Expr::Cmp(op.negate(), a, b),
        other => Expr::not(other),
    }
}

/// `conj` selects between conjunction (true) and disjunction (false).
fn simplify_junction(es: &[Expr], conj: bool) -> Expr {
    let unit = conj;
    let mut parts: Vec<Expr> = Vec::with_capacity(es.len());
    let push = |e: Expr, parts: &mut Vec<Expr>| -> bool {
        match e {
            Expr::Bool(b) if b == unit => true,
            Expr::Bool(_) => false,
            e => {
                if !parts.contains(&e) {
                    parts.push(e);
                }
                true
            }
        }
    };
    for e in es {
        let s = e.simplify();
        let nested = match (s, conj) {
            (Expr::And(inner), true) | (Expr::Or(inner), false) => inner,
            (s, _) => vec![s],
        };
        for e in nested {
            if !push(e, &mut parts) {
                return Expr::Bool(!unit);
            }
        }
    }
    for p in &parts {
        let neg = negate(p.clone());
        if parts.contains(&neg) {
            return Expr::Bool(!unit);
        }
    }
    match parts.len() {
        0 => Expr::Bool(unit),
        1 => parts.pop().unwrap(),
        _ if conj => Expr::And(parts),
        _ => Expr::Or(parts),
    }
}

/// Renders an expression in the model-file syntax, fully parenthesising
/// compound operands.
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl ExprDisplay<'_> {
    fn sub<'b>(&'b self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay {
            expr: e,
            names: self.names,
        }
    }

    fn operand(&self, f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
        match e {
            Expr::Int(v) if *v < 0 => write!(f, "({v})"),
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(..) => write!(f, "{}", self.sub(e)),
            _ => write!(f, "({})", self.sub(e)),
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(id, _) => match self.names.get(id.0) {
                Some(name) => f.write_str(name),
                None => write!(f, "v{}", id.0),
            },
            Expr::Neg(e) => {
                f.write_str("-")?;
                self.operand(f, e)
            }
            Expr::Not(e) => {
                f.write_str("!")?;
                self.operand(f, e)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Implies(a, b) => {
                let op = match self.expr {
                    Expr::Add(..) => "+",
                    Expr::Sub(..) => "-",
                    Expr::Mul(..) => "*",
                    _ => "=>",
                };
                self.operand(f, a)?;
                write!(f, " {op} ")?;
                self.operand(f, b)
            }
            Expr::Cmp(op, a, b) => {
                self.operand(f, a)?;
                write!(f, " {} ", op.symbol())?;
                self.operand(f, b)
            }
            Expr::And(es) | Expr::Or(es) => {
                if es.is_empty() {
                    return write!(f, "{}", matches!(self.expr, Expr::And(_)));
                }
                let op = if matches!(self.expr, Expr::And(_)) {
                    " && "
                } else {
                    " || "
                };
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    self.operand(f, e)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::int_var(0)
    }

    fn y() -> Expr {
        Expr::int_var(1)
    }

    #[test]
    fn running_example_guards() {
        let val = Valuation::new(vec![0, 0]);
        assert_eq!(Expr::eq(x(), Expr::Int(0)).eval(&val), Ok(Value::Bool(true)));
        assert_eq!(Expr::add(x(), Expr::Int(1)).eval(&val), Ok(Value::Int(1)));
        let c3 = Expr::and([Expr::eq(x(), Expr::Int(2)), Expr::eq(y(), Expr::Int(2))]);
        assert_eq!(c3.eval(&Valuation::new(vec![2, 0])), Ok(Value::Bool(false)));
    }

    #[test]
    fn overflow_is_an_error() {
        let e = Expr::mul(x(), Expr::Int(i64::MAX));
        assert_eq!(e.eval(&Valuation::new(vec![2])), Err(EvalError::Overflow));
    }

    #[test]
    fn simplify_examples() {
        let b = Expr::bool_var(2);
        let e = Expr::and([Expr::eq(Expr::Int(1), Expr::Int(1)), b.clone()]);
        assert_eq!(e.simplify(), b);
        assert_eq!(Expr::add(x(), Expr::Int(0)).simplify(), x());
        let lt = Expr::cmp(CmpOp::Lt, x(), Expr::Int(2));
        assert_eq!(Expr::not(Expr::not(lt.clone())).simplify(), lt);
    }

    #[test]
    fn simplify_detects_complementary_conjuncts() {
        let lt = Expr::cmp(CmpOp::Lt, x(), Expr::Int(2));
        let e = Expr::and([lt.clone(), Expr::not(lt)]);
        assert_eq!(e.simplify(), Expr::Bool(false));
    }

    #[test]
    fn partial_eval_folds_known_variables() {
        let c3 = Expr::and([Expr::eq(x(), Expr::Int(2)), Expr::eq(y(), Expr::Int(2))]);
        let residual = c3.partial_eval(&|id| (id == VarId(0)).then_some(2));
        assert_eq!(residual, Expr::eq(y(), Expr::Int(2)));
        let residual = c3.partial_eval(&|id| (id == VarId(0)).then_some(1));
        assert_eq!(residual, Expr::Bool(false));
    }

    #[test]
    fn type_errors() {
        assert!(Expr::add(x(), Expr::Bool(true)).ty().is_err());
        assert!(Expr::cmp(CmpOp::Lt, Expr::bool_var(0), Expr::Bool(true)).ty().is_err());
        assert_eq!(Expr::eq(Expr::bool_var(0), Expr::Bool(true)).ty(), Ok(Ty::Bool));
    }

    #[test]
    fn display_uses_model_syntax() {
        let names = vec!["x".to_string(), "y".to_string()];
        let e = Expr::implies(
            Expr::and([Expr::eq(x(), Expr::Int(2)), Expr::not(Expr::eq(y(), Expr::Int(-1)))]),
            Expr::Bool(false),
        );
        assert_eq!(
            e.display(&names).to_string(),
            "((x == 2) && (!(y == (-1)))) => false"
        );
    }
}

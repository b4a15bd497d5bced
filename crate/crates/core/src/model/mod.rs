//! Symbolic MDPs: variables with finite ranges and probabilistic guarded
//! commands, plus their concrete semantics.

mod expr;
mod valuation;

use std::collections::{BTreeMap, HashSet};

use num_rational::Ratio;
use thiserror::Error;

pub use expr::{CmpOp, EvalError, Expr, ExprDisplay, Ty, TypeError, Value, VarId};
pub use valuation::Valuation;

/// Exact branch probability.
pub type Prob = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate variable `{0}`")]
    DuplicateVar(String),
    #[error("variable `{name}` has empty range {lo}..{hi}")]
    EmptyRange { name: String, lo: i64, hi: i64 },
    #[error("initial value {init} of `{name}` is outside its range")]
    InitOutOfRange { name: String, init: i64 },
    #[error("reference to undeclared variable #{0}")]
    UndeclaredVar(usize),
    #[error("variable `{name}` is used as {used} but declared {declared}")]
    VarType { name: String, used: Ty, declared: Ty },
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("command {command}: probabilities sum to {sum}")]
    ProbabilitySum { command: usize, sum: Prob },
    #[error("command {command}: branch probability {prob} is not positive")]
    NonPositiveProbability { command: usize, prob: Prob },
    #[error("command {command} has no branches")]
    NoBranches { command: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Bool,
    /// Inclusive integer range.
    Int { lo: i64, hi: i64 },
}

impl VarKind {
    pub fn ty(self) -> Ty {
        match self {
            VarKind::Bool => Ty::Bool,
            VarKind::Int { .. } => Ty::Int,
        }
    }

    /// Inclusive bounds in storage form.
    pub fn bounds(self) -> (i64, i64) {
        match self {
            VarKind::Bool => (0, 1),
            VarKind::Int { lo, hi } => (lo, hi),
        }
    }

    pub fn contains(self, raw: i64) -> bool {
        let (lo, hi) = self.bounds();
        lo <= raw && raw <= hi
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    /// Initial value in storage form.
    pub init: i64,
}

impl VarDecl {
    pub fn int(name: &str, lo: i64, hi: i64, init: i64) -> Self {
        VarDecl {
            name: name.to_string(),
            kind: VarKind::Int { lo, hi },
            init,
        }
    }

    pub fn boolean(name: &str, init: bool) -> Self {
        VarDecl {
            name: name.to_string(),
            kind: VarKind::Bool,
            init: init as i64,
        }
    }

    pub fn var(&self, id: usize) -> Expr {
        Expr::Var(VarId(id), self.kind.ty())
    }
}

/// Simultaneous update; variables without an entry keep their value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assignment(BTreeMap<VarId, Expr>);

impl Assignment {
    pub fn identity() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn with(mut self, var: VarId, e: Expr) -> Self {
        self.0.insert(var, e);
        self
    }

    pub fn get(&self, var: VarId) -> Option<&Expr> {
        self.0.get(&var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &Expr)> {
        self.0.iter().map(|(v, e)| (*v, e))
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Applies the update without checking declared ranges.
    pub fn apply_unchecked(&self, val: &Valuation) -> Result<Valuation, EvalError> {
        let mut out = val.clone();
        for (var, e) in &self.0 {
            out.set(*var, e.eval(val)?.raw());
        }
        Ok(out)
    }

    /// Weakest precondition: `b` with every assigned variable replaced by its
    /// right-hand side.
    pub fn weakest_precondition(&self, b: &Expr) -> Expr {
        b.substitute(&|id, _| self.0.get(&id).cloned())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub prob: Prob,
    pub assignment: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub guard: Expr,
    /// Fixed order; branch `i` is the i-th assignment of the command.
    pub branches: Vec<Branch>,
}

impl Command {
    pub fn dirac(guard: Expr, assignment: Assignment) -> Self {
        Command {
            guard,
            branches: vec![Branch {
                prob: Prob::from_integer(1),
                assignment,
            }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachabilityQuery {
    /// Target formula; the objective is always maximisation.
    pub target: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicMdp {
    vars: Vec<VarDecl>,
    commands: Vec<Command>,
}

impl SymbolicMdp {
    pub fn new(vars: Vec<VarDecl>, commands: Vec<Command>) -> Result<Self, ModelError> {
        let mut names = HashSet::new();
        for v in &vars {
            if !names.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateVar(v.name.clone()));
            }
            if let VarKind::Int { lo, hi } = v.kind {
                if lo > hi {
                    return Err(ModelError::EmptyRange {
                        name: v.name.clone(),
                        lo,
                        hi,
                    });
                }
            }
            if !v.kind.contains(v.init) {
                return Err(ModelError::InitOutOfRange {
                    name: v.name.clone(),
                    init: v.init,
                });
            }
        }
        let m = SymbolicMdp { vars, commands };
        for (ci, c) in m.commands.iter().enumerate() {
            m.check_expr(&c.guard, Ty::Bool)?;
            if c.branches.is_empty() {
                return Err(ModelError::NoBranches { command: ci });
            }
            let mut sum = Prob::from_integer(0);
            for b in &c.branches {
                if b.prob <= Prob::from_integer(0) {
                    return Err(ModelError::NonPositiveProbability {
                        command: ci,
                        prob: b.prob,
                    });
                }
                sum += b.prob;
                for (var, e) in b.assignment.iter() {
                    let decl = m.decl(var)?;
                    m.check_expr(e, decl.kind.ty())?;
                }
            }
            if sum != Prob::from_integer(1) {
                return Err(ModelError::ProbabilitySum { command: ci, sum });
            }
        }
        Ok(m)
    }

    fn decl(&self, id: VarId) -> Result<&VarDecl, ModelError> {
        self.vars.get(id.0).ok_or(ModelError::UndeclaredVar(id.0))
    }

    /// Checks that `e` has type `ty` and only references declared variables
    /// with their declared types.
    pub fn check_expr(&self, e: &Expr, ty: Ty) -> Result<(), ModelError> {
        let mut err = None;
        e.visit_vars(&mut |id, used| {
            if err.is_some() {
                return;
            }
            match self.vars.get(id.0) {
                None => err = Some(ModelError::UndeclaredVar(id.0)),
                Some(d) if d.kind.ty() != used => {
                    err = Some(ModelError::VarType {
                        name: d.name.clone(),
                        used,
                        declared: d.kind.ty(),
                    })
                }
                Some(_) => {}
            }
        });
        if let Some(err) = err {
            return Err(err);
        }
        let got = e.ty()?;
        if got != ty {
            return Err(TypeError(format!("expected {ty} expression, found {got}")).into());
        }
        Ok(())
    }

    pub fn vars(&self) -> &[VarDecl] {
        &self.vars
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn var_names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.name.clone()).collect()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn initial(&self) -> Valuation {
        Valuation::new(self.vars.iter().map(|v| v.init).collect())
    }

    /// Indices of the commands whose guard holds in `val`, in model order.
    pub fn enabled_commands(&self, val: &Valuation) -> Result<Vec<usize>, EvalError> {
        let mut out = Vec::new();
        for (i, c) in self.commands.iter().enumerate() {
            if c.guard.eval_bool(val)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Applies `a` to `val`; a result outside a declared range is an error.
    pub fn eval_assignment(&self, a: &Assignment, val: &Valuation) -> Result<Valuation, EvalError> {
        let out = a.apply_unchecked(val)?;
        for (var, _) in a.iter() {
            let decl = &self.vars[var.0];
            let raw = out.get(var);
            if !decl.kind.contains(raw) {
                let (lo, hi) = decl.kind.bounds();
                return Err(EvalError::OutOfRange {
                    var: decl.name.clone(),
                    value: raw,
                    lo,
                    hi,
                });
            }
        }
        Ok(out)
    }

    /// Successor distribution of command `c` in `val`. Branches that yield the
    /// same valuation are merged; order follows first occurrence.
    pub fn eval_distribution(
        &self,
        c: usize,
        val: &Valuation,
    ) -> Result<Vec<(Valuation, Prob)>, EvalError> {
        let mut out: Vec<(Valuation, Prob)> = Vec::new();
        for b in &self.commands[c].branches {
            let next = self.eval_assignment(&b.assignment, val)?;
            match out.iter_mut().find(|(v, _)| *v == next) {
                Some((_, p)) => *p += b.prob,
                None => out.push((next, b.prob)),
            }
        }
        Ok(out)
    }

    /// Appends the target command `[target] 1: identity` and returns the
    /// extended model with the index of the new command. Not idempotent.
    pub fn with_target_command(&self, q: &ReachabilityQuery) -> (SymbolicMdp, usize) {
        let mut commands = self.commands.clone();
        commands.push(Command::dirac(q.target.clone(), Assignment::identity()));
        let idx = commands.len() - 1;
        (
            SymbolicMdp {
                vars: self.vars.clone(),
                commands,
            },
            idx,
        )
    }

    /// Number of valuations in the full product of the declared ranges,
    /// saturating at `u64::MAX`.
    pub fn valuation_space_size(&self) -> u64 {
        self.vars.iter().fold(1u64, |acc, v| {
            let (lo, hi) = v.kind.bounds();
            acc.saturating_mul((hi - lo + 1) as u64)
        })
    }

    /// Every valuation of the declared ranges, in lexicographic order.
    pub fn all_valuations(&self) -> AllValuations<'_> {
        AllValuations {
            vars: &self.vars,
            next: Some(Valuation::new(
                self.vars.iter().map(|v| v.kind.bounds().0).collect(),
            )),
        }
    }

    /// `x=1, y=0` style rendering of a valuation.
    pub fn show(&self, val: &Valuation) -> String {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, d)| {
                format!(
                    "{}={}",
                    d.name,
                    Value::from_raw(d.kind.ty(), val.get(VarId(i)))
                )
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// A symbolic MDP extended with the target command `[φ] 1: identity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetedMdp {
    model: SymbolicMdp,
    target_command: usize,
}

impl TargetedMdp {
    pub fn new(m: &SymbolicMdp, q: &ReachabilityQuery) -> Result<Self, ModelError> {
        m.check_expr(&q.target, Ty::Bool)?;
        let (model, target_command) = m.with_target_command(q);
        Ok(TargetedMdp {
            model,
            target_command,
        })
    }

    /// The extended model, target command included.
    pub fn model(&self) -> &SymbolicMdp {
        &self.model
    }

    pub fn target_command(&self) -> usize {
        self.target_command
    }

    pub fn target(&self) -> &Expr {
        &self.model.commands[self.target_command].guard
    }

    pub fn is_target(&self, val: &Valuation) -> Result<bool, EvalError> {
        self.target().eval_bool(val)
    }
}

pub struct AllValuations<'a> {
    vars: &'a [VarDecl],
    next: Option<Valuation>,
}

impl Iterator for AllValuations<'_> {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..self.vars.len()).rev() {
            let (lo, hi) = self.vars[i].kind.bounds();
            let id = VarId(i);
            if succ.get(id) < hi {
                succ.set(id, succ.get(id) + 1);
                self.next = Some(succ);
                return Some(current);
            }
            succ.set(id, lo);
        }
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: i64, d: i64) -> Prob {
        Prob::new(n, d)
    }

    /// The running example with ranges bounded to 0..3.
    fn running() -> SymbolicMdp {
        let x = Expr::int_var(0);
        let y = Expr::int_var(1);
        let c1 = Command {
            guard: Expr::cmp(CmpOp::Lt, x.clone(), Expr::Int(3)),
            branches: vec![
                Branch {
                    prob: p(4, 5),
                    assignment: Assignment::identity()
                        .with(VarId(0), Expr::add(x.clone(), Expr::Int(1)))
                        .with(VarId(1), y.clone()),
                },
                Branch {
                    prob: p(1, 5),
                    assignment: Assignment::identity()
                        .with(VarId(0), x.clone())
                        .with(VarId(1), y.clone()),
                },
            ],
        };
        let c2 = Command::dirac(
            Expr::eq(x.clone(), Expr::Int(0)),
            Assignment::identity()
                .with(VarId(0), Expr::Int(1))
                .with(VarId(1), Expr::Int(2)),
        );
        let c3 = Command::dirac(
            Expr::and([Expr::eq(x, Expr::Int(2)), Expr::eq(y, Expr::Int(2))]),
            Assignment::identity().with(VarId(1), Expr::Int(3)),
        );
        SymbolicMdp::new(
            vec![VarDecl::int("x", 0, 3, 0), VarDecl::int("y", 0, 3, 0)],
            vec![c1, c2, c3],
        )
        .unwrap()
    }

    fn v(x: i64, y: i64) -> Valuation {
        Valuation::new(vec![x, y])
    }

    #[test]
    fn assignment_semantics() {
        let m = running();
        let a = &m.commands()[0].branches[0].assignment;
        assert_eq!(m.eval_assignment(a, &v(0, 0)), Ok(v(1, 0)));
        assert_eq!(
            m.eval_assignment(&Assignment::identity(), &v(2, 1)),
            Ok(v(2, 1))
        );
        let a2 = &m.commands()[1].branches[0].assignment;
        assert_eq!(m.eval_assignment(a2, &v(0, 0)), Ok(v(1, 2)));
    }

    #[test]
    fn out_of_range_assignment_is_rejected() {
        let m = running();
        let a = Assignment::identity().with(VarId(0), Expr::Int(5));
        assert!(matches!(
            m.eval_assignment(&a, &v(0, 0)),
            Err(EvalError::OutOfRange { value: 5, .. })
        ));
    }

    #[test]
    fn distribution_of_c1() {
        let m = running();
        let d = m.eval_distribution(0, &v(0, 0)).unwrap();
        assert_eq!(d, vec![(v(1, 0), p(4, 5)), (v(0, 0), p(1, 5))]);
    }

    #[test]
    fn distribution_merges_equal_results() {
        let x = Expr::int_var(0);
        let c = Command {
            guard: Expr::Bool(true),
            branches: vec![
                Branch {
                    prob: p(1, 2),
                    assignment: Assignment::identity().with(VarId(0), Expr::Int(1)),
                },
                Branch {
                    prob: p(1, 2),
                    assignment: Assignment::identity()
                        .with(VarId(0), Expr::add(Expr::Int(0), Expr::Int(1))),
                },
            ],
        };
        let _ = x;
        let m = SymbolicMdp::new(vec![VarDecl::int("x", 0, 1, 0)], vec![c]).unwrap();
        let d = m.eval_distribution(0, &Valuation::new(vec![0])).unwrap();
        assert_eq!(d, vec![(Valuation::new(vec![1]), p(1, 1))]);
    }

    #[test]
    fn enabled_commands_follow_model_order() {
        let m = running();
        assert_eq!(m.enabled_commands(&v(0, 0)), Ok(vec![0, 1]));
        assert_eq!(m.enabled_commands(&v(2, 2)), Ok(vec![0, 2]));
        assert_eq!(m.enabled_commands(&v(3, 0)), Ok(vec![]));
    }

    #[test]
    fn weakest_precondition_examples() {
        let x = Expr::int_var(0);
        let y = Expr::int_var(1);
        let inc = Assignment::identity().with(VarId(0), Expr::add(x.clone(), Expr::Int(1)));
        let b = Expr::eq(x.clone(), Expr::Int(2));
        assert_eq!(
            inc.weakest_precondition(&b),
            Expr::eq(Expr::add(x.clone(), Expr::Int(1)), Expr::Int(2))
        );
        assert_eq!(Assignment::identity().weakest_precondition(&b), b);
        let c2 = Assignment::identity()
            .with(VarId(0), Expr::Int(1))
            .with(VarId(1), Expr::Int(2));
        let b = Expr::and([Expr::eq(x, Expr::Int(1)), Expr::eq(y, Expr::Int(2))]);
        let wp = c2.weakest_precondition(&b);
        assert_eq!(
            wp,
            Expr::and([
                Expr::eq(Expr::Int(1), Expr::Int(1)),
                Expr::eq(Expr::Int(2), Expr::Int(2))
            ])
        );
        assert_eq!(wp.simplify(), Expr::Bool(true));
    }

    #[test]
    fn target_command_is_appended() {
        let m = running();
        let q = ReachabilityQuery {
            target: Expr::eq(Expr::int_var(1), Expr::Int(3)),
        };
        let (mt, idx) = m.with_target_command(&q);
        assert_eq!(mt.commands().len(), 4);
        assert_eq!(idx, 3);
        assert_eq!(mt.commands()[..3], m.commands()[..]);
        assert_eq!(mt.commands()[3].branches.len(), 1);
        assert!(mt.commands()[3].branches[0].assignment.is_identity());
        let (twice, idx2) = mt.with_target_command(&q);
        assert_eq!((twice.commands().len(), idx2), (5, 4));
    }

    #[test]
    fn empty_command_set_plus_target() {
        let m = SymbolicMdp::new(vec![VarDecl::boolean("b", false)], vec![]).unwrap();
        let (mt, idx) = m.with_target_command(&ReachabilityQuery {
            target: Expr::bool_var(0),
        });
        assert_eq!((mt.commands().len(), idx), (1, 0));
    }

    #[test]
    fn validation_rejects_bad_probabilities() {
        let c = Command {
            guard: Expr::Bool(true),
            branches: vec![
                Branch {
                    prob: p(1, 2),
                    assignment: Assignment::identity(),
                },
                Branch {
                    prob: p(3, 5),
                    assignment: Assignment::identity(),
                },
            ],
        };
        let err = SymbolicMdp::new(vec![VarDecl::int("x", 0, 1, 0)], vec![c]).unwrap_err();
        assert_eq!(err.to_string(), "command 0: probabilities sum to 11/10");
    }

    #[test]
    fn all_valuations_enumerates_product() {
        let m = running();
        let all: Vec<_> = m.all_valuations().collect();
        assert_eq!(all.len(), 16);
        assert_eq!(m.valuation_space_size(), 16);
        assert_eq!(all[0], v(0, 0));
        assert_eq!(all[1], v(0, 1));
        assert_eq!(all[15], v(3, 3));
    }
}

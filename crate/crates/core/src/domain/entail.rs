//! Validity checks `a ⟹ b` over the finite valuation space of a model.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use crate::model::{CmpOp, Expr, SymbolicMdp, Valuation, VarKind};

use super::{DomainError, TriBool};

pub trait EntailmentBackend: Send {
    /// Is `a ⟹ b` valid over every valuation of the declared ranges?
    fn entails(&self, a: &Expr, b: &Expr) -> Result<bool, DomainError>;

    /// `True` if `s ⟹ b`, `False` if `s ⟹ ¬b`, `Unknown` otherwise. An
    /// unsatisfiable `s` yields `False`.
    fn classify(&self, s: &Expr, b: &Expr) -> Result<TriBool, DomainError> {
        if !self.entails(s, &Expr::not(b.clone()))? {
            if self.entails(s, b)? {
                return Ok(TriBool::True);
            }
            return Ok(TriBool::Unknown);
        }
        Ok(TriBool::False)
    }
}

/// Decides entailment by evaluating both sides on every valuation.
#[derive(Clone, Debug)]
pub struct EnumerationBackend {
    space: Vec<Valuation>,
}

impl EnumerationBackend {
    pub fn new(m: &SymbolicMdp) -> Self {
        EnumerationBackend {
            space: m.all_valuations().collect(),
        }
    }
}

impl EntailmentBackend for EnumerationBackend {
    fn entails(&self, a: &Expr, b: &Expr) -> Result<bool, DomainError> {
        for val in &self.space {
            if holds(a, val)? && !holds(b, val)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn classify(&self, s: &Expr, b: &Expr) -> Result<TriBool, DomainError> {
        let (mut seen_true, mut seen_false) = (false, false);
        for val in &self.space {
            if !holds(s, val)? {
                continue;
            }
            if holds(b, val)? {
                seen_true = true;
            } else {
                seen_false = true;
            }
            if seen_true && seen_false {
                return Ok(TriBool::Unknown);
            }
        }
        Ok(if seen_true {
            TriBool::True
        } else {
            TriBool::False
        })
    }
}

fn holds(e: &Expr, val: &Valuation) -> Result<bool, DomainError> {
    e.eval_bool(val).map_err(|err| DomainError::Oracle(err.to_string()))
}

struct SolverProcess {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Drop for SolverProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Delegates entailment to an external SMT-LIB v2 solver process kept alive
/// across queries. One query is in flight at a time.
pub struct SmtBackend {
    process: Mutex<SolverProcess>,
    names: Vec<String>,
}

impl SmtBackend {
    /// Spawns `cmd` (split on whitespace, e.g. `z3 -in`) and declares the
    /// model's variables with their range constraints.
    pub fn spawn(cmd: &str, m: &SymbolicMdp) -> Result<Self, DomainError> {
        let mut parts = cmd.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| DomainError::Oracle("empty solver command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| DomainError::Oracle(format!("cannot start `{cmd}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let names: Vec<String> = (0..m.vars().len()).map(|i| format!("v{i}")).collect();
        let backend = SmtBackend {
            process: Mutex::new(SolverProcess {
                child,
                stdin,
                stdout,
            }),
            names,
        };
        backend.send(&preamble(m))?;
        Ok(backend)
    }

    fn send(&self, text: &str) -> Result<(), DomainError> {
        let mut p = self.process.lock().expect("solver mutex poisoned");
        p.stdin
            .write_all(text.as_bytes())
            .and_then(|_| p.stdin.flush())
            .map_err(|e| DomainError::Oracle(format!("solver write failed: {e}")))
    }

    /// SMT-LIB rendering of a query asking for a counterexample to `a ⟹ b`.
    pub fn query_text(&self, a: &Expr, b: &Expr) -> String {
        format!(
            "(push 1)\n(assert {})\n(assert (not {}))\n(check-sat)\n(pop 1)\n",
            to_smtlib(a, &self.names),
            to_smtlib(b, &self.names)
        )
    }
}

impl EntailmentBackend for SmtBackend {
    fn entails(&self, a: &Expr, b: &Expr) -> Result<bool, DomainError> {
        let query = self.query_text(a, b);
        let mut p = self.process.lock().expect("solver mutex poisoned");
        p.stdin
            .write_all(query.as_bytes())
            .and_then(|_| p.stdin.flush())
            .map_err(|e| DomainError::Oracle(format!("solver write failed: {e}")))?;
        let mut line = String::new();
        loop {
            line.clear();
            let n = p
                .stdout
                .read_line(&mut line)
                .map_err(|e| DomainError::Oracle(format!("solver read failed: {e}")))?;
            if n == 0 {
                return Err(DomainError::Oracle("solver closed its output".into()));
            }
            match line.trim() {
                "" | "success" => continue,
                "unsat" => return Ok(true),
                "sat" => return Ok(false),
                other => return Err(DomainError::Oracle(format!("unexpected verdict `{other}`"))),
            }
        }
    }
}

/// Tries `primary` first and answers from `fallback` when it fails.
pub struct FallbackBackend<P, F> {
    pub primary: P,
    pub fallback: F,
}

impl<P: EntailmentBackend, F: EntailmentBackend> EntailmentBackend for FallbackBackend<P, F> {
    fn entails(&self, a: &Expr, b: &Expr) -> Result<bool, DomainError> {
        self.primary
            .entails(a, b)
            .or_else(|_| self.fallback.entails(a, b))
    }
}

fn preamble(m: &SymbolicMdp) -> String {
    let mut out = String::from("(set-logic QF_LIA)\n");
    for (i, d) in m.vars().iter().enumerate() {
        match d.kind {
            VarKind::Bool => {
                let _ = writeln!(out, "(declare-const v{i} Bool)");
            }
            VarKind::Int { lo, hi } => {
                let _ = writeln!(out, "(declare-const v{i} Int)");
                let _ = writeln!(
                    out,
                    "(assert (and (<= {} v{i}) (<= v{i} {})))",
                    smt_int(lo),
                    smt_int(hi)
                );
            }
        }
    }
    out
}

fn smt_int(v: i64) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

pub(crate) fn to_smtlib(e: &Expr, names: &[String]) -> String {
    let bin = |op: &str, a: &Expr, b: &Expr| {
        format!("({op} {} {})", to_smtlib(a, names), to_smtlib(b, names))
    };
    let nary = |op: &str, es: &[Expr], unit: &str| {
        if es.is_empty() {
            return unit.to_string();
        }
        let parts: Vec<String> = es.iter().map(|e| to_smtlib(e, names)).collect();
        format!("({op} {})", parts.join(" "))
    };
    match e {
        Expr::Int(v) => smt_int(*v),
        Expr::Bool(b) => b.to_string(),
        Expr::Var(id, _) => names[id.0].clone(),
        Expr::Neg(a) => format!("(- {})", to_smtlib(a, names)),
        Expr::Add(a, b) => bin("+", a, b),
        Expr::Sub(a, b) => bin("-", a, b),
        Expr::Mul(a, b) => bin("*", a, b),
        Expr::Cmp(op, a, b) => {
            let sym = match op {
                CmpOp::Eq => "=",
                CmpOp::Ne => "distinct",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            bin(sym, a, b)
        }
        Expr::Not(a) => format!("(not {})", to_smtlib(a, names)),
        Expr::And(es) => nary("and", es, "true"),
        Expr::Or(es) => nary("or", es, "false"),
        Expr::Implies(a, b) => bin("=>", a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarDecl;

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
    fn enumeration_entailment() {
        let b = EnumerationBackend::new(&model());
        let x1y2 = Expr::and([Expr::eq(x(), Expr::Int(1)), Expr::eq(y(), Expr::Int(2))]);
        assert_eq!(b.entails(&x1y2, &Expr::eq(x(), Expr::Int(1))), Ok(true));
        assert_eq!(b.entails(&x1y2, &Expr::Bool(true)), Ok(true));
        assert_eq!(
            b.entails(&Expr::Bool(true), &Expr::eq(x(), Expr::Int(0))),
            Ok(false)
        );
    }

    #[test]
    fn classification() {
        let b = EnumerationBackend::new(&model());
        let x1 = Expr::eq(x(), Expr::Int(1));
        assert_eq!(b.classify(&x1, &Expr::cmp(CmpOp::Lt, x(), Expr::Int(2))), Ok(TriBool::True));
        assert_eq!(b.classify(&x1, &Expr::eq(x(), Expr::Int(0))), Ok(TriBool::False));
        assert_eq!(b.classify(&x1, &Expr::eq(y(), Expr::Int(0))), Ok(TriBool::Unknown));
        assert_eq!(b.classify(&Expr::Bool(false), &x1), Ok(TriBool::False));
    }

    #[test]
    fn smtlib_rendering() {
        let names = vec!["v0".to_string(), "v1".to_string()];
        let e = Expr::implies(
            Expr::and([Expr::eq(x(), Expr::Int(-1)), Expr::not(Expr::Bool(false))]),
            Expr::cmp(CmpOp::Ne, Expr::add(x(), y()), Expr::Int(2)),
        );
        assert_eq!(
            to_smtlib(&e, &names),
            "(=> (and (= v0 (- 1)) (not false)) (distinct (+ v0 v1) 2))"
        );
        let pre = preamble(&model());
        assert!(pre.starts_with("(set-logic QF_LIA)\n(declare-const v0 Int)\n"));
        assert!(pre.contains("(assert (and (<= 0 v1) (<= v1 3)))"));
    }

    #[test]
    fn missing_solver_binary_is_an_oracle_error() {
        let err = SmtBackend::spawn("/nonexistent/solver-binary -in", &model()).err();
        assert!(matches!(err, Some(DomainError::Oracle(_))));
    }
}

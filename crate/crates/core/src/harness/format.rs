//! The `.gmc` guarded-command text format.
//!
//! ```text
//! // comment
//! var x : [0..3] init 0;
//! var done : bool init false;
//! [x < 3] 4/5:(x'=x + 1) + 0.2:(x'=x);
//! [x == 3] 1:(done'=true);
//! target done;
//! ```
//!
//! Variables come first, then commands, then exactly one target. Branch
//! probabilities are exact rationals (`4/5`), decimals (`0.2`, read exactly)
//! or integers. Variables not assigned in a branch keep their value.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use thiserror::Error;

use crate::model::{
    Assignment, Branch, CmpOp, Command, Expr, ModelError, Prob, ReachabilityQuery, SymbolicMdp,
    Ty, VarDecl, VarId, VarKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    /// Digits before and after the decimal point.
    Decimal(String, String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Decimal(a, b) => format!("`{a}.{b}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "=>", "..", ";", ":", "[", "]", "(", ")", "'", "=", "<",
    ">", "+", "-", "*", "/", "&", "!",
];

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, message: String| ParseError::Syntax { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(word),
                line: start_line,
                col: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let whole: String = chars[start..i].iter().collect();
            let tok = if chars.get(i) == Some(&'.')
                && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            {
                let frac_start = i + 1;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                Tok::Decimal(whole, chars[frac_start..i].iter().collect())
            } else {
                Tok::Int(whole.parse().map_err(|_| {
                    err(start_line, start_col, format!("integer literal {whole} is too large"))
                })?)
            };
            col += i - start;
            out.push(Spanned {
                tok,
                line: start_line,
                col: start_col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(err(line, col, format!("unexpected character `{c}`")));
        };
        i += sym.chars().count();
        col += sym.chars().count();
        out.push(Spanned {
            tok: Tok::Sym(sym),
            line: start_line,
            col: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const KEYWORDS: &[&str] = &["var", "bool", "init", "target", "true", "false"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    vars: Vec<VarDecl>,
    by_name: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let s = &self.toks[self.pos];
        Err(ParseError::Syntax {
            line: s.line,
            col: s.col,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.next();
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat_sym("-");
        match self.peek() {
            Tok::Int(v) => {
                let v = *v;
                self.next();
                Ok(if neg { -v } else { v })
            }
            _ => self.unexpected("an integer"),
        }
    }

    fn var_decl(&mut self) -> Result<(), ParseError> {
        self.expect_kw("var")?;
        let name_pos = self.pos;
        let name = self.ident()?;
        self.expect_sym(":")?;
        let kind = if self.is_kw("bool") {
            self.next();
            VarKind::Bool
        } else {
            self.expect_sym("[")?;
            let lo = self.signed_int()?;
            self.expect_sym("..")?;
            let hi = self.signed_int()?;
            self.expect_sym("]")?;
            VarKind::Int { lo, hi }
        };
        self.expect_kw("init")?;
        let init = match (kind, self.peek()) {
            (VarKind::Bool, Tok::Ident(s)) if s == "true" || s == "false" => {
                let v = s == "true";
                self.next();
                v as i64
            }
            (VarKind::Bool, _) => return self.unexpected("`true` or `false`"),
            (VarKind::Int { .. }, _) => self.signed_int()?,
        };
        self.expect_sym(";")?;
        if self.by_name.contains_key(&name) {
            self.pos = name_pos;
            return self.error(format!("variable `{name}` declared twice"));
        }
        self.by_name.insert(name.clone(), self.vars.len());
        self.vars.push(VarDecl { name, kind, init });
        Ok(())
    }

    fn prob(&mut self) -> Result<Prob, ParseError> {
        match self.next() {
            Tok::Int(n) => {
                if self.eat_sym("/") {
                    match self.next() {
                        Tok::Int(0) => {
                            self.pos -= 1;
                            self.error("zero denominator")
                        }
                        Tok::Int(d) => Ok(Ratio::new(n, d)),
                        _ => {
                            self.pos -= 1;
                            self.unexpected("a denominator")
                        }
                    }
                } else {
                    Ok(Ratio::from_integer(n))
                }
            }
            Tok::Decimal(whole, frac) => {
                let digits = format!("{whole}{frac}");
                let den = u32::try_from(frac.len())
                    .ok()
                    .and_then(|k| 10i64.checked_pow(k));
                match (digits.parse::<i64>(), den) {
                    (Ok(num), Some(den)) => Ok(Ratio::new(num, den)),
                    _ => {
                        self.pos -= 1;
                        self.error("decimal probability has too many digits")
                    }
                }
            }
            _ => {
                self.pos -= 1;
                self.unexpected("a probability")
            }
        }
    }

    fn command(&mut self) -> Result<Command, ParseError> {
        self.expect_sym("[")?;
        let guard = self.typed_expr(Ty::Bool)?;
        self.expect_sym("]")?;
        let mut branches = vec![self.branch()?];
        while self.eat_sym("+") {
            branches.push(self.branch()?);
        }
        self.expect_sym(";")?;
        Ok(Command { guard, branches })
    }

    fn branch(&mut self) -> Result<Branch, ParseError> {
        let prob = self.prob()?;
        self.expect_sym(":")?;
        self.expect_sym("(")?;
        let mut assignment = Assignment::identity();
        loop {
            let name_pos = self.pos;
            let name = self.ident()?;
            let Some(&id) = self.by_name.get(&name) else {
                self.pos = name_pos;
                return self.error(format!("undeclared variable `{name}`"));
            };
            if assignment.get(VarId(id)).is_some() {
                self.pos = name_pos;
                return self.error(format!("`{name}` assigned twice in one branch"));
            }
            self.expect_sym("'")?;
            self.expect_sym("=")?;
            let e = self.typed_expr(self.vars[id].kind.ty())?;
            assignment = assignment.with(VarId(id), e);
            if !self.eat_sym("&") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(Branch { prob, assignment })
    }

    fn typed_expr(&mut self, ty: Ty) -> Result<Expr, ParseError> {
        let start = self.pos;
        let e = self.expr()?;
        match e.ty() {
            Ok(t) if t == ty => Ok(e),
            Ok(t) => {
                self.pos = start;
                self.error(format!("expected a {ty} expression, found {t}"))
            }
            Err(err) => {
                self.pos = start;
                self.error(err.0)
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat_sym("=>") {
            let rhs = self.expr()?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Expr, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while self.eat_sym("||") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Or(parts)
        })
    }

    fn conjunction(&mut self) -> Result<Expr, ParseError> {
        let mut parts = vec![self.negation()?];
        while self.eat_sym("&&") {
            parts.push(self.negation()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::And(parts)
        })
    }

    fn negation(&mut self) -> Result<Expr, ParseError> {
        if self.eat_sym("!") {
            return Ok(Expr::not(self.negation()?));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.sum()?;
        Ok(Expr::cmp(op, lhs, rhs))
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.product()?;
        loop {
            if self.eat_sym("+") {
                e = Expr::add(e, self.product()?);
            } else if self.is_sym("-") {
                self.next();
                e = Expr::sub(e, self.product()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        while self.eat_sym("*") {
            e = Expr::mul(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_sym("-") {
            if let Tok::Int(v) = *self.peek() {
                self.next();
                return Ok(Expr::Int(-v));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym("!") {
            return Ok(Expr::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.next();
                Ok(Expr::Int(v))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.next();
                Ok(Expr::Bool(s == "true"))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let Some(&id) = self.by_name.get(&s) else {
                    return self.error(format!("undeclared variable `{s}`"));
                };
                self.next();
                Ok(Expr::Var(VarId(id), self.vars[id].kind.ty()))
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.unexpected("an expression"),
        }
    }
}

/// Parses a `.gmc` model.
pub fn parse_model(text: &str) -> Result<(SymbolicMdp, ReachabilityQuery), ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: Vec::new(),
        by_name: HashMap::new(),
    };
    while p.is_kw("var") {
        p.var_decl()?;
    }
    let mut commands = Vec::new();
    while p.is_sym("[") {
        commands.push(p.command()?);
    }
    if !p.is_kw("target") {
        return p.unexpected(if commands.is_empty() && p.vars.is_empty() {
            "`var`, a command or `target`"
        } else {
            "a command or `target`"
        });
    }
    p.next();
    let target = p.typed_expr(Ty::Bool)?;
    p.expect_sym(";")?;
    if *p.peek() != Tok::Eof {
        return p.unexpected("end of input");
    }
    let model = SymbolicMdp::new(p.vars, commands)?;
    Ok((model, ReachabilityQuery { target }))
}

/// Renders a model in the `.gmc` syntax; [`parse_model`] reads it back to
/// an identical model.
pub fn print_model(m: &SymbolicMdp, q: &ReachabilityQuery) -> String {
    let names = m.var_names();
    let mut out = String::new();
    for d in m.vars() {
        match d.kind {
            VarKind::Bool => {
                let _ = writeln!(out, "var {} : bool init {};", d.name, d.init != 0);
            }
            VarKind::Int { lo, hi } => {
                let _ = writeln!(out, "var {} : [{lo}..{hi}] init {};", d.name, d.init);
            }
        }
    }
    for c in m.commands() {
        let _ = write!(out, "[{}]", c.guard.display(&names));
        for (i, b) in c.branches.iter().enumerate() {
            let sep = if i == 0 { " " } else { " + " };
            let updates: Vec<String> = if b.assignment.is_identity() {
                // the grammar needs at least one update
                names.iter().take(1).map(|n| format!("{n}'={n}")).collect()
            } else {
                b.assignment
                    .iter()
                    .map(|(v, e)| format!("{}'={}", names[v.0], e.display(&names)))
                    .collect()
            };
            let _ = write!(out, "{sep}{}:({})", b.prob, updates.join(" & "));
        }
        out.push_str(";\n");
    }
    let _ = writeln!(out, "target {};", q.target.display(&names));
    out
}

//! Random small models for corpus-style tests.
#![allow(dead_code)]

use pasg::explicit::{enumerate, oracle_pmax};
use pasg::harness::{bundled, parse_model, BUNDLED};
use pasg::model::TargetedMdp;
use pasg::model::{CmpOp, Expr, ReachabilityQuery, SymbolicMdp, Valuation, VarKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Var {
    name: String,
    /// `None` for booleans.
    range: Option<(i64, i64)>,
}

fn atom(rng: &mut ChaCha8Rng, vars: &[Var]) -> String {
    let v = vars.choose(rng).unwrap();
    match v.range {
        None => {
            if rng.gen() {
                v.name.clone()
            } else {
                format!("!{}", v.name)
            }
        }
        Some((lo, hi)) => {
            let c = rng.gen_range(lo..=hi);
            let op = ["==", "!=", "<", "<=", ">", ">="].choose(rng).unwrap();
            format!("{} {op} {c}", v.name)
        }
    }
}

fn formula(rng: &mut ChaCha8Rng, vars: &[Var]) -> String {
    match rng.gen_range(0..4) {
        0 => atom(rng, vars),
        1 => format!("{} && {}", atom(rng, vars), atom(rng, vars)),
        2 => format!("{} || {}", atom(rng, vars), atom(rng, vars)),
        _ => format!("!({} && {})", atom(rng, vars), atom(rng, vars)),
    }
}

/// A model with at most 3 variables of at most 4 values each, at most 5
/// commands of at most 3 branches, increments and decrements guarded to stay
/// in range, and a random target formula.
pub fn random_model_text(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nvars = rng.gen_range(1..=3);
    let mut vars = Vec::new();
    let mut out = String::new();
    for i in 0..nvars {
        let name = format!("v{i}");
        if rng.gen_bool(0.25) {
            let init: bool = rng.gen();
            out += &format!("var {name} : bool init {init};\n");
            vars.push(Var { name, range: None });
        } else {
            let lo = rng.gen_range(-1..=1);
            let hi = lo + rng.gen_range(2..=3);
            let init = if rng.gen_bool(0.5) { lo } else { rng.gen_range(lo..=hi) };
            out += &format!("var {name} : [{lo}..{hi}] init {init};\n");
            vars.push(Var {
                name,
                range: Some((lo, hi)),
            });
        }
    }
    for _ in 0..rng.gen_range(2..=5) {
        let mut guard = vec![if rng.gen_bool(0.15) {
            "true".to_string()
        } else {
            atom(&mut rng, &vars)
        }];
        // one kind of update per variable and command, so that the guard
        // needs at most one bound per variable
        let mut ops: Vec<Option<String>> = vars
            .iter()
            .map(|v| match v.range {
                None => Some(["true", "false", &format!("!{}", v.name)].choose(&mut rng).unwrap().to_string()),
                Some((lo, hi)) => match rng.gen_range(0..4) {
                    0 => {
                        guard.push(format!("{} < {hi}", v.name));
                        Some(format!("{} + 1", v.name))
                    }
                    1 => {
                        guard.push(format!("{} > {lo}", v.name));
                        Some(format!("{} - 1", v.name))
                    }
                    2 => Some("*".into()),
                    _ => None,
                },
            })
            .collect();
        if ops.iter().all(Option::is_none) {
            let k = rng.gen_range(0..vars.len());
            ops[k] = Some(match vars[k].range {
                None => format!("!{}", vars[k].name),
                Some(_) => "*".into(),
            });
        }
        let nbranches = rng.gen_range(1..=3);
        let weights: Vec<u32> = (0..nbranches).map(|_| rng.gen_range(1..=4)).collect();
        let total: u32 = weights.iter().sum();
        let mut branches = Vec::new();
        for w in weights {
            let candidates: Vec<String> = vars
                .iter()
                .zip(&ops)
                .filter_map(|(v, op)| {
                    // `*` stands for a constant drawn per branch
                    let rhs = match (op.as_deref(), v.range) {
                        (Some("*"), Some((lo, hi))) => rng.gen_range(lo..=hi).to_string(),
                        (Some(rhs), _) => rhs.to_string(),
                        (None, _) => return None,
                    };
                    Some(format!("{}'={rhs}", v.name))
                })
                .collect();
            let mut updates: Vec<String> =
                candidates.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            if updates.is_empty() {
                updates.push(candidates.choose(&mut rng).unwrap().clone());
            }
            branches.push(format!("{w}/{total}:({})", updates.join(" & ")));
        }
        out += &format!("[{}] {};\n", guard.join(" && "), branches.join(" + "));
    }
    // prefer targets that do not already hold initially
    let mut target = formula(&mut rng, &vars);
    for _ in 0..20 {
        let probe = format!("{out}target {target};\n");
        let (m, q) = parse_model(&probe).expect("generated text parses");
        if !q.target.eval_bool(&m.initial()).unwrap() {
            break;
        }
        target = formula(&mut rng, &vars);
    }
    out += &format!("target {target};\n");
    out
}

pub fn random_model(seed: u64) -> (SymbolicMdp, ReachabilityQuery) {
    let text = random_model_text(seed);
    parse_model(&text).unwrap_or_else(|e| panic!("generated model {seed} fails to parse: {e}\n{text}"))
}

/// Named corpus: the bundled models followed by `n` random ones. Random
/// models with a single reachable state are skipped, and at least a quarter
/// of the kept ones have a value strictly between 0 and 1.
pub fn corpus(n: usize) -> Vec<(String, SymbolicMdp, ReachabilityQuery)> {
    let mut out: Vec<_> = BUNDLED
        .iter()
        .map(|(name, _)| {
            let (m, q) = bundled(name).unwrap();
            (name.to_string(), m, q)
        })
        .collect();
    let (mut fractional, mut trivial) = (0, 0);
    for seed in 0.. {
        if fractional + trivial == n {
            break;
        }
        let (m, q) = random_model(seed);
        let tm = TargetedMdp::new(&m, &q).unwrap();
        let e = enumerate(&tm, 10_000).unwrap();
        if e.len() < 2 {
            continue;
        }
        let v = oracle_pmax(&e, 1e-9).unwrap().value();
        if v > 1e-6 && v < 1.0 - 1e-6 {
            fractional += 1;
        } else if trivial < n - n / 4 {
            trivial += 1;
        } else {
            continue;
        }
        out.push((format!("random-{seed}"), m, q));
    }
    out
}

/// Random expression over the model's variables; integer atoms compare a
/// variable, or the sum of two, against a constant.
pub fn random_bool_expr(rng: &mut ChaCha8Rng, m: &SymbolicMdp, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.4) {
        let id = rng.gen_range(0..m.vars().len());
        let d = &m.vars()[id];
        return match d.kind {
            VarKind::Bool => d.var(id),
            VarKind::Int { lo, hi } => {
                let lhs = if rng.gen_bool(0.2) {
                    let other = rng.gen_range(0..m.vars().len());
                    match m.vars()[other].kind {
                        VarKind::Int { .. } => Expr::add(d.var(id), m.vars()[other].var(other)),
                        VarKind::Bool => d.var(id),
                    }
                } else {
                    d.var(id)
                };
                let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]
                    .choose(rng)
                    .unwrap();
                Expr::cmp(op, lhs, Expr::Int(rng.gen_range(lo - 1..=hi + 1)))
            }
        };
    }
    match rng.gen_range(0..4) {
        0 => Expr::not(random_bool_expr(rng, m, depth - 1)),
        1 => Expr::and((0..rng.gen_range(2..=3)).map(|_| random_bool_expr(rng, m, depth - 1)).collect::<Vec<_>>()),
        2 => Expr::or((0..rng.gen_range(2..=3)).map(|_| random_bool_expr(rng, m, depth - 1)).collect::<Vec<_>>()),
        _ => Expr::implies(random_bool_expr(rng, m, depth - 1), random_bool_expr(rng, m, depth - 1)),
    }
}

pub fn random_valuation(rng: &mut ChaCha8Rng, m: &SymbolicMdp) -> Valuation {
    let all: Vec<Valuation> = m.all_valuations().collect();
    all.choose(rng).unwrap().clone()
}

/// Random expression that holds (`want = true`) or fails in `val`.
pub fn random_expr_at(rng: &mut ChaCha8Rng, m: &SymbolicMdp, val: &Valuation, want: bool) -> Expr {
    let e = random_bool_expr(rng, m, 3);
    if e.eval_bool(val).unwrap() == want {
        e
    } else {
        Expr::not(e)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

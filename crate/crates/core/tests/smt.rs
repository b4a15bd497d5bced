//! Differential test of the SMT backend against enumeration. Runs only
//! when `PASG_SMT_CMD` names a solver command, e.g. `z3 -in`.

mod common;

use pasg::domain::{DomainKind, EntailmentBackend, EnumerationBackend, SmtBackend};
use pasg::harness::{run_check, CheckConfig, SolverKind};

fn solver_cmd() -> Option<String> {
    let cmd = std::env::var("PASG_SMT_CMD").ok().filter(|c| !c.trim().is_empty());
    if cmd.is_none() {
        eprintln!("PASG_SMT_CMD not set; SMT differential test skipped");
    }
    cmd
}

#[test]
fn smt_entailment_agrees_with_enumeration() {
    let Some(cmd) = solver_cmd() else { return };
    for seed in 0..40u64 {
        let (m, _) = common::random_model(seed);
        let smt = SmtBackend::spawn(&cmd, &m).unwrap();
        let enumeration = EnumerationBackend::new(&m);
        let mut rng = common::rng(seed);
        for _ in 0..25 {
            let a = common::random_bool_expr(&mut rng, &m, 3);
            let b = common::random_bool_expr(&mut rng, &m, 3);
            assert_eq!(
                smt.entails(&a, &b).unwrap(),
                enumeration.entails(&a, &b).unwrap(),
                "seed {seed}: {a:?} => {b:?}"
            );
        }
    }
}

#[test]
fn smt_predicate_domain_gives_the_same_bounds() {
    let Some(cmd) = solver_cmd() else { return };
    for (name, m, q) in common::corpus(10) {
        let base = CheckConfig {
            solver: SolverKind::LazyBvi,
            domain: DomainKind::Pred,
            ..Default::default()
        };
        let plain = run_check(&name, &m, &q, &base).unwrap();
        let smt = run_check(&name, &m, &q, &CheckConfig { smt_cmd: Some(cmd.clone()), ..base }).unwrap();
        assert!((plain.lower - smt.lower).abs() <= 1e-9, "{name}");
        assert!((plain.upper - smt.upper).abs() <= 1e-9, "{name}");
    }
}

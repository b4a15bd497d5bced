mod common;

use pasg::domain::{exact_eval_bool, AbstractDomain, ExplDomain, PredDomain, TriBool};
use pasg::explicit::{enumerate, oracle_pmax};
use pasg::harness::{parse_model, print_model};
use pasg::model::{TargetedMdp, VarId};
use pasg::pasg::{construct, ExploreConfig, NodeStatus};
use pasg::solver::{lazy_brtdp, BrtdpConfig, Heuristic};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let (m, q) = common::random_model(seed);
        let text = print_model(&m, &q);
        let (m2, q2) = parse_model(&text).unwrap();
        prop_assert_eq!(m, m2);
        prop_assert_eq!(q, q2);
    }

    #[test]
    fn weakest_precondition_is_substitution(seed in any::<u64>()) {
        let (m, _) = common::random_model(seed);
        let mut rng = common::rng(seed);
        let b = common::random_bool_expr(&mut rng, &m, 3);
        for c in m.commands() {
            for br in &c.branches {
                let pre = br.assignment.weakest_precondition(&b);
                for val in m.all_valuations() {
                    let post = br.assignment.apply_unchecked(&val).unwrap();
                    prop_assert_eq!(pre.eval_bool(&val).unwrap(), b.eval_bool(&post).unwrap());
                }
            }
        }
    }

    #[test]
    fn simplify_preserves_meaning(seed in any::<u64>()) {
        let (m, _) = common::random_model(seed);
        let mut rng = common::rng(seed ^ 0x5eed);
        for _ in 0..8 {
            let e = common::random_bool_expr(&mut rng, &m, 4);
            let s = e.simplify();
            prop_assert!(s.size() <= e.size());
            for val in m.all_valuations() {
                prop_assert_eq!(s.eval_bool(&val).unwrap(), e.eval_bool(&val).unwrap());
            }
        }
    }

    #[test]
    fn block_contract_expl(seed in any::<u64>()) {
        let (m, _) = common::random_model(seed);
        let d = ExplDomain::new(&m);
        let mut rng = common::rng(seed);
        let s = common::random_valuation(&mut rng, &m);
        let tracked: Vec<(VarId, i64)> = (0..m.vars().len())
            .filter(|_| rng.gen_bool(0.4))
            .map(|i| (VarId(i), s.get(VarId(i))))
            .collect();
        let abs = d.state(&tracked);
        let b = common::random_expr_at(&mut rng, &m, &s, false);
        let out = d.block(&abs, &b, &s).unwrap();
        prop_assert!(d.leq(&out, &abs).unwrap());
        prop_assert!(d.contains(&out, &s));
        prop_assert_eq!(d.eval_bool(&b, &out).unwrap(), TriBool::False);
        prop_assert_eq!(exact_eval_bool(&d, &m, &b, &out), TriBool::False);
    }

    #[test]
    fn block_contract_pred(seed in any::<u64>()) {
        let (m, _) = common::random_model(seed);
        let d = PredDomain::new(&m);
        let mut rng = common::rng(seed);
        let s = common::random_valuation(&mut rng, &m);
        let abs = common::random_expr_at(&mut rng, &m, &s, true);
        let b = common::random_expr_at(&mut rng, &m, &s, false);
        let out = d.block(&abs, &b, &s).unwrap();
        prop_assert!(d.leq(&out, &abs).unwrap());
        prop_assert!(d.contains(&out, &s));
        prop_assert_eq!(d.eval_bool(&b, &out).unwrap(), TriBool::False);
        prop_assert_eq!(exact_eval_bool(&d, &m, &b, &out), TriBool::False);
    }

    #[test]
    fn concrete_labels_are_reachable(seed in any::<u64>()) {
        let (m, q) = common::random_model(seed);
        let tm = TargetedMdp::new(&m, &q).unwrap();
        let e = enumerate(&tm, 1000).unwrap();
        let d = PredDomain::new(&m);
        let p = construct(&tm, &d, ExploreConfig::default()).unwrap();
        for n in &p.nodes {
            if n.status != NodeStatus::Covered {
                prop_assert!(e.index_of(&n.concrete).is_some());
            }
        }
    }

    #[test]
    fn lazy_brtdp_bounds_are_monotone_and_seeded(seed in any::<u64>(), run_seed in 0u64..4) {
        let (m, q) = common::random_model(seed);
        let tm = TargetedMdp::new(&m, &q).unwrap();
        let exact = oracle_pmax(&enumerate(&tm, 1000).unwrap(), 1e-12).unwrap().value();
        let d = ExplDomain::new(&m);
        let cfg = BrtdpConfig { heuristic: Heuristic::DiffBased, seed: run_seed, ..Default::default() };
        let record = || {
            let mut events = Vec::new();
            let r = lazy_brtdp(&tm, &d, ExploreConfig::default(), &cfg, |_, e| events.push(*e));
            (events, r.outcome.unwrap())
        };
        let (events, res) = record();
        let mut last = (0.0, 1.0);
        for e in &events {
            prop_assert!(e.lower >= last.0 && e.upper <= last.1);
            prop_assert!(e.lower - 1e-9 <= exact && exact <= e.upper + 1e-9);
            last = (e.lower, e.upper);
        }
        prop_assert!(res.upper - res.lower <= 1e-6);
        prop_assert_eq!(record().0, events);
    }
}

use std::time::Instant;

use super::graph::{mec_decomposition, prob0, prob1max};
use super::{MdpView, SolveError, SolveResult};

/// Interval iteration for maximal reachability.
///
/// States that cannot reach a target are fixed to 0, states that can reach
/// it almost surely to 1. The remaining states are grouped by maximal end
/// component; each group keeps only the actions that leave it. Lower and
/// upper bounds are then iterated in place from 0 and 1 until they are
/// `eps`-close everywhere.
pub fn bounded_value_iteration(
    v: &impl MdpView,
    eps: f64,
    max_sweeps: u64,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let n = v.num_states();
    let zero = prob0(v);
    let one = prob1max(v);
    let init = v.initial();
    let done = |lower, upper, iterations| SolveResult {
        lower,
        upper,
        iterations,
        states: n,
        time_ms: start.elapsed().as_millis() as u64,
    };
    if zero[init] {
        return Ok(done(0.0, 0.0, 0));
    }
    if one[init] {
        return Ok(done(1.0, 1.0, 0));
    }

    let maybe: Vec<bool> = (0..n).map(|s| !zero[s] && !one[s]).collect();
    let mut class = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = mec_decomposition(v, &maybe);
    for (k, g) in groups.iter().enumerate() {
        for &s in g {
            class[s] = k;
        }
    }
    for s in 0..n {
        if maybe[s] && class[s] == usize::MAX {
            class[s] = groups.len();
            groups.push(vec![s]);
        }
    }

    // quotient actions: constant contribution of fixed states plus the
    // remaining weighted classes
    let m = groups.len();
    let mut quotient: Vec<Vec<(f64, Vec<(usize, f64)>)>> = vec![Vec::new(); m];
    for (k, g) in groups.iter().enumerate() {
        for &s in g {
            for a in 0..v.num_actions(s) {
                let succ = v.successors(s, a);
                if succ.iter().all(|&(t, _)| class[t] == k) {
                    continue;
                }
                let mut constant = 0.0;
                let mut rest: Vec<(usize, f64)> = Vec::new();
                for &(t, p) in succ {
                    if one[t] {
                        constant += p;
                    } else if maybe[t] {
                        match rest.iter_mut().find(|(c, _)| *c == class[t]) {
                            Some((_, q)) => *q += p,
                            None => rest.push((class[t], p)),
                        }
                    }
                }
                quotient[k].push((constant, rest));
            }
        }
    }

    let mut lower = vec![0.0; m];
    let mut upper = vec![1.0; m];
    let q0 = class[init];
    let mut sweeps = 0;
    loop {
        let mut gap: f64 = 0.0;
        for k in 0..m {
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            for (c, rest) in &quotient[k] {
                let mut l = *c;
                let mut u = *c;
                for &(j, p) in rest {
                    l += p * lower[j];
                    u += p * upper[j];
                }
                lo = lo.max(l);
                hi = hi.max(u);
            }
            lower[k] = lower[k].max(lo);
            upper[k] = upper[k].min(hi);
            gap = gap.max(upper[k] - lower[k]);
        }
        sweeps += 1;
        if gap <= eps {
            return Ok(done(lower[q0], upper[q0], sweeps));
        }
        if sweeps >= max_sweeps {
            return Err(SolveError::Budget {
                what: "iteration",
                limit: max_sweeps,
                partial: done(lower[q0], upper[q0], sweeps),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::SparseMdp;
    use super::*;
    use crate::explicit::enumerate;
    use crate::harness::bundled;
    use crate::model::TargetedMdp;

    fn explicit(name: &str) -> SparseMdp {
        let (m, q) = bundled(name).unwrap();
        let e = enumerate(&TargetedMdp::new(&m, &q).unwrap(), 10_000).unwrap();
        SparseMdp::from_explicit(&e)
    }

    #[test]
    fn bundled_models() {
        let r = bounded_value_iteration(&explicit("running_example_bounded"), 1e-6, 1_000_000)
            .unwrap();
        assert!(r.lower >= 1.0 - 1e-6 && r.upper == 1.0);
        let r = bounded_value_iteration(&explicit("coin"), 1e-6, 1_000_000).unwrap();
        assert!((r.lower - 0.5).abs() <= 1e-6 && (r.upper - 0.5).abs() <= 1e-6);
        let r = bounded_value_iteration(&explicit("irrelevant"), 1e-9, 1_000_000).unwrap();
        let exact = 0.9f64.powi(8);
        assert!(r.lower <= exact + 1e-12 && exact <= r.upper + 1e-12, "{r:?}");
        assert!(r.upper - r.lower <= 1e-9);
    }

    #[test]
    fn unreachable_target_needs_no_iteration() {
        let v = SparseMdp::from_actions(0, vec![false, false], vec![vec![vec![(1, 1.0)]], vec![]])
            .unwrap();
        let r = bounded_value_iteration(&v, 1e-6, 10).unwrap();
        assert_eq!((r.lower, r.upper, r.iterations), (0.0, 0.0, 0));
    }

    #[test]
    fn end_component_is_collapsed() {
        // 0 <-> 1, each with a different exit; upper bound must drop below 1
        let v = SparseMdp::from_actions(
            0,
            vec![false, false, true, false],
            vec![
                vec![vec![(1, 1.0)], vec![(2, 0.4), (3, 0.6)]],
                vec![vec![(0, 1.0)], vec![(2, 0.6), (3, 0.4)]],
                vec![],
                vec![],
            ],
        )
        .unwrap();
        let r = bounded_value_iteration(&v, 1e-9, 1000).unwrap();
        assert!((r.upper - 0.6).abs() < 1e-9 && (r.lower - 0.6).abs() < 1e-9);
    }

    #[test]
    fn sweep_cap_is_a_budget_error() {
        let v = explicit("irrelevant");
        match bounded_value_iteration(&v, 1e-12, 1) {
            Err(SolveError::Budget { partial, .. }) => assert!(partial.lower <= partial.upper),
            other => panic!("unexpected {other:?}"),
        }
    }
}

//! Reference maximal reachability: qualitative pinning, end-component
//! collapsing and Jacobi-style interval iteration, written without reusing
//! any solver code.

use super::{ExplicitError, ExplicitMdp};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    pub lower: f64,
    pub upper: f64,
    pub sweeps: u64,
}

impl OracleResult {
    pub fn value(&self) -> f64 {
        (self.lower + self.upper) / 2.0
    }
}

const MAX_SWEEPS: u64 = 50_000_000;

/// Maximal probability of reaching a target from the initial state, with
/// `upper - lower <= eps`.
pub fn oracle_pmax(e: &ExplicitMdp, eps: f64) -> Result<OracleResult, ExplicitError> {
    let n = e.len();
    let can_reach = positive_reach(e);
    let sure = almost_sure(e);
    let fixed: Vec<Option<f64>> = (0..n)
        .map(|s| {
            if !can_reach[s] {
                Some(0.0)
            } else if sure[s] {
                Some(1.0)
            } else {
                None
            }
        })
        .collect();
    if let Some(v) = fixed[e.initial] {
        return Ok(OracleResult {
            lower: v,
            upper: v,
            sweeps: 0,
        });
    }

    // collapse end components among the undecided states
    let undecided: Vec<bool> = fixed.iter().map(|f| f.is_none()).collect();
    let comps = end_components(e, &undecided);
    let mut class = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for comp in comps {
        for &s in &comp {
            class[s] = members.len();
        }
        members.push(comp);
    }
    for s in 0..n {
        if undecided[s] && class[s] == usize::MAX {
            class[s] = members.len();
            members.push(vec![s]);
        }
    }

    // per class: list of (constant part, [(class, prob)])
    let mut choices: Vec<Vec<(f64, Vec<(usize, f64)>)>> = vec![Vec::new(); members.len()];
    for (k, ms) in members.iter().enumerate() {
        for &s in ms {
            for act in &e.actions[s] {
                if act.successors.iter().all(|&(t, _)| class[t] == k) {
                    continue;
                }
                let mut constant = 0.0;
                let mut rest = Vec::new();
                for &(t, p) in &act.successors {
                    match fixed[t] {
                        Some(v) => constant += p * v,
                        None => rest.push((class[t], p)),
                    }
                }
                choices[k].push((constant, rest));
            }
        }
    }

    let m = members.len();
    let mut lo = vec![0.0; m];
    let mut hi = vec![1.0; m];
    let init = class[e.initial];
    let mut sweeps = 0;
    loop {
        let widest = (0..m).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        if widest <= eps {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(ExplicitError::Iterations {
                limit: MAX_SWEEPS,
                lower: lo[init],
                upper: hi[init],
            });
        }
        let next_lo: Vec<f64> = (0..m).map(|k| best(&choices[k], &lo).max(lo[k])).collect();
        let next_hi: Vec<f64> = (0..m).map(|k| best(&choices[k], &hi).min(hi[k])).collect();
        lo = next_lo;
        hi = next_hi;
        sweeps += 1;
    }
    Ok(OracleResult {
        lower: lo[init],
        upper: hi[init],
        sweeps,
    })
}

fn best(choices: &[(f64, Vec<(usize, f64)>)], values: &[f64]) -> f64 {
    choices
        .iter()
        .map(|(c, rest)| c + rest.iter().map(|&(k, p)| p * values[k]).sum::<f64>())
        .fold(0.0, f64::max)
}

fn predecessors(e: &ExplicitMdp) -> Vec<Vec<(usize, usize)>> {
    let mut pre = vec![Vec::new(); e.len()];
    for (s, acts) in e.actions.iter().enumerate() {
        for (a, act) in acts.iter().enumerate() {
            for &(t, p) in &act.successors {
                if p > 0.0 {
                    pre[t].push((s, a));
                }
            }
        }
    }
    pre
}

/// States that reach a target with positive probability under some choice.
fn positive_reach(e: &ExplicitMdp) -> Vec<bool> {
    let pre = predecessors(e);
    let mut seen = e.target.clone();
    let mut stack: Vec<usize> = (0..e.len()).filter(|&s| e.target[s]).collect();
    while let Some(t) = stack.pop() {
        for &(s, _) in &pre[t] {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}

/// States from which some strategy reaches a target with probability one.
fn almost_sure(e: &ExplicitMdp) -> Vec<bool> {
    let n = e.len();
    let mut keep = vec![true; n];
    loop {
        // actions that never leave `keep`
        let safe = |s: usize, a: usize| e.actions[s][a].successors.iter().all(|&(t, _)| keep[t]);
        let mut hit = e.target.clone();
        loop {
            let mut grew = false;
            for s in 0..n {
                if hit[s] || !keep[s] {
                    continue;
                }
                let ok = (0..e.actions[s].len()).any(|a| {
                    safe(s, a) && e.actions[s][a].successors.iter().any(|&(t, _)| hit[t])
                });
                if ok {
                    hit[s] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let next: Vec<bool> = (0..n).map(|s| keep[s] && hit[s]).collect();
        if next == keep {
            return keep;
        }
        keep = next;
    }
}

/// Maximal end components inside `inside`, found by repeatedly splitting on
/// mutual reachability and discarding actions that leave a component.
fn end_components(e: &ExplicitMdp, inside: &[bool]) -> Vec<Vec<usize>> {
    let n = e.len();
    let mut alive = inside.to_vec();
    let mut allowed: Vec<Vec<bool>> = e
        .actions
        .iter()
        .enumerate()
        .map(|(s, acts)| {
            acts.iter()
                .map(|act| alive[s] && act.successors.iter().all(|&(t, _)| inside[t]))
                .collect()
        })
        .collect();
    loop {
        let comp = mutual_reach(e, &alive, &allowed);
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            for a in 0..allowed[s].len() {
                if allowed[s][a]
                    && e.actions[s][a]
                        .successors
                        .iter()
                        .any(|&(t, _)| !alive[t] || comp[t] != comp[s])
                {
                    allowed[s][a] = false;
                    changed = true;
                }
            }
            if !allowed[s].iter().any(|&x| x) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut groups: Vec<Vec<usize>> = Vec::new();
            let mut slot = vec![usize::MAX; n];
            for s in 0..n {
                if !alive[s] {
                    continue;
                }
                let c = comp[s];
                if slot[c] == usize::MAX {
                    slot[c] = groups.len();
                    groups.push(Vec::new());
                }
                groups[slot[c]].push(s);
            }
            return groups;
        }
    }
}

/// Labels each alive state with the smallest state id in its strongly
/// connected component of the graph given by the allowed actions.
fn mutual_reach(e: &ExplicitMdp, alive: &[bool], allowed: &[Vec<bool>]) -> Vec<usize> {
    let n = e.len();
    let forward = |s: usize| {
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for (a, act) in e.actions[u].iter().enumerate() {
                if !allowed[u][a] {
                    continue;
                }
                for &(t, _) in &act.successors {
                    if alive[t] && !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        seen
    };
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| if alive[s] { forward(s) } else { vec![false; n] })
        .collect();
    (0..n)
        .map(|s| {
            (0..n)
                .find(|&t| reach[s][t] && reach[t][s])
                .unwrap_or(s)
        })
        .collect()
}

//! Qualitative precomputations and end-component decomposition.

use super::MdpView;

fn predecessors(v: &impl MdpView) -> Vec<Vec<usize>> {
    let mut pre = vec![Vec::new(); v.num_states()];
    for s in 0..v.num_states() {
        for a in 0..v.num_actions(s) {
            for &(t, p) in v.successors(s, a) {
                if p > 0.0 && pre[t].last() != Some(&s) {
                    pre[t].push(s);
                }
            }
        }
    }
    pre
}

/// States from which no strategy reaches a target with positive
/// probability.
pub fn prob0(v: &impl MdpView) -> Vec<bool> {
    let pre = predecessors(v);
    let n = v.num_states();
    let mut reach = vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&s| v.is_target(s)).collect();
    for &s in &queue {
        reach[s] = true;
    }
    while let Some(t) = queue.pop() {
        for &s in &pre[t] {
            if !reach[s] {
                reach[s] = true;
                queue.push(s);
            }
        }
    }
    reach.into_iter().map(|r| !r).collect()
}

/// States from which some strategy reaches a target with probability one.
///
/// Greatest fixpoint over candidate sets `C`, each step keeping the states
/// that can reach a target through actions that stay inside `C`.
pub fn prob1max(v: &impl MdpView) -> Vec<bool> {
    let n = v.num_states();
    let pre = predecessors(v);
    let mut candidate = vec![true; n];
    loop {
        let stays = |s: usize, a: usize, c: &[bool]| v.successors(s, a).iter().all(|&(t, _)| c[t]);
        let mut reach = vec![false; n];
        let mut queue: Vec<usize> = (0..n).filter(|&s| v.is_target(s) && candidate[s]).collect();
        for &s in &queue {
            reach[s] = true;
        }
        while let Some(t) = queue.pop() {
            for &s in &pre[t] {
                if reach[s] || !candidate[s] {
                    continue;
                }
                let ok = (0..v.num_actions(s)).any(|a| {
                    stays(s, a, &candidate)
                        && v.successors(s, a).iter().any(|&(u, p)| p > 0.0 && reach[u])
                });
                if ok {
                    reach[s] = true;
                    queue.push(s);
                }
            }
        }
        if reach == candidate {
            return candidate;
        }
        candidate = reach;
    }
}

/// Strongly connected components of the graph on `0..n` given by `succ`,
/// in reverse topological order. Iterative Tarjan.
pub(crate) fn sccs(n: usize, succ: impl Fn(usize, &mut Vec<usize>)) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next_index = 0;
    let mut buf = Vec::new();
    // call frames: (node, its successors, position)
    let mut frames: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut enter = |s: usize,
                         index: &mut Vec<usize>,
                         low: &mut Vec<usize>,
                         stack: &mut Vec<usize>,
                         on_stack: &mut Vec<bool>,
                         frames: &mut Vec<(usize, Vec<usize>, usize)>| {
            index[s] = next_index;
            low[s] = next_index;
            next_index += 1;
            stack.push(s);
            on_stack[s] = true;
            buf.clear();
            succ(s, &mut buf);
            frames.push((s, buf.clone(), 0));
        };
        enter(root, &mut index, &mut low, &mut stack, &mut on_stack, &mut frames);
        while let Some(frame) = frames.last_mut() {
            let s = frame.0;
            if frame.2 < frame.1.len() {
                let t = frame.1[frame.2];
                frame.2 += 1;
                if index[t] == UNSEEN {
                    enter(t, &mut index, &mut low, &mut stack, &mut on_stack, &mut frames);
                } else if on_stack[t] {
                    low[s] = low[s].min(index[t]);
                }
                continue;
            }
            frames.pop();
            if let Some(parent) = frames.last() {
                let p = parent.0;
                low[p] = low[p].min(low[s]);
            }
            if low[s] == index[s] {
                let mut comp = Vec::new();
                loop {
                    let t = stack.pop().expect("tarjan stack");
                    on_stack[t] = false;
                    comp.push(t);
                    if t == s {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

/// Maximal end components of the sub-MDP on the states in `mask`, using
/// only actions whose successors all lie in `mask`. Each component is
/// sorted; components are ordered by their smallest state.
pub fn mec_decomposition(v: &impl MdpView, mask: &[bool]) -> Vec<Vec<usize>> {
    let n = v.num_states();
    let mut alive = mask.to_vec();
    let mut enabled: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            (0..v.num_actions(s))
                .map(|a| mask[s] && v.successors(s, a).iter().all(|&(t, _)| mask[t]))
                .collect()
        })
        .collect();
    loop {
        let comps = sccs(n, |s, out| {
            if !alive[s] {
                return;
            }
            for (a, &on) in enabled[s].iter().enumerate() {
                if on {
                    out.extend(v.successors(s, a).iter().map(|&(t, _)| t));
                }
            }
        });
        let mut comp_of = vec![usize::MAX; n];
        for (i, c) in comps.iter().enumerate() {
            for &s in c {
                comp_of[s] = i;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            for a in 0..enabled[s].len() {
                if enabled[s][a]
                    && v
                        .successors(s, a)
                        .iter()
                        .any(|&(t, _)| !alive[t] || comp_of[t] != comp_of[s])
                {
                    enabled[s][a] = false;
                    changed = true;
                }
            }
            if !enabled[s].contains(&true) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut mecs: Vec<Vec<usize>> = comps
                .into_iter()
                .filter(|c| alive[c[0]])
                .collect();
            mecs.sort_unstable_by_key(|c| c[0]);
            return mecs;
        }
    }
}

//! Bounded real-time dynamic programming over a state space that may be
//! materialised on demand.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::graph::{mec_decomposition, prob0};
use super::{MdpView, SolveError, SolveResult, SparseMdp};

/// How the successor of a sampled action is picked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// Proportional to the transition probability.
    #[default]
    Random,
    /// Proportional to probability times the successor's bound gap; falls
    /// back to `Random` when every gap is zero.
    DiffBased,
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Random => "random",
            Heuristic::DiffBased => "diff-based",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrtdpConfig {
    pub heuristic: Heuristic,
    pub seed: u64,
    pub eps: f64,
    pub max_traces: u64,
    /// End components are detected and deflated every this many traces.
    pub deflate_every: u64,
}

impl Default for BrtdpConfig {
    fn default() -> Self {
        BrtdpConfig {
            heuristic: Heuristic::Random,
            seed: 0,
            eps: 1e-6,
            max_traces: 1_000_000,
            deflate_every: 64,
        }
    }
}

/// Bounds at the initial state after a completed trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEvent {
    pub trace: u64,
    pub lower: f64,
    pub upper: f64,
}

pub(crate) enum Step {
    /// Not materialised (or no longer, after refinement).
    Unexplored,
    Target,
    Deadlock,
    Choices(Vec<Vec<(usize, f64)>>),
}

pub(crate) trait TraceSpace {
    fn initial(&self) -> usize;

    /// Makes the actions of `s` available.
    fn materialize(&mut self, s: usize) -> Result<(), SolveError>;

    fn step(&self, s: usize) -> Step;

    /// Upper bound on state ids handed out so far.
    fn num_states(&self) -> usize;
}

struct ViewSpace<'a, V>(&'a V);

impl<V: MdpView> TraceSpace for ViewSpace<'_, V> {
    fn initial(&self) -> usize {
        self.0.initial()
    }

    fn materialize(&mut self, _: usize) -> Result<(), SolveError> {
        Ok(())
    }

    fn step(&self, s: usize) -> Step {
        if self.0.is_target(s) {
            return Step::Target;
        }
        let acts: Vec<Vec<(usize, f64)>> = (0..self.0.num_actions(s))
            .map(|a| self.0.successors(s, a).to_vec())
            .collect();
        if acts.is_empty() {
            Step::Deadlock
        } else {
            Step::Choices(acts)
        }
    }

    fn num_states(&self) -> usize {
        self.0.num_states()
    }
}

/// BRTDP on a fully known MDP.
pub fn brtdp(
    v: &impl MdpView,
    config: &BrtdpConfig,
    on_trace: impl FnMut(&TraceEvent),
) -> Result<SolveResult, SolveError> {
    let mut space = ViewSpace(v);
    let mut on_trace = on_trace;
    run(&mut space, config, |_, e| on_trace(e))
}

struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
    explored: Vec<bool>,
    explored_count: usize,
    /// For members of a deflated end component, the state and action of its
    /// best exit at the last deflation.
    exit_of: Vec<Option<(usize, usize)>>,
    /// Action leading towards that exit while staying in the component.
    steer: Vec<Option<usize>>,
}

impl Bounds {
    fn grow(&mut self, n: usize) {
        if self.lower.len() < n {
            self.lower.resize(n, 0.0);
            self.upper.resize(n, 1.0);
            self.explored.resize(n, false);
            self.exit_of.resize(n, None);
            self.steer.resize(n, None);
        }
    }

    fn q(values: &[f64], dist: &[(usize, f64)]) -> f64 {
        dist.iter().map(|&(t, p)| p * values[t]).sum()
    }

    fn update<T: TraceSpace>(&mut self, space: &T, s: usize) {
        match space.step(s) {
            Step::Unexplored => {}
            Step::Target => {
                self.lower[s] = 1.0;
                self.upper[s] = 1.0;
            }
            Step::Deadlock => {
                self.lower[s] = 0.0;
                self.upper[s] = 0.0;
            }
            Step::Choices(acts) => {
                let mut lo: f64 = 0.0;
                let mut hi: f64 = 0.0;
                for d in &acts {
                    lo = lo.max(Self::q(&self.lower, d));
                    hi = hi.max(Self::q(&self.upper, d));
                }
                // rounding must not let the bounds cross or move backwards
                self.upper[s] = self.upper[s].min(hi.max(self.lower[s]));
                self.lower[s] = self.lower[s].max(lo.min(self.upper[s]));
            }
        }
    }
}

const TIE: f64 = 1e-12;

pub(crate) fn run<T: TraceSpace>(
    space: &mut T,
    config: &BrtdpConfig,
    mut on_trace: impl FnMut(&T, &TraceEvent),
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut b = Bounds {
        lower: Vec::new(),
        upper: Vec::new(),
        explored: Vec::new(),
        explored_count: 0,
        exit_of: Vec::new(),
        steer: Vec::new(),
    };
    let init = space.initial();
    b.grow(space.num_states().max(init + 1));
    let mut traces = 0u64;
    let result = |b: &Bounds, traces| SolveResult {
        lower: b.lower[init],
        upper: b.upper[init],
        iterations: traces,
        states: b.explored_count,
        time_ms: start.elapsed().as_millis() as u64,
    };
    let mut trace: Vec<usize> = Vec::new();
    loop {
        if b.upper[init] - b.lower[init] <= config.eps {
            return Ok(result(&b, traces));
        }
        if traces >= config.max_traces {
            return Err(SolveError::Budget {
                what: "trace",
                limit: config.max_traces,
                partial: result(&b, traces),
            });
        }

        trace.clear();
        let cap = (3 * b.explored_count).max(16);
        let mut s = init;
        loop {
            if let Err(e) = space.materialize(s) {
                return Err(match e {
                    SolveError::Budget { what, limit, .. } => SolveError::Budget {
                        what,
                        limit,
                        partial: result(&b, traces),
                    },
                    other => other,
                });
            }
            b.grow(space.num_states());
            if !b.explored[s] {
                b.explored[s] = true;
                b.explored_count += 1;
            }
            trace.push(s);
            let acts = match space.step(s) {
                Step::Choices(acts) => acts,
                _ => break,
            };
            if trace.len() >= cap || (s != init && b.upper[s] <= b.lower[s]) {
                break;
            }
            // greedy in the upper bound, lowest index on ties; values equal
            // up to rounding count as ties
            let mut best = 0;
            let mut best_q = f64::NEG_INFINITY;
            for (a, d) in acts.iter().enumerate() {
                let q = Bounds::q(&b.upper, d);
                if q > best_q + TIE {
                    best = a;
                    best_q = q;
                }
            }
            // inside a deflated end component, head for its best exit
            // unless some local action is strictly better
            if let (Some((src, a)), Some(toward)) = (b.exit_of[s], b.steer[s]) {
                if let Step::Choices(e) = space.step(src) {
                    if a < e.len() && toward < acts.len() && Bounds::q(&b.upper, &e[a]) + TIE >= best_q {
                        best = toward;
                    }
                }
            }
            s = sample(&acts[best], &b, config.heuristic, &mut rng);
        }
        for &s in trace.iter().rev() {
            b.update(space, s);
        }
        traces += 1;
        if config.deflate_every > 0 && traces.is_multiple_of(config.deflate_every) {
            deflate(space, &mut b);
        }
        on_trace(
            space,
            &TraceEvent {
                trace: traces,
                lower: b.lower[init],
                upper: b.upper[init],
            },
        );
    }
}

fn sample(dist: &[(usize, f64)], b: &Bounds, h: Heuristic, rng: &mut ChaCha8Rng) -> usize {
    let weights: Vec<f64> = match h {
        Heuristic::Random => dist.iter().map(|&(_, p)| p).collect(),
        Heuristic::DiffBased => {
            let w: Vec<f64> = dist
                .iter()
                .map(|&(t, p)| p * (b.upper[t] - b.lower[t]).max(0.0))
                .collect();
            if w.iter().sum::<f64>() > 0.0 {
                w
            } else {
                dist.iter().map(|&(_, p)| p).collect()
            }
        }
    };
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return dist[i].0;
        }
        x -= w;
    }
    // rounding: last successor with positive weight
    let i = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    dist[i].0
}

/// Lowers the upper bound inside every end component of the explored part
/// to the best value of leaving it. Components without exits drop to 0, as
/// do states that cannot reach a target or an unexplored state.
fn deflate<T: TraceSpace>(space: &T, b: &mut Bounds) {
    let n = space.num_states();
    b.grow(n);
    let mut mask = vec![false; n];
    let mut open = vec![false; n];
    let mut actions: Vec<Vec<Vec<(usize, f64)>>> = vec![Vec::new(); n];
    for s in 0..n {
        match space.step(s) {
            Step::Choices(acts) if b.explored[s] => {
                mask[s] = true;
                actions[s] = acts;
            }
            Step::Deadlock => {}
            _ => open[s] = true,
        }
    }
    let view = SparseMdp::from_actions(space.initial(), open, actions)
        .expect("materialised distributions are well formed");
    for (s, zero) in prob0(&view).into_iter().enumerate() {
        if zero && mask[s] {
            b.upper[s] = b.lower[s];
        }
    }
    b.exit_of.iter_mut().for_each(|e| *e = None);
    b.steer.iter_mut().for_each(|e| *e = None);
    for mec in mec_decomposition(&view, &mask) {
        let mut inside = vec![false; n];
        for &s in &mec {
            inside[s] = true;
        }
        let mut exit: f64 = 0.0;
        let mut best = None;
        for &s in &mec {
            for a in 0..view.num_actions(s) {
                let d = view.successors(s, a);
                if d.iter().all(|&(t, _)| inside[t]) {
                    continue;
                }
                let q = Bounds::q(&b.upper, d);
                if best.is_none() || q > exit {
                    exit = q;
                    best = Some((s, a));
                }
            }
        }
        for &s in &mec {
            b.exit_of[s] = best;
            b.upper[s] = b.upper[s].min(exit.max(b.lower[s]));
        }
        if let Some((src, a)) = best {
            steer_towards(&view, &mec, &inside, src, a, &mut b.steer);
        }
    }
}

/// Attractor of `src` inside an end component: every member gets an action
/// that stays inside and may move closer to `src`.
fn steer_towards(
    view: &SparseMdp,
    mec: &[usize],
    inside: &[bool],
    src: usize,
    exit: usize,
    steer: &mut [Option<usize>],
) {
    steer[src] = Some(exit);
    let mut reached = vec![false; inside.len()];
    reached[src] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &s in mec {
            if reached[s] {
                continue;
            }
            let toward = (0..view.num_actions(s)).find(|&a| {
                let d = view.successors(s, a);
                d.iter().all(|&(t, _)| inside[t]) && d.iter().any(|&(t, _)| reached[t])
            });
            if let Some(a) = toward {
                steer[s] = Some(a);
                reached[s] = true;
                changed = true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explicit::{enumerate, oracle_pmax};
    use crate::harness::bundled;
    use crate::model::TargetedMdp;

    fn explicit(name: &str) -> (SparseMdp, f64) {
        let (m, q) = bundled(name).unwrap();
        let e = enumerate(&TargetedMdp::new(&m, &q).unwrap(), 10_000).unwrap();
        let exact = oracle_pmax(&e, 1e-12).unwrap().value();
        (SparseMdp::from_explicit(&e), exact)
    }

    #[test]
    fn converges_and_brackets_on_bundled_models() {
        for name in ["coin", "running_example_bounded", "irrelevant"] {
            let (v, exact) = explicit(name);
            for heuristic in [Heuristic::Random, Heuristic::DiffBased] {
                for seed in 0..3 {
                    let cfg = BrtdpConfig {
                        heuristic,
                        seed,
                        ..Default::default()
                    };
                    let mut last = (0.0, 1.0);
                    let r = brtdp(&v, &cfg, |e| {
                        assert!(e.lower - 1e-9 <= exact && exact <= e.upper + 1e-9, "{name}");
                        assert!(e.lower >= last.0 && e.upper <= last.1);
                        last = (e.lower, e.upper);
                    })
                    .unwrap();
                    assert!(r.upper - r.lower <= 1e-6, "{name}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn unit_threshold_stops_immediately() {
        let (v, _) = explicit("coin");
        let cfg = BrtdpConfig {
            eps: 1.0,
            ..Default::default()
        };
        let r = brtdp(&v, &cfg, |_| panic!("no trace expected")).unwrap();
        assert_eq!((r.lower, r.upper, r.iterations), (0.0, 1.0, 0));
    }

    #[test]
    fn same_seed_same_updates() {
        let (v, _) = explicit("irrelevant");
        let record = |seed| {
            let mut events = Vec::new();
            let cfg = BrtdpConfig {
                heuristic: Heuristic::DiffBased,
                seed,
                ..Default::default()
            };
            brtdp(&v, &cfg, |e| events.push(*e)).unwrap();
            events
        };
        assert_eq!(record(7), record(7));
    }

    #[test]
    fn trace_budget() {
        let (v, _) = explicit("irrelevant");
        let cfg = BrtdpConfig {
            max_traces: 2,
            ..Default::default()
        };
        assert!(matches!(
            brtdp(&v, &cfg, |_| {}),
            Err(SolveError::Budget { what: "trace", .. })
        ));
    }

    #[test]
    fn unreachable_target_closes_quickly() {
        // 0 -> {1, 2} with 1 a sink loop and 2 back to 0; the target 3 is
        // never reached
        let v = SparseMdp::from_actions(
            0,
            vec![false, false, false, true],
            vec![
                vec![vec![(1, 0.5), (2, 0.5)], vec![(0, 1.0)]],
                vec![vec![(1, 1.0)]],
                vec![vec![(0, 1.0)]],
                vec![vec![(3, 1.0)]],
            ],
        )
        .unwrap();
        let r = brtdp(&v, &BrtdpConfig::default(), |_| {}).unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 0.0));
        assert!(r.iterations <= 128, "{}", r.iterations);
    }
}

//! Single runs: solver dispatch and the statistics record.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    AbstractDomain, DomainKind, EnumerationBackend, ExplDomain, FallbackBackend, PredDomain,
    SmtBackend,
};
use crate::explicit::{count_reachable, enumerate, oracle_pmax, ExplicitError};
use crate::model::{ModelError, ReachabilityQuery, SymbolicMdp, TargetedMdp};
use crate::pasg::{ExploreConfig, Pasg, WaitlistPolicy};
use crate::solver::{
    bounded_value_iteration, brtdp, lazy_brtdp, lazy_bvi, BrtdpConfig, Heuristic, SolveError,
    SolveResult, SparseMdp,
};

use super::{parse_model, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Oracle,
    Bvi,
    Brtdp,
    LazyBvi,
    LazyBrtdp,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Oracle,
        SolverKind::Bvi,
        SolverKind::Brtdp,
        SolverKind::LazyBvi,
        SolverKind::LazyBrtdp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Oracle => "oracle",
            SolverKind::Bvi => "bvi",
            SolverKind::Brtdp => "brtdp",
            SolverKind::LazyBvi => "lazy-bvi",
            SolverKind::LazyBrtdp => "lazy-brtdp",
        }
    }

    /// Solvers that build an abstraction graph and so use a domain.
    pub fn is_lazy(self) -> bool {
        matches!(self, SolverKind::LazyBvi | SolverKind::LazyBrtdp)
    }

    pub fn uses_heuristic(self) -> bool {
        matches!(self, SolverKind::Brtdp | SolverKind::LazyBrtdp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown value `{0}`")]
pub struct UnknownName(pub String);

impl FromStr for SolverKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownName(s.into()))
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expl" => Ok(DomainKind::Expl),
            "pred" => Ok(DomainKind::Pred),
            _ => Err(UnknownName(s.into())),
        }
    }
}

impl FromStr for Heuristic {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Heuristic::Random),
            "diff-based" => Ok(Heuristic::DiffBased),
            _ => Err(UnknownName(s.into())),
        }
    }
}

impl FromStr for WaitlistPolicy {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lifo" => Ok(WaitlistPolicy::Lifo),
            "fifo" => Ok(WaitlistPolicy::Fifo),
            _ => Err(UnknownName(s.into())),
        }
    }
}

/// Everything a single run needs besides the model.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    pub solver: SolverKind,
    pub domain: DomainKind,
    pub heuristic: Heuristic,
    pub threshold: f64,
    pub seed: u64,
    pub waitlist: WaitlistPolicy,
    /// Graph nodes for the lazy solvers, concrete states for the others.
    pub max_nodes: usize,
    pub max_traces: u64,
    /// External SMT-LIB solver for the predicate domain, e.g. `z3 -in`.
    pub smt_cmd: Option<String>,
    /// Cap on the concrete enumeration used for the `explicit_states` field
    /// of lazy runs; `0` skips the count.
    pub count_cap: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            solver: SolverKind::LazyBvi,
            domain: DomainKind::Expl,
            heuristic: Heuristic::Random,
            threshold: 1e-6,
            seed: 0,
            waitlist: WaitlistPolicy::Lifo,
            max_nodes: 5_000_000,
            max_traces: 1_000_000,
            smt_cmd: None,
            count_cap: 1_000_000,
        }
    }
}

/// Sweep cap for the value-iteration solvers.
pub const MAX_SWEEPS: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    BudgetExceeded,
}

/// One run's measurements. Graph counts are zero for the explicit solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub model: String,
    /// `None` for the explicit solvers.
    pub domain: Option<String>,
    pub solver: String,
    /// `None` for solvers that do not sample.
    pub heuristic: Option<String>,
    pub seed: u64,
    pub threshold: f64,
    pub lower: f64,
    pub upper: f64,
    pub total_nodes: usize,
    pub covered_nodes: usize,
    pub non_covered_nodes: usize,
    pub explicit_states: Option<usize>,
    pub iterations: u64,
    pub time_ms: u64,
    pub status: RunStatus,
}

impl StatsRecord {
    /// Serialised form with the wall time zeroed, for comparisons.
    pub fn without_time(&self) -> StatsRecord {
        StatsRecord {
            time_ms: 0,
            ..self.clone()
        }
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} [{}{}]: Pmax in [{}, {}] (width {:e})",
            self.model,
            self.solver,
            self.domain.as_deref().map(|d| format!(", {d}")).unwrap_or_default(),
            self.lower,
            self.upper,
            self.upper - self.lower
        );
        if self.total_nodes > 0 {
            s += &format!(
                "\n  nodes: {} total, {} covered, {} non-covered",
                self.total_nodes, self.covered_nodes, self.non_covered_nodes
            );
        }
        if let Some(n) = self.explicit_states {
            s += &format!("\n  concrete states: {n}");
        }
        s += &format!("\n  iterations: {}, time: {} ms", self.iterations, self.time_ms);
        if self.status == RunStatus::BudgetExceeded {
            s += "\n  budget exceeded; bounds are partial";
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Explicit(ExplicitError),
    #[error(transparent)]
    Solve(SolveError),
    #[error("SMT backend: {0}")]
    Smt(String),
}

impl HarnessError {
    /// Process exit code: 2 for exhausted budgets, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Solve(e) if e.is_budget() => 2,
            HarnessError::Explicit(ExplicitError::StateBudget { .. })
            | HarnessError::Explicit(ExplicitError::Iterations { .. }) => 2,
            _ => 1,
        }
    }
}

pub fn load_model(path: &Path) -> Result<(SymbolicMdp, ReachabilityQuery), HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text).map_err(|source| HarnessError::Parse {
        path: path.display().to_string(),
        source,
    })
}

/// Model name used in records: the file stem.
pub fn model_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Runs one solver. Exhausted budgets still produce a record, with status
/// `budget-exceeded` and the partial bounds; other failures are errors.
pub fn run_check(
    name: &str,
    model: &SymbolicMdp,
    query: &ReachabilityQuery,
    config: &CheckConfig,
) -> Result<StatsRecord, HarnessError> {
    let tm = TargetedMdp::new(model, query)?;
    let mut record = StatsRecord {
        model: name.to_string(),
        domain: config.solver.is_lazy().then(|| config.domain.name().to_string()),
        solver: config.solver.name().to_string(),
        heuristic: config
            .solver
            .uses_heuristic()
            .then(|| config.heuristic.name().to_string()),
        seed: config.seed,
        threshold: config.threshold,
        lower: 0.0,
        upper: 1.0,
        total_nodes: 0,
        covered_nodes: 0,
        non_covered_nodes: 0,
        explicit_states: None,
        iterations: 0,
        time_ms: 0,
        status: RunStatus::Ok,
    };
    if config.solver.is_lazy() {
        match config.domain {
            DomainKind::Expl => run_lazy(&tm, &ExplDomain::new(model), config, &mut record)?,
            DomainKind::Pred => {
                let domain = match &config.smt_cmd {
                    None => PredDomain::new(model),
                    Some(cmd) => {
                        let smt = SmtBackend::spawn(cmd, model)
                            .map_err(|e| HarnessError::Smt(e.to_string()))?;
                        PredDomain::with_backend(Box::new(FallbackBackend {
                            primary: smt,
                            fallback: EnumerationBackend::new(model),
                        }))
                    }
                };
                run_lazy(&tm, &domain, config, &mut record)?
            }
        }
        if config.count_cap > 0 {
            record.explicit_states = count_reachable(&tm, config.count_cap).ok();
        }
    } else {
        run_explicit(&tm, config, &mut record)?;
    }
    Ok(record)
}

fn fill(record: &mut StatsRecord, r: &SolveResult) {
    record.lower = r.lower;
    record.upper = r.upper;
    record.iterations = r.iterations;
    record.time_ms = r.time_ms;
}

fn settle(
    record: &mut StatsRecord,
    outcome: Result<SolveResult, SolveError>,
) -> Result<(), HarnessError> {
    match outcome {
        Ok(r) => fill(record, &r),
        Err(SolveError::Budget { partial, .. }) => {
            fill(record, &partial);
            record.status = RunStatus::BudgetExceeded;
        }
        Err(e) => return Err(HarnessError::Solve(e)),
    }
    Ok(())
}

fn count_nodes<S>(record: &mut StatsRecord, pasg: &Pasg<S>) {
    record.total_nodes = pasg.len();
    record.covered_nodes = pasg.covered_count();
    record.non_covered_nodes = pasg.len() - pasg.covered_count();
}

fn run_lazy<D: AbstractDomain>(
    tm: &TargetedMdp,
    domain: &D,
    config: &CheckConfig,
    record: &mut StatsRecord,
) -> Result<(), HarnessError> {
    let explore = ExploreConfig {
        policy: config.waitlist,
        max_nodes: config.max_nodes,
    };
    let start = Instant::now();
    let run = match config.solver {
        SolverKind::LazyBvi => lazy_bvi(tm, domain, explore, config.threshold, MAX_SWEEPS),
        _ => lazy_brtdp(tm, domain, explore, &brtdp_config(config), |_, _| {}),
    };
    count_nodes(record, &run.pasg);
    settle(record, run.outcome)?;
    record.time_ms = start.elapsed().as_millis() as u64;
    Ok(())
}

fn brtdp_config(config: &CheckConfig) -> BrtdpConfig {
    BrtdpConfig {
        heuristic: config.heuristic,
        seed: config.seed,
        eps: config.threshold,
        max_traces: config.max_traces,
        ..Default::default()
    }
}

fn run_explicit(
    tm: &TargetedMdp,
    config: &CheckConfig,
    record: &mut StatsRecord,
) -> Result<(), HarnessError> {
    let start = Instant::now();
    let e = match enumerate(tm, config.max_nodes) {
        Ok(e) => e,
        Err(ExplicitError::StateBudget { .. }) => {
            record.status = RunStatus::BudgetExceeded;
            record.time_ms = start.elapsed().as_millis() as u64;
            return Ok(());
        }
        Err(other) => return Err(HarnessError::Explicit(other)),
    };
    record.explicit_states = Some(e.len());
    match config.solver {
        SolverKind::Oracle => match oracle_pmax(&e, config.threshold) {
            Ok(r) => {
                record.lower = r.lower;
                record.upper = r.upper;
                record.iterations = r.sweeps;
            }
            Err(ExplicitError::Iterations { limit, lower, upper }) => {
                record.lower = lower;
                record.upper = upper;
                record.iterations = limit;
                record.status = RunStatus::BudgetExceeded;
            }
            Err(other) => return Err(HarnessError::Explicit(other)),
        },
        SolverKind::Bvi => {
            let v = SparseMdp::from_explicit(&e);
            settle(record, bounded_value_iteration(&v, config.threshold, MAX_SWEEPS))?
        }
        _ => {
            let v = SparseMdp::from_explicit(&e);
            settle(record, brtdp(&v, &brtdp_config(config), |_| {}))?
        }
    }
    record.time_ms = start.elapsed().as_millis() as u64;
    Ok(())
}

//! Batch runs over a directory of model files, written as CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::domain::DomainKind;

use super::run::{load_model, model_name, run_check, CheckConfig, HarnessError, RunStatus, SolverKind};

/// Column order of the suite CSV.
pub const CSV_HEADER: [&str; 18] = [
    "model",
    "config",
    "domain",
    "solver",
    "heuristic",
    "seed",
    "threshold",
    "status",
    "lower",
    "upper",
    "total_nodes",
    "covered_nodes",
    "non_covered_nodes",
    "explicit_states",
    "reduction_ratio",
    "iterations",
    "time_ms",
    "error",
];

/// One row per (model, configuration). `status` is `ok`,
/// `budget-exceeded` or `error`; on error only `error` is meaningful.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRow {
    pub model: String,
    pub config: String,
    pub domain: String,
    pub solver: String,
    pub heuristic: String,
    pub seed: u64,
    pub threshold: f64,
    pub status: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub total_nodes: Option<usize>,
    pub covered_nodes: Option<usize>,
    pub non_covered_nodes: Option<usize>,
    pub explicit_states: Option<usize>,
    /// Non-covered nodes over concrete states; may exceed 1.
    pub reduction_ratio: Option<f64>,
    pub iterations: Option<u64>,
    pub time_ms: Option<u64>,
    pub error: String,
}

/// The default grid: both domains with both lazy solvers.
pub fn default_configs() -> Vec<(DomainKind, SolverKind)> {
    let mut out = Vec::new();
    for d in [DomainKind::Expl, DomainKind::Pred] {
        for s in [SolverKind::LazyBvi, SolverKind::LazyBrtdp] {
            out.push((d, s));
        }
    }
    out
}

fn config_label(d: DomainKind, s: SolverKind) -> String {
    if s.is_lazy() {
        format!("{}/{}", d.name(), s.name())
    } else {
        s.name().to_string()
    }
}

/// `.gmc` files directly inside `dir`, sorted by name.
pub fn model_files(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let io = |source| HarnessError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "gmc") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Runs every configuration on every model file; failures become rows.
/// `base` supplies everything but the domain and solver.
pub fn run_suite(
    files: &[PathBuf],
    configs: &[(DomainKind, SolverKind)],
    base: &CheckConfig,
) -> Vec<SuiteRow> {
    let mut rows = Vec::new();
    for path in files {
        let name = model_name(path);
        let loaded = load_model(path);
        for &(domain, solver) in configs {
            let config = CheckConfig {
                domain,
                solver,
                ..base.clone()
            };
            let mut row = SuiteRow {
                model: name.clone(),
                config: config_label(domain, solver),
                domain: if solver.is_lazy() { domain.name().into() } else { String::new() },
                solver: solver.name().into(),
                heuristic: if solver.uses_heuristic() {
                    base.heuristic.name().into()
                } else {
                    String::new()
                },
                seed: base.seed,
                threshold: base.threshold,
                status: "error".into(),
                lower: None,
                upper: None,
                total_nodes: None,
                covered_nodes: None,
                non_covered_nodes: None,
                explicit_states: None,
                reduction_ratio: None,
                iterations: None,
                time_ms: None,
                error: String::new(),
            };
            let result = match &loaded {
                Ok((m, q)) => run_check(&name, m, q, &config).map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            };
            match result {
                Ok(r) => {
                    row.status = match r.status {
                        RunStatus::Ok => "ok",
                        RunStatus::BudgetExceeded => "budget-exceeded",
                    }
                    .into();
                    row.lower = Some(r.lower);
                    row.upper = Some(r.upper);
                    if solver.is_lazy() {
                        row.total_nodes = Some(r.total_nodes);
                        row.covered_nodes = Some(r.covered_nodes);
                        row.non_covered_nodes = Some(r.non_covered_nodes);
                        row.reduction_ratio = r
                            .explicit_states
                            .filter(|&n| n > 0)
                            .map(|n| r.non_covered_nodes as f64 / n as f64);
                    }
                    row.explicit_states = r.explicit_states;
                    row.iterations = Some(r.iterations);
                    row.time_ms = Some(r.time_ms);
                }
                Err(e) => row.error = e,
            }
            rows.push(row);
        }
    }
    rows.sort_by(|a, b| (&a.model, &a.config).cmp(&(&b.model, &b.config)));
    rows
}

pub fn write_csv(rows: &[SuiteRow], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::BUNDLED;

    fn bundled_dir() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (name, text) in BUNDLED {
            std::fs::write(dir.path().join(format!("{name}.gmc")), text).unwrap();
        }
        dir
    }

    #[test]
    fn twelve_sorted_rows() {
        let dir = bundled_dir();
        let files = model_files(dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let rows = run_suite(&files, &default_configs(), &CheckConfig::default());
        assert_eq!(rows.len(), 12);
        let keys: Vec<_> = rows.iter().map(|r| (r.model.clone(), r.config.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for r in &rows {
            assert_eq!(r.status, "ok", "{r:?}");
            assert_eq!(
                r.covered_nodes.unwrap() + r.non_covered_nodes.unwrap(),
                r.total_nodes.unwrap()
            );
        }
    }

    #[test]
    fn broken_model_is_a_row_not_an_abort() {
        let dir = bundled_dir();
        std::fs::write(dir.path().join("broken.gmc"), "var x : [0..1] init 0;\n[true] 0.5:(x'=1) + 0.6:(x'=0);\ntarget x == 1;\n").unwrap();
        let files = model_files(dir.path()).unwrap();
        let rows = run_suite(&files, &[(DomainKind::Expl, SolverKind::LazyBvi)], &CheckConfig::default());
        assert_eq!(rows.len(), 4);
        let broken = rows.iter().find(|r| r.model == "broken").unwrap();
        assert_eq!(broken.status, "error");
        assert!(broken.error.contains("11/10"), "{}", broken.error);
    }

    #[test]
    fn csv_header_and_stable_rerun() {
        let dir = bundled_dir();
        let files = model_files(dir.path()).unwrap();
        let render = || {
            let mut rows = run_suite(&files, &default_configs(), &CheckConfig::default());
            for r in &mut rows {
                r.time_ms = Some(0);
            }
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(a.lines().count(), 13);
        assert_eq!(a, render());
    }
}

//! Model files, run configuration and machine-readable statistics.

mod format;
mod run;
mod suite;

pub use format::{parse_model, print_model, ParseError};
pub use run::{
    load_model, model_name, run_check, CheckConfig, HarnessError, RunStatus, SolverKind,
    StatsRecord, UnknownName, MAX_SWEEPS,
};
pub use suite::{default_configs, model_files, run_suite, write_csv, SuiteRow, CSV_HEADER};

use crate::model::{ReachabilityQuery, SymbolicMdp};

/// Models shipped in `models/`, by file stem.
pub const BUNDLED: &[(&str, &str)] = &[
    ("coin", include_str!("../../models/coin.gmc")),
    ("irrelevant", include_str!("../../models/irrelevant.gmc")),
    (
        "running_example_bounded",
        include_str!("../../models/running_example_bounded.gmc"),
    ),
];

/// Parses a bundled model by name.
pub fn bundled(name: &str) -> Option<(SymbolicMdp, ReachabilityQuery)> {
    let (_, text) = BUNDLED.iter().find(|(n, _)| *n == name)?;
    Some(parse_model(text).expect("bundled models parse"))
}

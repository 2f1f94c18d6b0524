//! Command-line harness around `wpt_core`. Scenarios come from JSON files
//! and results are written as CSV.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod regulatory;
pub mod report;
pub mod scenario_file;

pub use cli::run_cli;
pub use error::HarnessError;
pub use regulatory::{validate_regulatory, RegulatoryProfile, Violation};
pub use report::emit_field_csv;
pub use scenario_file::{load_scenario, ScenarioFile};

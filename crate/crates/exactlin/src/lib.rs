//! File formats, corpus harness and command line for `exactlin-core`.
//!
//! - [`parse`]: the `.nlm` model format (reader and writer).
//! - [`lp`]: CPLEX LP output and a reader for the round-trip check.
//! - [`report`]: JSON traces, detection and solution documents.
//! - [`corpus`], [`metrics`], [`bench`]: the benchmark corpus and DSR/RSR/CSR/OSR.
//! - [`gen`]: seeded random models with planted patterns.
//! - [`cli`]: the `exactlin` command.

pub mod bench;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod gen;
pub mod lp;
pub mod metrics;
pub mod parse;
pub mod report;

pub use error::{Error, Result};
pub use lp::{check_round_trip, emit_lp, read_lp};
pub use parse::{parse_model, to_nlm, ParseDiagnostic, Parsed, Severity};
pub use report::emit_json_report;

/// Parses a model and turns diagnostics into an [`Error`].
pub fn load_model(text: &str) -> Result<Parsed> {
    parse_model(text).map_err(Error::Parse)
}

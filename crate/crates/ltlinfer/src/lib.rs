//! Files, parallel evaluation and the command-line front end for
//! [`ltlinfer_core`].
//!
//! * [`formats`]: JSON models and demonstration sets.
//! * [`report`]: CSV search reports and classification dumps.
//! * [`dot`]: Graphviz export of compiled automata.
//! * [`manifest`]: per-invocation records of settings, input digests and timings.
//! * [`parallel`]: a thread-pool [`Evaluate`](ltlinfer_core::search::Evaluate) implementation.
//! * [`cli`]: the `ltlinfer` subcommands.

pub mod cli;
pub mod dot;
pub mod formats;
pub mod manifest;
pub mod parallel;
pub mod report;

/// A malformed or inconsistent input file.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("{0}: {1}")]
    Json(String, #[source] serde_json::Error),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("{0}")]
    Invalid(String),
}

//! Inference of linear temporal logic specifications from demonstrations.
//!
//! Candidate formulas are scored against observed trajectories in a labeled
//! MDP by their *violation cost*: how many (discounted) steps would have to be
//! skipped for the demonstrations to satisfy the formula, compared with a
//! uniformly random agent. A multiobjective genetic program then trades this
//! score off against formula size.
//!
//! The pipeline, bottom-up:
//!
//! * [`ltl`]: formula syntax, parsing, and a reference semantics on lasso words.
//! * [`automata`]: translation of formulas to deterministic Rabin automata.
//! * [`mdp`]: labeled MDPs, trajectories, and stationary policies.
//! * [`product`]: the skip-augmented product MDP and its accepting end components.
//! * [`objective`]: violation-cost policy evaluation and the two objectives.
//! * [`search`]: NSGA-II over formula parse trees.
//! * [`domains`]: the SlimChance and CleaningWorld benchmark MDPs and a planner
//!   that produces demonstrations.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI, and
//! parallel evaluation live in the companion `ltlinfer` crate.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod automata;
pub mod domains;
pub mod mdp;
pub mod objective;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;
pub mod product;
pub mod search;
pub mod ltl;

mod bitset;
mod graph;
mod math;

pub use automata::{compile, CompileError, Dra, DEFAULT_STATE_BUDGET};
pub use ltl::{parse, Alphabet, Formula, LassoWord, Valuation};
pub use mdp::{Mdp, Trajectory};

//! Rule discovery for agent-based models.
//!
//! Behaviour rules are expression trees evolved by a generational genetic
//! programming engine until an agent model driven by those rules reproduces
//! a reference dataset. Two models ship with the crate:
//!
//! * [`hawkdove`]: agents contend for a replenishing resource; the evolved
//!   rule decides how much each agent tries to take and fitness compares the
//!   final wealth distribution with a target distribution.
//! * [`rebellion`]: a civil-violence model whose move, activation and arrest
//!   decisions are recorded into a static dataset, so each decision rule can
//!   be evolved as a classifier scored by balanced accuracy.
//!
//! Evolved rules are usually bloated; [`expr::prune`] and
//! [`expr::prune_with_ranges`] reduce them to a readable core while keeping
//! them semantically equivalent.
//!
//! The `examples/` directory contains one runnable program per capability and
//! the `igss` binary exposes the same pipeline on the command line.

pub mod cli;
pub mod error;
pub mod expr;
pub mod gp;
pub mod hawkdove;
pub mod rebellion;
pub mod refdata;
pub mod seed;

pub use error::{Error, Result};
pub use expr::{Expr, Grammar, Rule, VarBindings, VarRanges};
pub use gp::{evolve, EvolutionResult, GpConfig};

//! Approval-based multiwinner voting rules and their robustness to small
//! perturbations of the ballots.

pub mod cli;
pub mod combinatorics;
pub mod constructions;
pub mod counting;
pub mod election;
pub mod error;
pub mod format;
pub mod perturbation;
pub mod radius;
pub mod rules;

pub use election::{render_diff_matrix, Committee, Election, Rational, Scoring};
pub use error::{Error, Result};
pub use rules::{RuleSpec, ThieleVector, WinnerSet};

//! Exact computations for groups generated by finite invertible Mealy automata.
//!
//! The crate builds automata from wreath-recursion scripts, evaluates group words on
//! the rooted tree, decides the word problem by section closure, restricts actions to
//! finite tree levels, and produces bounded certificates for the Bellaterra family of
//! automata generating free products of groups of order 2.

pub mod action;
pub mod automaton;
pub mod cli;
pub mod error;
pub mod family;
pub mod perm;
pub mod quotient;
pub mod report;
pub mod schreier;
pub mod word_problem;

pub use action::{Factor, GroupWord, Portrait, Vertex};
pub use automaton::{Alphabet, Bireversibility, MealyAutomaton, WreathRow};
pub use error::{Error, Result};
pub use perm::Perm;
pub use report::{CertReport, Verdict};

//! Pomset transition system specifications.
//!
//! Process algebras are given as sets of operational rules whose transitions
//! carry pomsets. From a closed term the crate derives the reachable
//! pomset-labelled transition system, decides truly concurrent equivalences
//! and modal formulas over it, and checks rule systems against congruence
//! formats.

pub mod algebras;
pub mod equiv;
pub mod formats;
pub mod gen;
pub mod logic;
pub mod plts;
pub mod pomset;
pub mod rules;
pub mod semantics;
pub mod syntax;
pub mod term;
pub mod verdict;

pub use pomset::{ActionLabel, Pomset, PomsetClass, Poset};
pub use rules::{Ptss, Rule};
pub use term::{Signature, Term};
pub use verdict::Verdict;

//! Deterministic search for satisfying assignments of CNF formulas with
//! non-negligible bias, given an approximate counter.

pub mod bench;
pub mod cnf;
pub mod compiled;
pub mod counting;
pub mod field;
pub mod framework;
pub mod params;
pub mod planted;
pub mod prg;
pub mod rational;
pub mod search;
pub mod solve;
pub mod stars;
pub mod trace;
pub mod verify;

pub use cnf::{Assignment, Clause, CnfError, CnfFormula, Literal, Restriction};
pub use rational::Rational;

pub mod error;
pub mod excursion;
pub mod genericity;
pub mod automaton;
pub mod cli;
pub mod ball;
pub mod contraction;
pub mod group;
pub mod lemmas;
pub mod metric;

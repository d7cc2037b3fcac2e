//! Random 3-SAT instances, GSAT, and exhaustive analysis of the plateaus
//! (minima, benches, contours) that greedy local search runs into.

pub mod cnf;
pub mod dimacs;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod generate;
pub mod plateau;
pub mod search;
pub mod solver;

pub use cnf::{Assignment, Clause, Formula, LevelState, Literal, Var};
pub use error::{Error, Result};
pub use generate::{GeneratorParams, GeneratorSpec, Provenance};
pub use plateau::{
    enumerate_plateau, escape_barrier, EscapeOptions, EscapeReport, Plateau, PlateauKind,
    PlateauOptions, PlateauReport,
};
pub use search::{find_state_at_level, gsat, GsatConfig, GsatOutcome};
pub use solver::{solve, SolveResult, SolveStatus};

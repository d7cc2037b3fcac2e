//! Small reference instances used by tests and examples.

use crate::cnf::Formula;
use crate::dimacs::parse_dimacs;

/// The four-variable sample instance with its fourteenth clause read as
/// (¬A ∨ C ∨ D). This is the reading under which the described plateau
/// structure holds; it is the one used throughout the test suites.
pub const GOLDEN_DIMACS: &str = include_str!("../fixtures/golden.cnf");

/// The same instance with the fourteenth clause as originally typeset,
/// (¬A ∨ C ∨ ¬D).
pub const GOLDEN_AS_PRINTED_DIMACS: &str = include_str!("../fixtures/golden_as_printed.cnf");

pub fn golden() -> Formula {
    parse_dimacs(GOLDEN_DIMACS).expect("fixture parses")
}

pub fn golden_as_printed() -> Formula {
    parse_dimacs(GOLDEN_AS_PRINTED_DIMACS).expect("fixture parses")
}

/// All eight sign patterns over variables 1, 2, 3: every assignment
/// falsifies exactly one clause.
pub fn all_sign_patterns() -> Formula {
    let text = (0..8u32)
        .map(|mask| {
            let lits: Vec<String> = (1..=3)
                .map(|v| if mask >> (v - 1) & 1 == 1 { format!("-{v}") } else { v.to_string() })
                .collect();
            format!("{} 0\n", lits.join(" "))
        })
        .collect::<String>();
    parse_dimacs(&format!("p cnf 3 8\n{text}")).expect("fixture parses")
}

//! DIMACS CNF reading and writing.
//!
//! Only 3-literal clauses over distinct variables are accepted. A comment of
//! the form `c provenance: {json}` carries the generator record of a formula
//! and is restored on parse.

use std::fmt::Write as _;

use crate::cnf::{Clause, Formula, Literal};
use crate::error::{Error, Result};
use crate::generate::Provenance;

const PROVENANCE_TAG: &str = "c provenance:";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut header: Option<(usize, usize)> = None;
    let mut provenance: Option<Provenance> = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<(Literal, usize)> = Vec::with_capacity(3);

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(PROVENANCE_TAG) {
            let p = serde_json::from_str(rest.trim())
                .map_err(|e| parse_err(lineno, format!("bad provenance record: {e}")))?;
            provenance = Some(p);
            continue;
        }
        if line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            // SATLIB end-of-data marker
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate problem line"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(parse_err(lineno, format!("expected `p cnf <vars> <clauses>`, got `{line}`")));
            }
            let n = fields[2]
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad variable count `{}`", fields[2])))?;
            let c = fields[3]
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad clause count `{}`", fields[3])))?;
            header = Some((n, c));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(parse_err(lineno, "clause before problem line"));
        };
        for tok in line.split_whitespace() {
            let value: i64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad literal `{tok}`")))?;
            if value == 0 {
                if pending.len() != 3 {
                    return Err(parse_err(
                        lineno,
                        format!("clause has {} literals, expected 3", pending.len()),
                    ));
                }
                let lits = [pending[0].0, pending[1].0, pending[2].0];
                let clause = Clause::new(lits).map_err(|e| parse_err(lineno, e.to_string()))?;
                clauses.push(clause);
                pending.clear();
                continue;
            }
            let lit = Literal::from_dimacs(value)
                .ok_or_else(|| parse_err(lineno, format!("bad literal `{tok}`")))?;
            if lit.var.index() >= num_vars {
                return Err(parse_err(
                    lineno,
                    format!("variable {} exceeds declared count {num_vars}", lit.var.number()),
                ));
            }
            if pending.len() == 3 {
                return Err(parse_err(lineno, "clause has more than 3 literals"));
            }
            pending.push((lit, lineno));
        }
    }

    let Some((num_vars, num_clauses)) = header else {
        return Err(parse_err(text.lines().count().max(1), "missing problem line"));
    };
    if let Some(&(_, line)) = pending.first() {
        return Err(parse_err(line, "unterminated clause"));
    }
    if clauses.len() != num_clauses {
        return Err(parse_err(
            text.lines().count().max(1),
            format!("header declares {num_clauses} clauses, found {}", clauses.len()),
        ));
    }
    let formula = Formula::new(num_vars, clauses).map_err(|e| parse_err(0, e.to_string()))?;
    Ok(match provenance {
        Some(p) => formula.with_provenance(p),
        None => formula,
    })
}

/// Clause lines only, one per clause, `0`-terminated.
pub fn emit_clauses(formula: &Formula) -> String {
    let mut out = String::with_capacity(formula.num_clauses() * 12);
    for clause in formula.clauses() {
        for lit in clause.literals() {
            let _ = write!(out, "{} ", lit.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

pub fn emit_dimacs(formula: &Formula) -> String {
    let mut out = String::new();
    if let Some(p) = formula.provenance() {
        let json = serde_json::to_string(p).expect("provenance is always serializable");
        let _ = writeln!(out, "{PROVENANCE_TAG} {json}");
    }
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses());
    out.push_str(&emit_clauses(formula));
    out
}

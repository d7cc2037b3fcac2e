//! Complete satisfiability check for filtering experiment populations.
//!
//! Chronological backtracking with unit propagation and pure-literal
//! elimination, trying false before true at every decision. The default
//! branching rule weighs each open variable by its occurrences in
//! unsatisfied clauses (two-literal residual clauses count four times a
//! three-literal one) and takes the heaviest, lowest number first on ties.
//! [`Branching::LowestIndex`] takes the lowest-numbered open variable instead;
//! it is simpler but explores far larger trees near C/N = 4.3.

use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Formula, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Sat,
    Unsat,
    /// The decision budget ran out before the search finished.
    Unknown,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub decisions: u64,
    pub propagations: u64,
    pub pure_literals: u64,
    pub conflicts: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Present iff `status` is `Sat`; always satisfies every clause.
    pub model: Option<Assignment>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        self.status == SolveStatus::Sat
    }

    pub fn is_unsat(&self) -> bool {
        self.status == SolveStatus::Unsat
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branching {
    #[default]
    Weighted,
    LowestIndex,
}

const UNASSIGNED: i8 = -1;

struct Search<'f> {
    formula: &'f Formula,
    branching: Branching,
    scores: Vec<u32>,
    value: Vec<i8>,
    true_count: Vec<u8>,
    false_count: Vec<u8>,
    trail: Vec<Var>,
    qhead: usize,
    stats: SolveStats,
}

struct Decision {
    trail_len: usize,
    var: Var,
    flipped: bool,
}

impl<'f> Search<'f> {
    fn new(formula: &'f Formula, branching: Branching) -> Self {
        let c = formula.num_clauses();
        Search {
            formula,
            branching,
            scores: vec![0; formula.num_vars()],
            value: vec![UNASSIGNED; formula.num_vars()],
            true_count: vec![0; c],
            false_count: vec![0; c],
            trail: Vec::with_capacity(formula.num_vars()),
            qhead: 0,
            stats: SolveStats::default(),
        }
    }

    fn assign(&mut self, var: Var, value: bool) {
        debug_assert_eq!(self.value[var.index()], UNASSIGNED);
        self.value[var.index()] = value as i8;
        for occ in self.formula.occurrences(var) {
            if occ.positive == value {
                self.true_count[occ.clause as usize] += 1;
            } else {
                self.false_count[occ.clause as usize] += 1;
            }
        }
        self.trail.push(var);
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let var = self.trail.pop().unwrap();
            let value = self.value[var.index()] == 1;
            for occ in self.formula.occurrences(var) {
                if occ.positive == value {
                    self.true_count[occ.clause as usize] -= 1;
                } else {
                    self.false_count[occ.clause as usize] -= 1;
                }
            }
            self.value[var.index()] = UNASSIGNED;
        }
        self.qhead = self.qhead.min(len);
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let var = self.trail[self.qhead];
            self.qhead += 1;
            let value = self.value[var.index()] == 1;
            let formula = self.formula;
            for occ in formula.occurrences(var) {
                if occ.positive == value {
                    continue;
                }
                let ci = occ.clause as usize;
                if self.true_count[ci] > 0 {
                    continue;
                }
                match self.false_count[ci] {
                    3 => {
                        self.stats.conflicts += 1;
                        return false;
                    }
                    2 => {
                        let lit = formula.clauses()[ci]
                            .literals()
                            .iter()
                            .copied()
                            .find(|l| self.value[l.var.index()] == UNASSIGNED)
                            .expect("two false literals and no true one leaves one unassigned");
                        self.assign(lit.var, lit.positive);
                        self.stats.propagations += 1;
                    }
                    _ => {}
                }
            }
        }
        true
    }

    /// Assigns every pure literal of the residual formula. Returns how many.
    fn eliminate_pure(&mut self) -> usize {
        let n = self.formula.num_vars();
        let mut pos = vec![false; n];
        let mut neg = vec![false; n];
        for (ci, clause) in self.formula.clauses().iter().enumerate() {
            if self.true_count[ci] > 0 {
                continue;
            }
            for l in clause.literals() {
                if self.value[l.var.index()] == UNASSIGNED {
                    if l.positive {
                        pos[l.var.index()] = true;
                    } else {
                        neg[l.var.index()] = true;
                    }
                }
            }
        }
        let mut assigned = 0;
        for i in 0..n {
            if self.value[i] == UNASSIGNED && pos[i] != neg[i] {
                self.assign(Var::from_index(i), pos[i]);
                assigned += 1;
            }
        }
        self.stats.pure_literals += assigned as u64;
        assigned
    }

    fn branch_var(&mut self) -> Option<Var> {
        self.scores.iter_mut().for_each(|s| *s = 0);
        let mut any = false;
        for (ci, clause) in self.formula.clauses().iter().enumerate() {
            if self.true_count[ci] > 0 {
                continue;
            }
            let weight = if self.false_count[ci] == 1 { 4 } else { 1 };
            for l in clause.literals() {
                let i = l.var.index();
                if self.value[i] == UNASSIGNED {
                    self.scores[i] += weight;
                    any = true;
                }
            }
        }
        if !any {
            return None;
        }
        let pick = match self.branching {
            Branching::LowestIndex => self.scores.iter().position(|&s| s > 0),
            Branching::Weighted => {
                let mut best = 0;
                for (i, &s) in self.scores.iter().enumerate() {
                    if s > self.scores[best] {
                        best = i;
                    }
                }
                Some(best)
            }
        };
        pick.map(Var::from_index)
    }

    fn model(&self) -> Assignment {
        let bits: Vec<bool> = self.value.iter().map(|&v| v == 1).collect();
        Assignment::from_bools(&bits)
    }

    fn run(&mut self, budget: Option<u64>) -> SolveStatus {
        let mut stack: Vec<Decision> = Vec::new();
        loop {
            // Simplify to a fixpoint, then branch or backtrack.
            let mut ok = self.propagate();
            while ok && self.eliminate_pure() > 0 {
                ok = self.propagate();
            }
            if ok {
                match self.branch_var() {
                    None => return SolveStatus::Sat,
                    Some(var) => {
                        if budget.is_some_and(|b| self.stats.decisions >= b) {
                            return SolveStatus::Unknown;
                        }
                        self.stats.decisions += 1;
                        stack.push(Decision {
                            trail_len: self.trail.len(),
                            var,
                            flipped: false,
                        });
                        self.assign(var, false);
                    }
                }
                continue;
            }
            loop {
                let Some(top) = stack.last_mut() else {
                    return SolveStatus::Unsat;
                };
                if top.flipped {
                    stack.pop();
                    continue;
                }
                top.flipped = true;
                let (len, var) = (top.trail_len, top.var);
                self.undo_to(len);
                self.assign(var, true);
                break;
            }
        }
    }
}

/// Decides satisfiability, giving up with [`SolveStatus::Unknown`] after
/// `budget` decisions when a budget is given.
pub fn solve(formula: &Formula, budget: Option<u64>) -> SolveResult {
    solve_with(formula, budget, Branching::default())
}

pub fn solve_with(formula: &Formula, budget: Option<u64>, branching: Branching) -> SolveResult {
    let mut search = Search::new(formula, branching);
    let status = search.run(budget);
    let model = (status == SolveStatus::Sat).then(|| search.model());
    if let Some(m) = &model {
        assert_eq!(
            formula.level(m).expect("model has formula width"),
            0,
            "solver produced a non-model"
        );
    }
    SolveResult {
        status,
        model,
        stats: search.stats,
    }
}

//! 3-CNF formulas, hypercube assignments and exact/incremental level evaluation.
//!
//! The *level* of an assignment is the number of clauses it leaves with no
//! true literal. [`LevelState`] keeps per-clause true-literal counts so that
//! the level change of a single flip can be read off the clauses containing
//! the flipped variable only.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::generate::Provenance;

/// A propositional variable, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(u32);

impl Var {
    /// Panics if `number` is 0.
    pub fn new(number: u32) -> Self {
        assert!(number >= 1, "variables are numbered from 1");
        Var(number)
    }

    pub fn from_index(index: usize) -> Self {
        Var(index as u32 + 1)
    }

    pub fn number(self) -> u32 {
        self.0
    }

    /// Zero-based position of this variable in an [`Assignment`].
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: Var,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: Var, positive: bool) -> Self {
        Literal { var, positive }
    }

    pub fn pos(var: u32) -> Self {
        Literal::new(Var::new(var), true)
    }

    pub fn neg(var: u32) -> Self {
        Literal::new(Var::new(var), false)
    }

    /// Signed DIMACS form: `3` for x3, `-3` for ¬x3.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var.number() as i64;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 || value.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Literal::new(Var(value.unsigned_abs() as u32), value > 0))
    }

    #[inline]
    pub fn is_true(self, a: &Assignment) -> bool {
        a.get(self.var) == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "¬{}", self.var)
        }
    }
}

/// A disjunction of exactly three literals over three distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Clause([Literal; 3]);

impl Clause {
    pub fn new(literals: [Literal; 3]) -> Result<Self> {
        let [a, b, c] = literals;
        if a.var == b.var || a.var == c.var || b.var == c.var {
            return Err(invalid(format!(
                "clause ({a} ∨ {b} ∨ {c}) repeats a variable"
            )));
        }
        Ok(Clause(literals))
    }

    /// Builds a clause from signed DIMACS literals.
    pub fn from_dimacs(lits: [i64; 3]) -> Result<Self> {
        let mut out = [Literal::pos(1); 3];
        for (slot, &l) in out.iter_mut().zip(lits.iter()) {
            *slot = Literal::from_dimacs(l).ok_or_else(|| invalid(format!("bad literal {l}")))?;
        }
        Clause::new(out)
    }

    pub fn literals(&self) -> &[Literal; 3] {
        &self.0
    }

    pub fn true_count(&self, a: &Assignment) -> u8 {
        self.0.iter().filter(|l| l.is_true(a)).count() as u8
    }

    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.0.iter().any(|l| l.is_true(a))
    }

    pub fn max_var(&self) -> Var {
        self.0.iter().map(|l| l.var).max().unwrap()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "({a} ∨ {b} ∨ {c})")
    }
}

/// One occurrence of a variable: the clause it appears in and its sign there.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Occurrence {
    pub clause: u32,
    pub positive: bool,
}

/// An immutable 3-CNF instance.
#[derive(Debug, Clone)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
    occurrences: Vec<Vec<Occurrence>>,
    provenance: Option<Provenance>,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars
            && self.clauses == other.clauses
            && self.provenance == other.provenance
    }
}

impl Eq for Formula {}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        if num_vars > u32::MAX as usize {
            return Err(invalid("too many variables"));
        }
        let mut occurrences = vec![Vec::new(); num_vars];
        for (ci, clause) in clauses.iter().enumerate() {
            for lit in clause.literals() {
                let idx = lit.var.index();
                if idx >= num_vars {
                    return Err(invalid(format!(
                        "clause {} mentions {} but the formula has {} variables",
                        ci + 1,
                        lit.var,
                        num_vars
                    )));
                }
                occurrences[idx].push(Occurrence {
                    clause: ci as u32,
                    positive: lit.positive,
                });
            }
        }
        Ok(Formula {
            num_vars,
            clauses,
            occurrences,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub(crate) fn occurrences(&self, var: Var) -> &[Occurrence] {
        &self.occurrences[var.index()]
    }

    /// Clauses this variable appears in, with its sign in each.
    pub fn occurrences_of(&self, var: Var) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.occurrences[var.index()]
            .iter()
            .map(|o| (o.clause as usize, o.positive))
    }

    fn check_assignment(&self, a: &Assignment) -> Result<()> {
        if a.len() != self.num_vars {
            return Err(invalid(format!(
                "assignment has {} bits but the formula has {} variables",
                a.len(),
                self.num_vars
            )));
        }
        Ok(())
    }

    pub(crate) fn check_var(&self, var: Var) -> Result<()> {
        if var.index() >= self.num_vars {
            return Err(invalid(format!(
                "{var} out of range 1..={}",
                self.num_vars
            )));
        }
        Ok(())
    }

    /// Number of clauses with no true literal under `a`.
    pub fn level(&self, a: &Assignment) -> Result<usize> {
        self.check_assignment(a)?;
        Ok(self.clauses.iter().filter(|c| !c.is_satisfied(a)).count())
    }

    /// Indices (0-based, in formula order) of the clauses falsified by `a`.
    pub fn unsat_clause_indices(&self, a: &Assignment) -> Result<Vec<usize>> {
        self.check_assignment(a)?;
        Ok(self
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied(a))
            .map(|(i, _)| i)
            .collect())
    }

    pub fn is_satisfied_by(&self, a: &Assignment) -> Result<bool> {
        Ok(self.level(a)? == 0)
    }
}

pub(crate) const INLINE_WORDS: usize = 2;

/// A vertex of the N-dimensional hypercube: one truth value per variable.
///
/// Displayed and parsed as a string of `0`/`1` characters, variable 1 first.
/// Ordering is lexicographic on that string.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    len: usize,
    words: SmallVec<[u64; INLINE_WORDS]>,
}

impl Assignment {
    pub fn zeros(len: usize) -> Self {
        Assignment {
            len,
            words: SmallVec::from_elem(0, len.div_ceil(64)),
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut a = Assignment::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                a.words[i / 64] |= 1 << (i % 64);
            }
        }
        a
    }

    /// Assignment whose bit `i` is bit `i` of `value` (variable 1 ↦ least significant bit).
    pub fn from_index(len: usize, value: u64) -> Self {
        assert!(len <= 64);
        let mut a = Assignment::zeros(len);
        if len > 0 {
            let mask = if len == 64 { u64::MAX } else { (1 << len) - 1 };
            a.words[0] = value & mask;
        }
        a
    }

    /// Inverse of [`Assignment::from_index`]; `None` above 64 variables.
    pub fn to_index(&self) -> Option<u64> {
        match self.len {
            0 => Some(0),
            1..=64 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut a = Assignment::zeros(len);
        for i in 0..len {
            if rng.gen::<bool>() {
                a.words[i / 64] |= 1 << (i % 64);
            }
        }
        a
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Packed bits, variable 1 in the lowest bit of word 0.
    pub(crate) fn words(&self) -> &SmallVec<[u64; INLINE_WORDS]> {
        &self.words
    }

    pub(crate) fn from_words(len: usize, words: SmallVec<[u64; INLINE_WORDS]>) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(64));
        Assignment { len, words }
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, var: Var) -> bool {
        let i = var.index();
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, var: Var, value: bool) {
        let i = var.index();
        assert!(i < self.len, "{var} out of range");
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, var: Var) {
        let i = var.index();
        assert!(i < self.len, "{var} out of range");
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn flipped(&self, var: Var) -> Self {
        let mut out = self.clone();
        out.flip(var);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| (self.words[i / 64] >> (i % 64)) & 1 == 1)
    }

    pub fn hamming(&self, other: &Assignment) -> u32 {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// The N assignments at Hamming distance one, in ascending variable order.
    pub fn neighbors(&self) -> impl Iterator<Item = Assignment> + '_ {
        (0..self.len).map(move |i| self.flipped(Var::from_index(i)))
    }
}

impl Ord for Assignment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Bit 0 is the first character of the string form, so compare
        // bit-reversed words to get string order.
        self.len.cmp(&other.len).then_with(|| {
            for (a, b) in self.words.iter().zip(other.words.iter()) {
                match a.reverse_bits().cmp(&b.reverse_bits()) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Assignment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Assignment({self})")
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("bad character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Assignment::from_bools(&bits))
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Assignment plus per-clause true-literal counts, kept consistent under flips.
#[derive(Debug, Clone)]
pub struct LevelState<'f> {
    formula: &'f Formula,
    assignment: Assignment,
    counts: Vec<u8>,
    level: usize,
}

impl<'f> LevelState<'f> {
    pub fn new(formula: &'f Formula, assignment: Assignment) -> Result<Self> {
        formula.check_assignment(&assignment)?;
        let counts: Vec<u8> = formula
            .clauses()
            .iter()
            .map(|c| c.true_count(&assignment))
            .collect();
        let level = counts.iter().filter(|&&c| c == 0).count();
        Ok(LevelState {
            formula,
            assignment,
            counts,
            level,
        })
    }

    pub fn formula(&self) -> &'f Formula {
        self.formula
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn into_assignment(self) -> Assignment {
        self.assignment
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn true_counts(&self) -> &[u8] {
        &self.counts
    }

    /// `level(flip(a, var)) - level(a)`, touching only the clauses containing `var`.
    pub fn flip_delta(&self, var: Var) -> Result<i64> {
        self.formula.check_var(var)?;
        Ok(self.delta_unchecked(var))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, var: Var) -> i64 {
        let value = self.assignment.get(var);
        let mut delta = 0i64;
        for occ in self.formula.occurrences(var) {
            let count = self.counts[occ.clause as usize];
            if occ.positive == value {
                // literal currently true; flipping breaks the clause if it was the only one
                if count == 1 {
                    delta += 1;
                }
            } else if count == 0 {
                delta -= 1;
            }
        }
        delta
    }

    /// Flips `var`, updates the counts, and returns the level change.
    pub fn flip(&mut self, var: Var) -> Result<i64> {
        self.formula.check_var(var)?;
        Ok(self.flip_unchecked(var))
    }

    pub(crate) fn flip_unchecked(&mut self, var: Var) -> i64 {
        let was = self.assignment.get(var);
        let before = self.level as i64;
        for occ in self.formula.occurrences(var) {
            let count = &mut self.counts[occ.clause as usize];
            if occ.positive == was {
                *count -= 1;
                if *count == 0 {
                    self.level += 1;
                }
            } else {
                if *count == 0 {
                    self.level -= 1;
                }
                *count += 1;
            }
        }
        self.assignment.flip(var);
        self.level as i64 - before
    }

    /// Level changes for flipping each variable, in variable order.
    pub fn all_deltas(&self) -> Vec<i64> {
        (0..self.formula.num_vars())
            .map(|i| self.delta_unchecked(Var::from_index(i)))
            .collect()
    }

    /// Recomputes everything from the assignment and reports whether the
    /// incremental bookkeeping agrees.
    pub fn is_consistent(&self) -> bool {
        self.formula
            .clauses()
            .iter()
            .zip(self.counts.iter())
            .all(|(c, &n)| c.true_count(&self.assignment) == n)
            && self.counts.iter().filter(|&&c| c == 0).count() == self.level
    }
}

/// Free-function form of [`Formula::level`].
pub fn level(formula: &Formula, a: &Assignment) -> Result<usize> {
    formula.level(a)
}

/// Free-function form of [`Formula::unsat_clause_indices`].
pub fn unsat_clause_indices(formula: &Formula, a: &Assignment) -> Result<Vec<usize>> {
    formula.unsat_clause_indices(a)
}

/// Free-function form of [`Assignment::neighbors`], collected.
pub fn neighbors(a: &Assignment) -> Vec<Assignment> {
    a.neighbors().collect()
}

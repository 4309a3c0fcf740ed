//! CNF formulas, assignments and restrictions.
//!
//! Variables are 0-based internally and 1-based in DIMACS and in every
//! user-facing rendering. A formula always remembers the width `n` of the
//! variable space it lives in; restricting a formula keeps that indexing, so
//! the free variables of `F↾π` are exactly the star positions of `π`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use thiserror::Error;

use crate::rational::{pow2, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("variable {var} out of range for n = {n}")]
    VariableOutOfRange { var: usize, n: usize },
    #[error("invalid character {0:?} in restriction or assignment string")]
    InvalidSymbol(char),
    #[error("width must be at least 1")]
    ZeroWidth,
    #[error("DIMACS line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
}

/// A variable together with a polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: usize, positive: bool) -> Self {
        Literal {
            var: var as u32,
            negated: !positive,
        }
    }

    pub fn pos(var: usize) -> Self {
        Self::new(var, true)
    }

    pub fn neg(var: usize) -> Self {
        Self::new(var, false)
    }

    /// Parses a signed, 1-based DIMACS literal. Zero is not a literal.
    pub fn from_dimacs(x: i64) -> Option<Self> {
        if x == 0 {
            return None;
        }
        Some(Self::new(x.unsigned_abs() as usize - 1, x > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    #[inline]
    pub fn var(self) -> usize {
        self.var as usize
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        !self.negated
    }

    /// Whether setting the variable to `value` satisfies this literal.
    #[inline]
    pub fn satisfied_by(self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬x{}", self.var + 1)
        } else {
            write!(f, "x{}", self.var + 1)
        }
    }
}

/// A disjunction of literals, kept sorted by variable with duplicates merged.
///
/// A clause holding both polarities of one variable is a tautology marker:
/// it evaluates to true everywhere and is dropped by [`CnfFormula::restrict`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Self {
        let mut lits: Vec<Literal> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        Clause { lits }
    }

    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    /// `(x_var ∨ ¬x_var)`
    pub fn tautology(var: usize) -> Self {
        Clause::new([Literal::pos(var), Literal::neg(var)])
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn width(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.lits.windows(2).any(|w| w[0].var == w[1].var)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.lits.last().map(|l| l.var())
    }

    pub fn evaluate(&self, x: &[bool]) -> bool {
        self.lits.iter().any(|l| l.satisfied_by(x[l.var()]))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// A full assignment in `{0,1}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Assignment {
            bits: vec![false; n],
        }
    }

    /// Bit `i` of `mask` becomes variable `i`. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= 64);
        Assignment {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn to_mask(&self) -> Option<u64> {
        if self.bits.len() > 64 {
            return None;
        }
        Some(
            self.bits
                .iter()
                .enumerate()
                .fold(0u64, |m, (i, &b)| m | (b as u64) << i),
        )
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = CnfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                c => Err(CnfError::InvalidSymbol(c)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Assignment::new)
    }
}

/// A partial assignment in `{0,1,*}^n`; `None` is a star.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Restriction {
    values: Vec<Option<bool>>,
}

impl Restriction {
    pub fn new(values: Vec<Option<bool>>) -> Self {
        Restriction { values }
    }

    pub fn all_stars(n: usize) -> Self {
        Restriction {
            values: vec![None; n],
        }
    }

    /// Fixes the positions in `fixed` to the matching bits of `values`.
    /// Requires `n <= 64`.
    pub fn from_masks(n: usize, fixed: u64, values: u64) -> Self {
        debug_assert!(n <= 64);
        Restriction {
            values: (0..n)
                .map(|i| (fixed >> i & 1 == 1).then_some(values >> i & 1 == 1))
                .collect(),
        }
    }

    pub fn from_assignment(x: &Assignment) -> Self {
        Restriction {
            values: x.bits.iter().map(|&b| Some(b)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<bool>] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, v: Option<bool>) {
        self.values[i] = v;
    }

    pub fn num_stars(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn num_fixed(&self) -> usize {
        self.len() - self.num_stars()
    }

    pub fn star_positions(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.is_none().then_some(i))
            .collect()
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// The assignment this restriction denotes, if it has no stars.
    pub fn to_assignment(&self) -> Option<Assignment> {
        self.values
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()
            .map(Assignment::new)
    }

    /// `x` overwritten on every fixed position of `self`.
    pub fn overlay(&self, x: &Assignment) -> Result<Assignment, CnfError> {
        check_len(self.len(), x.len())?;
        Ok(Assignment::new(
            self.values
                .iter()
                .zip(&x.bits)
                .map(|(v, &b)| v.unwrap_or(b))
                .collect(),
        ))
    }

    /// `outer ∘ inner`: `inner` addresses the star positions of `outer`, in
    /// increasing order, and fills them (a star in `inner` stays a star).
    pub fn compose(&self, inner: &Restriction) -> Result<Restriction, CnfError> {
        check_len(self.num_stars(), inner.len())?;
        let mut next = inner.values.iter();
        Ok(Restriction {
            values: self
                .values
                .iter()
                .map(|v| match v {
                    Some(b) => Some(*b),
                    None => *next.next().expect("length checked"),
                })
                .collect(),
        })
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.values {
            f.write_str(match v {
                Some(false) => "0",
                Some(true) => "1",
                None => "*",
            })?;
        }
        Ok(())
    }
}

impl FromStr for Restriction {
    type Err = CnfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(Some(false)),
                '1' => Ok(Some(true)),
                '*' => Ok(None),
                c => Err(CnfError::InvalidSymbol(c)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Restriction::new)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<(), CnfError> {
    if expected == actual {
        Ok(())
    } else {
        Err(CnfError::LengthMismatch { expected, actual })
    }
}

/// An `M`-clause CNF over `n` Boolean variables.
///
/// Duplicate clauses are kept, so `M` counts multiplicity. The canonical
/// unsatisfiable formula is a single empty clause and the canonical
/// tautology has no clauses at all.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    n: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        for c in &clauses {
            if let Some(v) = c.max_var() {
                if v >= n {
                    return Err(CnfError::VariableOutOfRange { var: v + 1, n });
                }
            }
        }
        Ok(CnfFormula { n, clauses })
    }

    /// Builds a formula from 1-based signed literals, DIMACS style.
    pub fn from_dimacs_clauses(n: usize, clauses: &[&[i64]]) -> Result<Self, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::new(c.iter().filter_map(|&x| Literal::from_dimacs(x))))
            .collect();
        Self::new(n, clauses)
    }

    pub fn tautology(n: usize) -> Self {
        CnfFormula {
            n,
            clauses: Vec::new(),
        }
    }

    pub fn unsatisfiable(n: usize) -> Self {
        CnfFormula {
            n,
            clauses: vec![Clause::empty()],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Maximum clause width; 0 for a clause-free formula.
    pub fn width(&self) -> usize {
        self.clauses.iter().map(Clause::width).max().unwrap_or(0)
    }

    pub fn is_tautology_syntactically(&self) -> bool {
        self.clauses.iter().all(Clause::is_tautology)
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    pub fn evaluate(&self, x: &Assignment) -> Result<bool, CnfError> {
        check_len(self.n, x.len())?;
        Ok(self.clauses.iter().all(|c| c.evaluate(&x.bits)))
    }

    /// `F↾π`, over the same variable indexing.
    ///
    /// Satisfied and tautological clauses disappear, falsified literals are
    /// deleted, and an emptied clause collapses the whole formula to the
    /// canonical unsatisfiable one.
    pub fn restrict(&self, pi: &Restriction) -> Result<CnfFormula, CnfError> {
        check_len(self.n, pi.len())?;
        let mut out = Vec::with_capacity(self.clauses.len());
        for c in &self.clauses {
            if c.is_tautology() {
                continue;
            }
            let mut satisfied = false;
            let mut kept = Vec::with_capacity(c.width());
            for &l in &c.lits {
                match pi.values[l.var()] {
                    Some(b) if l.satisfied_by(b) => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => kept.push(l),
                }
            }
            if satisfied {
                continue;
            }
            if kept.is_empty() {
                return Ok(CnfFormula::unsatisfiable(self.n));
            }
            out.push(Clause { lits: kept });
        }
        Ok(CnfFormula {
            n: self.n,
            clauses: out,
        })
    }

    /// `F↾π` renumbered onto the star positions of `π`, so the result has
    /// `π.num_stars()` variables. This is the formula a restriction
    /// composed *after* `π` addresses.
    pub fn restrict_compact(&self, pi: &Restriction) -> Result<CnfFormula, CnfError> {
        let restricted = self.restrict(pi)?;
        let mut index = vec![usize::MAX; self.n];
        for (k, i) in pi.star_positions().into_iter().enumerate() {
            index[i] = k;
        }
        let clauses = restricted
            .clauses
            .into_iter()
            .map(|c| Clause {
                lits: c
                    .lits
                    .into_iter()
                    .map(|l| Literal {
                        var: index[l.var()] as u32,
                        negated: l.negated,
                    })
                    .collect(),
            })
            .collect();
        Ok(CnfFormula {
            n: pi.num_stars(),
            clauses,
        })
    }

    /// Cuts every clause wider than `w` down to its `w` lowest-indexed
    /// literals. Every satisfying assignment of the result satisfies `self`.
    pub fn trim(&self, w: usize) -> Result<CnfFormula, CnfError> {
        if w == 0 {
            return Err(CnfError::ZeroWidth);
        }
        Ok(CnfFormula {
            n: self.n,
            clauses: self
                .clauses
                .iter()
                .map(|c| Clause {
                    lits: c.lits.iter().take(w).copied().collect(),
                })
                .collect(),
        })
    }

    /// Number of clauses that [`trim`](Self::trim) would shorten.
    pub fn count_wider_than(&self, w: usize) -> usize {
        self.clauses.iter().filter(|c| c.width() > w).count()
    }

    /// Appends `(x_i ∨ ¬x_i)` for `i = 1..n−M` when `M < n`.
    pub fn pad(&self) -> CnfFormula {
        let mut out = self.clone();
        let m = self.clauses.len();
        if m < self.n {
            out.clauses
                .extend((0..self.n - m).map(Clause::tautology));
        }
        out
    }

    /// Variables that occur in some clause, ascending.
    pub fn occurring_vars(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        for c in &self.clauses {
            for l in &c.lits {
                seen[l.var()] = true;
            }
        }
        seen.iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect()
    }

    /// Parses DIMACS CNF.
    pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
        let err = |line: usize, msg: String| CnfError::Dimacs { line, msg };
        let mut header: Option<(usize, usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<Literal> = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            if line.starts_with('p') {
                if header.is_some() {
                    return Err(err(line_no, "duplicate problem line".into()));
                }
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                    return Err(err(line_no, format!("malformed problem line {line:?}")));
                }
                let n = parts[2]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad variable count {:?}", parts[2])))?;
                let m = parts[3]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad clause count {:?}", parts[3])))?;
                header = Some((n, m, line_no));
                continue;
            }
            let (n, _, _) =
                header.ok_or_else(|| err(line_no, "clause before problem line".into()))?;
            for tok in line.split_whitespace() {
                let x: i64 = tok
                    .parse()
                    .map_err(|_| err(line_no, format!("bad literal {tok:?}")))?;
                match Literal::from_dimacs(x) {
                    None => clauses.push(Clause::new(current.drain(..))),
                    Some(l) if l.var() >= n => {
                        return Err(err(
                            line_no,
                            format!("literal {x} exceeds declared variable count {n}"),
                        ))
                    }
                    Some(l) => current.push(l),
                }
            }
        }
        let (n, m, header_line) = header.ok_or_else(|| err(last_line, "missing problem line".into()))?;
        if !current.is_empty() {
            return Err(err(last_line, "last clause is not terminated by 0".into()));
        }
        if clauses.len() != m {
            return Err(err(
                header_line,
                format!("header declares {m} clauses, found {}", clauses.len()),
            ));
        }
        Ok(CnfFormula { n, clauses })
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for c in &self.clauses {
            for l in &c.lits {
                s.push_str(&l.to_dimacs().to_string());
                s.push(' ');
            }
            s.push_str("0\n");
        }
        s
    }

    /// Exact bias by evaluating all `2^n` assignments. Reference only; the
    /// counting module has the real counters.
    pub fn brute_force_bias(&self) -> Rational {
        assert!(self.n <= 30, "brute_force_bias is for tiny formulas");
        let total = 1u64 << self.n;
        let mut bits = vec![false; self.n];
        let mut count = 0u64;
        for x in 0..total {
            for (i, b) in bits.iter_mut().enumerate() {
                *b = x >> i & 1 == 1;
            }
            if self.clauses.iter().all(|c| c.evaluate(&bits)) {
                count += 1;
            }
        }
        BigRational::new(count.into(), pow2(self.n))
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "⊤");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn f(n: usize, cls: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(n, cls).unwrap()
    }

    fn x(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    fn r(s: &str) -> Restriction {
        s.parse().unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert!(CnfFormula::tautology(3).evaluate(&x("010")).unwrap());
        assert!(!f(1, &[&[1], &[-1]]).evaluate(&x("1")).unwrap());
        assert!(!f(2, &[&[1], &[-1]]).evaluate(&x("10")).unwrap());
        assert!(f(3, &[&[1, 2], &[-1, 3]]).evaluate(&x("101")).unwrap());
        assert_eq!(
            f(3, &[&[1]]).evaluate(&x("10")),
            Err(CnfError::LengthMismatch {
                expected: 3,
                actual: 2
            })
        );
    }

    #[test]
    fn clause_normalization() {
        let c = Clause::new([Literal::pos(2), Literal::neg(0), Literal::pos(2)]);
        assert_eq!(c.width(), 2);
        assert!(!c.is_tautology());
        assert!(Clause::new([Literal::pos(1), Literal::neg(1)]).is_tautology());
    }

    #[test]
    fn restrict_examples() {
        let g = f(3, &[&[1, 2], &[-1, 3]]);
        assert_eq!(g.restrict(&r("***")).unwrap(), g);
        assert_eq!(
            f(2, &[&[1, 2]]).restrict(&r("1*")).unwrap(),
            CnfFormula::tautology(2)
        );
        assert_eq!(g.restrict(&r("0**")).unwrap(), f(3, &[&[2]]));
        assert_eq!(
            f(2, &[&[1], &[2]]).restrict(&r("0*")).unwrap(),
            CnfFormula::unsatisfiable(2)
        );
        assert!(g.restrict(&r("0*")).is_err());
    }

    #[test]
    fn restrict_drops_tautologies() {
        let g = f(2, &[&[1, -1], &[2]]);
        assert_eq!(g.restrict(&r("**")).unwrap(), f(2, &[&[2]]));
    }

    #[test]
    fn restrict_compact_renumbers() {
        let g = f(4, &[&[1, 2, 4], &[-2, 3]]);
        let c = g.restrict_compact(&r("0*1*")).unwrap();
        assert_eq!(c, f(2, &[&[1, 2]]));
    }

    #[test]
    fn compose_examples() {
        assert_eq!(r("****").compose(&r("1*0*")).unwrap(), r("1*0*"));
        assert_eq!(r("1*0*").compose(&r("*1")).unwrap(), r("1*01"));
        assert!(r("1*0*").compose(&r("1")).is_err());
    }

    #[test]
    fn trim_examples() {
        let g = f(5, &[&[1, 2], &[3]]);
        assert_eq!(g.trim(2).unwrap(), g);
        let wide = f(5, &[&[5, 4, 3, 2, 1]]);
        let t = wide.trim(3).unwrap();
        assert_eq!(t, f(5, &[&[1, 2, 3]]));
        // 31/32 -> 28/32
        assert_eq!(wide.brute_force_bias(), ratio(31, 32));
        assert_eq!(t.brute_force_bias(), ratio(28, 32));
        assert_eq!(g.trim(0), Err(CnfError::ZeroWidth));
    }

    #[test]
    fn pad_examples() {
        let g = f(3, &[&[1, 2]]);
        let p = g.pad();
        assert_eq!(p.num_clauses(), 3);
        assert_eq!(p.brute_force_bias(), g.brute_force_bias());
        let big = f(2, &[&[1], &[2], &[1, 2]]);
        assert_eq!(big.pad(), big);
    }

    #[test]
    fn width_examples() {
        assert_eq!(CnfFormula::tautology(4).width(), 0);
        assert_eq!(f(3, &[&[1], &[-2]]).width(), 1);
        assert_eq!(f(6, &[&[1, 2], &[1, 2, 3, 4, 5]]).width(), 5);
    }

    #[test]
    fn dimacs_roundtrip() {
        let text = "c hello\np cnf 4 3\n1 -2 0\n3 4\n -1 0\n2 0\n";
        let g = CnfFormula::parse_dimacs(text).unwrap();
        assert_eq!(g.num_clauses(), 3);
        assert_eq!(g, f(4, &[&[1, -2], &[3, 4, -1], &[2]]));
        assert_eq!(CnfFormula::parse_dimacs(&g.to_dimacs()).unwrap(), g);
    }

    #[test]
    fn dimacs_errors_carry_line_numbers() {
        let bad = "p cnf 2 1\n1 3 0\n";
        match CnfFormula::parse_dimacs(bad) {
            Err(CnfError::Dimacs { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            CnfFormula::parse_dimacs("1 2 0\n"),
            Err(CnfError::Dimacs { line: 1, .. })
        ));
        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 2 2\n1 0\n"),
            Err(CnfError::Dimacs { line: 1, .. })
        ));
        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 2 1\n1 x 0\n"),
            Err(CnfError::Dimacs { line: 2, .. })
        ));
    }

    #[test]
    fn string_forms() {
        assert_eq!(r("1*0").to_string(), "1*0");
        assert_eq!(x("0110").to_string(), "0110");
        assert!("01a".parse::<Restriction>().is_err());
        assert_eq!(Assignment::from_mask(4, 0b0101).to_string(), "1010");
        assert_eq!(x("1010").to_mask(), Some(0b0101));
    }
}

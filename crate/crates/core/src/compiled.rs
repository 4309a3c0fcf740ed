//! Bitmask form of a CNF over at most 64 variables.
//!
//! Every hot loop in the crate (exact counting, candidate evaluation, the
//! exhaustive audits) runs on this representation: a clause is a pair of
//! masks and an assignment is a `u64`, so partial assignments are a
//! `(fixed, values)` pair of masks.

use crate::cnf::CnfFormula;

pub const MAX_VARS: usize = 64;

#[derive(Clone, Debug)]
pub struct CompiledCnf {
    n: usize,
    universe: u64,
    pos: Vec<u64>,
    neg: Vec<u64>,
    occurring: u64,
    unsat: bool,
    fingerprint: u64,
}

impl CompiledCnf {
    /// Identity layout: variable `i` is bit `i`. `None` if `n > 64`.
    pub fn new(f: &CnfFormula) -> Option<Self> {
        if f.num_vars() > MAX_VARS {
            return None;
        }
        Some(Self::build(f, f.num_vars(), |v| v))
    }

    /// Layout over the occurring variables only, in increasing order. The
    /// bias is unchanged; the variable count shrinks.
    pub fn dense(f: &CnfFormula) -> Option<Self> {
        let occ = f.occurring_vars();
        if occ.len() > MAX_VARS {
            return None;
        }
        let mut index = vec![usize::MAX; f.num_vars()];
        for (k, &v) in occ.iter().enumerate() {
            index[v] = k;
        }
        Some(Self::build(f, occ.len(), |v| index[v]))
    }

    fn build(f: &CnfFormula, n: usize, map: impl Fn(usize) -> usize) -> Self {
        let mut pos = Vec::with_capacity(f.num_clauses());
        let mut neg = Vec::with_capacity(f.num_clauses());
        let mut unsat = false;
        let mut occurring = 0u64;
        for c in f.clauses() {
            if c.is_tautology() {
                continue;
            }
            if c.is_empty() {
                unsat = true;
            }
            let (mut p, mut q) = (0u64, 0u64);
            for l in c.literals() {
                let bit = 1u64 << map(l.var());
                if l.is_positive() {
                    p |= bit;
                } else {
                    q |= bit;
                }
            }
            occurring |= p | q;
            pos.push(p);
            neg.push(q);
        }
        let mut fingerprint = 0xcbf2_9ce4_8422_2325u64 ^ n as u64;
        for (&p, &q) in pos.iter().zip(&neg) {
            fingerprint = mix(fingerprint ^ p);
            fingerprint = mix(fingerprint ^ q.rotate_left(17));
        }
        CompiledCnf {
            n,
            universe: universe(n),
            pos,
            neg,
            occurring,
            unsat,
            fingerprint,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.pos.len()
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn occurring(&self) -> u64 {
        self.occurring
    }

    /// Stable structural hash of the compiled clauses.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    #[inline]
    pub fn eval(&self, x: u64) -> bool {
        if self.unsat {
            return false;
        }
        self.pos
            .iter()
            .zip(&self.neg)
            .all(|(&p, &q)| (p & x) | (q & !x) != 0)
    }

    /// Satisfying completions of the partial assignment `(fixed, values)`,
    /// by enumerating every free occurring variable.
    pub fn count_brute(&self, fixed: u64, values: u64) -> u128 {
        let fixed = fixed & self.universe;
        let values = values & fixed;
        let free = self.universe & !fixed;
        let enumerated = free & self.occurring;
        let spare = (free & !self.occurring).count_ones();
        let mut count: u128 = 0;
        let mut sub = 0u64;
        loop {
            if self.eval(values | sub) {
                count += 1;
            }
            sub = sub.wrapping_sub(enumerated) & enumerated;
            if sub == 0 {
                break;
            }
        }
        count << spare
    }

    /// Same quantity as [`count_brute`](Self::count_brute) via unit
    /// propagation and branching on the lowest-indexed variable of an open
    /// clause. `nodes` receives the number of search nodes visited.
    pub fn count_dpll(&self, fixed: u64, values: u64, nodes: &mut u64) -> u128 {
        if self.unsat {
            *nodes += 1;
            return 0;
        }
        let fixed = fixed & self.universe;
        self.dpll(fixed, values & fixed, nodes)
    }

    fn dpll(&self, mut assigned: u64, mut values: u64, nodes: &mut u64) -> u128 {
        *nodes += 1;
        let open_vars = loop {
            let mut propagated = false;
            let mut open_vars = 0u64;
            for (&p, &q) in self.pos.iter().zip(&self.neg) {
                if (p & assigned & values) | (q & assigned & !values) != 0 {
                    continue;
                }
                let free = (p | q) & !assigned;
                if free == 0 {
                    return 0;
                }
                if free & (free - 1) == 0 {
                    assigned |= free;
                    if p & free != 0 {
                        values |= free;
                    } else {
                        values &= !free;
                    }
                    propagated = true;
                } else {
                    open_vars |= free;
                }
            }
            if !propagated {
                break open_vars;
            }
        };
        if open_vars == 0 {
            return 1u128 << (self.universe & !assigned).count_ones();
        }
        let v = open_vars & open_vars.wrapping_neg();
        self.dpll(assigned | v, values & !v, nodes) + self.dpll(assigned | v, values | v, nodes)
    }

    /// Width of `F↾ρ` for the partial assignment `(fixed, values)`, matching
    /// [`CnfFormula::restrict`] followed by `width()`: 0 when some clause is
    /// falsified (canonical unsatisfiable formula) or when all are satisfied.
    pub fn restricted_width(&self, fixed: u64, values: u64) -> usize {
        if self.unsat {
            return 0;
        }
        let mut w = 0;
        for (&p, &q) in self.pos.iter().zip(&self.neg) {
            if (p & fixed & values) | (q & fixed & !values) != 0 {
                continue;
            }
            let live = ((p | q) & !fixed).count_ones() as usize;
            if live == 0 {
                return 0;
            }
            w = w.max(live);
        }
        w
    }
}

pub fn universe(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// splitmix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

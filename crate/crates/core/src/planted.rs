//! Random k-CNFs with a planted witness and an exactly counted bias.

use num_traits::ToPrimitive;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Clause, CnfFormula, Literal};
use crate::compiled::universe;
use crate::counting::{exact_bias, CountError, CountMethod};
use crate::rational::{dyadic, pow2, serde_str, Rational};

/// Resampling attempts before giving up on a target bias.
pub const RESAMPLE_BUDGET: u32 = 10_000;

/// Candidate clauses drawn per clause slot.
pub const DRAWS_PER_CLAUSE: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlantError {
    #[error("clause width k = {k} must lie in 1..={n}")]
    Width { k: usize, n: usize },
    #[error("n = {n} exceeds the exhaustive limit of {limit}")]
    TooLarge { n: usize, limit: u32 },
    #[error("target ε must lie in [0, 1]")]
    Target,
    #[error("no instance with bias ≥ {target} after {attempts} attempts")]
    BudgetExhausted { target: String, attempts: u32 },
    #[error(transparent)]
    Count(#[from] CountError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantedInstance {
    pub formula: CnfFormula,
    pub witness: Assignment,
    pub true_bias: Rational,
}

/// Sidecar JSON written next to the DIMACS file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub k: usize,
    #[serde(with = "serde_str")]
    pub target_eps: Rational,
    pub seed: u64,
    pub witness: String,
    #[serde(with = "serde_str")]
    pub true_bias: Rational,
    pub attempts: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlantSpec {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
}

fn random_clause(rng: &mut ChaCha8Rng, n: usize, k: usize, witness: &Assignment) -> Clause {
    let vars = sample(rng, n, k).into_vec();
    let mut lits: Vec<Literal> = vars.iter().map(|&v| Literal::new(v, rng.gen())).collect();
    if !lits.iter().any(|l| l.satisfied_by(witness.get(l.var()))) {
        let j = rng.gen_range(0..k);
        let v = lits[j].var();
        lits[j] = Literal::new(v, witness.get(v));
    }
    Clause::new(lits)
}

/// Random CNF with `m` clauses whose widths are uniform in `kmin..=kmax`
/// (capped at `n`), over distinct variables with random signs.
pub fn random_cnf(rng: &mut impl Rng, n: usize, m: usize, kmin: usize, kmax: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let k = rng.gen_range(kmin.min(n)..=kmax.min(n));
            Clause::new(sample(rng, n, k).into_iter().map(|v| Literal::new(v, rng.gen())))
        })
        .collect();
    CnfFormula::new(n, clauses).expect("variables in range")
}

/// Deterministic in `spec`. Each clause slot draws up to
/// [`DRAWS_PER_CLAUSE`] planted clauses and keeps the first whose kill count
/// fits an even share of the remaining bias headroom, falling back to the
/// draw that removes the fewest satisfying assignments. Formulas whose final
/// exact bias is below `target` are rejected and regenerated. A target of 1
/// yields `M` tautological clauses.
pub fn generate(spec: PlantSpec, target: &Rational, limit: u32) -> Result<(PlantedInstance, u32), PlantError> {
    let PlantSpec { n, m, k, seed } = spec;
    if k == 0 || k > n {
        return Err(PlantError::Width { k, n });
    }
    if n as u32 > limit || n > 30 {
        return Err(PlantError::TooLarge { n, limit });
    }
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    if target < &zero || target > &one {
        return Err(PlantError::Target);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let witness = Assignment::new((0..n).map(|_| rng.gen()).collect());
    if target == &one {
        let formula = CnfFormula::new(n, (0..m).map(|i| Clause::tautology(i % n)).collect()).expect("in range");
        return Ok((
            PlantedInstance {
                formula,
                witness,
                true_bias: one,
            },
            1,
        ));
    }
    // smallest count of satisfying assignments meeting the target
    let need = (target * Rational::from_integer(pow2(n))).ceil().to_integer().to_u64().expect("n ≤ 30");
    for attempt in 1..=RESAMPLE_BUDGET {
        let mut alive = SatSet::full(n);
        let mut clauses = Vec::with_capacity(m);
        for j in 0..m {
            let share = alive.count.saturating_sub(need) / (m - j) as u64;
            let mut best: Option<(u64, Clause)> = None;
            for _ in 0..DRAWS_PER_CLAUSE {
                let c = random_clause(&mut rng, n, k, &witness);
                let kill = alive.killed_by(&c);
                if kill <= share {
                    best = Some((kill, c));
                    break;
                }
                if best.as_ref().is_none_or(|(b, _)| kill < *b) {
                    best = Some((kill, c));
                }
            }
            let (_, c) = best.expect("at least one draw");
            alive.remove(&c);
            clauses.push(c);
        }
        if alive.count >= need {
            let formula = CnfFormula::new(n, clauses).expect("in range");
            let bias = exact_bias(&formula, CountMethod::Auto, limit)?;
            debug_assert_eq!(bias, dyadic(alive.count as u128, n));
            return Ok((
                PlantedInstance {
                    formula,
                    witness,
                    true_bias: bias,
                },
                attempt,
            ));
        }
    }
    Err(PlantError::BudgetExhausted {
        target: target.to_string(),
        attempts: RESAMPLE_BUDGET,
    })
}

/// Satisfying assignments of the clauses accepted so far, as a bitset.
struct SatSet {
    n: usize,
    bits: Vec<u64>,
    count: u64,
}

impl SatSet {
    fn full(n: usize) -> Self {
        let total = 1u64 << n;
        let mut bits = vec![u64::MAX; total.div_ceil(64) as usize];
        if total < 64 {
            bits[0] = (1u64 << total) - 1;
        }
        SatSet { n, bits, count: total }
    }

    fn contains(&self, x: u64) -> bool {
        self.bits[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    fn killed_by(&self, c: &Clause) -> u64 {
        let mut k = 0;
        for_each_falsifier(self.n, c, |x| k += self.contains(x) as u64);
        k
    }

    fn remove(&mut self, c: &Clause) {
        let mut hit = Vec::new();
        for_each_falsifier(self.n, c, |x| hit.push(x));
        for x in hit {
            if self.contains(x) {
                self.bits[(x / 64) as usize] &= !(1 << (x % 64));
                self.count -= 1;
            }
        }
    }
}

/// Visits the subcube of assignments falsifying `c`.
fn for_each_falsifier(n: usize, c: &Clause, mut visit: impl FnMut(u64)) {
    let (mut fixed, mut values) = (0u64, 0u64);
    for l in c.literals() {
        fixed |= 1 << l.var();
        if !l.is_positive() {
            values |= 1 << l.var();
        }
    }
    let free = universe(n) & !fixed;
    let mut sub = 0u64;
    loop {
        visit(values | sub);
        sub = sub.wrapping_sub(free) & free;
        if sub == 0 {
            break;
        }
    }
}

impl PlantedInstance {
    pub fn sidecar(&self, spec: PlantSpec, target: &Rational, attempts: u32) -> Sidecar {
        Sidecar {
            n: spec.n,
            m: spec.m,
            k: spec.k,
            target_eps: target.clone(),
            seed: spec.seed,
            witness: self.witness.to_string(),
            true_bias: self.true_bias.clone(),
            attempts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn witness_satisfies_and_bias_meets_target() {
        let spec = PlantSpec { n: 12, m: 20, k: 3, seed: 7 };
        let (inst, _) = generate(spec, &ratio(1, 4), 24).unwrap();
        assert_eq!(inst.formula.evaluate(&inst.witness), Ok(true));
        assert!(inst.true_bias >= ratio(1, 4));
        assert_eq!(inst.true_bias, inst.formula.brute_force_bias());
    }

    #[test]
    fn deterministic() {
        let spec = PlantSpec { n: 8, m: 10, k: 3, seed: 99 };
        let a = generate(spec, &ratio(1, 8), 24).unwrap();
        let b = generate(spec, &ratio(1, 8), 24).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.formula.to_dimacs(), b.0.formula.to_dimacs());
    }

    #[test]
    fn target_one_is_tautology() {
        let spec = PlantSpec { n: 5, m: 7, k: 2, seed: 1 };
        let (inst, _) = generate(spec, &ratio(1, 1), 24).unwrap();
        assert_eq!(inst.formula.num_clauses(), 7);
        assert_eq!(inst.true_bias, ratio(1, 1));
        assert_eq!(inst.formula.brute_force_bias(), ratio(1, 1));
    }

    #[test]
    fn infeasible_target_exhausts_budget() {
        // one unit clause caps the bias at 1/2
        let spec = PlantSpec { n: 3, m: 1, k: 1, seed: 0 };
        assert!(matches!(
            generate(spec, &ratio(3, 4), 24),
            Err(PlantError::BudgetExhausted { .. })
        ));
    }
}

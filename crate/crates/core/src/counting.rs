//! Deterministic bias estimation: the counting oracle the search drivers
//! consume.
//!
//! Every counter promises `|value − E[F]| ≤ accuracy`. The exact counters
//! meet it with accuracy 0; [`AdversarialCounter`] spends its whole budget
//! on a deterministic perturbation so the drivers can be tested against the
//! worst answers the contract allows.

use std::ops::AddAssign;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::CnfFormula;
use crate::compiled::{mix, CompiledCnf};
use crate::rational::{clamp_unit, dyadic, Rational};

/// Default cap on the number of variables any exhaustive enumeration may
/// range over.
pub const DEFAULT_MAX_EXHAUSTIVE: u32 = 24;

/// Above this many free variables `CountMethod::Auto` switches to DPLL.
const AUTO_BRUTE_FORCE_MAX: u32 = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountError {
    #[error("brute-force count over {free} free variables exceeds the limit of {limit}")]
    LimitExceeded { free: u32, limit: u32 },
    #[error("formula has {0} occurring variables; counting supports at most 64")]
    TooManyVariables(usize),
    #[error("accuracy must be non-negative")]
    NegativeAccuracy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    BruteForce,
    Dpll,
    #[default]
    Auto,
}

/// Work done by counters and drivers. Only ever grows during a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCounter {
    pub counter_calls: u64,
    /// Full assignments evaluated by brute force, plus DPLL search nodes.
    pub assignments_enumerated: u64,
    pub candidates_examined: u64,
}

impl AddAssign for CostCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.counter_calls += rhs.counter_calls;
        self.assignments_enumerated += rhs.assignments_enumerated;
        self.candidates_examined += rhs.candidates_examined;
    }
}

/// A value in `[0,1]` together with the accuracy it was produced under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasEstimate {
    pub value: Rational,
    pub accuracy: Rational,
}

impl BiasEstimate {
    pub fn exact(value: Rational) -> Self {
        BiasEstimate {
            value,
            accuracy: Rational::zero(),
        }
    }
}

/// Exact count of satisfying completions of `(fixed, values)` in `cnf`.
pub fn count_partial(
    cnf: &CompiledCnf,
    fixed: u64,
    values: u64,
    method: CountMethod,
    limit: u32,
    cost: &mut CostCounter,
) -> Result<u128, CountError> {
    let free_occurring = (cnf.occurring() & cnf.universe() & !fixed).count_ones();
    let brute = match method {
        CountMethod::BruteForce => true,
        CountMethod::Dpll => false,
        CountMethod::Auto => free_occurring <= AUTO_BRUTE_FORCE_MAX,
    };
    if brute {
        if free_occurring > limit {
            return Err(CountError::LimitExceeded {
                free: free_occurring,
                limit,
            });
        }
        cost.assignments_enumerated += 1u64 << free_occurring;
        Ok(cnf.count_brute(fixed, values))
    } else {
        let mut nodes = 0;
        let c = cnf.count_dpll(fixed, values, &mut nodes);
        cost.assignments_enumerated += nodes;
        Ok(c)
    }
}

/// Exact bias of the partial assignment `(fixed, values)`.
pub fn bias_partial(
    cnf: &CompiledCnf,
    fixed: u64,
    values: u64,
    method: CountMethod,
    limit: u32,
    cost: &mut CostCounter,
) -> Result<Rational, CountError> {
    let c = count_partial(cnf, fixed, values, method, limit, cost)?;
    let free = (cnf.universe() & !fixed).count_ones() as usize;
    Ok(dyadic(c, free))
}

fn compile_for_counting(f: &CnfFormula) -> Result<CompiledCnf, CountError> {
    CompiledCnf::new(f)
        .or_else(|| CompiledCnf::dense(f))
        .ok_or_else(|| CountError::TooManyVariables(f.occurring_vars().len()))
}

/// `|F⁻¹(1)|` over all `F.n` variables.
pub fn exact_count(f: &CnfFormula, method: CountMethod, limit: u32) -> Result<BigUint, CountError> {
    let cnf = compile_for_counting(f)?;
    let c = count_partial(&cnf, 0, 0, method, limit, &mut CostCounter::default())?;
    Ok(BigUint::from(c) << (f.num_vars() - cnf.num_vars()))
}

/// Exact bias `E_x[F(x)]`.
pub fn exact_bias(f: &CnfFormula, method: CountMethod, limit: u32) -> Result<Rational, CountError> {
    let cnf = compile_for_counting(f)?;
    bias_partial(&cnf, 0, 0, method, limit, &mut CostCounter::default())
}

/// The `δ`-approximate counting contract, met exactly.
pub fn approx_bias(f: &CnfFormula, delta: &Rational, limit: u32) -> Result<BiasEstimate, CountError> {
    ExactCounter::with_accuracy(delta.clone(), limit)?.estimate(f, &mut CostCounter::default())
}

/// The contract, met with the deterministic worst-case skew.
pub fn adversarial_counter(
    f: &CnfFormula,
    delta: &Rational,
    skew: Skew,
    limit: u32,
) -> Result<BiasEstimate, CountError> {
    AdversarialCounter::new(delta.clone(), skew, limit)?.estimate(f, &mut CostCounter::default())
}

/// A deterministic bias oracle with a stated accuracy.
pub trait BiasCounter {
    fn accuracy(&self) -> Rational;

    /// Estimate of `E[F↾(fixed, values)]` over the free variables of `cnf`.
    fn estimate_partial(
        &self,
        cnf: &CompiledCnf,
        fixed: u64,
        values: u64,
        cost: &mut CostCounter,
    ) -> Result<BiasEstimate, CountError>;

    fn estimate(&self, f: &CnfFormula, cost: &mut CostCounter) -> Result<BiasEstimate, CountError> {
        let cnf = compile_for_counting(f)?;
        self.estimate_partial(&cnf, 0, 0, cost)
    }
}

/// Exact counting behind an accuracy contract of its choosing.
#[derive(Clone, Debug)]
pub struct ExactCounter {
    pub method: CountMethod,
    pub limit: u32,
    accuracy: Rational,
}

impl ExactCounter {
    pub fn new(method: CountMethod, limit: u32) -> Self {
        ExactCounter {
            method,
            limit,
            accuracy: Rational::zero(),
        }
    }

    /// Reports `accuracy` as its contract while still answering exactly.
    pub fn with_accuracy(accuracy: Rational, limit: u32) -> Result<Self, CountError> {
        if accuracy < Rational::zero() {
            return Err(CountError::NegativeAccuracy);
        }
        Ok(ExactCounter {
            method: CountMethod::Auto,
            limit,
            accuracy,
        })
    }
}

impl Default for ExactCounter {
    fn default() -> Self {
        ExactCounter::new(CountMethod::Auto, DEFAULT_MAX_EXHAUSTIVE)
    }
}

impl BiasCounter for ExactCounter {
    fn accuracy(&self) -> Rational {
        self.accuracy.clone()
    }

    fn estimate_partial(
        &self,
        cnf: &CompiledCnf,
        fixed: u64,
        values: u64,
        cost: &mut CostCounter,
    ) -> Result<BiasEstimate, CountError> {
        cost.counter_calls += 1;
        let value = bias_partial(cnf, fixed, values, self.method, self.limit, cost)?;
        Ok(BiasEstimate {
            value,
            accuracy: self.accuracy.clone(),
        })
    }
}

/// Direction of the adversarial perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Skew {
    Up,
    Down,
    /// `±δ`, sign drawn from a hash of the seed and the query.
    Seeded(u64),
}

/// Exact bias moved by exactly `δ` (then clamped to `[0,1]`).
#[derive(Clone, Debug)]
pub struct AdversarialCounter {
    delta: Rational,
    skew: Skew,
    pub method: CountMethod,
    pub limit: u32,
}

impl AdversarialCounter {
    pub fn new(delta: Rational, skew: Skew, limit: u32) -> Result<Self, CountError> {
        if delta < Rational::zero() {
            return Err(CountError::NegativeAccuracy);
        }
        Ok(AdversarialCounter {
            delta,
            skew,
            method: CountMethod::Auto,
            limit,
        })
    }

    fn sign_up(&self, cnf: &CompiledCnf, fixed: u64, values: u64) -> bool {
        match self.skew {
            Skew::Up => true,
            Skew::Down => false,
            Skew::Seeded(seed) => {
                let fixed = fixed & cnf.universe();
                let h = mix(mix(mix(seed ^ cnf.fingerprint()) ^ fixed) ^ (values & fixed));
                h & 1 == 1
            }
        }
    }
}

impl BiasCounter for AdversarialCounter {
    fn accuracy(&self) -> Rational {
        self.delta.clone()
    }

    fn estimate_partial(
        &self,
        cnf: &CompiledCnf,
        fixed: u64,
        values: u64,
        cost: &mut CostCounter,
    ) -> Result<BiasEstimate, CountError> {
        cost.counter_calls += 1;
        let exact = bias_partial(cnf, fixed, values, self.method, self.limit, cost)?;
        let moved = if self.sign_up(cnf, fixed, values) {
            exact + &self.delta
        } else {
            exact - &self.delta
        };
        Ok(BiasEstimate {
            value: clamp_unit(moved),
            accuracy: self.delta.clone(),
        })
    }
}

/// `1` as a rational; the largest value any estimate can take.
pub fn perfect() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn f(n: usize, cls: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(n, cls).unwrap()
    }

    const LIM: u32 = DEFAULT_MAX_EXHAUSTIVE;

    #[test]
    fn exact_count_examples() {
        for m in [CountMethod::BruteForce, CountMethod::Dpll, CountMethod::Auto] {
            assert_eq!(exact_count(&CnfFormula::tautology(3), m, LIM).unwrap(), 8u32.into());
            assert_eq!(exact_count(&f(2, &[&[1], &[-1]]), m, LIM).unwrap(), 0u32.into());
            assert_eq!(exact_count(&f(4, &[&[1, 2], &[3, 4]]), m, LIM).unwrap(), 9u32.into());
        }
    }

    #[test]
    fn brute_force_limit() {
        let g = f(6, &[&[1, 2, 3, 4, 5, 6]]);
        assert_eq!(
            exact_count(&g, CountMethod::BruteForce, 5),
            Err(CountError::LimitExceeded { free: 6, limit: 5 })
        );
        assert_eq!(exact_count(&g, CountMethod::Dpll, 5).unwrap(), 63u32.into());
    }

    #[test]
    fn wide_formula_counts_through_dense_layout() {
        let g = f(80, &[&[1, 80]]);
        assert_eq!(
            exact_count(&g, CountMethod::Auto, LIM).unwrap(),
            BigUint::from(3u32) << 78
        );
        assert_eq!(exact_bias(&g, CountMethod::Auto, LIM).unwrap(), ratio(3, 4));
    }

    #[test]
    fn approx_bias_examples() {
        let one = approx_bias(&CnfFormula::tautology(4), &ratio(1, 10), LIM).unwrap();
        assert_eq!(one.value, int(1));
        let or = approx_bias(&f(2, &[&[1, 2]]), &int(0), LIM).unwrap();
        assert_eq!(or.value, ratio(3, 4));
        let vac = approx_bias(&f(2, &[&[1, 2]]), &int(1), LIM).unwrap();
        assert_eq!(vac.value, ratio(3, 4));
        assert_eq!(vac.accuracy, int(1));
        assert_eq!(
            approx_bias(&f(2, &[&[1]]), &ratio(-1, 2), LIM),
            Err(CountError::NegativeAccuracy)
        );
    }

    #[test]
    fn adversarial_examples() {
        let g = f(1, &[&[1]]);
        let exact = adversarial_counter(&g, &int(0), Skew::Seeded(3), LIM).unwrap();
        assert_eq!(exact.value, ratio(1, 2));
        let down = adversarial_counter(&g, &ratio(1, 10), Skew::Down, LIM).unwrap();
        assert_eq!(down.value, ratio(2, 5));
        let up = adversarial_counter(&CnfFormula::tautology(1), &ratio(1, 10), Skew::Up, LIM).unwrap();
        assert_eq!(up.value, int(1));
    }

    #[test]
    fn adversarial_is_deterministic_and_within_budget() {
        let g = f(5, &[&[1, 2, -3], &[3, 4], &[-5, 1]]);
        let cnf = CompiledCnf::new(&g).unwrap();
        let delta = ratio(1, 16);
        let c = AdversarialCounter::new(delta.clone(), Skew::Seeded(11), LIM).unwrap();
        let mut cost = CostCounter::default();
        let mut ups = 0;
        for fixed in 0u64..32 {
            let a = c.estimate_partial(&cnf, fixed, fixed & 0b10101, &mut cost).unwrap();
            let b = c.estimate_partial(&cnf, fixed, fixed & 0b10101, &mut cost).unwrap();
            assert_eq!(a, b);
            let truth = bias_partial(&cnf, fixed, fixed & 0b10101, CountMethod::Dpll, LIM, &mut cost).unwrap();
            let diff = if a.value > truth { &a.value - &truth } else { &truth - &a.value };
            assert!(diff <= delta);
            if a.value > truth {
                ups += 1;
            }
        }
        assert!(ups > 0 && ups < 32);
        assert_eq!(cost.counter_calls, 64);
    }

    #[test]
    fn cost_counter_merges() {
        let mut a = CostCounter {
            counter_calls: 1,
            assignments_enumerated: 2,
            candidates_examined: 3,
        };
        a += a;
        assert_eq!(a.counter_calls, 2);
        assert_eq!(a.candidates_examined, 6);
    }
}

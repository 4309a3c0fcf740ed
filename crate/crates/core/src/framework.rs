//! One stage of the search: the bias-preservation check as an exact
//! procedure, and the argmax over a gentle restriction support.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cnf::{CnfFormula, Restriction};
use crate::compiled::CompiledCnf;
use crate::counting::{bias_partial, BiasCounter, BiasEstimate, CostCounter, CountError, CountMethod};
use crate::prg::EnumerableDistribution;
use crate::rational::{dyadic, Rational};
use crate::stars::GentleRestrictionDistribution;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameworkError {
    #[error("n = {n} exceeds the exhaustive limit of {limit}")]
    LimitExceeded { n: usize, limit: u32 },
    #[error("gentle support is empty")]
    EmptySupport,
    #[error("formula has n = {formula} but the distribution has n = {dist}")]
    DimensionMismatch { formula: usize, dist: usize },
    #[error("counter accuracy {accuracy} exceeds the budgeted δ_count = {budget}")]
    CounterTooCoarse { accuracy: String, budget: String },
    #[error(transparent)]
    Count(#[from] CountError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasPreservationReport {
    /// The star set as a mask.
    pub live: u64,
    pub delta_sl_measured: Rational,
    pub delta_prg_measured: Rational,
    /// `E_{x,y}[F(x_{[n]∖L}, y_L)]`.
    pub lhs: Rational,
    pub bias: Rational,
    /// `E_U[F] − (δ_PRG + δ_SL)`; `δ_sand = 0` under the width proxy.
    pub rhs_bound: Rational,
    pub holds: bool,
}

/// Exact check of the bias-preservation inequality for one star set `L`.
///
/// `ρ` ranges over all of `{0,1}^{[n]∖L}`. A restricted formula counts as
/// simple when its width is at most `w′`; `δ_PRG` is measured only over the
/// simple ones, which is what the inequality needs.
pub fn verify_bias_preservation(
    f: &CnfFormula,
    live: u64,
    d: &EnumerableDistribution,
    w_prime: usize,
    limit: u32,
) -> Result<BiasPreservationReport, FrameworkError> {
    let n = f.num_vars();
    if n as u32 > limit || n > 64 {
        return Err(FrameworkError::LimitExceeded { n, limit });
    }
    if d.n() != n {
        return Err(FrameworkError::DimensionMismatch { formula: n, dist: d.n() });
    }
    let cnf = CompiledCnf::new(f).expect("n ≤ 64");
    let u = cnf.universe();
    let live = live & u;
    let rest = u & !live;
    let fills: Vec<u64> = d.outputs().map(|y| y & live).collect();
    let free_live = live.count_ones() as usize;

    let mut lhs_hits: u128 = 0;
    let mut bad_rhos: u128 = 0;
    let mut total_sat: u128 = 0;
    let mut delta_prg = Rational::zero();
    let mut rho = 0u64;
    loop {
        let d_hits = fills.iter().filter(|&&y| cnf.eval(rho | y)).count() as u128;
        lhs_hits += d_hits;
        let sat = cnf.count_brute(rest, rho);
        total_sat += sat;
        if cnf.restricted_width(rest, rho) > w_prime {
            bad_rhos += 1;
        } else {
            let e_d = Rational::new(d_hits.into(), (fills.len() as u128).into());
            let e_u = dyadic(sat, free_live);
            let gap = (e_d - e_u).abs();
            if gap > delta_prg {
                delta_prg = gap;
            }
        }
        rho = rho.wrapping_sub(rest) & rest;
        if rho == 0 {
            break;
        }
    }
    let rho_bits = rest.count_ones() as usize;
    let lhs = Rational::new(lhs_hits.into(), (fills.len() as u128).into()) / crate::rational::pow2(rho_bits);
    let delta_sl = dyadic(bad_rhos, rho_bits);
    let bias = dyadic(total_sat, n);
    let rhs_bound = &bias - (&delta_prg + &delta_sl);
    Ok(BiasPreservationReport {
        live,
        delta_sl_measured: delta_sl,
        delta_prg_measured: delta_prg,
        holds: lhs >= rhs_bound,
        lhs,
        bias,
        rhs_bound,
    })
}

/// Error budgets that make up the per-stage slack.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SlackBudget {
    pub delta_prg: Rational,
    pub delta_sand: Rational,
    pub delta_sl: Rational,
    pub delta_count: Rational,
}

impl SlackBudget {
    /// `δ_PRG + δ_sand + δ_SL + 2δ_count`.
    pub fn total(&self) -> Rational {
        &self.delta_prg + &self.delta_sand + &self.delta_sl + &self.delta_count * Rational::from_integer(2.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageResult {
    pub chosen: Restriction,
    pub chosen_fixed: u64,
    pub chosen_values: u64,
    pub chosen_index: u64,
    pub estimated_bias: BiasEstimate,
    pub candidates_examined: u64,
    pub slack_budget: Rational,
}

/// Argmax of the counter's estimate over the gentle support, lowest index
/// on ties. Stops at the first estimate of 1, which nothing can beat.
pub fn select_stage(
    f: &CnfFormula,
    gentle: &GentleRestrictionDistribution,
    counter: &dyn BiasCounter,
    budget: &SlackBudget,
    cost: &mut CostCounter,
) -> Result<StageResult, FrameworkError> {
    if f.num_vars() != gentle.n() {
        return Err(FrameworkError::DimensionMismatch {
            formula: f.num_vars(),
            dist: gentle.n(),
        });
    }
    if counter.accuracy() > budget.delta_count {
        return Err(FrameworkError::CounterTooCoarse {
            accuracy: counter.accuracy().to_string(),
            budget: budget.delta_count.to_string(),
        });
    }
    let cnf = CompiledCnf::new(f).expect("gentle distributions have n ≤ 64");
    let one = Rational::one();
    let mut best: Option<(crate::stars::GentleCandidate, BiasEstimate)> = None;
    let mut examined = 0u64;
    for c in gentle.iter() {
        examined += 1;
        cost.candidates_examined += 1;
        let est = counter.estimate_partial(&cnf, c.fixed, c.values, cost)?;
        let better = best.as_ref().is_none_or(|(_, b)| est.value > b.value);
        if better {
            let done = est.value >= one;
            best = Some((c, est));
            if done {
                break;
            }
        }
    }
    let (c, est) = best.ok_or(FrameworkError::EmptySupport)?;
    Ok(StageResult {
        chosen: gentle.restriction(&c),
        chosen_fixed: c.fixed,
        chosen_values: c.values,
        chosen_index: c.index,
        estimated_bias: est,
        candidates_examined: examined,
        slack_budget: budget.total(),
    })
}

/// Exact bias loss `E[F] − E[F↾π̃]` of a stage.
pub fn stage_slack_audit(f: &CnfFormula, result: &StageResult, limit: u32) -> Result<Rational, FrameworkError> {
    if f.num_vars() as u32 > limit || f.num_vars() > 64 {
        return Err(FrameworkError::LimitExceeded { n: f.num_vars(), limit });
    }
    let cnf = CompiledCnf::new(f).expect("n ≤ 64");
    let mut cost = CostCounter::default();
    let before = bias_partial(&cnf, 0, 0, CountMethod::Auto, limit, &mut cost)?;
    let after = bias_partial(&cnf, result.chosen_fixed, result.chosen_values, CountMethod::Auto, limit, &mut cost)?;
    Ok(before - after)
}

/// `stage_slack_audit` compared against the stage's own budget.
pub fn audit_passes(loss: &Rational, result: &StageResult) -> bool {
    loss <= &result.slack_budget
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::ExactCounter;
    use crate::prg::{explicit_distribution, kwise_distribution, uniform_distribution};
    use crate::rational::{int, ratio};
    use crate::stars::{condition_on_stars, gentle_distribution, star_distribution, StarFamily};

    fn f(n: usize, cls: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(n, cls).unwrap()
    }

    #[test]
    fn constant_one_preserves() {
        let t = CnfFormula::tautology(4);
        let r = verify_bias_preservation(&t, 0b0101, &kwise_distribution(4, 2).unwrap(), 1, 24).unwrap();
        assert_eq!(r.lhs, int(1));
        assert!(r.holds);
    }

    #[test]
    fn uniform_fill_is_exact_average() {
        let g = f(6, &[&[1, 2, -3], &[3, 4, 5], &[-1, 6]]);
        let r = verify_bias_preservation(&g, 0b110011, &uniform_distribution(6, 24).unwrap(), 2, 24).unwrap();
        assert_eq!(r.delta_prg_measured, int(0));
        assert_eq!(r.lhs, r.bias);
        assert!(r.holds);
    }

    #[test]
    fn stage_example_two_clauses() {
        // stars fixed at L = {x1, x2}; uniform fill
        let g = f(4, &[&[1, 2], &[3, 4]]);
        let fill = explicit_distribution(4, vec![0b00, 0b01, 0b10, 0b11]).unwrap();
        let live = 0b0011u64;
        let cnf = CompiledCnf::new(&g).unwrap();
        let mut best = None;
        for y in fill.outputs() {
            let b = bias_partial(&cnf, live, y & live, CountMethod::BruteForce, 24, &mut CostCounter::default()).unwrap();
            if best.as_ref().is_none_or(|(_, v)| b > *v) {
                best = Some((y & live, b));
            }
        }
        let (values, b) = best.unwrap();
        assert_ne!(values, 0);
        assert_eq!(b, ratio(3, 4));
        assert!(b >= ratio(9, 16));
    }

    #[test]
    fn select_stage_argmax_and_early_exit() {
        let g = f(4, &[&[1, 2], &[3, 4]]);
        let stars = condition_on_stars(star_distribution(4, &int(1), StarFamily::Blockwise, 24).unwrap()).unwrap();
        let gentle = gentle_distribution(stars, uniform_distribution(4, 24).unwrap()).unwrap();
        let mut cost = CostCounter::default();
        let r = select_stage(&g, &gentle, &ExactCounter::default(), &SlackBudget::default(), &mut cost).unwrap();
        // 0101 is the first satisfying assignment in seed order
        assert_eq!(r.chosen.to_string(), "1010");
        assert_eq!(r.chosen_index, 5);
        assert_eq!(r.candidates_examined, 6);
        assert_eq!(cost.counter_calls, 6);
        assert_eq!(stage_slack_audit(&g, &r, 24).unwrap(), ratio(9, 16) - int(1));
    }

    #[test]
    fn coarse_counter_rejected() {
        let g = f(2, &[&[1]]);
        let stars = condition_on_stars(star_distribution(2, &int(1), StarFamily::Blockwise, 24).unwrap()).unwrap();
        let gentle = gentle_distribution(stars, uniform_distribution(2, 24).unwrap()).unwrap();
        let c = ExactCounter::with_accuracy(ratio(1, 10), 24).unwrap();
        assert!(matches!(
            select_stage(&g, &gentle, &c, &SlackBudget::default(), &mut CostCounter::default()),
            Err(FrameworkError::CounterTooCoarse { .. })
        ));
    }
}

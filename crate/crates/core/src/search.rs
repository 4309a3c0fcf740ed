//! End-to-end drivers. Every driver returns a [`SearchTrace`]; an assignment
//! only ever reaches `Outcome::Found` after `evaluate` has confirmed it.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::cnf::{Assignment, CnfFormula, Restriction};
use crate::compiled::CompiledCnf;
use crate::counting::{bias_partial, BiasCounter, BiasEstimate, CostCounter, CountMethod};
use crate::framework::{select_stage, SlackBudget};
use crate::params::{trim_width, ParameterSet};
use crate::prg::{
    kwise_distribution, smallbias_distribution, uniform_distribution, EnumerableDistribution, MAX_SEED_BITS,
};
use crate::rational::{int, Rational};
use crate::stars::{condition_on_stars, gentle_distribution, star_distribution, StarFamily};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Failure {
    /// Enumeration ended without a satisfying assignment.
    NotFound,
    StageBudgetExceeded { stages: u64 },
    PromiseViolation { stage: usize, best: String, threshold: String },
    AuditFailed { stage: usize, bias: String, required: String },
    /// The final assignment did not satisfy the formula.
    FinalCheck,
    EpsFloorReached { attempts: usize },
    Config { message: String },
}

impl Failure {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::NotFound | Failure::StageBudgetExceeded { .. } | Failure::EpsFloorReached { .. } => 1,
            Failure::PromiseViolation { .. } | Failure::AuditFailed { .. } | Failure::FinalCheck => 2,
            Failure::Config { .. } => 3,
        }
    }

    fn config(e: impl fmt::Display) -> Self {
        Failure::Config { message: e.to_string() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::NotFound => write!(f, "no satisfying assignment found"),
            Failure::StageBudgetExceeded { stages } => write!(f, "stage budget of {stages} exhausted"),
            Failure::PromiseViolation { stage, best, threshold } => {
                write!(f, "stage {stage}: best estimate {best} is below {threshold}")
            }
            Failure::AuditFailed { stage, bias, required } => {
                write!(f, "stage {stage}: audited bias {bias} is below {required}")
            }
            Failure::FinalCheck => write!(f, "final assignment does not satisfy the formula"),
            Failure::EpsFloorReached { attempts } => write!(f, "ε floor reached after {attempts} attempts"),
            Failure::Config { message } => write!(f, "configuration error: {message}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Found(Assignment),
    Failed(Failure),
}

impl Outcome {
    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            Outcome::Found(x) => Some(x),
            Outcome::Failed(_) => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Found(_) => 0,
            Outcome::Failed(e) => e.exit_code(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: usize,
    /// Free variables entering the stage.
    pub n_t: usize,
    pub candidates: u64,
    /// The composed restriction after this stage, over all `n` variables.
    pub prefix: Restriction,
    pub estimate: BiasEstimate,
    /// Exact bias of `F↾prefix`, when within the audit limit.
    pub audited_bias: Option<Rational>,
    /// Exact `E[F_t] − E[F_t↾π̃]`, when within the audit limit.
    pub loss: Option<Rational>,
    pub slack_budget: Rational,
    pub counter_calls: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchTrace {
    pub driver: &'static str,
    pub eps: Option<Rational>,
    pub stages: Vec<StageRecord>,
    pub outcome: Outcome,
    pub cost: CostCounter,
    /// ε values tried by the unknown-ε wrapper, in order.
    pub attempts: Vec<Rational>,
}

impl SearchTrace {
    fn new(driver: &'static str, eps: Option<Rational>) -> Self {
        SearchTrace {
            driver,
            eps,
            stages: Vec::new(),
            outcome: Outcome::Failed(Failure::NotFound),
            cost: CostCounter::default(),
            attempts: Vec::new(),
        }
    }

    fn fail(mut self, e: Failure) -> Self {
        self.outcome = Outcome::Failed(e);
        self
    }

    /// Accept `x` only if it satisfies `f`.
    fn finish(mut self, f: &CnfFormula, x: Assignment) -> Self {
        self.outcome = match f.evaluate(&x) {
            Ok(true) => Outcome::Found(x),
            _ => Outcome::Failed(Failure::FinalCheck),
        };
        self
    }

    pub fn succeeded(&self) -> bool {
        matches!(self.outcome, Outcome::Found(_))
    }
}

/// The pad-then-trim front end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prepared {
    pub formula: CnfFormula,
    pub w: usize,
    pub padding_clauses: usize,
    pub trimmed_clauses: usize,
}

pub fn prepare(f: &CnfFormula, eps: &Rational) -> Prepared {
    let padded = f.pad();
    let w = trim_width(padded.num_clauses(), eps);
    Prepared {
        trimmed_clauses: padded.count_wider_than(w),
        padding_clauses: padded.num_clauses() - f.num_clauses(),
        formula: padded.trim(w).expect("w ≥ 1"),
        w,
    }
}

/// The fill distribution of each stage, rebuilt over the current `n_t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FillKind {
    Uniform,
    Kwise { k: usize },
    SmallBias { delta: Rational },
}

impl FillKind {
    pub fn build(&self, n: usize, limit: u32) -> Result<EnumerableDistribution, crate::prg::PrgError> {
        match self {
            FillKind::Uniform => uniform_distribution(n, limit),
            FillKind::Kwise { k } => kwise_distribution(n, (*k).min(n)),
            FillKind::SmallBias { delta } => smallbias_distribution(n, delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagewiseConfig {
    pub family: StarFamily,
    pub fill: FillKind,
    /// Cap on `r_SL + r_PRG` per stage.
    pub enum_limit: u32,
    /// Cap on free variables for exact audits.
    pub audit_limit: u32,
}

impl Default for StagewiseConfig {
    fn default() -> Self {
        StagewiseConfig {
            family: StarFamily::Exhaustive,
            fill: FillKind::Uniform,
            enum_limit: MAX_SEED_BITS,
            audit_limit: crate::counting::DEFAULT_MAX_EXHAUSTIVE,
        }
    }
}

fn masks(r: &Restriction) -> (u64, u64) {
    r.values().iter().enumerate().fold((0, 0), |(f, v), (i, x)| match x {
        Some(b) => (f | 1 << i, v | (*b as u64) << i),
        None => (f, v),
    })
}

/// Exact bias of `cnf↾(fixed, values)` if the free variables are within
/// `limit`.
fn audit(cnf: &CompiledCnf, fixed: u64, values: u64, limit: u32, cost: &mut CostCounter) -> Option<Rational> {
    let free = (cnf.universe() & !fixed & cnf.occurring()).count_ones();
    if free > limit {
        return None;
    }
    let mut scratch = CostCounter::default();
    let r = bias_partial(cnf, fixed, values, CountMethod::Auto, limit, &mut scratch).ok();
    cost.assignments_enumerated += scratch.assignments_enumerated;
    r
}

/// The stage-wise search: each stage fixes a gentle restriction of the
/// surviving variables chosen by argmax of the counter's estimates.
pub fn search_stagewise(
    f: &CnfFormula,
    ps: &ParameterSet,
    cfg: &StagewiseConfig,
    counter: &dyn BiasCounter,
) -> SearchTrace {
    let eps = ps.eps.clone();
    let mut trace = SearchTrace::new("stagewise", Some(eps.clone()));
    let n = f.num_vars();
    let Some(cnf) = CompiledCnf::new(f) else {
        return trace.fail(Failure::config(format!("n = {n} exceeds 64 variables")));
    };
    let budget = SlackBudget {
        delta_prg: ps.delta_prg.clone(),
        delta_sand: ps.delta_sand.clone(),
        delta_sl: ps.delta_sl.clone(),
        delta_count: ps.delta_count.clone(),
    };
    let max_stages = ps.t.to_u64().unwrap_or(u64::MAX);
    let tau = ps.tau.clone();
    let mut prefix = Restriction::all_stars(n);
    let mut t = 0usize;
    while !prefix.is_total() {
        if t as u64 >= max_stages {
            return trace.fail(Failure::StageBudgetExceeded { stages: max_stages });
        }
        t += 1;
        let n_t = prefix.num_stars();
        let ft = f.restrict_compact(&prefix).expect("lengths match");
        let gentle = star_distribution(n_t, &ps.p, cfg.family, cfg.enum_limit)
            .map_err(Failure::config)
            .and_then(|s| condition_on_stars(s).map_err(Failure::config))
            .and_then(|s| {
                let fill = cfg.fill.build(n_t, cfg.enum_limit).map_err(Failure::config)?;
                gentle_distribution(s, fill).map_err(Failure::config)
            });
        let gentle = match gentle {
            Ok(g) if g.seed_bits() <= cfg.enum_limit => g,
            Ok(g) => {
                return trace.fail(Failure::config(format!(
                    "stage {t} needs {} seed bits, above the limit of {}",
                    g.seed_bits(),
                    cfg.enum_limit
                )))
            }
            Err(e) => return trace.fail(e),
        };
        let calls_before = trace.cost.counter_calls;
        let res = match select_stage(&ft, &gentle, counter, &budget, &mut trace.cost) {
            Ok(r) => r,
            Err(e) => return trace.fail(Failure::config(e)),
        };
        let required = &eps - Rational::from_integer(BigInt::from(t)) * &tau;
        let floor = &required - &ps.delta_count;
        if res.estimated_bias.value < floor {
            return trace.fail(Failure::PromiseViolation {
                stage: t,
                best: res.estimated_bias.value.to_string(),
                threshold: floor.to_string(),
            });
        }
        let local = CompiledCnf::new(&ft).expect("n_t ≤ n");
        let loss = audit(&local, 0, 0, cfg.audit_limit, &mut trace.cost).and_then(|before| {
            audit(&local, res.chosen_fixed, res.chosen_values, cfg.audit_limit, &mut trace.cost).map(|after| before - after)
        });
        prefix = prefix.compose(&res.chosen).expect("chosen spans the stars");
        let (fixed, values) = masks(&prefix);
        let audited = audit(&cnf, fixed, values, cfg.audit_limit, &mut trace.cost);
        trace.stages.push(StageRecord {
            stage: t,
            n_t,
            candidates: res.candidates_examined,
            prefix: prefix.clone(),
            estimate: res.estimated_bias,
            audited_bias: audited.clone(),
            loss,
            slack_budget: res.slack_budget,
            counter_calls: trace.cost.counter_calls - calls_before,
        });
        if let Some(b) = audited {
            if b < required {
                return trace.fail(Failure::AuditFailed {
                    stage: t,
                    bias: b.to_string(),
                    required: required.to_string(),
                });
            }
        }
    }
    let x = prefix.to_assignment().expect("total");
    trace.finish(f, x)
}

/// Bit-by-bit search: fix `x_i` to whichever value the counter prefers.
pub fn search_naive(f: &CnfFormula, eps: &Rational, counter: &dyn BiasCounter, audit_limit: u32) -> SearchTrace {
    let mut trace = SearchTrace::new("naive", Some(eps.clone()));
    let n = f.num_vars();
    let Some(cnf) = CompiledCnf::new(f) else {
        return trace.fail(Failure::config(format!("n = {n} exceeds 64 variables")));
    };
    let delta = counter.accuracy();
    let two = int(2);
    let (mut fixed, mut values) = (0u64, 0u64);
    let mut prefix = Restriction::all_stars(n);
    for i in 0..n {
        let stage = i + 1;
        let calls_before = trace.cost.counter_calls;
        let bit = 1u64 << i;
        let mut est = Vec::with_capacity(2);
        for v in [0, bit] {
            trace.cost.candidates_examined += 1;
            match counter.estimate_partial(&cnf, fixed | bit, values | v, &mut trace.cost) {
                Ok(e) => est.push(e),
                Err(e) => return trace.fail(Failure::config(e)),
            }
        }
        let one = est[1].value > est[0].value;
        let chosen = est.swap_remove(one as usize);
        let before = eps - Rational::from_integer(BigInt::from(i)) * &two * &delta;
        let floor = &before - &delta;
        if chosen.value < floor {
            return trace.fail(Failure::PromiseViolation {
                stage,
                best: chosen.value.to_string(),
                threshold: floor.to_string(),
            });
        }
        fixed |= bit;
        if one {
            values |= bit;
        }
        prefix.set(i, Some(one));
        let required = eps - Rational::from_integer(BigInt::from(stage)) * &two * &delta;
        let audited = audit(&cnf, fixed, values, audit_limit, &mut trace.cost);
        trace.stages.push(StageRecord {
            stage,
            n_t: n - i,
            candidates: 2,
            prefix: prefix.clone(),
            estimate: chosen,
            audited_bias: audited.clone(),
            loss: None,
            slack_budget: &two * &delta,
            counter_calls: trace.cost.counter_calls - calls_before,
        });
        if let Some(b) = audited {
            if b < required {
                return trace.fail(Failure::AuditFailed {
                    stage,
                    bias: b.to_string(),
                    required: required.to_string(),
                });
            }
        }
    }
    trace.finish(f, Assignment::from_mask(n, values))
}

/// First output of `d`, in seed order, that satisfies `f`.
pub fn search_prg_enumeration(f: &CnfFormula, d: &EnumerableDistribution) -> SearchTrace {
    let mut trace = SearchTrace::new("prg-enum", None);
    if d.n() != f.num_vars() {
        return trace.fail(Failure::config(format!(
            "distribution has n = {} but the formula has n = {}",
            d.n(),
            f.num_vars()
        )));
    }
    let Some(cnf) = CompiledCnf::new(f) else {
        return trace.fail(Failure::config("n exceeds 64 variables"));
    };
    for x in d.outputs() {
        trace.cost.candidates_examined += 1;
        trace.cost.assignments_enumerated += 1;
        if cnf.eval(x) {
            return trace.finish(f, Assignment::from_mask(f.num_vars(), x));
        }
    }
    trace.fail(Failure::NotFound)
}

/// Enumeration of a `1/(4M)`-biased space, which must contain a satisfying
/// assignment whenever `E[F] ≥ 1 − 1/(4M)`.
pub fn search_smallbias_high_eps(f: &CnfFormula) -> SearchTrace {
    let m = f.num_clauses().max(1) as i64;
    let delta = Rational::new(1.into(), (4 * m).into());
    let mut trace = match smallbias_distribution(f.num_vars().max(1), &delta) {
        Ok(d) if d.seed_bits() <= MAX_SEED_BITS && f.num_vars() > 0 => search_prg_enumeration(f, &d),
        Ok(_) if f.num_vars() == 0 => {
            let trace = SearchTrace::new("smallbias", None);
            trace.finish(f, Assignment::zeros(0))
        }
        Ok(d) => SearchTrace::new("smallbias", None).fail(Failure::config(format!(
            "small-bias space needs {} seed bits",
            d.seed_bits()
        ))),
        Err(e) => SearchTrace::new("smallbias", None).fail(Failure::config(e)),
    };
    trace.driver = "smallbias";
    trace
}

/// Runs `inner` at `ε = 1/2, 1/4, …` down to `floor`, returning the first
/// success. Costs accumulate over all attempts.
pub fn search_with_unknown_eps(floor: &Rational, mut inner: impl FnMut(&Rational) -> SearchTrace) -> SearchTrace {
    let mut eps = Rational::new(1.into(), 2.into());
    let mut cost = CostCounter::default();
    let mut attempts = Vec::new();
    let mut last: Option<SearchTrace> = None;
    while &eps >= floor && !floor.is_zero() {
        let mut t = inner(&eps);
        attempts.push(eps.clone());
        cost += t.cost;
        if t.succeeded() || matches!(t.outcome, Outcome::Failed(Failure::Config { .. })) {
            t.cost = cost;
            t.attempts = attempts;
            return t;
        }
        last = Some(t);
        eps /= int(2);
    }
    let mut t = last.unwrap_or_else(|| SearchTrace::new("unknown-eps", None));
    t.cost = cost;
    t.outcome = Outcome::Failed(Failure::EpsFloorReached { attempts: attempts.len() });
    t.attempts = attempts;
    t
}

/// Whether `auto` should use the small-bias driver for this asserted `ε`.
pub fn auto_prefers_smallbias(eps: &Rational, m: usize) -> bool {
    let m = m.max(1) as i64;
    eps >= &(Rational::one() - Rational::new(1.into(), (4 * m).into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{AdversarialCounter, ExactCounter, Skew};
    use crate::params::{compute_parameters, Mode, Overrides};
    use crate::rational::ratio;

    fn f(n: usize, cls: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(n, cls).unwrap()
    }

    fn practical(g: &CnfFormula, eps: &Rational) -> ParameterSet {
        let m = g.num_clauses().max(g.num_vars());
        compute_parameters(m, g.num_vars(), eps, 1.0, Mode::Practical, &Overrides::default()).unwrap()
    }

    #[test]
    fn stagewise_constant_one() {
        let t = CnfFormula::tautology(5);
        let tr = search_stagewise(&t, &practical(&t, &ratio(1, 2)), &StagewiseConfig::default(), &ExactCounter::default());
        assert!(tr.succeeded());
        assert_eq!(tr.stages.len(), 1);
    }

    #[test]
    fn stagewise_unsat_is_promise_violation() {
        let g = f(3, &[&[1], &[-1]]);
        let tr = search_stagewise(&g, &practical(&g, &ratio(1, 4)), &StagewiseConfig::default(), &ExactCounter::default());
        assert!(matches!(tr.outcome, Outcome::Failed(Failure::PromiseViolation { stage: 1, .. })));
        assert_eq!(tr.outcome.exit_code(), 2);
    }

    #[test]
    fn naive_single_clause() {
        let g = f(2, &[&[1, 2]]);
        let tr = search_naive(&g, &ratio(3, 4), &ExactCounter::default(), 24);
        assert!(tr.succeeded());
        assert_eq!(tr.cost.counter_calls, 4);
    }

    #[test]
    fn naive_over_budget_fails_visibly() {
        // skewed up on x1 = 0 and down on x1 = 1: a tie, broken towards 0
        struct Misleading;
        impl BiasCounter for Misleading {
            fn accuracy(&self) -> Rational {
                ratio(1, 2)
            }
            fn estimate_partial(
                &self,
                cnf: &CompiledCnf,
                fixed: u64,
                values: u64,
                cost: &mut CostCounter,
            ) -> Result<BiasEstimate, crate::counting::CountError> {
                cost.counter_calls += 1;
                let exact = bias_partial(cnf, fixed, values, CountMethod::BruteForce, 24, cost)?;
                let shift = if values & 1 == 1 { -ratio(1, 2) } else { ratio(1, 2) };
                Ok(BiasEstimate {
                    value: exact + shift,
                    accuracy: ratio(1, 2),
                })
            }
        }
        let g = f(1, &[&[1]]);
        let tr = search_naive(&g, &ratio(1, 2), &Misleading, 24);
        assert_eq!(tr.outcome, Outcome::Failed(Failure::FinalCheck));
    }

    #[test]
    fn naive_adversarial_within_budget() {
        let g = f(4, &[&[1, 2], &[-3, 4], &[2, 3]]);
        let eps = ratio(1, 4);
        let c = AdversarialCounter::new(ratio(1, 64), Skew::Seeded(3), 24).unwrap();
        assert!(search_naive(&g, &eps, &c, 24).succeeded());
    }

    #[test]
    fn prg_enum_examples() {
        let g = f(3, &[&[1, 2, 3]]);
        let d = uniform_distribution(3, 24).unwrap();
        assert_eq!(search_prg_enumeration(&g, &d).outcome, Outcome::Found("100".parse().unwrap()));
        let u = f(1, &[&[1], &[-1]]);
        let d1 = uniform_distribution(1, 24).unwrap();
        assert_eq!(search_prg_enumeration(&u, &d1).outcome, Outcome::Failed(Failure::NotFound));
    }

    #[test]
    fn smallbias_single_falsifier() {
        // (x1 ∨ x2 ∨ x3 ∨ x4) has one falsifying assignment
        let g = f(4, &[&[1, 2, 3, 4]]);
        assert!(search_smallbias_high_eps(&g).succeeded());
        assert!(search_smallbias_high_eps(&CnfFormula::tautology(3)).succeeded());
    }

    #[test]
    fn unknown_eps_floor() {
        let u = f(2, &[&[1], &[-1]]);
        let tr = search_with_unknown_eps(&ratio(1, 64), |e| {
            search_stagewise(&u, &practical(&u, e), &StagewiseConfig::default(), &ExactCounter::default())
        });
        assert_eq!(tr.outcome, Outcome::Failed(Failure::EpsFloorReached { attempts: 6 }));
        let t = CnfFormula::tautology(2);
        let tr = search_with_unknown_eps(&ratio(1, 64), |e| {
            search_stagewise(&t, &practical(&t, e), &StagewiseConfig::default(), &ExactCounter::default())
        });
        assert!(tr.succeeded());
        assert_eq!(tr.attempts, vec![ratio(1, 2)]);
    }

    #[test]
    fn prepare_pads_and_trims() {
        let g = f(4, &[&[1, 2, 3, 4]]);
        let p = prepare(&g, &int(1));
        assert_eq!(p.padding_clauses, 3);
        // M = 4, ε = 1 → w = 3
        assert_eq!(p.w, 3);
        assert_eq!(p.trimmed_clauses, 1);
        assert_eq!(p.formula.width(), 3);
    }
}

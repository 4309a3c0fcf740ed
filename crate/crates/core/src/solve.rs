//! The pad → trim → driver pipeline behind `derand solve` and the bench.

use std::fmt;
use std::str::FromStr;

use crate::cnf::CnfFormula;
use crate::counting::{AdversarialCounter, BiasCounter, ExactCounter, Skew, DEFAULT_MAX_EXHAUSTIVE};
use crate::params::{compute_parameters, Mode, Overrides};
use crate::prg::uniform_distribution;
use crate::rational::{ratio, Rational};
use crate::search::{
    auto_prefers_smallbias, prepare, search_naive, search_prg_enumeration, search_smallbias_high_eps,
    search_stagewise, search_with_unknown_eps, Failure, Outcome, SearchTrace, StagewiseConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Driver {
    Stagewise,
    Naive,
    PrgEnum,
    SmallBias,
    Auto,
}

impl Driver {
    pub const ALL: [Driver; 5] = [Driver::Stagewise, Driver::Naive, Driver::PrgEnum, Driver::SmallBias, Driver::Auto];

    pub fn name(self) -> &'static str {
        match self {
            Driver::Stagewise => "stagewise",
            Driver::Naive => "naive",
            Driver::PrgEnum => "prg-enum",
            Driver::SmallBias => "smallbias",
            Driver::Auto => "auto",
        }
    }
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Driver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Driver::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown driver {s:?}"))
    }
}

/// Which counter answers the drivers' queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CounterChoice {
    #[default]
    Exact,
    /// Worst-case skew at the full budget: `δ_count` for the stage-wise
    /// driver, `ε/(4n)` for the naive one.
    Adversarial(Skew),
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub driver: Driver,
    /// `None` runs the unknown-ε wrapper down to `eps_floor`.
    pub eps: Option<Rational>,
    pub eps_floor: Rational,
    pub mode: Mode,
    pub c: f64,
    pub overrides: Overrides,
    pub stagewise: StagewiseConfig,
    pub counter: CounterChoice,
    pub limit: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            driver: Driver::Auto,
            eps: None,
            eps_floor: ratio(1, 1 << 10),
            mode: Mode::Practical,
            c: 1.0,
            overrides: Overrides::default(),
            stagewise: StagewiseConfig::default(),
            counter: CounterChoice::Exact,
            limit: DEFAULT_MAX_EXHAUSTIVE,
        }
    }
}

fn config_failure(driver: &'static str, msg: impl fmt::Display) -> SearchTrace {
    SearchTrace {
        driver,
        eps: None,
        stages: Vec::new(),
        outcome: Outcome::Failed(Failure::Config { message: msg.to_string() }),
        cost: Default::default(),
        attempts: Vec::new(),
    }
}

fn run_at(f: &CnfFormula, eps: &Rational, driver: Driver, opts: &SolveOptions) -> SearchTrace {
    let prepared = prepare(f, eps);
    let g = &prepared.formula;
    let n = g.num_vars();
    // trimming may cost up to ε/2 of bias; untouched formulas keep all of it
    let asserted = eps;
    let eps = &if prepared.trimmed_clauses > 0 {
        eps / Rational::from_integer(2.into())
    } else {
        eps.clone()
    };
    let driver = match driver {
        Driver::Auto if auto_prefers_smallbias(asserted, f.num_clauses().max(f.num_vars())) => Driver::SmallBias,
        Driver::Auto => Driver::Stagewise,
        d => d,
    };
    let mut trace = match driver {
        Driver::Stagewise => {
            let m = g.num_clauses().max(n).max(1);
            let ps = match compute_parameters(m, n.max(1), eps, opts.c, opts.mode, &opts.overrides) {
                Ok(ps) => ps,
                Err(e) => return config_failure("stagewise", e),
            };
            let counter: Box<dyn BiasCounter> = match opts.counter {
                CounterChoice::Exact => Box::new(ExactCounter::new(Default::default(), opts.limit)),
                CounterChoice::Adversarial(skew) => match AdversarialCounter::new(ps.delta_count.clone(), skew, opts.limit) {
                    Ok(c) => Box::new(c),
                    Err(e) => return config_failure("stagewise", e),
                },
            };
            let mut cfg = opts.stagewise.clone();
            cfg.audit_limit = cfg.audit_limit.min(opts.limit);
            search_stagewise(g, &ps, &cfg, counter.as_ref())
        }
        Driver::Naive => {
            let delta = eps / Rational::from_integer((4 * n.max(1)).into());
            let counter: Box<dyn BiasCounter> = match opts.counter {
                CounterChoice::Exact => Box::new(ExactCounter::new(Default::default(), opts.limit)),
                CounterChoice::Adversarial(skew) => match AdversarialCounter::new(delta, skew, opts.limit) {
                    Ok(c) => Box::new(c),
                    Err(e) => return config_failure("naive", e),
                },
            };
            search_naive(g, eps, counter.as_ref(), opts.limit)
        }
        Driver::PrgEnum => match uniform_distribution(n, opts.limit) {
            Ok(d) => search_prg_enumeration(g, &d),
            Err(e) => config_failure("prg-enum", e),
        },
        Driver::SmallBias => search_smallbias_high_eps(g),
        Driver::Auto => unreachable!("resolved above"),
    };
    // trimming only shrinks the solution set, but never trust the trace
    if let Outcome::Found(x) = &trace.outcome {
        if f.evaluate(x) != Ok(true) {
            trace.outcome = Outcome::Failed(Failure::FinalCheck);
        }
    }
    trace
}

/// Runs the selected driver on `f` after padding and trimming.
pub fn solve(f: &CnfFormula, opts: &SolveOptions) -> SearchTrace {
    match &opts.eps {
        Some(eps) => run_at(f, eps, opts.driver, opts),
        None => {
            // without an asserted ε the auto driver cannot justify small-bias mode
            let driver = if opts.driver == Driver::Auto {
                Driver::Stagewise
            } else {
                opts.driver
            };
            search_with_unknown_eps(&opts.eps_floor, |e| run_at(f, e, driver, opts))
        }
    }
}

//! Self-checks run by `derand verify`: each invariant is checked by exact
//! enumeration on seeded random inputs and reports the first
//! counterexample it finds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cnf::{CnfFormula, Restriction};
use crate::compiled::CompiledCnf;
use crate::counting::{exact_bias, BiasCounter, CostCounter, CountMethod, ExactCounter};
use crate::framework::{select_stage, verify_bias_preservation, SlackBudget};
use crate::params::{compute_parameters, stage_budgets, trim_width, verify_proposition, Mode, Overrides, ParameterSet};
use crate::planted::random_cnf;
use crate::prg::{kwise_distribution, smallbias_distribution, uniform_distribution};
use crate::rational::{int, ratio, Rational};
use crate::stars::{condition_on_stars, gentle_distribution, star_distribution, StarFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Core,
    Prg,
    Restrictions,
    Framework,
    Params,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Core, Suite::Prg, Suite::Restrictions, Suite::Framework, Suite::Params];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub invariant: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub counterexample: Option<String>,
}

pub type TrimFn = fn(&CnfFormula, usize) -> CnfFormula;

fn reference_trim(f: &CnfFormula, w: usize) -> CnfFormula {
    f.trim(w).expect("w ≥ 1")
}

/// Configuration for a verification run. `trim` is injectable so the trim
/// invariant can be exercised against a faulty implementation.
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trim: TrimFn,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            trim: reference_trim,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ suite as u64);
    match suite {
        Suite::Core => vec![
            check_trim(&mut rng, opts.trim),
            check_dimacs_roundtrip(&mut rng),
            check_restrict_compose(&mut rng),
            check_counter_equivalence(&mut rng),
        ],
        Suite::Prg => vec![check_kwise(), check_smallbias()],
        Suite::Restrictions => vec![check_regularity(), check_conditioning(&mut rng), check_gentle_patterns()],
        Suite::Framework => vec![check_bias_preservation(&mut rng), check_argmax(&mut rng)],
        Suite::Params => vec![check_param_identities(), check_param_json()],
    }
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CheckResult> {
    Suite::ALL.iter().flat_map(|&s| run_suite(s, opts)).collect()
}

struct Check {
    suite: Suite,
    invariant: &'static str,
    cases: usize,
    counterexample: Option<String>,
}

impl Check {
    fn new(suite: Suite, invariant: &'static str) -> Self {
        Check {
            suite,
            invariant,
            cases: 0,
            counterexample: None,
        }
    }

    /// Records one case; keeps the first failure.
    fn case(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(detail());
        }
    }

    fn done(self) -> CheckResult {
        CheckResult {
            suite: self.suite,
            invariant: self.invariant,
            passed: self.counterexample.is_none(),
            cases: self.cases,
            counterexample: self.counterexample,
        }
    }
}

fn check_trim(rng: &mut ChaCha8Rng, trim: TrimFn) -> CheckResult {
    let mut c = Check::new(Suite::Core, "trim");
    for _ in 0..200 {
        let n = rng.gen_range(3..=10);
        let m = rng.gen_range(1..=8);
        let f = random_cnf(rng, n, m, 1, n.min(6));
        let eps = ratio(1, 1 << rng.gen_range(0..4));
        let derived = trim_width(m.max(n), &eps);
        for w in [1, 2, 3, derived] {
            let g = trim(&f, w);
            let cf = CompiledCnf::new(&f).expect("small");
            let cg = CompiledCnf::new(&g).expect("small");
            let shape = f.clauses().iter().zip(g.clauses()).all(|(a, b)| {
                let keep = a.width().min(w);
                b.literals() == &a.literals()[..keep]
            }) && f.num_clauses() == g.num_clauses();
            let subset = (0..1u64 << n).all(|x| !cg.eval(x) || cf.eval(x));
            let ok = shape && subset;
            c.case(ok, || format!("w = {w}\n{}", f.to_dimacs()));
        }
        let pad = f.pad();
        let g = trim(&pad, derived);
        let loss = pad.brute_force_bias() - g.brute_force_bias();
        c.case(loss <= &eps / int(2), || format!("ε = {eps}, w = {derived}\n{}", pad.to_dimacs()));
    }
    c.done()
}

fn check_dimacs_roundtrip(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut c = Check::new(Suite::Core, "dimacs-roundtrip");
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let m = rng.gen_range(0..10);
        let f = random_cnf(rng, n, m, 1, n.min(4));
        let text = f.to_dimacs();
        let back = CnfFormula::parse_dimacs(&text);
        let ok = back.as_ref().is_ok_and(|g| g == &f && g.to_dimacs() == text);
        c.case(ok, || text.clone());
    }
    c.done()
}

fn random_restriction(rng: &mut ChaCha8Rng, n: usize) -> Restriction {
    Restriction::new(
        (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => None,
                1 => Some(false),
                _ => Some(true),
            })
            .collect(),
    )
}

fn check_restrict_compose(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut c = Check::new(Suite::Core, "restrict-compose");
    for _ in 0..100 {
        let n = rng.gen_range(2..=10);
        let m = rng.gen_range(1..8);
        let f = random_cnf(rng, n, m, 1, 3);
        let outer = random_restriction(rng, n);
        let inner = random_restriction(rng, outer.num_stars());
        let composed = outer.compose(&inner).expect("lengths match");
        let direct = f.restrict_compact(&composed).expect("lengths match");
        let staged = f
            .restrict_compact(&outer)
            .and_then(|g| g.restrict_compact(&inner))
            .expect("lengths match");
        c.case(direct.brute_force_bias() == staged.brute_force_bias(), || {
            format!("π = {outer}, σ = {inner}\n{}", f.to_dimacs())
        });
    }
    c.done()
}

fn check_counter_equivalence(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut c = Check::new(Suite::Core, "counter-equivalence");
    for _ in 0..100 {
        let n = rng.gen_range(1..=14);
        let m = rng.gen_range(0..20);
        let f = random_cnf(rng, n, m, 1, n.min(5));
        let a = exact_bias(&f, CountMethod::BruteForce, 24);
        let b = exact_bias(&f, CountMethod::Dpll, 24);
        c.case(a.is_ok() && a == b, || f.to_dimacs());
    }
    c.done()
}

fn check_kwise() -> CheckResult {
    let mut c = Check::new(Suite::Prg, "kwise-independence");
    for n in 2..=8 {
        for k in 1..=3.min(n) {
            let d = kwise_distribution(n, k).expect("small");
            let total = d.num_outcomes();
            // every k-subset of coordinates sees each pattern equally often
            let mut subset: Vec<usize> = (0..k).collect();
            loop {
                let counts = d.marginal_counts(&subset);
                let each = total >> k;
                c.case(counts.iter().all(|&x| x == each), || format!("n = {n}, k = {k}, coords {subset:?}"));
                let Some(i) = (0..k).rev().find(|&i| subset[i] < n - k + i) else { break };
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
            }
        }
    }
    c.done()
}

fn check_smallbias() -> CheckResult {
    let mut c = Check::new(Suite::Prg, "smallbias-fourier");
    for n in 2..=10 {
        for den in [4, 8, 16] {
            let delta = ratio(1, den);
            let d = smallbias_distribution(n, &delta).expect("small");
            let ok = d.max_fourier_bias(24).is_ok_and(|(b, _)| b <= delta);
            c.case(ok, || format!("n = {n}, δ = {delta}"));
        }
    }
    c.done()
}

const FAMILIES: [StarFamily; 4] = [
    StarFamily::Exhaustive,
    StarFamily::Blockwise,
    StarFamily::KwiseSelect { k: 2 },
    StarFamily::KwiseSelect { k: 3 },
];

fn check_regularity() -> CheckResult {
    let mut c = Check::new(Suite::Restrictions, "p-regularity");
    for fam in FAMILIES {
        for a in 1..=3 {
            let p = ratio(1, 1 << a);
            let Ok(d) = star_distribution(8, &p, fam, 24) else { continue };
            c.case(d.live_fractions().iter().all(|f| f == &p), || format!("{fam:?}, p = {p}"));
        }
    }
    c.done()
}

fn check_conditioning(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut c = Check::new(Suite::Restrictions, "conditioning-bounds");
    for fam in FAMILIES {
        for a in 1..=3 {
            let p = ratio(1, 1 << a);
            let Ok(base) = star_distribution(8, &p, fam, 24) else { continue };
            let Ok(cond) = condition_on_stars(base.clone()) else {
                c.case(false, || format!("{fam:?}, p = {p}: empty conditioned support"));
                continue;
            };
            c.case(cond.survival_fraction() >= &p / int(2), || format!("{fam:?}, p = {p}: survival"));
            let base_hist = base.histogram();
            let cond_hist = base_hist.conditioned(&base);
            for _ in 0..20 {
                let target: u64 = rng.gen::<u64>() & 0xff;
                let event = |l: u64| l & target == target;
                let lhs = cond_hist.probability(event);
                let rhs = base_hist.probability(event) * int(2) / &p;
                c.case(lhs <= rhs, || format!("{fam:?}, p = {p}, event ⊇ {target:#010b}"));
            }
        }
    }
    c.done()
}

fn check_gentle_patterns() -> CheckResult {
    let mut c = Check::new(Suite::Restrictions, "gentle-patterns");
    for fam in [StarFamily::Exhaustive, StarFamily::Blockwise] {
        let base = star_distribution(6, &ratio(1, 2), fam, 24).expect("small");
        let stars = condition_on_stars(base).expect("non-empty");
        let fill = kwise_distribution(6, 2).expect("small");
        let g = gentle_distribution(stars, fill.clone()).expect("same n");
        for cand in g.iter() {
            let r = g.restriction(&cand);
            let ok = (0..6).all(|i| {
                let live = cand.fixed >> i & 1 == 1;
                match r.get(i) {
                    None => !live,
                    Some(b) => live && b == (fill.output(cand.fill_seed) >> i & 1 == 1),
                }
            }) && 4 * r.num_fixed() >= 6;
            c.case(ok, || format!("{fam:?}, candidate {}", cand.index));
        }
    }
    c.done()
}

fn check_bias_preservation(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut c = Check::new(Suite::Framework, "bias-preservation");
    for i in 0..100 {
        let n = rng.gen_range(4..=8);
        let m = rng.gen_range(1..10);
        let f = random_cnf(rng, n, m, 1, 4);
        let live = rng.gen::<u64>() & ((1 << n) - 1);
        let d = match i % 4 {
            0 => uniform_distribution(n, 24),
            1 => kwise_distribution(n, 2),
            2 => kwise_distribution(n, 3),
            _ => smallbias_distribution(n, &ratio(1, 8)),
        }
        .expect("small");
        let w_prime = rng.gen_range(1..=3);
        let ok = verify_bias_preservation(&f, live, &d, w_prime, 24).is_ok_and(|r| r.holds);
        c.case(ok, || format!("L = {live:#b}, D = {}, w′ = {w_prime}\n{}", d.kind(), f.to_dimacs()));
    }
    c.done()
}

fn check_argmax(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut c = Check::new(Suite::Framework, "argmax-dominance");
    for _ in 0..30 {
        let n = rng.gen_range(3..=7);
        let m = rng.gen_range(1..8);
        let f = random_cnf(rng, n, m, 2, 3);
        let stars = condition_on_stars(star_distribution(n, &ratio(1, 2), StarFamily::Blockwise, 24).expect("small"))
            .expect("non-empty");
        let g = gentle_distribution(stars, kwise_distribution(n, 2).expect("small")).expect("same n");
        let counter = ExactCounter::default();
        let mut cost = CostCounter::default();
        let Ok(r) = select_stage(&f, &g, &counter, &SlackBudget::default(), &mut cost) else {
            c.case(false, || f.to_dimacs());
            continue;
        };
        let cnf = CompiledCnf::new(&f).expect("small");
        let dominated = g.iter().all(|cand| {
            counter
                .estimate_partial(&cnf, cand.fixed, cand.values, &mut CostCounter::default())
                .is_ok_and(|e| e.value <= r.estimated_bias.value)
        });
        let first = g.iter().find(|cand| {
            counter
                .estimate_partial(&cnf, cand.fixed, cand.values, &mut CostCounter::default())
                .is_ok_and(|e| e.value == r.estimated_bias.value)
        });
        let lowest = first.is_some_and(|cand| cand.index == r.chosen_index);
        c.case(dominated && lowest, || f.to_dimacs());
    }
    c.done()
}

fn check_param_identities() -> CheckResult {
    let mut c = Check::new(Suite::Params, "identities");
    for m_log in [14, 17, 20] {
        for den in [2, 8, 64] {
            let eps = ratio(1, den);
            let m = 1usize << m_log;
            let Ok(ps) = compute_parameters(m, m, &eps, 1.0, Mode::Paper, &Overrides::default()) else {
                c.case(false, || format!("M = 2^{m_log}, ε = {eps}: compute failed"));
                continue;
            };
            let t = Rational::from_integer(ps.t.clone().into());
            c.case(&ps.tau * t == &eps / int(2), || format!("M = 2^{m_log}, ε = {eps}: τ·T"));
            c.case(&ps.delta_prg + int(2) * &ps.delta_count == &ps.tau * ratio(5, 6), || {
                format!("M = 2^{m_log}, ε = {eps}: δ_PRG + 2δ_count")
            });
            c.case(verify_proposition(&ps).ineq2, || format!("M = 2^{m_log}, ε = {eps}: ineq2"));
        }
    }
    for n in [2usize, 16, 1000] {
        for a in 0..4 {
            let p = ratio(1, 1 << a);
            let (t, tau) = stage_budgets(n, &ratio(1, 4), &p);
            c.case(tau * Rational::from_integer(t.into()) == ratio(1, 8), || format!("n = {n}, p = {p}"));
        }
    }
    c.done()
}

fn check_param_json() -> CheckResult {
    let mut c = Check::new(Suite::Params, "json-roundtrip");
    let grid: Vec<ParameterSet> = [(1024usize, ratio(1, 8), Mode::Paper), (64, ratio(1, 4), Mode::Practical)]
        .into_iter()
        .filter_map(|(m, e, mode)| compute_parameters(m, m, &e, 1.0, mode, &Overrides::default()).ok())
        .collect();
    for ps in grid {
        c.case(ParameterSet::from_json(&ps.to_json()).ok().as_ref() == Some(&ps), || ps.to_json());
    }
    c.done()
}

/// Used by the mutation test and exposed for the CLI.
pub fn faulty_trim(f: &CnfFormula, w: usize) -> CnfFormula {
    f.trim(w.saturating_sub(1).max(1)).expect("w ≥ 1")
}

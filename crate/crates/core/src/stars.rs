//! Pseudorandom restrictions: p-regular star distributions, their
//! conditioning on having enough stars, the gentle restriction distribution
//! built on top, and the switching proxy that measures how often a random
//! restriction leaves a narrow formula.
//!
//! Naming follows the construction: a draw `L` from a star distribution is
//! the set of *live* coordinates. The gentle distribution fixes `L` from a
//! fill distribution and leaves the rest starred; the switching proxy does
//! the opposite, fixing `[n]∖L` uniformly and keeping `L` free.

use std::collections::{BTreeMap, HashSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{CnfFormula, Restriction};
use crate::compiled::{universe, CompiledCnf};
use crate::field::BinaryField;
use crate::prg::EnumerableDistribution;
use crate::rational::{dyadic, pow2, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StarError {
    #[error("p = {0} is not of the form 2^-a")]
    NonDyadic(String),
    #[error("n = {0} is outside 1..=64")]
    BadLength(usize),
    #[error("seed length {bits} exceeds the exhaustive limit of {limit}")]
    LimitExceeded { bits: u32, limit: u32 },
    #[error("independence k = {k} must lie in 1..={n}")]
    BadIndependence { k: usize, n: usize },
    #[error("no star set in the support has at least pn/2 elements")]
    EmptyConditionedSupport,
    #[error("star distribution has n = {stars} but the fill has n = {fill}")]
    DimensionMismatch { stars: usize, fill: usize },
    #[error("formula has n = {formula} but the star distribution has n = {stars}")]
    FormulaMismatch { formula: usize, stars: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum StarFamily {
    /// Fully independent `a`-bit blocks, one per coordinate; `r = a·n`.
    Exhaustive,
    /// `k`-wise independent blocks from polynomial evaluation; `r = k·m`.
    KwiseSelect { k: usize },
    /// `L = {i : i ≡ s mod 2^a}` for an `a`-bit seed `s`.
    Blockwise,
}

/// A p-regular distribution over subsets of `[n]`, `p = 2^-a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarDistribution {
    n: usize,
    a: u32,
    family: StarFamily,
    seed_bits: u32,
    field: Option<BinaryField>,
}

/// `a` with `p = 2^-a`, if `p` is dyadic in `(0, 1]`.
pub fn dyadic_exponent(p: &Rational) -> Option<u32> {
    if !p.numer().is_one() || p <= &Rational::zero() {
        return None;
    }
    let d = p.denom();
    let bits = d.bits();
    (bits >= 1 && *d == (num_bigint::BigInt::one() << (bits - 1))).then_some(bits as u32 - 1)
}

pub fn star_distribution(
    n: usize,
    p: &Rational,
    family: StarFamily,
    limit: u32,
) -> Result<StarDistribution, StarError> {
    if !(1..=64).contains(&n) {
        return Err(StarError::BadLength(n));
    }
    let a = dyadic_exponent(p).ok_or_else(|| StarError::NonDyadic(p.to_string()))?;
    let mut field = None;
    let seed_bits = match family {
        StarFamily::Exhaustive => a.saturating_mul(n as u32),
        StarFamily::KwiseSelect { k } => {
            if k == 0 || k > n {
                return Err(StarError::BadIndependence { k, n });
            }
            let m = (64 - (n as u64 - 1).leading_zeros()).max(a).max(1);
            let f = BinaryField::new(m).ok_or(StarError::LimitExceeded { bits: m, limit })?;
            field = Some(f);
            k as u32 * m
        }
        StarFamily::Blockwise => a,
    };
    if seed_bits > limit || seed_bits > 63 {
        return Err(StarError::LimitExceeded {
            bits: seed_bits,
            limit,
        });
    }
    Ok(StarDistribution {
        n,
        a,
        family,
        seed_bits,
        field,
    })
}

impl StarDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> Rational {
        BigRational::new(1.into(), pow2(self.a as usize))
    }

    pub fn log2_inv_p(&self) -> u32 {
        self.a
    }

    pub fn family(&self) -> StarFamily {
        self.family
    }

    pub fn seed_bits(&self) -> u32 {
        self.seed_bits
    }

    pub fn num_outcomes(&self) -> u64 {
        1u64 << self.seed_bits
    }

    /// The live set for `seed`, as a mask.
    pub fn live_set(&self, seed: u64) -> u64 {
        let n = self.n;
        let a = self.a;
        if a == 0 {
            return universe(n);
        }
        let block = (1u64 << a) - 1;
        match self.family {
            StarFamily::Exhaustive => (0..n).fold(0u64, |acc, i| {
                let live = (seed >> (i as u32 * a)) & block == 0;
                acc | (live as u64) << i
            }),
            StarFamily::KwiseSelect { k } => {
                let field = self.field.expect("set at construction");
                let m = field.degree();
                let coeffs: Vec<u32> = (0..k)
                    .map(|j| ((seed >> (j as u32 * m)) as u32) & field.mask())
                    .collect();
                (0..n).fold(0u64, |acc, i| {
                    let v = field.eval_poly(&coeffs, i as u32) as u64;
                    acc | ((v & block == 0) as u64) << i
                })
            }
            StarFamily::Blockwise => {
                let s = seed & block;
                (0..n).fold(0u64, |acc, i| acc | ((i as u64 & block == s) as u64) << i)
            }
        }
    }

    /// `|L| ≥ pn/2`, i.e. `|L|·2^(a+1) ≥ n`.
    pub fn has_enough_stars(&self, live: u64) -> bool {
        (live.count_ones() as u128) << (self.a + 1) >= self.n as u128
    }

    /// Exact `Pr[i ∈ L]` for every coordinate, by enumerating all seeds.
    pub fn live_fractions(&self) -> Vec<Rational> {
        let mut counts = vec![0u128; self.n];
        for s in 0..self.num_outcomes() {
            let l = self.live_set(s);
            for (i, c) in counts.iter_mut().enumerate() {
                *c += (l >> i & 1) as u128;
            }
        }
        counts
            .into_iter()
            .map(|c| dyadic(c, self.seed_bits as usize))
            .collect()
    }

    /// Multiplicity of every live set in the support.
    pub fn histogram(&self) -> LiveSetHistogram {
        let mut counts = BTreeMap::new();
        for s in 0..self.num_outcomes() {
            *counts.entry(self.live_set(s)).or_insert(0u64) += 1;
        }
        LiveSetHistogram {
            counts,
            total: self.num_outcomes(),
        }
    }

    /// Exact `Pr[event(L)]`.
    pub fn probability(&self, event: impl Fn(u64) -> bool) -> Rational {
        self.histogram().probability(event)
    }
}

/// A star-set distribution collapsed to `(L, multiplicity)` pairs, for
/// evaluating many events against one enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiveSetHistogram {
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
}

impl LiveSetHistogram {
    pub fn probability(&self, event: impl Fn(u64) -> bool) -> Rational {
        let hits: u64 = self.counts.iter().filter(|(&l, _)| event(l)).map(|(_, &c)| c).sum();
        BigRational::new(hits.into(), self.total.into())
    }

    /// The histogram restricted to sets with `|L| ≥ pn/2`.
    pub fn conditioned(&self, base: &StarDistribution) -> LiveSetHistogram {
        let counts: BTreeMap<u64, u64> = self
            .counts
            .iter()
            .filter(|(&l, _)| base.has_enough_stars(l))
            .map(|(&l, &c)| (l, c))
            .collect();
        let total = counts.values().sum();
        LiveSetHistogram { counts, total }
    }
}

/// The base distribution conditioned on `|L| ≥ pn/2`; uniform over the
/// surviving seeds in seed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionedStarDistribution {
    base: StarDistribution,
    surviving: u64,
}

pub fn condition_on_stars(base: StarDistribution) -> Result<ConditionedStarDistribution, StarError> {
    let surviving = (0..base.num_outcomes())
        .filter(|&s| base.has_enough_stars(base.live_set(s)))
        .count() as u64;
    if surviving == 0 {
        return Err(StarError::EmptyConditionedSupport);
    }
    Ok(ConditionedStarDistribution { base, surviving })
}

impl ConditionedStarDistribution {
    pub fn base(&self) -> &StarDistribution {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn support_size(&self) -> u64 {
        self.surviving
    }

    pub fn survival_fraction(&self) -> Rational {
        dyadic(self.surviving as u128, self.base.seed_bits as usize)
    }

    /// Surviving `(seed, L)` pairs in seed order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.base.num_outcomes()).filter_map(move |s| {
            let l = self.base.live_set(s);
            self.base.has_enough_stars(l).then_some((s, l))
        })
    }

    pub fn histogram(&self) -> LiveSetHistogram {
        self.base.histogram().conditioned(&self.base)
    }

    pub fn probability(&self, event: impl Fn(u64) -> bool) -> Rational {
        self.histogram().probability(event)
    }
}

/// One outcome of the gentle distribution: `L` fixed to the fill output,
/// everything else starred.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GentleCandidate {
    /// Position in the enumeration (stars-major, fill-minor).
    pub index: u64,
    pub star_seed: u64,
    pub fill_seed: u64,
    pub fixed: u64,
    pub values: u64,
}

#[derive(Clone, Debug)]
pub struct GentleRestrictionDistribution {
    stars: ConditionedStarDistribution,
    fill: EnumerableDistribution,
}

pub fn gentle_distribution(
    stars: ConditionedStarDistribution,
    fill: EnumerableDistribution,
) -> Result<GentleRestrictionDistribution, StarError> {
    if stars.n() != fill.n() {
        return Err(StarError::DimensionMismatch {
            stars: stars.n(),
            fill: fill.n(),
        });
    }
    Ok(GentleRestrictionDistribution { stars, fill })
}

impl GentleRestrictionDistribution {
    pub fn n(&self) -> usize {
        self.fill.n()
    }

    pub fn stars(&self) -> &ConditionedStarDistribution {
        &self.stars
    }

    pub fn fill(&self) -> &EnumerableDistribution {
        &self.fill
    }

    /// Multiset size: surviving star sets times fill outcomes.
    pub fn support_size(&self) -> u128 {
        self.stars.support_size() as u128 * self.fill.num_outcomes() as u128
    }

    /// Seed length `r_SL + r_PRG` of the unconditioned product.
    pub fn seed_bits(&self) -> u32 {
        self.stars.base.seed_bits + self.fill.seed_bits()
    }

    pub fn iter(&self) -> impl Iterator<Item = GentleCandidate> + '_ {
        let per = self.fill.num_outcomes();
        self.stars
            .iter()
            .enumerate()
            .flat_map(move |(j, (star_seed, fixed))| {
                (0..per).map(move |fill_seed| GentleCandidate {
                    index: j as u64 * per + fill_seed,
                    star_seed,
                    fill_seed,
                    fixed,
                    values: self.fill.output(fill_seed) & fixed,
                })
            })
    }

    pub fn restriction(&self, c: &GentleCandidate) -> Restriction {
        Restriction::from_masks(self.n(), c.fixed, c.values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProxyMethod {
    /// `F↾ρ` has syntactic width ≤ w′.
    SyntacticWidth,
    /// `F↾ρ` is computed by a decision tree of depth ≤ w′.
    DecisionTreeDepth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProxySampling {
    Exact,
    /// `per_star` uniformly drawn fills of `[n]∖L` for every star set.
    Sampled { per_star: u32, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchingReport {
    pub fraction_simplified: Rational,
    pub w_prime: usize,
    pub method: ProxyMethod,
    pub pairs_examined: u64,
}

/// Exact largest number of live coordinates the decision-tree method handles.
pub const DT_MAX_VARS: usize = 12;

/// Fraction of `(L, ρ)` with `L` from the conditioned distribution and `ρ`
/// uniform on `[n]∖L` for which `F↾ρ` is simple in the sense of `method`.
pub fn switching_proxy_report(
    f: &CnfFormula,
    stars: &ConditionedStarDistribution,
    w_prime: usize,
    method: ProxyMethod,
    sampling: ProxySampling,
    limit: u32,
) -> Result<SwitchingReport, StarError> {
    if f.num_vars() != stars.n() {
        return Err(StarError::FormulaMismatch {
            formula: f.num_vars(),
            stars: stars.n(),
        });
    }
    let cnf = CompiledCnf::new(f).expect("n ≤ 64");
    let u = cnf.universe();
    let mut total = Rational::zero();
    let mut pairs = 0u64;
    let mut rng = match sampling {
        ProxySampling::Sampled { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        ProxySampling::Exact => None,
    };
    for (_, live) in stars.iter() {
        let rest = u & !live;
        let simple = |values: u64| match method {
            ProxyMethod::SyntacticWidth => cnf.restricted_width(rest, values) <= w_prime,
            ProxyMethod::DecisionTreeDepth => decision_tree_depth(&cnf, rest, values, live) <= w_prime,
        };
        let (good, tried) = match (&mut rng, sampling) {
            (Some(rng), ProxySampling::Sampled { per_star, .. }) => {
                let good = (0..per_star).filter(|_| simple(rng.gen::<u64>() & rest)).count();
                (good as u128, per_star as u128)
            }
            _ => {
                let free = rest.count_ones();
                if free > limit {
                    return Err(StarError::LimitExceeded { bits: free, limit });
                }
                if method == ProxyMethod::DecisionTreeDepth && live.count_ones() as usize > DT_MAX_VARS {
                    return Err(StarError::LimitExceeded {
                        bits: live.count_ones(),
                        limit: DT_MAX_VARS as u32,
                    });
                }
                let mut good = 0u128;
                let mut sub = 0u64;
                loop {
                    if simple(sub) {
                        good += 1;
                    }
                    sub = sub.wrapping_sub(rest) & rest;
                    if sub == 0 {
                        break;
                    }
                }
                (good, 1u128 << free)
            }
        };
        pairs += tried as u64;
        total += BigRational::new(good.into(), tried.into());
    }
    Ok(SwitchingReport {
        fraction_simplified: total / BigRational::from_integer(stars.support_size().into()),
        w_prime,
        method,
        pairs_examined: pairs,
    })
}

/// Minimum depth of a decision tree computing `F↾(fixed, values)` as a
/// function of the coordinates in `live`.
pub fn decision_tree_depth(cnf: &CompiledCnf, fixed: u64, values: u64, live: u64) -> usize {
    let vars: Vec<u32> = (0..64).filter(|&i| live >> i & 1 == 1).collect();
    let k = vars.len();
    assert!(k <= DT_MAX_VARS, "decision-tree depth is exhaustive in the live variables");
    let truth: Vec<bool> = (0..1u64 << k)
        .map(|x| {
            let y = vars
                .iter()
                .enumerate()
                .fold(values & fixed, |acc, (j, &v)| acc | (x >> j & 1) << v);
            cnf.eval(y)
        })
        .collect();
    // Subcubes in base 3: digit 0/1 fixes local variable j, digit 2 leaves it free.
    let pow3: Vec<usize> = (0..=k).map(|j| 3usize.pow(j as u32)).collect();
    let cubes = pow3[k];
    const MIXED: u8 = 2;
    let mut value = vec![0u8; cubes];
    let mut depth = vec![0u8; cubes];
    // Process cubes by increasing number of free digits so children come first.
    let mut order: Vec<usize> = (0..cubes).collect();
    let free_digits = |mut c: usize| {
        let mut f = 0;
        while c > 0 {
            f += (c % 3 == 2) as usize;
            c /= 3;
        }
        f
    };
    order.sort_by_key(|&c| free_digits(c));
    for c in order {
        let first_free = (0..k).find(|&j| c / pow3[j] % 3 == 2);
        match first_free {
            None => {
                let x = (0..k).fold(0usize, |acc, j| acc | (c / pow3[j] % 3) << j);
                value[c] = truth[x] as u8;
                depth[c] = 0;
            }
            Some(j0) => {
                let c0 = c - 2 * pow3[j0];
                let c1 = c0 + pow3[j0];
                value[c] = if value[c0] == value[c1] && value[c0] != MIXED {
                    value[c0]
                } else {
                    MIXED
                };
                if value[c] != MIXED {
                    depth[c] = 0;
                    continue;
                }
                depth[c] = (0..k)
                    .filter(|&j| c / pow3[j] % 3 == 2)
                    .map(|j| {
                        let a = c - 2 * pow3[j];
                        1 + depth[a].max(depth[a + pow3[j]])
                    })
                    .min()
                    .expect("cube has a free digit");
            }
        }
    }
    depth[cubes - 1] as usize
}

/// Sorted 1-based indices of a live set, the serialized form of star sets.
pub fn star_set_indices(live: u64) -> Vec<usize> {
    (0..64).filter(|&i| live >> i & 1 == 1).map(|i| i + 1).collect()
}

/// Distinct live sets in a conditioned support.
pub fn distinct_live_sets(stars: &ConditionedStarDistribution) -> HashSet<u64> {
    stars.iter().map(|(_, l)| l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prg::{kwise_distribution, uniform_distribution};
    use crate::rational::{int, ratio};

    const LIM: u32 = 24;

    #[test]
    fn dyadic_detection() {
        assert_eq!(dyadic_exponent(&int(1)), Some(0));
        assert_eq!(dyadic_exponent(&ratio(1, 8)), Some(3));
        assert_eq!(dyadic_exponent(&ratio(1, 3)), None);
        assert_eq!(dyadic_exponent(&ratio(3, 8)), None);
        assert!(matches!(
            star_distribution(4, &ratio(1, 3), StarFamily::Blockwise, LIM),
            Err(StarError::NonDyadic(_))
        ));
    }

    #[test]
    fn p_one_is_everything() {
        for fam in [StarFamily::Exhaustive, StarFamily::Blockwise, StarFamily::KwiseSelect { k: 2 }] {
            let d = star_distribution(5, &int(1), fam, LIM).unwrap();
            assert!((0..d.num_outcomes()).all(|s| d.live_set(s) == 0b11111));
        }
    }

    #[test]
    fn kwise_select_quarter_regular() {
        let d = star_distribution(8, &ratio(1, 4), StarFamily::KwiseSelect { k: 2 }, LIM).unwrap();
        assert!(d.live_fractions().iter().all(|f| *f == ratio(1, 4)));
    }

    #[test]
    fn exhaustive_seed_zero_is_all_live() {
        let d = star_distribution(6, &ratio(1, 2), StarFamily::Exhaustive, LIM).unwrap();
        assert_eq!(d.live_set(0), 0b111111);
        assert_eq!(d.live_set(0b111111), 0);
    }

    #[test]
    fn conditioning_keeps_large_sets() {
        let d = star_distribution(8, &ratio(1, 2), StarFamily::Exhaustive, LIM).unwrap();
        let c = condition_on_stars(d.clone()).unwrap();
        assert!(c.iter().all(|(_, l)| l.count_ones() >= 2));
        assert!(c.survival_fraction() >= ratio(1, 4));
        let all = star_distribution(4, &int(1), StarFamily::Exhaustive, LIM).unwrap();
        assert_eq!(condition_on_stars(all).unwrap().support_size(), 1);
    }

    #[test]
    fn gentle_with_full_stars_is_all_assignments() {
        let stars = condition_on_stars(star_distribution(3, &int(1), StarFamily::Blockwise, LIM).unwrap()).unwrap();
        let g = gentle_distribution(stars, uniform_distribution(3, LIM).unwrap()).unwrap();
        let mut outs: Vec<String> = g.iter().map(|c| g.restriction(&c).to_string()).collect();
        outs.sort();
        assert_eq!(outs, ["000", "001", "010", "011", "100", "101", "110", "111"]);
    }

    #[test]
    fn gentle_support_and_dimension() {
        let base = star_distribution(6, &ratio(1, 2), StarFamily::Blockwise, LIM).unwrap();
        let stars = condition_on_stars(base).unwrap();
        let fill = kwise_distribution(6, 2).unwrap();
        let g = gentle_distribution(stars.clone(), fill.clone()).unwrap();
        assert_eq!(g.iter().count() as u128, g.support_size());
        assert_eq!(g.support_size(), 2 * fill.num_outcomes() as u128);
        for c in g.iter() {
            assert!(2 * c.fixed.count_ones() as usize >= 6 / 2);
        }
        assert!(gentle_distribution(stars, kwise_distribution(5, 2).unwrap()).is_err());
    }

    #[test]
    fn proxy_trivial_when_already_narrow() {
        let g = CnfFormula::from_dimacs_clauses(6, &[&[1, 2, 3], &[-4, 5, 6]]).unwrap();
        let stars = condition_on_stars(star_distribution(6, &ratio(1, 2), StarFamily::Exhaustive, LIM).unwrap()).unwrap();
        let r = switching_proxy_report(&g, &stars, 3, ProxyMethod::SyntacticWidth, ProxySampling::Exact, LIM).unwrap();
        assert_eq!(r.fraction_simplified, int(1));
    }

    #[test]
    fn decision_tree_depths() {
        let and2 = CompiledCnf::new(&CnfFormula::from_dimacs_clauses(3, &[&[1], &[2]]).unwrap()).unwrap();
        assert_eq!(decision_tree_depth(&and2, 0, 0, 0b111), 2);
        let xor = CompiledCnf::new(&CnfFormula::from_dimacs_clauses(2, &[&[1, 2], &[-1, -2]]).unwrap()).unwrap();
        assert_eq!(decision_tree_depth(&xor, 0, 0, 0b11), 2);
        let taut = CompiledCnf::new(&CnfFormula::tautology(3)).unwrap();
        assert_eq!(decision_tree_depth(&taut, 0, 0, 0b111), 0);
        // x1 fixed true satisfies (x1 ∨ x2): constant
        let or = CompiledCnf::new(&CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap()).unwrap();
        assert_eq!(decision_tree_depth(&or, 0b01, 0b01, 0b10), 0);
        assert_eq!(decision_tree_depth(&or, 0b01, 0b00, 0b10), 1);
    }

    #[test]
    fn star_set_serialization() {
        assert_eq!(star_set_indices(0b1010), vec![2, 4]);
    }
}

//! Enumerable pseudorandom distributions over `{0,1}^n`.
//!
//! A distribution here is a deterministic generator from `r`-bit seeds to
//! `n`-bit outputs; its support is the multiset of all `2^r` outputs. Outputs
//! are `u64` masks (bit `i` is variable `i`), so `n ≤ 64`.

use std::io::{self, Write};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cnf::{Assignment, CnfFormula};
use crate::compiled::{universe, CompiledCnf};
use crate::counting::{bias_partial, CostCounter, CountError, CountMethod};
use crate::field::BinaryField;
use crate::rational::{dyadic, Rational};

/// Largest seed length any distribution may be built with.
pub const MAX_SEED_BITS: u32 = 40;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrgError {
    #[error("n = {n} exceeds the exhaustive limit of {limit}")]
    LimitExceeded { n: usize, limit: u32 },
    #[error("independence k = {k} must lie in 1..={n}")]
    BadIndependence { k: usize, n: usize },
    #[error("bias must be positive")]
    BadBias,
    #[error("outputs of length {0} are not supported (1..=64)")]
    BadLength(usize),
    #[error("construction needs a field of degree {0}, beyond the supported range")]
    FieldTooLarge(u32),
    #[error("explicit support must be non-empty with a power-of-two size")]
    BadSupport,
    #[error("formula has {formula} variables but the distribution has {dist}")]
    DimensionMismatch { formula: usize, dist: usize },
    #[error(transparent)]
    Count(#[from] CountError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Generator {
    Uniform,
    /// Bit `i` is the low bit of `f(α_i)` for a degree-(k−1) polynomial `f`
    /// read off the seed.
    KWise { field: BinaryField, k: usize },
    /// Seed `(α, β)`, bit `i` is `⟨α^i, β⟩`.
    Powering { field: BinaryField },
    Explicit(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerableDistribution {
    n: usize,
    seed_bits: u32,
    gen: Generator,
}

impl EnumerableDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed_bits(&self) -> u32 {
        self.seed_bits
    }

    pub fn num_outcomes(&self) -> u64 {
        1u64 << self.seed_bits
    }

    pub fn kind(&self) -> &'static str {
        match self.gen {
            Generator::Uniform => "uniform",
            Generator::KWise { .. } => "kwise",
            Generator::Powering { .. } => "smallbias",
            Generator::Explicit(_) => "explicit",
        }
    }

    /// Output for `seed` (taken modulo `2^r`).
    pub fn output(&self, seed: u64) -> u64 {
        let seed = seed & universe(self.seed_bits as usize);
        match &self.gen {
            Generator::Uniform => seed,
            Generator::KWise { field, k } => {
                let m = field.degree();
                let coeffs: Vec<u32> = (0..*k)
                    .map(|j| ((seed >> (j as u32 * m)) as u32) & field.mask())
                    .collect();
                (0..self.n).fold(0u64, |acc, i| {
                    acc | ((field.eval_poly(&coeffs, i as u32) & 1) as u64) << i
                })
            }
            Generator::Powering { field } => {
                let m = field.degree();
                let alpha = (seed as u32) & field.mask();
                let beta = ((seed >> m) as u32) & field.mask();
                let mut power = 1u32;
                let mut out = 0u64;
                for i in 0..self.n {
                    out |= ((power & beta).count_ones() as u64 & 1) << i;
                    power = field.mul(power, alpha);
                }
                out
            }
            Generator::Explicit(table) => table[seed as usize],
        }
    }

    pub fn assignment(&self, seed: u64) -> Assignment {
        Assignment::from_mask(self.n, self.output(seed))
    }

    /// All outputs in seed order.
    pub fn outputs(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.num_outcomes()).map(move |s| self.output(s))
    }

    /// `E_{y←D}[F(y)]`, exactly.
    pub fn expectation(&self, cnf: &CompiledCnf) -> Rational {
        let hits = self.outputs().filter(|&y| cnf.eval(y)).count();
        dyadic(hits as u128, self.seed_bits as usize)
    }

    /// One bit string per line, seed order.
    pub fn write_support<W: Write>(&self, mut w: W) -> io::Result<()> {
        for y in self.outputs() {
            writeln!(w, "{}", Assignment::from_mask(self.n, y))?;
        }
        Ok(())
    }

    /// Counts of each pattern of the projection onto `coords`; index bit `j`
    /// is coordinate `coords[j]`.
    pub fn marginal_counts(&self, coords: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; 1 << coords.len()];
        for y in self.outputs() {
            let idx = coords
                .iter()
                .enumerate()
                .fold(0usize, |a, (j, &c)| a | ((y >> c & 1) as usize) << j);
            counts[idx] += 1;
        }
        counts
    }

    /// `max_{S≠∅} |E_D[(−1)^{⊕_{i∈S} y_i}]|` and an argmax `S` (as a mask),
    /// by a Walsh–Hadamard transform of the output histogram.
    pub fn max_fourier_bias(&self, limit: u32) -> Result<(Rational, u64), PrgError> {
        if self.n > limit as usize {
            return Err(PrgError::LimitExceeded { n: self.n, limit });
        }
        let size = 1usize << self.n;
        let mut h = vec![0i64; size];
        for y in self.outputs() {
            h[y as usize] += 1;
        }
        let mut len = 1;
        while len < size {
            for start in (0..size).step_by(2 * len) {
                for i in start..start + len {
                    let (a, b) = (h[i], h[i + len]);
                    h[i] = a + b;
                    h[i + len] = a - b;
                }
            }
            len *= 2;
        }
        let (best_s, best) = h
            .iter()
            .enumerate()
            .skip(1)
            .map(|(s, v)| (s, v.unsigned_abs()))
            .fold((0usize, 0u64), |acc, (s, v)| if v > acc.1 { (s, v) } else { acc });
        Ok((dyadic(best as u128, self.seed_bits as usize), best_s as u64))
    }
}

fn check_len(n: usize) -> Result<(), PrgError> {
    if (1..=64).contains(&n) {
        Ok(())
    } else {
        Err(PrgError::BadLength(n))
    }
}

/// Identity on `n`-bit seeds.
pub fn uniform_distribution(n: usize, limit: u32) -> Result<EnumerableDistribution, PrgError> {
    check_len(n)?;
    if n > limit as usize {
        return Err(PrgError::LimitExceeded { n, limit });
    }
    Ok(EnumerableDistribution {
        n,
        seed_bits: n as u32,
        gen: Generator::Uniform,
    })
}

/// Exactly `k`-wise uniform bits from degree-(k−1) polynomials over the
/// smallest binary field with at least `n` elements; `r = k·m`.
pub fn kwise_distribution(n: usize, k: usize) -> Result<EnumerableDistribution, PrgError> {
    check_len(n)?;
    let field = BinaryField::with_at_least(n as u64)
        .ok_or(PrgError::FieldTooLarge(64 - (n as u64).leading_zeros()))?;
    kwise_over(n, k, field)
}

pub(crate) fn kwise_over(
    n: usize,
    k: usize,
    field: BinaryField,
) -> Result<EnumerableDistribution, PrgError> {
    if k == 0 || k > n {
        return Err(PrgError::BadIndependence { k, n });
    }
    let seed_bits = k as u32 * field.degree();
    if seed_bits > MAX_SEED_BITS {
        return Err(PrgError::FieldTooLarge(field.degree()));
    }
    Ok(EnumerableDistribution {
        n,
        seed_bits,
        gen: Generator::KWise { field, k },
    })
}

/// The powering construction: bias at most `(n−1)/2^m ≤ δ`, `r = 2m`.
pub fn smallbias_distribution(n: usize, delta: &Rational) -> Result<EnumerableDistribution, PrgError> {
    check_len(n)?;
    if !delta.is_positive() {
        return Err(PrgError::BadBias);
    }
    // smallest m ≥ 1 with 2^m·δ ≥ n − 1
    let target = Rational::from_integer((n as i64 - 1).into());
    let mut m = 1u32;
    while Rational::from_integer(num_bigint::BigInt::from(1u64) << m) * delta < target {
        m += 1;
        if m > crate::field::MAX_DEGREE {
            return Err(PrgError::FieldTooLarge(m));
        }
    }
    let field = BinaryField::new(m).ok_or(PrgError::FieldTooLarge(m))?;
    Ok(EnumerableDistribution {
        n,
        seed_bits: 2 * m,
        gen: Generator::Powering { field },
    })
}

/// Uniform over the given outputs; the table size must be a power of two.
pub fn explicit_distribution(n: usize, outputs: Vec<u64>) -> Result<EnumerableDistribution, PrgError> {
    check_len(n)?;
    if outputs.is_empty() || !outputs.len().is_power_of_two() {
        return Err(PrgError::BadSupport);
    }
    let seed_bits = outputs.len().trailing_zeros();
    let u = universe(n);
    Ok(EnumerableDistribution {
        n,
        seed_bits,
        gen: Generator::Explicit(outputs.into_iter().map(|y| y & u).collect()),
    })
}

pub fn point_mass(x: &Assignment) -> Result<EnumerableDistribution, PrgError> {
    explicit_distribution(x.len(), vec![x.to_mask().ok_or(PrgError::BadLength(x.len()))?])
}

/// Outcome of [`measure_fooling_error`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoolingReport {
    pub measured_error: Rational,
    /// Index into the corpus of a formula attaining the error.
    pub worst_case_formula: Option<usize>,
    pub width_bound: usize,
    pub corpus_size: usize,
}

/// `max_F |E_D[F] − E_U[F]|` over the corpus, both sides exact.
pub fn measure_fooling_error(
    d: &EnumerableDistribution,
    corpus: &[CnfFormula],
    limit: u32,
) -> Result<FoolingReport, PrgError> {
    if d.n() > limit as usize {
        return Err(PrgError::LimitExceeded { n: d.n(), limit });
    }
    let mut worst = Rational::zero();
    let mut worst_idx = None;
    for (i, f) in corpus.iter().enumerate() {
        if f.num_vars() != d.n() {
            return Err(PrgError::DimensionMismatch {
                formula: f.num_vars(),
                dist: d.n(),
            });
        }
        let cnf = CompiledCnf::new(f).expect("n ≤ 64 checked");
        let eu = bias_partial(&cnf, 0, 0, CountMethod::Auto, limit, &mut CostCounter::default())?;
        let ed = d.expectation(&cnf);
        let err = (ed - eu).abs();
        if worst_idx.is_none() || err > worst {
            worst = err;
            worst_idx = Some(i);
        }
    }
    Ok(FoolingReport {
        measured_error: worst,
        worst_case_formula: worst_idx,
        width_bound: corpus.iter().map(CnfFormula::width).max().unwrap_or(0),
        corpus_size: corpus.len(),
    })
}

//! Parameter calculus for the stage-wise search.
//!
//! Logarithms are base 2 except where a formula calls for `ln` (the stage
//! budget `T` and the `192 ln M` term of `w′`). Real-valued intermediate
//! quantities are evaluated in `f64` and then frozen as exact rationals, so
//! every identity downstream (`τ·T = ε/2`, the budget sum) is checked
//! exactly.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{from_f64, int, serde_str, to_f64, Rational};
use crate::stars::dyadic_exponent;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("need 1 ≤ n ≤ M (pad first); got n = {n}, M = {m}")]
    Padding { n: usize, m: usize },
    #[error("ε must lie in (0, 1]; got {0}")]
    Epsilon(String),
    #[error("C must be positive")]
    Constant,
    #[error("{0} is out of range")]
    Domain(&'static str),
    #[error("δ_PRG + δ_sand + δ_SL + 2δ_count = {sum} exceeds τ = {tau}")]
    Budget { sum: String, tau: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Paper,
    #[default]
    Practical,
}

/// User choices for practical mode. Unset budgets default to 0, `p` to
/// 1/2, `w′` to the trim width and `η` to 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub p: Option<Rational>,
    pub w_prime: Option<f64>,
    pub eta: Option<Rational>,
    pub delta_sand: Option<Rational>,
    pub delta_prg: Option<Rational>,
    pub delta_count: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    #[serde(rename = "M")]
    pub m: usize,
    pub n: usize,
    #[serde(with = "serde_str")]
    pub eps: Rational,
    /// `log2(2M/ε)`.
    pub w: f64,
    /// `⌈w⌉`, the width formulas are trimmed to.
    pub w_trim: usize,
    pub w_prime: f64,
    #[serde(with = "serde_str")]
    pub p: Rational,
    #[serde(with = "serde_str")]
    pub eta: Rational,
    #[serde(with = "serde_str")]
    pub delta_sand: Rational,
    #[serde(rename = "delta_PRG", with = "serde_str")]
    pub delta_prg: Rational,
    #[serde(with = "serde_str")]
    pub delta_count: Rational,
    #[serde(rename = "delta_SL", with = "serde_str")]
    pub delta_sl: Rational,
    #[serde(with = "serde_str")]
    pub tau: Rational,
    #[serde(rename = "T", with = "biguint_str")]
    pub t: BigUint,
    #[serde(rename = "C")]
    pub c: f64,
    /// Cost-model seed lengths (log2 of the enumeration size).
    #[serde(rename = "r_SL", with = "extended_f64")]
    pub r_sl: f64,
    #[serde(rename = "r_PRG", with = "extended_f64")]
    pub r_prg: f64,
    pub mode: Mode,
}

mod biguint_str {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Finite values as JSON numbers, infinities as `"inf"` / `"-inf"`.
mod extended_f64 {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Str(s) => Err(D::Error::custom(format!("not a number: {s}"))),
        }
    }
}

/// `log2` of a positive rational, accurate far below `f64` underflow.
pub fn log2_rational(r: &Rational) -> f64 {
    if !r.is_positive() {
        return f64::NEG_INFINITY;
    }
    log2_big(r.numer()) - log2_big(r.denom())
}

fn log2_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits").log2();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().expect("fits").log2() + shift as f64
}

fn rat(x: f64, what: &'static str) -> Result<Rational, ParamsError> {
    from_f64(x).ok_or(ParamsError::Domain(what))
}

/// `T = max(1, ⌈(2 ln n)/p⌉)`.
pub fn stage_budget(n: usize, p: &Rational) -> BigUint {
    if n <= 1 {
        return BigUint::one();
    }
    let log2_t = (2.0 * (n as f64).ln()).log2() - log2_rational(p);
    let t = if log2_t < 1000.0 {
        let v = 2.0 * (n as f64).ln() / to_f64(p);
        from_f64(v.ceil()).expect("finite").to_integer()
    } else {
        // p below f64 range: scale exactly
        let ln = from_f64(2.0 * (n as f64).ln()).expect("finite");
        (ln / p).ceil().to_integer()
    };
    t.to_biguint().unwrap_or_default().max(BigUint::one())
}

/// Stage budget `T` and per-stage budget `τ = ε/(2T)`.
pub fn stage_budgets(n: usize, eps: &Rational, p: &Rational) -> (BigUint, Rational) {
    let t = stage_budget(n, p);
    let tau = eps / (int(2) * Rational::from_integer(BigInt::from(t.clone())));
    (t, tau)
}

/// `⌈log2(2M/ε)⌉`, computed exactly.
pub fn trim_width(m: usize, eps: &Rational) -> usize {
    let x = Rational::from_integer((2 * m.max(1)).into()) / eps;
    let mut k = 0usize;
    let mut pow = Rational::one();
    while pow < x {
        pow *= int(2);
        k += 1;
    }
    k.max(1)
}

fn check_domain(m: usize, n: usize, eps: &Rational, c: f64) -> Result<(), ParamsError> {
    if n == 0 || n > m {
        return Err(ParamsError::Padding { n, m });
    }
    if !eps.is_positive() || eps > &Rational::one() {
        return Err(ParamsError::Epsilon(eps.to_string()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(ParamsError::Constant);
    }
    Ok(())
}

pub fn compute_parameters(
    m: usize,
    n: usize,
    eps: &Rational,
    c: f64,
    mode: Mode,
    overrides: &Overrides,
) -> Result<ParameterSet, ParamsError> {
    check_domain(m, n, eps, c)?;
    let eps_f = to_f64(eps);
    let w = (2.0 * m as f64 / eps_f).log2();
    let w_trim = trim_width(m, eps);
    let mut ps = match mode {
        Mode::Paper => {
            let logm = (m as f64).log2();
            let inner = (logm / eps_f).log2();
            let base = w * inner;
            if base.is_nan() || base <= 1.0 {
                return Err(ParamsError::Domain("w·log((log M)/ε)"));
            }
            let eta_f = 1.0 / base;
            let p_f = eta_f.powf(2.0 * c * w.log2());
            let w_prime = 16.0 * c * w.log2() + 4.0 * (192.0 * (m as f64).ln() / eps_f).log2();
            let p = rat(p_f, "p")?;
            let eta = rat(eta_f, "η")?;
            let (t, tau) = stage_budgets(n, eps, &p);
            let delta_count = &tau / int(3);
            let delta_prg = &tau / int(6);
            let delta_sand = &p * &tau / int(48);
            let switching = rat(eta_f.powf(w_prime / 4.0), "η^{w′/4}")?;
            let delta_sl = int(2) * (&delta_sand + switching) / &p;
            ParameterSet {
                m,
                n,
                eps: eps.clone(),
                w,
                w_trim,
                w_prime,
                p,
                eta,
                delta_sand,
                delta_prg,
                delta_count,
                delta_sl,
                tau,
                t,
                c,
                r_sl: 0.0,
                r_prg: 0.0,
                mode,
            }
        }
        Mode::Practical => {
            let p = overrides.p.clone().unwrap_or_else(|| Rational::new(1.into(), 2.into()));
            if dyadic_exponent(&p).is_none() {
                return Err(ParamsError::Domain("p (must be 2^-a)"));
            }
            let w_prime = overrides.w_prime.unwrap_or(w_trim as f64);
            if w_prime.is_nan() || w_prime < 0.0 {
                return Err(ParamsError::Domain("w′"));
            }
            let eta = overrides.eta.clone().unwrap_or_else(Rational::zero);
            let zero = Rational::zero();
            let get = |o: &Option<Rational>| o.clone().unwrap_or_else(Rational::zero);
            let (delta_sand, delta_prg, delta_count) = (
                get(&overrides.delta_sand),
                get(&overrides.delta_prg),
                get(&overrides.delta_count),
            );
            if [&eta, &delta_sand, &delta_prg, &delta_count].iter().any(|d| **d < zero) || eta > Rational::one() {
                return Err(ParamsError::Domain("budgets and η"));
            }
            let switching = if eta.is_zero() {
                Rational::zero()
            } else {
                rat(to_f64(&eta).powf(w_prime / 4.0), "η^{w′/4}")?
            };
            let delta_sl = int(2) * (&delta_sand + switching) / &p;
            let (t, tau) = stage_budgets(n, eps, &p);
            let ps = ParameterSet {
                m,
                n,
                eps: eps.clone(),
                w,
                w_trim,
                w_prime,
                p,
                eta,
                delta_sand,
                delta_prg,
                delta_count,
                delta_sl,
                tau,
                t,
                c,
                r_sl: 0.0,
                r_prg: 0.0,
                mode,
            };
            let sum = ps.budget_sum();
            if sum > ps.tau {
                return Err(ParamsError::Budget {
                    sum: sum.to_string(),
                    tau: ps.tau.to_string(),
                });
            }
            ps
        }
    };
    let cost = cost_model(&ps, &CostConstants::default());
    ps.r_sl = cost.r_sl;
    ps.r_prg = cost.r_prg;
    Ok(ps)
}

impl ParameterSet {
    /// `δ_PRG + δ_sand + δ_SL + 2δ_count`.
    pub fn budget_sum(&self) -> Rational {
        &self.delta_prg + &self.delta_sand + &self.delta_sl + int(2) * &self.delta_count
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Margin {
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropositionReport {
    /// `p ≤ η/(w·log(1/δ_sand))^{C log w}`, compared in log2.
    pub ineq1: bool,
    /// `δ_PRG + δ_sand + δ_SL + 2δ_count ≤ τ`, exact.
    pub ineq2: bool,
    /// `η^{w′/4} ≤ εp²/(192 ln n)`, compared in log2.
    pub switching_term: bool,
    pub ineq1_log2: Margin,
    pub ineq2_margin: Margin,
    pub switching_log2: Margin,
}

pub fn verify_proposition(ps: &ParameterSet) -> PropositionReport {
    let log_w = ps.w.log2();
    let log_p = log2_rational(&ps.p);
    let log_eta = log2_rational(&ps.eta);
    let log_inv_sand = -log2_rational(&ps.delta_sand);
    let rhs1 = log_eta - ps.c * log_w * (ps.w * log_inv_sand).log2();
    let sum = ps.budget_sum();
    let sw_lhs = log_eta * ps.w_prime / 4.0;
    let sw_rhs = log2_rational(&ps.eps) + 2.0 * log_p - (192.0 * (ps.n as f64).ln()).log2();
    PropositionReport {
        ineq1: log_p <= rhs1,
        ineq2: sum <= ps.tau,
        switching_term: sw_lhs <= sw_rhs,
        ineq1_log2: Margin { lhs: log_p, rhs: rhs1 },
        ineq2_margin: Margin {
            lhs: to_f64(&sum),
            rhs: to_f64(&ps.tau),
        },
        switching_log2: Margin { lhs: sw_lhs, rhs: sw_rhs },
    }
}

/// Hidden constants of the big-O cost formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostConstants {
    pub k_sl: f64,
    pub k_prg: f64,
    pub k_count: f64,
}

impl Default for CostConstants {
    fn default() -> Self {
        CostConstants {
            k_sl: 1.0,
            k_prg: 1.0,
            k_count: 1.0,
        }
    }
}

/// All sizes in log2; `+inf` marks a term that overflows or is unbounded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub r_sl: f64,
    pub r_prg: f64,
    pub log2_t_count: f64,
    pub log2_stages: f64,
    /// `log2(2^{r_SL + r_PRG} · T_count · T)`.
    pub log2_total: f64,
    pub total: f64,
}

fn nonneg_log2(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        x.log2()
    }
}

pub fn cost_model(ps: &ParameterSet, k: &CostConstants) -> CostReport {
    let w = ps.w;
    let wp = ps.w_prime;
    let n = ps.n as f64;
    let log_w = nonneg_log2(w);
    let log_n = nonneg_log2(n);
    let inv = |r: &Rational| -log2_rational(r);
    let log_inv_eta = inv(&ps.eta);
    let log_inv_sand = inv(&ps.delta_sand);
    let log_inv_prg = inv(&ps.delta_prg);
    let log_inv_count = inv(&ps.delta_count);

    let r_sl = k.k_sl
        * (log_w * (log_n + wp * nonneg_log2(log_w) + wp * log_inv_eta).max(0.0)
            + w * nonneg_log2(w * log_inv_sand.max(1.0)));
    let r_prg = k.k_prg
        * (wp * wp * nonneg_log2(wp * log_inv_prg.max(1.0)).powi(2)
            + wp * nonneg_log2(wp) * log_inv_prg.max(0.0)
            + nonneg_log2(log_n));
    let log_w_over = nonneg_log2(w) + log_inv_count.max(0.0);
    let log2_t_count = (ps.m as f64).log2()
        + k.k_count
            * (log_w_over * log_n
                + w * nonneg_log2(log_n)
                + w * log_w_over * nonneg_log2(log_w_over).powi(2));
    let log2_stages = log2_big(&BigInt::from(ps.t.clone()));
    let log2_total = r_sl + r_prg + log2_t_count + log2_stages;
    let clean = |x: f64| if x.is_nan() { f64::INFINITY } else { x };
    let log2_total = clean(log2_total);
    CostReport {
        r_sl: clean(r_sl),
        r_prg: clean(r_prg),
        log2_t_count: clean(log2_t_count),
        log2_stages,
        total: if log2_total < 1024.0 { log2_total.exp2() } else { f64::INFINITY },
        log2_total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn trim_width_examples() {
        assert_eq!(trim_width(1024, &ratio(1, 8)), 14);
        assert_eq!(trim_width(5, &int(1)), 4);
        assert_eq!(trim_width(4, &int(1)), 3);
    }

    #[test]
    fn paper_mode_identities() {
        let ps = compute_parameters(1024, 1024, &ratio(1, 8), 1.0, Mode::Paper, &Overrides::default()).unwrap();
        assert_eq!(ps.w, 14.0);
        assert_eq!(&ps.tau * Rational::from_integer(BigInt::from(ps.t.clone())), ratio(1, 16));
        assert_eq!(&ps.delta_prg + int(2) * &ps.delta_count, &ps.tau * ratio(5, 6));
        assert!(ps.p > Rational::zero() && ps.p < ratio(1, 1_000_000));
    }

    #[test]
    fn stage_budget_edges() {
        assert_eq!(stage_budget(1, &ratio(1, 2)), BigUint::one());
        // 4 ln 16 = 11.09
        assert_eq!(stage_budget(16, &ratio(1, 2)), BigUint::from(12u32));
    }

    #[test]
    fn practical_budget_constraint() {
        let mut o = Overrides::default();
        let ps = compute_parameters(16, 16, &ratio(1, 4), 1.0, Mode::Practical, &o).unwrap();
        assert_eq!(ps.budget_sum(), Rational::zero());
        o.delta_count = Some(ratio(1, 2));
        assert!(matches!(
            compute_parameters(16, 16, &ratio(1, 4), 1.0, Mode::Practical, &o),
            Err(ParamsError::Budget { .. })
        ));
        o.delta_count = None;
        o.p = Some(ratio(1, 3));
        assert!(compute_parameters(16, 16, &ratio(1, 4), 1.0, Mode::Practical, &o).is_err());
    }

    #[test]
    fn domain_errors() {
        let o = Overrides::default();
        assert!(matches!(
            compute_parameters(3, 4, &int(1), 1.0, Mode::Paper, &o),
            Err(ParamsError::Padding { .. })
        ));
        assert!(compute_parameters(8, 4, &int(0), 1.0, Mode::Paper, &o).is_err());
        assert!(compute_parameters(8, 4, &ratio(1, 2), 0.0, Mode::Paper, &o).is_err());
    }

    #[test]
    fn json_round_trip() {
        let ps = compute_parameters(1 << 14, 1 << 14, &ratio(1, 8), 1.0, Mode::Paper, &Overrides::default()).unwrap();
        let back = ParameterSet::from_json(&ps.to_json()).unwrap();
        assert_eq!(back, ps);
        let v: serde_json::Value = serde_json::from_str(&ps.to_json()).unwrap();
        for key in ["M", "n", "eps", "w", "w_prime", "p", "eta", "delta_sand", "delta_PRG", "delta_count", "delta_SL", "tau", "T", "C", "r_SL", "r_PRG", "mode"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}

//! Closed-form success probabilities of one iteration of Shor's algorithm,
//! evaluated exactly from the prime factorization of `N`.
//!
//! Write `N = 2^k0 * p_1^k_1 * ... * p_l^k_l` and `p_i - 1 = 2^s_i * m_i` with
//! `m_i` odd. A base `a` is drawn uniformly from `{0, ..., N-1}` and the
//! iteration succeeds when
//!
//! 1. `gcd(a, N) = 1`,
//! 2. the order `r` of `a` modulo `N` is even, and
//! 3. `a^(r/2) != -1 (mod N)`.
//!
//! Each step gets its own conditional probability; the overall probability
//! is their product. The formulas depend only on `k0`, `l`, the `s_i`, `m_i`
//! and `p_i`; nothing here enumerates residues.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numtheory::{euler_phi, Factorization};
use crate::rational::Rational;

/// The integer building blocks shared by the step formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormTerms {
    /// `sum s_i`.
    pub sum_s: u64,
    /// `2^(sum s_i)`.
    pub two_pow_sum: BigUint,
    /// `min s_i`; `None` when `l = 0`.
    pub s_min: Option<u64>,
    pub l: usize,
    /// `(2^(l * s_min) - 1) / (2^l - 1)`; `None` when `l = 0`.
    pub t: Option<BigUint>,
    pub m_product: BigUint,
    pub p_product: BigUint,
    /// `prod m_i * p_i^(k_i - 1)`.
    pub mprime_product: BigUint,
}

impl ClosedFormTerms {
    pub fn new(f: &Factorization) -> Self {
        let odd = f.odd_factors();
        let l = odd.len();
        let sum_s: u64 = odd.iter().map(|o| o.s()).sum();
        let s_min = odd.iter().map(|o| o.s()).min();
        let t = s_min.map(|s| {
            let ratio_exp = l as u64;
            let num = (BigUint::one() << (ratio_exp * s)) - 1u32;
            let den = (BigUint::one() << ratio_exp) - 1u32;
            debug_assert!((&num % &den).is_zero());
            num / den
        });
        ClosedFormTerms {
            sum_s,
            two_pow_sum: BigUint::one() << sum_s,
            s_min,
            l,
            t,
            m_product: odd.iter().map(|o| o.m().clone()).product(),
            p_product: odd.iter().map(|o| o.p().clone()).product(),
            mprime_product: odd.iter().map(|o| o.m_prime().clone()).product(),
        }
    }
}

/// Per-step and overall probabilities, all exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepProbabilities {
    /// `P(gcd(a, N) = 1)`.
    pub p_coprime: Rational,
    /// `P(order even | a coprime)`.
    pub p_even_given_coprime: Rational,
    /// `P(a^(r/2) != -1 | a coprime, order even)`.
    pub p_good_given_even: Rational,
    pub p_overall: Rational,
}

/// Deterministic failure modes. Exactly one applies to each `N >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FailureClass {
    /// `N = 2`: the only unit is 1, of odd order.
    StepTwoFails,
    /// `N = 4`: the only even-order unit is `3 = -1`.
    StepThreeFailsFour,
    /// `N = p^k`, `p` odd: every even-order half-power is `-1`.
    StepThreeFailsPrimePower { p: BigUint, k: u32 },
    /// `N = 2 p^k`, `p` odd.
    StepThreeFailsTwicePrimePower { p: BigUint, k: u32 },
    CanSucceed,
}

impl FailureClass {
    /// Stable string tag used in JSON and CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            FailureClass::StepTwoFails => "StepTwoFails",
            FailureClass::StepThreeFailsFour => "StepThreeFails_Four",
            FailureClass::StepThreeFailsPrimePower { .. } => "StepThreeFails_PrimePower",
            FailureClass::StepThreeFailsTwicePrimePower { .. } => {
                "StepThreeFails_TwicePrimePower"
            }
            FailureClass::CanSucceed => "CanSucceed",
        }
    }

    /// `(p, k)` for the prime-power classes.
    pub fn witness(&self) -> Option<(&BigUint, u32)> {
        match self {
            FailureClass::StepThreeFailsPrimePower { p, k }
            | FailureClass::StepThreeFailsTwicePrimePower { p, k } => Some((p, *k)),
            _ => None,
        }
    }

    pub fn can_succeed(&self) -> bool {
        matches!(self, FailureClass::CanSucceed)
    }
}

impl fmt::Display for FailureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.witness() {
            Some((p, k)) => write!(f, "{}({p}^{k})", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}

/// `phi(N) / N = prod (p - 1) / p`.
pub fn step1_probability(f: &Factorization) -> Rational {
    Rational::new(euler_phi(f), f.n().clone()).expect("N >= 2")
}

/// Exponent `E` in `P(even | coprime) = 1 - 2^-E`.
fn step2_exponent(f: &Factorization, terms: &ClosedFormTerms) -> u64 {
    f.k0().saturating_sub(1) as u64 + terms.sum_s
}

/// `1 - 2^-(max(k0 - 1, 0) + sum s_i)`. This single expression covers odd
/// `N`, `N = 2 * odd` and `4 | N`.
pub fn step2_probability(f: &Factorization) -> Rational {
    let terms = ClosedFormTerms::new(f);
    step2_from_terms(f, &terms)
}

fn step2_from_terms(f: &Factorization, terms: &ClosedFormTerms) -> Rational {
    let denom = BigUint::one() << step2_exponent(f, terms);
    Rational::new(&denom - 1u32, denom).expect("positive denominator")
}

/// Probability that an even-order unit has `a^(r/2) != -1`.
///
/// * `k0 >= 2`: `(X - 2) / (X - 1)` with `X = 2^(k0-1) * 2^(sum s_i)`.
/// * `k0 <= 1`, `l >= 1`: `(2^(sum s_i) - T - 1) / (2^(sum s_i) - 1)`.
/// * `N = 2`: no unit has even order; returns 0.
pub fn step3_probability(f: &Factorization) -> Rational {
    step3_from_terms(f, &ClosedFormTerms::new(f))
}

fn step3_from_terms(f: &Factorization, terms: &ClosedFormTerms) -> Rational {
    if f.k0() >= 2 {
        let x = &terms.two_pow_sum << (f.k0() - 1);
        return Rational::new(&x - 2u32, &x - 1u32).expect("X >= 2");
    }
    match &terms.t {
        Some(t) => {
            let y = &terms.two_pow_sum;
            Rational::new(y - t - 1u32, y - 1u32).expect("sum s_i >= 1")
        }
        None => Rational::zero(),
    }
}

/// All three step probabilities and their exact product.
pub fn overall_probability(f: &Factorization) -> StepProbabilities {
    let terms = ClosedFormTerms::new(f);
    let p_coprime = step1_probability(f);
    let p_even_given_coprime = step2_from_terms(f, &terms);
    let p_good_given_even = step3_from_terms(f, &terms);
    let p_overall = &(&p_coprime * &p_even_given_coprime) * &p_good_given_even;
    StepProbabilities { p_coprime, p_even_given_coprime, p_good_given_even, p_overall }
}

/// The two overall-probability closed forms exactly as they are usually
/// printed:
///
/// * `k0 >= 2`: `prod m_i / (2 prod p_i) * (2^(k0-1) 2^(sum s_i) - 2) / 2^(k0-1)`
/// * `k0 <= 1`, `l >= 1`: `prod m_i / prod p_i * (2^(sum s_i) - T - 1)`
///
/// The second form carries the odd-`N` coprimality ratio, so for
/// `N = 2 (mod 4)` it is exactly twice [`overall_probability`]. `N = 2` has
/// no printed form and is rejected.
pub fn printed_overall_probability(f: &Factorization) -> Result<Rational> {
    let terms = ClosedFormTerms::new(f);
    if f.k0() >= 2 {
        let x = &terms.two_pow_sum << (f.k0() - 1);
        let num = &terms.m_product * (x - 2u32);
        let den = (&terms.p_product << 1u32) << (f.k0() - 1);
        return Rational::new(num, den);
    }
    match &terms.t {
        Some(t) => {
            let num = &terms.m_product * (&terms.two_pow_sum - t - 1u32);
            Rational::new(num, terms.p_product.clone())
        }
        None => Err(Error::UnsupportedCase(format!(
            "no printed overall formula for N = {}",
            f.n()
        ))),
    }
}

/// Classifies `N` by shape alone.
pub fn classify_failure(f: &Factorization) -> FailureClass {
    match (f.k0(), f.odd_factors()) {
        (1, []) => FailureClass::StepTwoFails,
        (2, []) => FailureClass::StepThreeFailsFour,
        (0, [only]) => FailureClass::StepThreeFailsPrimePower { p: only.p().clone(), k: only.k() },
        (1, [only]) => {
            FailureClass::StepThreeFailsTwicePrimePower { p: only.p().clone(), k: only.k() }
        }
        _ => FailureClass::CanSucceed,
    }
}

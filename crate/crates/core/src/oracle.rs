//! Brute-force census of `Z/NZ`: every residue `a` in `{0, ..., N-1}` gets
//! its gcd with `N`, its exact order, and the half-power test. The counts
//! are the ground truth the closed forms are checked against, so nothing in
//! this module looks at the group structure of `(Z/NZ)*`.

use std::ops::{Add, AddAssign, Range};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::StepProbabilities;
use crate::error::{Error, Result};
use crate::numtheory::{gcd_u64, mod_pow_u64, Factorization, OrderFinder};
use crate::rational::Rational;

pub const DEFAULT_CENSUS_LIMIT: u64 = 1_000_000;

/// Environment variable that overrides [`DEFAULT_CENSUS_LIMIT`].
pub const CENSUS_LIMIT_ENV: &str = "SHOR_CENSUS_LIMIT";

/// Residues handled per parallel work item.
const CHUNK: u64 = 1 << 13;

/// Reads [`CENSUS_LIMIT_ENV`], falling back to the default when unset or
/// unparsable.
pub fn census_limit_from_env() -> u64 {
    std::env::var(CENSUS_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CENSUS_LIMIT)
}

/// Everything the census knows about one residue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub a: u64,
    pub gcd_with_n: u64,
    /// `None` iff `a` is not a unit.
    pub order: Option<u64>,
    pub order_is_even: bool,
    /// `a^(order/2) mod N`, present iff the order is even.
    pub half_power: Option<u64>,
    pub is_minus_one: bool,
    pub success: bool,
    /// Nontrivial divisors among `gcd(a^(r/2) - 1, N)` and
    /// `gcd(a^(r/2) + 1, N)`, ascending.
    pub factors_found: Vec<u64>,
}

/// Exact counts over all `N` residues.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OracleCensus {
    pub n: u64,
    pub total: u64,
    pub coprime_count: u64,
    pub even_order_count: u64,
    /// Even-order units with `a^(r/2) = -1`.
    pub minus_one_count: u64,
    pub success_count: u64,
    pub odd_order_count: u64,
    /// Residues with `1 < gcd(a, N) < N`, where the gcd alone factors `N`.
    pub gcd_shortcut_count: u64,
}

impl AddAssign for OracleCensus {
    fn add_assign(&mut self, rhs: Self) {
        debug_assert!(self.n == rhs.n || self.total == 0 || rhs.total == 0);
        self.n = self.n.max(rhs.n);
        self.total += rhs.total;
        self.coprime_count += rhs.coprime_count;
        self.even_order_count += rhs.even_order_count;
        self.minus_one_count += rhs.minus_one_count;
        self.success_count += rhs.success_count;
        self.odd_order_count += rhs.odd_order_count;
        self.gcd_shortcut_count += rhs.gcd_shortcut_count;
    }
}

impl Add for OracleCensus {
    type Output = OracleCensus;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

enum Residue {
    NonUnit { gcd: u64 },
    OddOrder { order: u64 },
    MinusOne { order: u64 },
    Success { order: u64, half_power: u64 },
}

/// Per-`N` state for classifying residues.
#[derive(Debug, Clone)]
pub struct Enumerator {
    n: u64,
    finder: OrderFinder,
}

impl Enumerator {
    pub fn new(f: &Factorization) -> Result<Self> {
        let finder = OrderFinder::new(f)?;
        Ok(Enumerator { n: finder.n(), finder })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn classify(&self, a: u64) -> Residue {
        let n = self.n;
        let g = gcd_u64(a, n);
        if g != 1 {
            return Residue::NonUnit { gcd: g };
        }
        let order = self.finder.order(a).expect("unit");
        if order % 2 == 1 {
            return Residue::OddOrder { order };
        }
        let half_power = mod_pow_u64(a, order / 2, n);
        if half_power == n - 1 {
            Residue::MinusOne { order }
        } else {
            Residue::Success { order, half_power }
        }
    }

    pub fn record(&self, a: u64) -> Result<ElementRecord> {
        let n = self.n;
        if a >= n {
            return Err(Error::invalid(format!("residue {a} out of range [0, {n})")));
        }
        let mut rec = ElementRecord {
            a,
            gcd_with_n: 1,
            order: None,
            order_is_even: false,
            half_power: None,
            is_minus_one: false,
            success: false,
            factors_found: Vec::new(),
        };
        match self.classify(a) {
            Residue::NonUnit { gcd } => rec.gcd_with_n = gcd,
            Residue::OddOrder { order } => rec.order = Some(order),
            Residue::MinusOne { order } => {
                rec.order = Some(order);
                rec.order_is_even = true;
                rec.half_power = Some(n - 1);
                rec.is_minus_one = true;
            }
            Residue::Success { order, half_power } => {
                rec.order = Some(order);
                rec.order_is_even = true;
                rec.half_power = Some(half_power);
                rec.success = true;
                let mut found: Vec<u64> = [
                    gcd_u64((half_power + n - 1) % n, n),
                    gcd_u64((half_power + 1) % n, n),
                ]
                .into_iter()
                .filter(|&d| 1 < d && d < n)
                .collect();
                found.sort_unstable();
                found.dedup();
                rec.factors_found = found;
            }
        }
        Ok(rec)
    }

    /// Counts over the residues in `range` (clamped to `[0, N)`).
    pub fn count(&self, range: Range<u64>) -> OracleCensus {
        let n = self.n;
        let mut c = OracleCensus { n, ..Default::default() };
        for a in range.start..range.end.min(n) {
            c.total += 1;
            match self.classify(a) {
                Residue::NonUnit { gcd } => {
                    if gcd < n {
                        c.gcd_shortcut_count += 1;
                    }
                }
                Residue::OddOrder { .. } => {
                    c.coprime_count += 1;
                    c.odd_order_count += 1;
                }
                Residue::MinusOne { .. } => {
                    c.coprime_count += 1;
                    c.even_order_count += 1;
                    c.minus_one_count += 1;
                }
                Residue::Success { .. } => {
                    c.coprime_count += 1;
                    c.even_order_count += 1;
                    c.success_count += 1;
                }
            }
        }
        c
    }

    /// Records for every residue in order.
    pub fn records(&self) -> impl Iterator<Item = ElementRecord> + '_ {
        (0..self.n).map(move |a| self.record(a).expect("in range"))
    }
}

fn check_limit(f: &Factorization, limit: u64) -> Result<u64> {
    match f.n_u64() {
        Some(n) if n <= limit => Ok(n),
        _ => Err(Error::ResourceLimit { n: f.n().clone(), limit }),
    }
}

/// Full record for a single residue `0 <= a < N`.
pub fn element_record(a: u64, f: &Factorization) -> Result<ElementRecord> {
    Enumerator::new(f)?.record(a)
}

/// Census with the default limit.
pub fn census(f: &Factorization) -> Result<OracleCensus> {
    census_with_limit(f, DEFAULT_CENSUS_LIMIT)
}

/// Exhaustive census, enumerated in parallel over fixed-size chunks.
pub fn census_with_limit(f: &Factorization, limit: u64) -> Result<OracleCensus> {
    let n = check_limit(f, limit)?;
    let e = Enumerator::new(f)?;
    let chunks = n.div_ceil(CHUNK);
    let total = (0..chunks)
        .into_par_iter()
        .map(|i| e.count(i * CHUNK..(i + 1) * CHUNK))
        .reduce(|| OracleCensus { n, ..Default::default() }, Add::add);
    Ok(total)
}

/// Census split into `parts` contiguous sub-ranges counted independently
/// and merged. Any `parts >= 1` gives the same answer as [`census`].
pub fn census_partitioned(f: &Factorization, parts: u64, limit: u64) -> Result<OracleCensus> {
    let n = check_limit(f, limit)?;
    let e = Enumerator::new(f)?;
    let parts = parts.clamp(1, n);
    let bounds: Vec<u64> = (0..=parts).map(|i| n * i / parts).collect();
    let total = bounds
        .par_windows(2)
        .map(|w| e.count(w[0]..w[1]))
        .reduce(|| OracleCensus { n, ..Default::default() }, Add::add);
    Ok(total)
}

/// Count-to-ratio conversion. Conditional probabilities with an empty
/// conditioning set are 0.
pub fn oracle_probabilities(c: &OracleCensus) -> StepProbabilities {
    StepProbabilities {
        p_coprime: Rational::ratio_or_zero(c.coprime_count, c.total),
        p_even_given_coprime: Rational::ratio_or_zero(c.even_order_count, c.coprime_count),
        p_good_given_even: Rational::ratio_or_zero(c.success_count, c.even_order_count),
        p_overall: Rational::ratio_or_zero(c.success_count, c.total),
    }
}

impl OracleCensus {
    /// Exact count identities every census must satisfy.
    pub fn is_consistent(&self) -> bool {
        self.total == self.n
            && self.odd_order_count + self.even_order_count == self.coprime_count
            && self.success_count + self.minus_one_count == self.even_order_count
            && self.coprime_count + self.gcd_shortcut_count + u64::from(self.n > 1) == self.total
    }

    pub fn n_big(&self) -> BigUint {
        BigUint::from(self.n)
    }
}

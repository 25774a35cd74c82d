//! Classical runs of Shor's algorithm with an exact order oracle in place of
//! phase estimation, the Bernoulli shortcut that draws success directly
//! from the closed-form probability, and seeded Monte-Carlo estimation.
//!
//! All randomness comes from [`ShorRng`], a ChaCha8 stream keyed by
//! `(seed, stream)`. Monte-Carlo trials are cut into fixed blocks of
//! [`TRIALS_PER_STREAM`], block `i` drawing from stream `i`, so the result
//! depends only on `(seed, trials, model, range)` and never on how many
//! threads ran the blocks.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::closedform::overall_probability;
use crate::error::{Error, Result};
use crate::numtheory::{gcd_u64, mod_pow_u64, Factorization, OrderFinder};
use crate::oracle::{census_with_limit, DEFAULT_CENSUS_LIMIT};
use crate::rational::Rational;

pub const TRIALS_PER_STREAM: u64 = 4096;

/// Where the random base `a` is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RangeMode {
    /// `{0, ..., N-1}`, the sample space of the closed forms.
    #[default]
    FullRange,
    /// `{2, ..., N-1}`, as in the textbook algorithm.
    AlgorithmRange,
}

/// Which outcomes count as success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SuccessModel {
    /// Only a factor found through the order counts.
    #[default]
    PaperModel,
    /// A lucky `gcd(a, N) > 1` counts as well.
    AlgorithmModel,
}

impl RangeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RangeMode::FullRange => "FullRange",
            RangeMode::AlgorithmRange => "AlgorithmRange",
        }
    }
}

impl SuccessModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SuccessModel::PaperModel => "PaperModel",
            SuccessModel::AlgorithmModel => "AlgorithmModel",
        }
    }
}

impl fmt::Display for RangeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for SuccessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RangeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" | "fullrange" => Ok(RangeMode::FullRange),
            "algorithm" | "algorithmrange" => Ok(RangeMode::AlgorithmRange),
            _ => Err(Error::invalid(format!("unknown range mode {s:?}"))),
        }
    }
}

impl FromStr for SuccessModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" | "papermodel" => Ok(SuccessModel::PaperModel),
            "algorithm" | "algorithmmodel" => Ok(SuccessModel::AlgorithmModel),
            _ => Err(Error::invalid(format!("unknown success model {s:?}"))),
        }
    }
}

/// Counter-based random source.
#[derive(Debug, Clone)]
pub struct ShorRng(ChaCha8Rng);

impl ShorRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent sub-stream `stream` of `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        ShorRng(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform draw from `[0, bound)` by rejection; no modulo bias.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        // 2^64 mod bound; accepted draws cover a whole number of periods.
        let reject_under = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= reject_under {
                return x % bound;
            }
        }
    }

    /// `k` uniform in `[0, 2^53)`, i.e. the numerator of a uniform draw
    /// from `[0, 1)` on the `f64` grid.
    pub fn unit_interval_numerator(&mut self) -> u64 {
        self.next_u64() >> 11
    }
}

/// What one iteration of the algorithm did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// `a = 0`; `gcd(a, N) = N` yields nothing. Only reachable in
    /// [`RangeMode::FullRange`].
    ZeroBase,
    /// `1 < gcd(a, N) < N`.
    GcdShortcut(u64),
    OddOrder,
    MinusOneHalfPower,
    FactorFound(u64),
}

impl Outcome {
    pub fn tag(&self) -> &'static str {
        match self {
            Outcome::ZeroBase => "ZeroBase",
            Outcome::GcdShortcut(_) => "GcdShortcut",
            Outcome::OddOrder => "OddOrder",
            Outcome::MinusOneHalfPower => "MinusOneHalfPower",
            Outcome::FactorFound(_) => "FactorFound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShorRunRecord {
    pub a: u64,
    pub outcome: Outcome,
    pub order: Option<u64>,
    pub factor: Option<u64>,
    pub paper_model_success: bool,
}

impl ShorRunRecord {
    pub fn succeeds_under(&self, model: SuccessModel) -> bool {
        match model {
            SuccessModel::PaperModel => self.paper_model_success,
            SuccessModel::AlgorithmModel => {
                matches!(self.outcome, Outcome::FactorFound(_) | Outcome::GcdShortcut(_))
            }
        }
    }
}

/// Reusable per-`N` state for repeated runs.
#[derive(Debug, Clone)]
pub struct ShorRunner {
    n: u64,
    finder: OrderFinder,
}

impl ShorRunner {
    pub fn new(f: &Factorization) -> Result<Self> {
        let finder = OrderFinder::new(f)?;
        Ok(ShorRunner { n: finder.n(), finder })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// One iteration with a caller-chosen base `0 <= a < N`.
    pub fn run_with_base(&self, a: u64) -> Result<ShorRunRecord> {
        let n = self.n;
        if a >= n {
            return Err(Error::invalid(format!("base {a} out of range [0, {n})")));
        }
        let done = |outcome, order, factor| ShorRunRecord {
            a,
            outcome,
            order,
            factor,
            paper_model_success: matches!(outcome, Outcome::FactorFound(_)),
        };
        let d = gcd_u64(a, n);
        if d == n {
            return Ok(done(Outcome::ZeroBase, None, None));
        }
        if d > 1 {
            return Ok(done(Outcome::GcdShortcut(d), None, Some(d)));
        }
        let r = self.finder.order(a).expect("unit");
        if r % 2 == 1 {
            return Ok(done(Outcome::OddOrder, Some(r), None));
        }
        let h = mod_pow_u64(a, r / 2, n);
        if h == n - 1 {
            return Ok(done(Outcome::MinusOneHalfPower, Some(r), None));
        }
        let x1 = gcd_u64((h + n - 1) % n, n);
        let x2 = gcd_u64((h + 1) % n, n);
        let factor = [x1, x2]
            .into_iter()
            .find(|&x| 1 < x && x < n)
            .expect("h^2 = 1 with h != +-1 always splits N");
        Ok(done(Outcome::FactorFound(factor), Some(r), Some(factor)))
    }

    pub fn run(&self, rng: &mut ShorRng, range: RangeMode) -> Result<ShorRunRecord> {
        let a = match range {
            RangeMode::FullRange => rng.below(self.n),
            RangeMode::AlgorithmRange => {
                if self.n < 3 {
                    return Err(Error::invalid("AlgorithmRange needs N >= 3"));
                }
                2 + rng.below(self.n - 2)
            }
        };
        self.run_with_base(a)
    }
}

/// One iteration of the algorithm with a random base.
pub fn shor_run(f: &Factorization, rng: &mut ShorRng, range: RangeMode) -> Result<ShorRunRecord> {
    ShorRunner::new(f)?.run(rng, range)
}

/// One iteration with a forced base.
pub fn shor_run_with_base(f: &Factorization, a: u64) -> Result<ShorRunRecord> {
    ShorRunner::new(f)?.run_with_base(a)
}

/// The product `Pr_gcd * Pr_even * Pr_non(-1)` that drives
/// [`simulate_bernoulli`].
pub fn bernoulli_success_probability(f: &Factorization) -> Rational {
    overall_probability(f).p_overall
}

/// Draws `u` uniform in `[0, 1)` and reports `u < Pr_success`. The
/// comparison is exact: `u = k / 2^53` is compared against the rational.
pub fn simulate_bernoulli(f: &Factorization, rng: &mut ShorRng) -> bool {
    bernoulli_draw(&bernoulli_success_probability(f), rng)
}

fn bernoulli_draw(p: &Rational, rng: &mut ShorRng) -> bool {
    let k = BigUint::from(rng.unit_interval_numerator());
    k * p.denom() < (p.numer() << 53u32)
}

/// How trials are generated in [`monte_carlo`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    /// Full classical iteration via [`ShorRunner`].
    #[default]
    ShorRun,
    /// [`simulate_bernoulli`]; only meaningful for the paper model on the
    /// full range.
    Bernoulli,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ShorRun => "ShorRun",
            Method::Bernoulli => "Bernoulli",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub n: BigUint,
    pub trials: u64,
    pub successes: u64,
    pub estimate: Rational,
    pub exact_reference: Rational,
    pub abs_error: f64,
    /// `None` when the reference is 0 or 1.
    pub z_score: Option<f64>,
    pub seed: u64,
    pub mode: SuccessModel,
    pub range_mode: RangeMode,
    pub method: Method,
}

impl SimulationReport {
    /// Mean number of iterations until success, `1 / exact_reference`.
    pub fn expected_iterations(&self) -> Option<Rational> {
        self.exact_reference.recip()
    }

    /// Standard deviation of the estimator under the exact reference.
    pub fn sigma(&self) -> f64 {
        let p = self.exact_reference.to_f64();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Exact single-iteration success probability for a given model and range.
///
/// Only the paper model on the full range has a closed form; the other
/// three combinations come from the census.
pub fn exact_reference(
    f: &Factorization,
    model: SuccessModel,
    range: RangeMode,
    census_limit: u64,
) -> Result<Rational> {
    if model == SuccessModel::PaperModel && range == RangeMode::FullRange {
        return Ok(overall_probability(f).p_overall);
    }
    let c = census_with_limit(f, census_limit)?;
    let hits = match model {
        SuccessModel::PaperModel => c.success_count,
        SuccessModel::AlgorithmModel => c.success_count + c.gcd_shortcut_count,
    };
    // 0 and 1 never succeed under either model, so the counts carry over.
    let space = match range {
        RangeMode::FullRange => c.total,
        RangeMode::AlgorithmRange => {
            if c.total < 3 {
                return Err(Error::invalid("AlgorithmRange needs N >= 3"));
            }
            c.total - 2
        }
    };
    Rational::from_counts(hits, space)
}

/// Monte-Carlo estimate with the default census limit.
pub fn monte_carlo(
    f: &Factorization,
    trials: u64,
    seed: u64,
    mode: SuccessModel,
    range: RangeMode,
) -> Result<SimulationReport> {
    monte_carlo_with(f, trials, seed, mode, range, Method::ShorRun, DEFAULT_CENSUS_LIMIT)
}

pub fn monte_carlo_with(
    f: &Factorization,
    trials: u64,
    seed: u64,
    mode: SuccessModel,
    range: RangeMode,
    method: Method,
    census_limit: u64,
) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if method == Method::Bernoulli
        && (mode != SuccessModel::PaperModel || range != RangeMode::FullRange)
    {
        return Err(Error::invalid(
            "the Bernoulli method only models PaperModel on FullRange",
        ));
    }
    let exact = exact_reference(f, mode, range, census_limit)?;
    let blocks = trials.div_ceil(TRIALS_PER_STREAM);
    let block_len = |i: u64| TRIALS_PER_STREAM.min(trials - i * TRIALS_PER_STREAM);

    let successes: u64 = match method {
        Method::ShorRun => {
            let runner = ShorRunner::new(f)?;
            (0..blocks)
                .into_par_iter()
                .map(|i| -> Result<u64> {
                    let mut rng = ShorRng::with_stream(seed, i);
                    let mut hits = 0;
                    for _ in 0..block_len(i) {
                        hits += runner.run(&mut rng, range)?.succeeds_under(mode) as u64;
                    }
                    Ok(hits)
                })
                .try_reduce(|| 0, |a, b| Ok(a + b))?
        }
        Method::Bernoulli => (0..blocks)
            .into_par_iter()
            .map(|i| {
                let mut rng = ShorRng::with_stream(seed, i);
                (0..block_len(i))
                    .filter(|_| bernoulli_draw(&exact, &mut rng))
                    .count() as u64
            })
            .sum(),
    };

    let estimate = Rational::from_counts(successes, trials)?;
    let diff = match estimate.checked_sub(&exact) {
        Some(d) => d.to_f64(),
        None => -exact.checked_sub(&estimate).expect("ordered").to_f64(),
    };
    let p = exact.to_f64();
    let z_score = (!exact.is_zero() && !exact.is_one())
        .then(|| diff / (p * (1.0 - p) / trials as f64).sqrt());
    Ok(SimulationReport {
        n: f.n().clone(),
        trials,
        successes,
        estimate,
        exact_reference: exact,
        abs_error: diff.abs(),
        z_score,
        seed,
        mode,
        range_mode: range,
        method,
    })
}

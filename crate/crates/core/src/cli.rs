//! Machine-readable output and the command implementations behind the
//! `shorprob` binary.
//!
//! Exact values are serialized as decimal strings so no JSON consumer can
//! lose precision; each carries a 12-significant-digit `approx` beside it.

use std::io::Write;
use std::str::FromStr;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{
    classify_failure, overall_probability, printed_overall_probability, FailureClass,
    StepProbabilities,
};
use crate::error::Error;
use crate::numtheory::{factorize, Factorization, PrimePower};
use crate::oracle::{census_with_limit, oracle_probabilities, OracleCensus};
use crate::rational::Rational;
use crate::simulator::SimulationReport;

pub const SCHEMA_VERSION: &str = "1";

/// Fixed column order of `sweep --format csv`.
pub const CSV_HEADER: [&str; 8] = [
    "n",
    "factorization",
    "step1",
    "step2",
    "step3",
    "overall",
    "overall_approx",
    "failure_class",
];

/// Failures surfaced by the command line, each with a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    ResourceLimit(String),
    #[error("{0}")]
    Io(String),
    #[error("{0} closed-form/oracle mismatches")]
    VerificationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::ResourceLimit(_) => 3,
            CliError::Io(_) => 4,
            CliError::VerificationFailed(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceLimit { .. } => CliError::ResourceLimit(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalDoc {
    pub num: String,
    pub den: String,
    pub approx: f64,
}

impl From<&Rational> for RationalDoc {
    fn from(r: &Rational) -> Self {
        RationalDoc {
            num: r.numer().to_str_radix(10),
            den: r.denom().to_str_radix(10),
            approx: r.approx(),
        }
    }
}

impl RationalDoc {
    pub fn to_rational(&self) -> crate::error::Result<Rational> {
        let parse = |s: &str| {
            BigUint::from_str(s).map_err(|_| Error::invalid(format!("bad decimal string {s:?}")))
        };
        Rational::new(parse(&self.num)?, parse(&self.den)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorDoc {
    pub p: String,
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitiesDoc {
    pub step1: RationalDoc,
    pub step2: RationalDoc,
    pub step3: RationalDoc,
    pub overall: RationalDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub p: String,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureDoc {
    pub tag: String,
    pub witness: Option<WitnessDoc>,
}

impl From<&FailureClass> for FailureDoc {
    fn from(c: &FailureClass) -> Self {
        FailureDoc {
            tag: c.tag().to_string(),
            witness: c.witness().map(|(p, k)| WitnessDoc { p: p.to_str_radix(10), k }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusDoc {
    pub total: String,
    pub coprime_count: String,
    pub even_order_count: String,
    pub odd_order_count: String,
    pub minus_one_count: String,
    pub success_count: String,
    pub gcd_shortcut_count: String,
}

impl From<&OracleCensus> for CensusDoc {
    fn from(c: &OracleCensus) -> Self {
        CensusDoc {
            total: c.total.to_string(),
            coprime_count: c.coprime_count.to_string(),
            even_order_count: c.even_order_count.to_string(),
            odd_order_count: c.odd_order_count.to_string(),
            minus_one_count: c.minus_one_count.to_string(),
            success_count: c.success_count.to_string(),
            gcd_shortcut_count: c.gcd_shortcut_count.to_string(),
        }
    }
}

/// Schema `"1"` result document for one `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDocument {
    pub schema_version: String,
    pub n: String,
    pub factorization: Vec<FactorDoc>,
    pub probabilities: ProbabilitiesDoc,
    /// `null` for `N = 2`, which has no printed closed form.
    pub printed_overall: Option<RationalDoc>,
    pub failure_class: FailureDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census: Option<CensusDoc>,
}

impl OutputDocument {
    pub fn new(f: &Factorization) -> Self {
        let sp = overall_probability(f);
        let mut factorization = Vec::new();
        if f.k0() > 0 {
            factorization.push(FactorDoc { p: "2".into(), k: f.k0(), s: None, m: None });
        }
        for o in f.odd_factors() {
            factorization.push(FactorDoc {
                p: o.p().to_str_radix(10),
                k: o.k(),
                s: Some(o.s()),
                m: Some(o.m().to_str_radix(10)),
            });
        }
        OutputDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            n: f.n().to_str_radix(10),
            factorization,
            probabilities: ProbabilitiesDoc {
                step1: (&sp.p_coprime).into(),
                step2: (&sp.p_even_given_coprime).into(),
                step3: (&sp.p_good_given_even).into(),
                overall: (&sp.p_overall).into(),
            },
            printed_overall: printed_overall_probability(f).ok().as_ref().map(Into::into),
            failure_class: (&classify_failure(f)).into(),
            census: None,
        }
    }

    pub fn with_census(mut self, c: &OracleCensus) -> Self {
        self.census = Some(c.into());
        self
    }

    /// The exact step probabilities carried by the document.
    pub fn step_probabilities(&self) -> crate::error::Result<StepProbabilities> {
        Ok(StepProbabilities {
            p_coprime: self.probabilities.step1.to_rational()?,
            p_even_given_coprime: self.probabilities.step2.to_rational()?,
            p_good_given_even: self.probabilities.step3.to_rational()?,
            p_overall: self.probabilities.overall.to_rational()?,
        })
    }
}

/// Parses `term ("*" term)*` with `term = prime ("^" exp)?`, ignoring
/// whitespace. Repeated primes are merged.
pub fn parse_factor_expression(expr: &str) -> crate::error::Result<Factorization> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::invalid("empty factor expression"));
    }
    let mut powers = Vec::new();
    for term in compact.split('*') {
        let (base, exp) = match term.split_once('^') {
            Some((b, e)) => (b, Some(e)),
            None => (term, None),
        };
        if base.is_empty() || !base.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::invalid(format!("bad prime {base:?} in {expr:?}")));
        }
        let p = BigUint::from_str(base).map_err(|_| Error::invalid(format!("bad prime {base:?}")))?;
        let k = match exp {
            None => 1,
            Some(e) if !e.is_empty() && e.bytes().all(|b| b.is_ascii_digit()) => e
                .parse::<u32>()
                .map_err(|_| Error::invalid(format!("exponent {e:?} too large")))?,
            Some(e) => return Err(Error::invalid(format!("bad exponent {e:?} in {expr:?}"))),
        };
        powers.push(PrimePower { p, k });
    }
    Factorization::from_prime_powers(powers)
}

/// Parses a decimal `N >= 2`.
pub fn parse_n(s: &str) -> crate::error::Result<BigUint> {
    let t = s.trim();
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::invalid(format!("{s:?} is not a nonnegative integer")));
    }
    let n = BigUint::from_str(t).map_err(|_| Error::invalid(format!("bad integer {s:?}")))?;
    if n < BigUint::from(2u32) {
        return Err(Error::invalid(format!("N must be at least 2, got {n}")));
    }
    Ok(n)
}

/// Resolves `N` and/or a factor expression into one factorization. When
/// both are given they must agree.
pub fn resolve_input(n: Option<&str>, factors: Option<&str>) -> crate::error::Result<Factorization> {
    match (n, factors) {
        (None, None) => Err(Error::invalid("give N or --factors")),
        (Some(n), None) => factorize(&parse_n(n)?),
        (None, Some(expr)) => parse_factor_expression(expr),
        (Some(n), Some(expr)) => {
            let n = parse_n(n)?;
            let f = parse_factor_expression(expr)?;
            if f.n() != &n {
                return Err(Error::invalid(format!(
                    "factor expression {expr:?} multiplies to {}, not {n}",
                    f.n()
                )));
            }
            Ok(f)
        }
    }
}

/// Parses an inclusive range `A..B` with `2 <= A <= B`.
pub fn parse_range(s: &str) -> crate::error::Result<(u64, u64)> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::invalid(format!("expected A..B, got {s:?}")))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let parse = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| Error::invalid(format!("bad range bound {t:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a < 2 {
        return Err(Error::invalid(format!("range must start at 2 or above, got {a}")));
    }
    if a > b {
        return Err(Error::invalid(format!("empty range {a}..{b}")));
    }
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub n: u64,
    pub field: &'static str,
    pub closed_form: Rational,
    pub oracle: Rational,
}

/// `printed_overall != overall` for one `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub n: u64,
    pub printed: Rational,
    pub composed: Rational,
}

impl Divergence {
    /// `printed / composed`, when the composed value is nonzero.
    pub fn ratio(&self) -> Option<Rational> {
        self.composed.recip().map(|inv| &self.printed * &inv)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifySummary {
    pub checked: u64,
    pub mismatches: Vec<Mismatch>,
    pub divergences: Vec<Divergence>,
}

/// Compares closed-form and census probabilities for one `N`. Step 3 is
/// skipped when no unit has even order.
pub fn compare_with_oracle(
    n: u64,
    closed: &StepProbabilities,
    census: &OracleCensus,
) -> Vec<Mismatch> {
    let oracle = oracle_probabilities(census);
    let mut out = Vec::new();
    let mut check = |field, c: &Rational, o: &Rational| {
        if c != o {
            out.push(Mismatch { n, field, closed_form: c.clone(), oracle: o.clone() });
        }
    };
    check("step1", &closed.p_coprime, &oracle.p_coprime);
    check("step2", &closed.p_even_given_coprime, &oracle.p_even_given_coprime);
    if census.even_order_count > 0 {
        check("step3", &closed.p_good_given_even, &oracle.p_good_given_even);
    }
    check("overall", &closed.p_overall, &oracle.p_overall);
    out
}

/// Closed form versus census for every `N` in `[a, b]`.
pub fn verify_range(a: u64, b: u64, census_limit: u64) -> CliResult<VerifySummary> {
    if a < 2 || a > b {
        return Err(CliError::Usage(format!("invalid range {a}..{b}")));
    }
    if b > census_limit {
        return Err(CliError::ResourceLimit(format!(
            "range end {b} exceeds the census limit {census_limit}"
        )));
    }
    let per_n: Vec<(Vec<Mismatch>, Option<Divergence>)> = (a..=b)
        .into_par_iter()
        .map(|n| -> CliResult<_> {
            let f = factorize(&BigUint::from(n))?;
            let closed = overall_probability(&f);
            let census = census_with_limit(&f, census_limit)?;
            let mismatches = compare_with_oracle(n, &closed, &census);
            let divergence = printed_overall_probability(&f)
                .ok()
                .filter(|p| *p != closed.p_overall)
                .map(|printed| Divergence { n, printed, composed: closed.p_overall.clone() });
            Ok((mismatches, divergence))
        })
        .collect::<CliResult<_>>()?;
    let mut summary = VerifySummary { checked: b - a + 1, ..Default::default() };
    for (m, d) in per_n {
        summary.mismatches.extend(m);
        summary.divergences.extend(d);
    }
    Ok(summary)
}

/// Writes the human-readable verify report.
pub fn write_verify_summary(out: &mut impl Write, s: &VerifySummary) -> std::io::Result<()> {
    writeln!(out, "{} values checked, {} mismatches", s.checked, s.mismatches.len())?;
    for m in &s.mismatches {
        writeln!(
            out,
            "MISMATCH N={} {}: closed form {} vs oracle {}",
            m.n, m.field, m.closed_form, m.oracle
        )?;
    }
    let doubled = s
        .divergences
        .iter()
        .filter(|d| d.ratio() == Some(Rational::from_counts(2, 1).unwrap()))
        .count();
    writeln!(
        out,
        "printed overall differs from composed overall for {} values ({} of them exactly 2x)",
        s.divergences.len(),
        doubled
    )?;
    const SHOWN: usize = 20;
    for d in s.divergences.iter().take(SHOWN) {
        let ratio = d.ratio().map(|r| format!("{r} x")).unwrap_or_else(|| "n/a".into());
        writeln!(
            out,
            "  N={}: printed {} = {} composed {}",
            d.n, d.printed, ratio, d.composed
        )?;
    }
    if s.divergences.len() > SHOWN {
        writeln!(out, "  ... {} more", s.divergences.len() - SHOWN)?;
    }
    Ok(())
}

fn csv_row(f: &Factorization) -> Vec<String> {
    let sp = overall_probability(f);
    vec![
        f.n().to_str_radix(10),
        f.to_string(),
        sp.p_coprime.to_string(),
        sp.p_even_given_coprime.to_string(),
        sp.p_good_given_even.to_string(),
        sp.p_overall.to_string(),
        sp.p_overall.approx_string(crate::rational::APPROX_DIGITS),
        classify_failure(f).tag().to_string(),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFormat {
    Csv,
    Json,
}

/// One row (CSV) or document (JSON) per `N` in `[a, b]`.
pub fn write_sweep(out: &mut impl Write, a: u64, b: u64, format: SweepFormat) -> CliResult<()> {
    if a < 2 || a > b {
        return Err(CliError::Usage(format!("invalid range {a}..{b}")));
    }
    let facts: Vec<Factorization> = (a..=b)
        .into_par_iter()
        .map(|n| factorize(&BigUint::from(n)))
        .collect::<crate::error::Result<_>>()?;
    match format {
        SweepFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for f in &facts {
                w.write_record(csv_row(f)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        SweepFormat::Json => {
            let docs: Vec<OutputDocument> = facts.par_iter().map(OutputDocument::new).collect();
            serde_json::to_writer_pretty(&mut *out, &docs).map_err(json_err)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn json_err(e: serde_json::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDoc {
    pub schema_version: String,
    pub n: String,
    pub trials: u64,
    pub successes: u64,
    pub estimate: RationalDoc,
    pub exact_reference: RationalDoc,
    pub abs_error: f64,
    pub sigma: f64,
    pub z_score: Option<f64>,
    pub expected_iterations: Option<RationalDoc>,
    pub seed: u64,
    pub mode: String,
    pub range_mode: String,
    pub method: String,
}

impl From<&SimulationReport> for SimulationDoc {
    fn from(r: &SimulationReport) -> Self {
        SimulationDoc {
            schema_version: SCHEMA_VERSION.to_string(),
            n: r.n.to_str_radix(10),
            trials: r.trials,
            successes: r.successes,
            estimate: (&r.estimate).into(),
            exact_reference: (&r.exact_reference).into(),
            abs_error: r.abs_error,
            sigma: r.sigma(),
            z_score: r.z_score,
            expected_iterations: r.expected_iterations().as_ref().map(Into::into),
            seed: r.seed,
            mode: r.mode.to_string(),
            range_mode: r.range_mode.to_string(),
            method: r.method.as_str().to_string(),
        }
    }
}

/// Human-readable table for `prob --pretty`.
pub fn write_pretty(out: &mut impl Write, f: &Factorization) -> std::io::Result<()> {
    let sp = overall_probability(f);
    let row = |out: &mut dyn Write, label: &str, r: &Rational| {
        writeln!(out, "{label:<32} {:>24}  {}", r.to_string(), r.approx_string(12))
    };
    writeln!(out, "N = {} = {}", f.n(), f)?;
    row(out, "P(gcd(a, N) = 1)", &sp.p_coprime)?;
    row(out, "P(order even | coprime)", &sp.p_even_given_coprime)?;
    row(out, "P(a^(r/2) != -1 | even order)", &sp.p_good_given_even)?;
    row(out, "overall", &sp.p_overall)?;
    match printed_overall_probability(f) {
        Ok(p) => row(out, "printed closed form", &p)?,
        Err(_) => writeln!(out, "{:<32} {:>24}", "printed closed form", "n/a")?,
    }
    writeln!(out, "{:<32} {:>24}", "failure class", classify_failure(f).to_string())?;
    match sp.p_overall.recip() {
        Some(e) => row(out, "expected iterations", &e)?,
        None => writeln!(out, "{:<32} {:>24}", "expected iterations", "never succeeds")?,
    }
    Ok(())
}

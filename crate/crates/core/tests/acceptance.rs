//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rayon::prelude::*;

use shorprob::cli::OutputDocument;
use shorprob::closedform::{
    classify_failure, overall_probability, printed_overall_probability, ClosedFormTerms,
};
use shorprob::numtheory::{factorize, Factorization};
use shorprob::oracle::{census, census_partitioned, oracle_probabilities, DEFAULT_CENSUS_LIMIT};
use shorprob::simulator::{
    monte_carlo, monte_carlo_with, shor_run_with_base, Method, Outcome, RangeMode, SuccessModel,
};
use shorprob::Rational;

const ORACLE_MAX_N: u64 = 5000;
const ORACLE_TIME_BUDGET: Duration = Duration::from_secs(120);
const SIM_SWEEP_MAX_N: u64 = 2000;
const MC_TRIALS: u64 = 100_000;
const MC_SIGMAS: f64 = 4.0;
const MC_N: [u64; 6] = [12, 15, 21, 24, 33, 35];
const MC_SEEDS: [u64; 3] = [1, 7, 20_251_016];
const GOLDEN_SWEEP: &str = include_str!("golden/sweep_2_50.csv");

type Verdict = Result<String, String>;

fn fact(n: u64) -> Factorization {
    factorize(&BigUint::from(n)).unwrap()
}

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shorprob"))
}

/// Shape of `N` found by plain trial division: `(k0, Some(p, k))` when the
/// odd part is a single prime power, `(k0, None)` when it is 1 or has
/// several primes.
fn shape(n: u64) -> (u32, Option<Option<(u64, u32)>>) {
    let k0 = n.trailing_zeros();
    let mut odd = n >> k0;
    if odd == 1 {
        return (k0, None);
    }
    let mut p = 3;
    while odd % p != 0 {
        p += 2;
    }
    let mut k = 0;
    while odd % p == 0 {
        odd /= p;
        k += 1;
    }
    (k0, Some((odd == 1).then_some((p, k))))
}

fn criterion_1_oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let bad: Vec<String> = (2..=ORACLE_MAX_N)
        .into_par_iter()
        .filter_map(|n| {
            let f = fact(n);
            let closed = overall_probability(&f);
            let c = census(&f).unwrap();
            let oracle = oracle_probabilities(&c);
            let step3_ok = c.even_order_count == 0 || closed.p_good_given_even == oracle.p_good_given_even;
            let ok = closed.p_coprime == oracle.p_coprime
                && closed.p_even_given_coprime == oracle.p_even_given_coprime
                && step3_ok
                && closed.p_overall == oracle.p_overall;
            (!ok).then(|| format!("N={n}: closed {closed:?} oracle {oracle:?}"))
        })
        .collect();
    let elapsed = start.elapsed();
    if !bad.is_empty() {
        return Err(format!("{} mismatches, first: {}", bad.len(), bad[0]));
    }
    if elapsed > ORACLE_TIME_BUDGET {
        return Err(format!("took {elapsed:?}, budget {ORACLE_TIME_BUDGET:?}"));
    }
    Ok(format!("N in [2, {ORACLE_MAX_N}] exact, {:.1}s", elapsed.as_secs_f64()))
}

fn criterion_2_failure_classification() -> Verdict {
    for n in 2..=ORACLE_MAX_N {
        let f = fact(n);
        let (k0, odd) = shape(n);
        let expected_tag = match (k0, odd) {
            (1, None) => "StepTwoFails",
            (2, None) => "StepThreeFails_Four",
            (0, Some(Some(_))) => "StepThreeFails_PrimePower",
            (1, Some(Some(_))) => "StepThreeFails_TwicePrimePower",
            _ => "CanSucceed",
        };
        let class = classify_failure(&f);
        if class.tag() != expected_tag {
            return Err(format!("N={n}: tag {} expected {expected_tag}", class.tag()));
        }
        if let (Some((p, k)), Some(Some((ep, ek)))) = (class.witness(), odd) {
            if *p != BigUint::from(ep) || k != ek {
                return Err(format!("N={n}: witness {p}^{k} expected {ep}^{ek}"));
            }
        }
        let overall = overall_probability(&f).p_overall;
        if overall.is_zero() != (expected_tag != "CanSucceed") {
            return Err(format!("N={n}: overall {overall} for class {expected_tag}"));
        }
    }
    Ok(format!("all N in [2, {ORACLE_MAX_N}] classified; zero iff failure shape"))
}

fn criterion_3_spot_values() -> Verdict {
    let golden = [(15, "2/5"), (21, "2/7"), (12, "1/6"), (8, "1/4"), (9, "0"), (30, "1/5")];
    for (n, want) in golden {
        let f = fact(n);
        let from_census = oracle_probabilities(&census(&f).unwrap()).p_overall;
        if from_census != q(want) {
            return Err(format!("census gives {from_census} for N={n}, golden {want}"));
        }
        let closed = overall_probability(&f).p_overall;
        if closed != q(want) {
            return Err(format!("closed form gives {closed} for N={n}, golden {want}"));
        }
    }
    Ok("15->2/5 21->2/7 12->1/6 8->1/4 9->0 30->1/5".into())
}

fn criterion_4_count_identities() -> Verdict {
    for n in 2..=ORACLE_MAX_N {
        let f = fact(n);
        let c = census(&f).unwrap();
        let terms = ClosedFormTerms::new(&f);
        let odd_expected = terms.mprime_product.clone();
        if BigUint::from(c.odd_order_count) != odd_expected {
            return Err(format!("N={n}: odd-order {} expected {odd_expected}", c.odd_order_count));
        }
        let minus_expected = if f.k0() >= 2 {
            Some(terms.mprime_product.clone())
        } else {
            terms.t.as_ref().map(|t| t * &terms.mprime_product)
        };
        if let Some(m) = minus_expected {
            if BigUint::from(c.minus_one_count) != m {
                return Err(format!("N={n}: minus-one {} expected {m}", c.minus_one_count));
            }
        }
    }
    Ok(format!("odd-order and minus-one counts exact for N <= {ORACLE_MAX_N}"))
}

fn criterion_5_printed_audit() -> Verdict {
    let two = q("2");
    let mut doubled = 0;
    for n in 3..=ORACLE_MAX_N {
        let f = fact(n);
        let printed = printed_overall_probability(&f).map_err(|e| format!("N={n}: {e}"))?;
        let composed = overall_probability(&f).p_overall;
        if n % 4 == 2 {
            if printed != &two * &composed {
                return Err(format!("N={n}: printed {printed} != 2 x {composed}"));
            }
            doubled += 1;
        } else if printed != composed {
            return Err(format!("N={n}: printed {printed} != composed {composed}"));
        }
    }
    Ok(format!("equal for N odd or 4|N; exactly 2x for {doubled} values N = 2 mod 4"))
}

fn criterion_6_simulator_agreement() -> Verdict {
    let disagreements: u64 = (2..=SIM_SWEEP_MAX_N)
        .into_par_iter()
        .map(|n| {
            let f = fact(n);
            let e = shorprob::oracle::Enumerator::new(&f).unwrap();
            let mut bad = 0;
            for a in 0..n {
                let run = shor_run_with_base(&f, a).unwrap();
                let rec = e.record(a).unwrap();
                let ok = (matches!(run.outcome, Outcome::FactorFound(_)) == rec.success)
                    && ((run.outcome == Outcome::MinusOneHalfPower) == rec.is_minus_one)
                    && ((run.outcome == Outcome::OddOrder) == (rec.order.is_some() && !rec.order_is_even))
                    && (matches!(run.outcome, Outcome::GcdShortcut(_) | Outcome::ZeroBase)
                        == rec.order.is_none())
                    && run.order == rec.order;
                if let Outcome::FactorFound(d) = run.outcome {
                    if !(1 < d && d < n && n % d == 0 && rec.factors_found.contains(&d)) {
                        bad += 1;
                    }
                }
                bad += u64::from(!ok);
            }
            bad
        })
        .sum();
    if disagreements > 0 {
        return Err(format!("{disagreements} forced-base disagreements"));
    }

    let mut worst: f64 = 0.0;
    for n in MC_N {
        let f = fact(n);
        for seed in MC_SEEDS {
            for method in [Method::ShorRun, Method::Bernoulli] {
                let r = monte_carlo_with(
                    &f,
                    MC_TRIALS,
                    seed,
                    SuccessModel::PaperModel,
                    RangeMode::FullRange,
                    method,
                    DEFAULT_CENSUS_LIMIT,
                )
                .unwrap();
                if r.exact_reference != overall_probability(&f).p_overall {
                    return Err(format!("N={n}: wrong reference"));
                }
                let z = r.z_score.ok_or("missing z-score")?;
                worst = worst.max(z.abs());
                if r.abs_error > MC_SIGMAS * r.sigma() {
                    return Err(format!(
                        "N={n} seed={seed} {method:?}: |err| {} > 4 sigma {}",
                        r.abs_error,
                        MC_SIGMAS * r.sigma()
                    ));
                }
            }
        }
    }

    for n in [9u64, 4, 2] {
        let f = fact(n);
        for trials in [1u64, 1000, MC_TRIALS] {
            for method in [Method::ShorRun, Method::Bernoulli] {
                let r = monte_carlo_with(
                    &f,
                    trials,
                    3,
                    SuccessModel::PaperModel,
                    RangeMode::FullRange,
                    method,
                    DEFAULT_CENSUS_LIMIT,
                )
                .unwrap();
                if r.successes != 0 {
                    return Err(format!("N={n}: {} successes", r.successes));
                }
            }
        }
    }
    Ok(format!(
        "forced-base sweep N <= {SIM_SWEEP_MAX_N} exact; max |z| = {worst:.2} over {} runs; 9/4/2 never succeed",
        MC_N.len() * MC_SEEDS.len() * 2
    ))
}

fn criterion_7_determinism() -> Verdict {
    for args in [
        vec!["simulate", "15", "--trials", "100000", "--seed", "7"],
        vec!["simulate", "35", "--trials", "50000", "--seed", "9", "--mode", "algorithm", "--range", "algorithm"],
        vec!["simulate", "21", "--trials", "20000", "--seed", "1", "--method", "bernoulli"],
    ] {
        let a = bin().args(&args).output().map_err(|e| e.to_string())?;
        let b = bin().args(&args).output().map_err(|e| e.to_string())?;
        if !a.status.success() || a.stdout != b.stdout || a.stdout.is_empty() {
            return Err(format!("`{}` not byte-identical", args.join(" ")));
        }
    }
    let f = fact(15);
    let lib_a = monte_carlo(&f, 30_000, 4, SuccessModel::PaperModel, RangeMode::FullRange).unwrap();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let lib_b = pool
            .install(|| monte_carlo(&f, 30_000, 4, SuccessModel::PaperModel, RangeMode::FullRange))
            .unwrap();
        if lib_a != lib_b {
            return Err(format!("simulation differs with {threads} threads"));
        }
    }

    for n in [2u64, 97, 1024, 4620, 65_535, 999_983] {
        let f = fact(n);
        let reference = census(&f).unwrap();
        for threads in [1, 2, 8] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            if pool.install(|| census(&f).unwrap()) != reference {
                return Err(format!("census of {n} differs with {threads} threads"));
            }
        }
        for parts in [1, 5, 13] {
            if census_partitioned(&f, parts, DEFAULT_CENSUS_LIMIT).unwrap() != reference {
                return Err(format!("census of {n} differs with {parts} partitions"));
            }
        }
    }
    Ok("simulate output byte-identical; census independent of worker count".into())
}

fn criterion_8_cli_contract() -> Verdict {
    let out = bin()
        .args(["sweep", "2..50", "--format", "csv"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err("sweep exited nonzero".into());
    }
    let got = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    if got != GOLDEN_SWEEP {
        return Err("sweep 2..50 differs from the golden file".into());
    }
    // The golden rows themselves must agree with the census.
    for line in GOLDEN_SWEEP.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let n: u64 = cols[0].parse().map_err(|_| format!("bad row {line}"))?;
        let oracle = oracle_probabilities(&census(&fact(n)).unwrap());
        if q(cols[2]) != oracle.p_coprime
            || q(cols[3]) != oracle.p_even_given_coprime
            || q(cols[5]) != oracle.p_overall
        {
            return Err(format!("golden row for N={n} disagrees with census"));
        }
    }

    let mut docs: Vec<Factorization> = (2..=1000).map(fact).collect();
    docs.push(
        shorprob::cli::parse_factor_expression("2^5*18446744073709551557*4294967311^3").unwrap(),
    );
    for f in &docs {
        let doc = OutputDocument::new(f);
        let json = serde_json::to_string(&doc).map_err(|e| e.to_string())?;
        let back: OutputDocument = serde_json::from_str(&json).map_err(|e| e.to_string())?;
        if back != doc || back.step_probabilities().unwrap() != overall_probability(f) {
            return Err(format!("JSON round-trip lost precision for N={}", f.n()));
        }
    }
    Ok(format!("golden sweep 2..50 matches; {} documents round-trip exactly", docs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 oracle equivalence", criterion_1_oracle_equivalence),
        ("2 failure classification", criterion_2_failure_classification),
        ("3 spot values", criterion_3_spot_values),
        ("4 count identities", criterion_4_count_identities),
        ("5 printed-theorem audit", criterion_5_printed_audit),
        ("6 simulator agreement", criterion_6_simulator_agreement),
        ("7 determinism", criterion_7_determinism),
        ("8 CLI contract", criterion_8_cli_contract),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

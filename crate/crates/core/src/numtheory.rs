//! Integer utilities behind every probability in the crate: gcd, modular
//! exponentiation, primality, factorization, Euler's totient, Carmichael's
//! lambda and exact multiplicative orders.
//!
//! Arbitrary-precision entry points take [`BigUint`]. Values that fit in a
//! machine word get `u64` fast paths, which is what the exhaustive census
//! runs on.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Trial division handles every prime below this bound before Pollard rho.
pub const TRIAL_DIVISION_BOUND: u32 = 10_000;

/// Miller-Rabin rounds used above 2^64 by [`is_prime`].
pub const DEFAULT_MR_ROUNDS: u32 = 64;

// Deterministic for every n < 3.3e24, which covers u64.
const MR_WITNESSES_U64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// A prime power `p^k` with `k >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub p: BigUint,
    pub k: u32,
}

/// An odd prime power `p^k` together with the 2-adic split `p - 1 = 2^s * m`
/// and the odd part `m' = m * p^(k-1)` of the local group order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OddFactor {
    p: BigUint,
    k: u32,
    s: u64,
    m: BigUint,
    m_prime: BigUint,
}

impl OddFactor {
    /// Builds the record for `p^k`. `p` must be an odd prime (checked by the
    /// caller; this only checks oddness) and `k >= 1`.
    pub fn new(p: BigUint, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("prime exponent must be at least 1"));
        }
        if p.is_even() || p < BigUint::from(3u32) {
            return Err(Error::invalid(format!("{p} is not an odd prime")));
        }
        let p_minus_one = &p - 1u32;
        let s = p_minus_one.trailing_zeros().expect("p - 1 > 0");
        let m = &p_minus_one >> s;
        let m_prime = &m * p.pow(k - 1);
        Ok(OddFactor { p, k, s, m, m_prime })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Exponent of 2 in `p - 1`.
    pub fn s(&self) -> u64 {
        self.s
    }

    /// Odd part of `p - 1`.
    pub fn m(&self) -> &BigUint {
        &self.m
    }

    /// `m * p^(k-1)`.
    pub fn m_prime(&self) -> &BigUint {
        &self.m_prime
    }

    /// `p^k`.
    pub fn prime_power(&self) -> BigUint {
        self.p.pow(self.k)
    }

    /// `(p - 1) * p^(k-1)`, the order of the cyclic group `(Z/p^k Z)*`.
    pub fn local_group_order(&self) -> BigUint {
        (&self.p - 1u32) * self.p.pow(self.k - 1)
    }
}

/// `N = 2^k0 * p_1^k_1 * ... * p_l^k_l` with odd primes in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    n: BigUint,
    k0: u32,
    odd_factors: Vec<OddFactor>,
}

impl Factorization {
    /// Assembles a factorization from prime powers in any order. Repeated
    /// primes are merged (`3 * 3` becomes `3^2`). Every base is checked with
    /// [`is_prime`].
    pub fn from_prime_powers<I>(powers: I) -> Result<Self>
    where
        I: IntoIterator<Item = PrimePower>,
    {
        let mut merged: BTreeMap<BigUint, u32> = BTreeMap::new();
        for PrimePower { p, k } in powers {
            if k == 0 {
                return Err(Error::invalid(format!("exponent of {p} must be at least 1")));
            }
            if !is_prime(&p) {
                return Err(Error::invalid(format!("{p} is not prime")));
            }
            let e = merged.entry(p).or_insert(0);
            *e = e
                .checked_add(k)
                .ok_or_else(|| Error::invalid("exponent overflow"))?;
        }
        Self::from_sorted_map(merged)
    }

    fn from_sorted_map(merged: BTreeMap<BigUint, u32>) -> Result<Self> {
        let two = BigUint::from(2u32);
        let mut k0 = 0;
        let mut odd_factors = Vec::with_capacity(merged.len());
        let mut n = BigUint::one();
        for (p, k) in merged {
            n *= p.pow(k);
            if p == two {
                k0 = k;
            } else {
                odd_factors.push(OddFactor::new(p, k)?);
            }
        }
        if n < two {
            return Err(Error::invalid("factorization must describe N >= 2"));
        }
        Ok(Factorization { n, k0, odd_factors })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    /// `N` as a machine word, when it fits.
    pub fn n_u64(&self) -> Option<u64> {
        self.n.to_u64()
    }

    /// Exponent of 2 in `N`.
    pub fn k0(&self) -> u32 {
        self.k0
    }

    pub fn odd_factors(&self) -> &[OddFactor] {
        &self.odd_factors
    }

    /// Number of distinct odd primes.
    pub fn l(&self) -> usize {
        self.odd_factors.len()
    }

    /// All prime powers, `2^k0` first when present.
    pub fn prime_powers(&self) -> Vec<PrimePower> {
        let mut out = Vec::with_capacity(self.odd_factors.len() + 1);
        if self.k0 > 0 {
            out.push(PrimePower { p: BigUint::from(2u32), k: self.k0 });
        }
        out.extend(
            self.odd_factors
                .iter()
                .map(|f| PrimePower { p: f.p.clone(), k: f.k }),
        );
        out
    }
}

impl fmt::Display for Factorization {
    /// Renders in the factor-expression grammar, e.g. `2^3*3^2*5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, pp) in self.prime_powers().iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if pp.k == 1 {
                write!(f, "{}", pp.p)?;
            } else {
                write!(f, "{}^{}", pp.p, pp.k)?;
            }
        }
        Ok(())
    }
}

pub fn gcd(a: &BigUint, b: &BigUint) -> Result<BigUint> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::invalid("gcd(0, 0) is undefined"));
    }
    Ok(a.gcd(b))
}

/// Binary gcd on machine words; `gcd_u64(0, 0) == 0`.
pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

pub fn mod_pow(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    if *modulus < BigUint::from(2u32) {
        return Err(Error::invalid("modulus must be at least 2"));
    }
    Ok(base.modpow(exp, modulus))
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod modulus` by square-and-multiply. `modulus` must be nonzero;
/// a modulus of 1 yields 0.
pub fn mod_pow_u64(base: u64, mut exp: u64, modulus: u64) -> u64 {
    assert!(modulus != 0, "modulus must be nonzero");
    if modulus == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod_u64(result, b, modulus);
        }
        b = mul_mod_u64(b, b, modulus);
        exp >>= 1;
    }
    result
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES_U64 {
        if n % p == 0 {
            return n == p;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &MR_WITNESSES_U64 {
        let mut x = mod_pow_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primality test: exact below 2^64, [`DEFAULT_MR_ROUNDS`] Miller-Rabin
/// rounds above.
pub fn is_prime(n: &BigUint) -> bool {
    is_prime_with_rounds(n, DEFAULT_MR_ROUNDS)
}

/// Like [`is_prime`] with a configurable number of random-witness rounds for
/// inputs of 2^64 and above. Witnesses come from a fixed-seed generator, so
/// the answer for a given `(n, rounds)` never changes between calls.
pub fn is_prime_with_rounds(n: &BigUint, rounds: u32) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &MR_WITNESSES_U64 {
        if (n % p).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().expect("n > 1");
    let d = &n_minus_one >> s;
    let witness_span = n - 3u32;
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d0f9_e11e);
    let mut bytes = vec![0u8; (n.bits() as usize).div_ceil(8) + 8];
    'witness: for round in 0..rounds.max(1) {
        // Fixed small bases first, then random ones in [2, n-2].
        let a = match MR_WITNESSES_U64.get(round as usize) {
            Some(&w) => BigUint::from(w),
            None => {
                rng.fill_bytes(&mut bytes);
                BigUint::from_bytes_le(&bytes) % &witness_span + 2u32
            }
        };
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let bound = TRIAL_DIVISION_BOUND as usize;
        let mut composite = vec![false; bound + 1];
        let mut primes = Vec::new();
        for i in 2..=bound {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j <= bound {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// Full prime factorization: trial division below [`TRIAL_DIVISION_BOUND`],
/// then Pollard-Brent rho on the cofactor with primality certification of
/// every split.
pub fn factorize(n: &BigUint) -> Result<Factorization> {
    if *n < BigUint::from(2u32) {
        return Err(Error::invalid(format!("cannot factorize {n}; need N >= 2")));
    }
    let mut powers: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut rest = n.clone();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut k = 0;
        while (&rest % p).is_zero() {
            rest /= p;
            k += 1;
        }
        if k > 0 {
            powers.insert(pb, k);
        }
    }
    if !rest.is_one() {
        split_into(rest, &mut powers);
    }
    Factorization::from_sorted_map(powers)
}

/// Factorizes a machine word, returning `(prime, exponent)` pairs in
/// increasing order.
pub fn factorize_u64(n: u64) -> Vec<(u64, u32)> {
    let mut out: BTreeMap<u64, u32> = BTreeMap::new();
    let mut rest = n;
    for &p in small_primes() {
        let p = p as u64;
        if p * p > rest {
            break;
        }
        while rest % p == 0 {
            rest /= p;
            *out.entry(p).or_insert(0) += 1;
        }
    }
    if rest > 1 {
        split_u64_into(rest, &mut out);
    }
    out.into_iter().collect()
}

fn split_u64_into(n: u64, out: &mut BTreeMap<u64, u32>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_brent_u64(n);
    split_u64_into(d, out);
    split_u64_into(n / d, out);
}

fn split_into(n: BigUint, out: &mut BTreeMap<BigUint, u32>) {
    if let Some(small) = n.to_u64() {
        let mut local = BTreeMap::new();
        split_u64_into(small, &mut local);
        for (p, k) in local {
            *out.entry(BigUint::from(p)).or_insert(0) += k;
        }
        return;
    }
    if is_prime(&n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_brent_big(&n);
    let cofactor = &n / &d;
    split_into(d, out);
    split_into(cofactor, out);
}

/// Nontrivial divisor of an odd composite `n` (even `n` returns 2).
fn pollard_brent_u64(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let f = |x: u64, c: u64| (mul_mod_u64(x, x, n) + c) % n;
    for c in 1u64.. {
        let mut y = 2u64;
        let mut r = 1u64;
        let mut q = 1u64;
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y, c);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y, c);
                    q = mul_mod_u64(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys, c);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("rho exhausts c only for prime n")
}

fn pollard_brent_big(n: &BigUint) -> BigUint {
    if n.is_even() {
        return BigUint::from(2u32);
    }
    let one = BigUint::one();
    let abs_diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let m = 128u64;
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    q = (&q * abs_diff(&x, &y)) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = abs_diff(&x, &ys).gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1u32;
    }
}

/// `phi(N) = prod (p - 1) p^(k-1)` over every prime power, including `2^k0`.
pub fn euler_phi(f: &Factorization) -> BigUint {
    let mut phi = BigUint::one();
    if f.k0 > 0 {
        phi <<= f.k0 - 1;
    }
    for of in &f.odd_factors {
        phi *= of.local_group_order();
    }
    phi
}

/// Exponent of the unit group `(Z/NZ)*`.
pub fn carmichael_lambda(f: &Factorization) -> BigUint {
    let mut lambda = match f.k0 {
        0 | 1 => BigUint::one(),
        2 => BigUint::from(2u32),
        k => BigUint::one() << (k - 2),
    };
    for of in &f.odd_factors {
        lambda = lambda.lcm(&of.local_group_order());
    }
    lambda
}

/// Prime factorization of [`carmichael_lambda`], assembled from the
/// factorizations of each `p - 1` and the repeated primes themselves.
pub fn carmichael_lambda_factors(f: &Factorization) -> Result<Vec<PrimePower>> {
    let mut exps: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut bump = |p: BigUint, k: u32| {
        let e = exps.entry(p).or_insert(0);
        *e = (*e).max(k);
    };
    match f.k0 {
        0 | 1 => {}
        2 => bump(BigUint::from(2u32), 1),
        k => bump(BigUint::from(2u32), k - 2),
    }
    for of in &f.odd_factors {
        let s = u32::try_from(of.s).map_err(|_| Error::invalid("2-adic valuation too large"))?;
        bump(BigUint::from(2u32), s);
        if !of.m.is_one() {
            for pp in factorize(&of.m)?.prime_powers() {
                bump(pp.p, pp.k);
            }
        }
        if of.k > 1 {
            bump(of.p.clone(), of.k - 1);
        }
    }
    Ok(exps.into_iter().map(|(p, k)| PrimePower { p, k }).collect())
}

/// Least `r >= 1` with `a^r = 1 (mod N)`, for `1 <= a < N` coprime to `N`.
///
/// Starts from `lambda(N)` and strips prime factors while the power stays 1.
pub fn multiplicative_order(a: &BigUint, f: &Factorization) -> Result<BigUint> {
    let n = f.n();
    if a >= n {
        return Err(Error::invalid(format!("base {a} must be below N = {n}")));
    }
    if !a.gcd(n).is_one() {
        return Err(Error::NotAUnit { a: a.clone(), n: n.clone() });
    }
    if let (Some(a64), Ok(finder)) = (a.to_u64(), OrderFinder::new(f)) {
        let r = finder.order(a64).expect("unit checked above");
        return Ok(BigUint::from(r));
    }
    let lambda = carmichael_lambda(f);
    let lambda_factors = carmichael_lambda_factors(f)?;
    let mut r = lambda;
    for PrimePower { p: q, k: e } in lambda_factors {
        for _ in 0..e {
            let candidate = &r / &q;
            if a.modpow(&candidate, n).is_one() {
                r = candidate;
            } else {
                break;
            }
        }
    }
    Ok(r)
}

/// Precomputed `lambda(N)` and its prime factors for fast repeated order
/// queries modulo a word-sized `N`.
#[derive(Debug, Clone)]
pub struct OrderFinder {
    n: u64,
    lambda: u64,
    lambda_factors: Vec<(u64, u32)>,
}

impl OrderFinder {
    pub fn new(f: &Factorization) -> Result<Self> {
        let n = f
            .n_u64()
            .ok_or_else(|| Error::UnsupportedCase(format!("N = {} exceeds 64 bits", f.n())))?;
        // lambda(N) < N, so it fits too.
        let lambda = carmichael_lambda(f).to_u64().expect("lambda(N) < N");
        let lambda_factors = carmichael_lambda_factors(f)?
            .into_iter()
            .map(|pp| (pp.p.to_u64().expect("divides lambda"), pp.k))
            .collect();
        Ok(OrderFinder { n, lambda, lambda_factors })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    /// Order of `a mod N`, or `None` when `gcd(a, N) != 1`.
    pub fn order(&self, a: u64) -> Option<u64> {
        let a = a % self.n;
        if gcd_u64(a, self.n) != 1 {
            return None;
        }
        if self.n == 1 {
            return Some(1);
        }
        let mut r = self.lambda;
        for &(q, e) in &self.lambda_factors {
            for _ in 0..e {
                if mod_pow_u64(a, r / q, self.n) == 1 {
                    r /= q;
                } else {
                    break;
                }
            }
        }
        Some(r)
    }
}

//! Exact integer and rational arithmetic: p-adic valuations, CRT,
//! multiplicative orders, factorization and multiplicative independence.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision reduced fraction. `num_rational` keeps the
/// denominator positive and the fraction in lowest terms.
pub type Rational = BigRational;

/// Builds `num/den` from machine integers. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// p-adic valuation; zero has infinite valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => f.write_str("inf"),
        }
    }
}

/// A prime power `p^e` in a factorization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimePower {
    pub p: BigUint,
    pub e: u32,
}

impl PrimePower {
    pub fn new(p: impl Into<BigUint>, e: u32) -> Self {
        PrimePower { p: p.into(), e }
    }

    pub fn value(&self) -> BigUint {
        self.p.pow(self.e)
    }
}

// ---------------------------------------------------------------------------
// primality

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the twelve smallest prime bases are exact
/// for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin on big integers. Exact below 2^64; above that it is a
/// strong probable-prime test with fixed bases.
pub fn is_prime_big(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    const BASES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    'bases: for &a in &BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Primes in increasing order, starting at the first prime `>= start`.
#[derive(Debug, Clone)]
pub struct Primes {
    next: u64,
}

impl Iterator for Primes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        while !is_prime(self.next) {
            self.next = self.next.checked_add(1)?;
        }
        let p = self.next;
        self.next += 1;
        Some(p)
    }
}

pub fn primes_from(start: u64) -> Primes {
    Primes { next: start }
}

// ---------------------------------------------------------------------------
// valuations

/// Splits `n = p^k * rest` with `p ∤ rest`. `n` must be nonzero.
pub fn split_prime(n: &BigInt, p: u64) -> (u64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut k = 0;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            return (k, rest);
        }
        rest = q;
        k += 1;
    }
}

pub fn padic_valuation(x: &Rational, p: u64) -> Result<Valuation> {
    check_prime(p)?;
    Ok(valuation_unchecked(x, p))
}

pub(crate) fn valuation_unchecked(x: &Rational, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinity;
    }
    let (vn, _) = split_prime(x.numer(), p);
    let (vd, _) = split_prime(x.denom(), p);
    Valuation::Finite(vn as i64 - vd as i64)
}

/// `|x|_p = p^(-v_p(x))`, with `|0|_p = 0`.
pub fn padic_abs(x: &Rational, p: u64) -> Result<Rational> {
    check_prime(p)?;
    Ok(abs_unchecked(x, p))
}

pub(crate) fn abs_unchecked(x: &Rational, p: u64) -> Rational {
    match valuation_unchecked(x, p) {
        Valuation::Infinity => Rational::zero(),
        Valuation::Finite(v) => prime_power_rational(p, -v),
    }
}

/// `p^e` as an exact rational for any integer `e`.
pub fn prime_power_rational(p: u64, e: i64) -> Rational {
    let mag = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

pub fn pow_big(p: u64, e: u32) -> BigInt {
    BigInt::from(p).pow(e)
}

// ---------------------------------------------------------------------------
// modular arithmetic

/// Inverse of `a` modulo `m` in `[0, m)`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Canonical residue in `[0, m)` of a rational whose denominator is prime
/// to `m`.
pub fn residue_mod(x: &Rational, m: &BigInt) -> Result<BigInt> {
    if !m.is_positive() {
        return Err(Error::invalid("modulus must be positive"));
    }
    let inv = mod_inverse(x.denom(), m)
        .ok_or_else(|| Error::invalid(format!("denominator of {x} is not invertible modulo {m}")))?;
    Ok((x.numer() * inv).mod_floor(m))
}

/// Solves `n ≡ r_i (mod m_i)` for pairwise coprime moduli, returning the
/// representative in `[1, ∏ m_i]`.
pub fn crt(congruences: &[(BigInt, BigInt)]) -> Result<BigInt> {
    for (m, _) in congruences {
        if !m.is_positive() {
            return Err(Error::invalid(format!("modulus {m} is not positive")));
        }
    }
    for (i, (mi, _)) in congruences.iter().enumerate() {
        for (mj, _) in &congruences[i + 1..] {
            if !mi.gcd(mj).is_one() {
                return Err(Error::NonCoprimeModuli(mi.clone(), mj.clone()));
            }
        }
    }
    let mut modulus = BigInt::one();
    let mut value = BigInt::zero();
    for (m, r) in congruences {
        let r = r.mod_floor(m);
        // value + modulus * t ≡ r (mod m)
        let inv = mod_inverse(&modulus, m).expect("coprime moduli");
        let t = ((&r - &value) * inv).mod_floor(m);
        value += &modulus * t;
        modulus *= m;
    }
    let value = value.mod_floor(&modulus);
    Ok(if value.is_zero() { modulus } else { value })
}

/// Carmichael function λ(m).
pub fn carmichael(m: &BigUint) -> BigUint {
    let mut acc = BigUint::one();
    for PrimePower { p, e } in factorize(m) {
        let phi = p.pow(e - 1) * (&p - 1u32);
        let lambda = if p == BigUint::from(2u32) && e >= 3 { phi >> 1 } else { phi };
        acc = acc.lcm(&lambda);
    }
    acc
}

/// Least `k ≥ 1` with `a^k ≡ 1 (mod m)`.
pub fn mult_order(a: &BigInt, m: &BigInt) -> Result<BigUint> {
    if m < &BigInt::from(2) {
        return Err(Error::invalid(format!("modulus {m} must be at least 2")));
    }
    if !a.gcd(m).is_one() {
        return Err(Error::invalid(format!("{a} is not a unit modulo {m}")));
    }
    let m = m.to_biguint().expect("positive");
    let a = a.mod_floor(&BigInt::from(m.clone())).to_biguint().expect("reduced");
    let mut order = carmichael(&m);
    for PrimePower { p, .. } in factorize(&order.clone()) {
        while order.is_multiple_of(&p) {
            let candidate = &order / &p;
            if a.modpow(&candidate, &m).is_one() {
                order = candidate;
            } else {
                break;
            }
        }
    }
    Ok(order)
}

// ---------------------------------------------------------------------------
// factorization

const TRIAL_LIMIT: u32 = 1_000_000;

/// Complete factorization, sorted by prime. Trial division to 10^6, then
/// Brent's variant of Pollard rho with deterministic constants.
pub fn factorize(n: &BigUint) -> Vec<PrimePower> {
    let mut found: BTreeMap<BigUint, u32> = BTreeMap::new();
    if n.is_zero() {
        return Vec::new();
    }
    let mut rest = n.clone();
    let mut d: u32 = 2;
    while d <= TRIAL_LIMIT {
        let db = BigUint::from(d);
        if &db * &db > rest {
            break;
        }
        while (&rest % d).is_zero() {
            rest /= d;
            *found.entry(db.clone()).or_insert(0) += 1;
        }
        d = if d == 2 { 3 } else { d + 2 };
    }
    if !rest.is_one() {
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if m.is_one() {
                continue;
            }
            if is_prime_big(&m) {
                *found.entry(m).or_insert(0) += 1;
                continue;
            }
            let f = pollard_brent(&m);
            let g = &m / &f;
            stack.push(f);
            stack.push(g);
        }
    }
    found.into_iter().map(|(p, e)| PrimePower { p, e }).collect()
}

fn abs_diff(a: &BigUint, b: &BigUint) -> BigUint {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

/// Returns a nontrivial factor of the odd composite `n`.
fn pollard_brent(n: &BigUint) -> BigUint {
    if n.is_even() {
        return BigUint::from(2u32);
    }
    const BATCH: u64 = 128;
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut r: u64 = 1;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    q = (q * abs_diff(&x, &y)) % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = abs_diff(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
    }
    unreachable!("constant search is unbounded")
}

/// Primes dividing a nonzero integer, as `u64`. Fails if a prime factor
/// exceeds 64 bits.
pub fn prime_divisors_u64(n: &BigInt) -> Result<Vec<u64>> {
    let mag = n.magnitude();
    factorize(mag)
        .into_iter()
        .map(|pp| pp.p.to_u64().ok_or_else(|| Error::invalid(format!("prime factor {} exceeds 64 bits", pp.p))))
        .collect()
}

/// Signed prime-exponent vector of a nonzero rational (sign discarded).
pub fn prime_exponents(x: &Rational) -> BTreeMap<BigUint, i64> {
    let mut out = BTreeMap::new();
    for pp in factorize(x.numer().magnitude()) {
        out.insert(pp.p, pp.e as i64);
    }
    for pp in factorize(x.denom().magnitude()) {
        *out.entry(pp.p).or_insert(0) -= pp.e as i64;
    }
    out
}

/// True iff no `(a, b) ≠ (0, 0)` satisfies `|γ|^a = |δ|^b`, i.e. the
/// exponent vectors of `|γ|` and `|δ|` are linearly independent.
pub fn mult_independent(gamma: &Rational, delta: &Rational) -> Result<bool> {
    if gamma.is_zero() || delta.is_zero() {
        return Err(Error::invalid("generators must be nonzero"));
    }
    let u = prime_exponents(gamma);
    let v = prime_exponents(delta);
    let keys: Vec<&BigUint> = {
        let mut k: Vec<&BigUint> = u.keys().chain(v.keys()).collect();
        k.sort();
        k.dedup();
        k
    };
    let get = |m: &BTreeMap<BigUint, i64>, k: &BigUint| *m.get(k).unwrap_or(&0) as i128;
    for (i, ki) in keys.iter().enumerate() {
        for kj in &keys[i + 1..] {
            if get(&u, ki) * get(&v, kj) != get(&u, kj) * get(&v, ki) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Floor of a rational as an integer.
pub fn floor_rational(x: &Rational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.06`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse {s:?} as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int: BigInt = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            t => t.parse().map_err(|_| bad())?,
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let mag = Rational::new(int.abs() * &scale + frac, scale);
        return Ok(if negative { -mag } else { mag });
    }
    Ok(Rational::from_integer(s.parse().map_err(|_| bad())?))
}

/// Sign helper for code that branches on rationals.
pub fn sign_of(x: &Rational) -> Sign {
    x.numer().sign()
}

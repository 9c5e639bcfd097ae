//! Certified continued fractions of `log δ / log γ` and the search for
//! semigroup elements `γ^a / δ^b` strictly between `1` and `1 + ε`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::DyadicInterval;
use crate::number::{mult_independent, Rational};

/// Precision ceiling for certified expansions.
pub const MAX_PRECISION_BITS: u32 = 1 << 15;

/// Certified leading partial quotients of `|log δ / log γ|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFractionPrefix {
    pub delta: Rational,
    pub gamma: Rational,
    pub quotients: Vec<BigInt>,
    pub certified_bits: u32,
    /// Enclosure of the expanded ratio at `certified_bits`.
    pub enclosure: DyadicInterval,
}

/// Enclosure of `|ln δ| / |ln γ|`.
pub fn log_ratio_enclosure(delta: &Rational, gamma: &Rational, bits: u32) -> Option<DyadicInterval> {
    let num = DyadicInterval::ln(delta, bits).abs();
    let den = DyadicInterval::ln(gamma, bits).abs();
    num.div(&den)
}

/// Partial quotients of every real in `x`, stopping at `limit` terms or
/// when the enclosure no longer determines the next quotient.
pub fn certified_quotients(x: &DyadicInterval, limit: usize) -> Vec<BigInt> {
    let one = DyadicInterval::from_rational(&Rational::one(), x.scale());
    let mut out = Vec::new();
    let mut cur = x.clone();
    while out.len() < limit {
        let Some(a) = cur.floor() else { break };
        if !out.is_empty() && a < BigInt::one() {
            break;
        }
        out.push(a.clone());
        if out.len() == limit {
            break;
        }
        let frac = cur.add_integer(&-a);
        if !frac.grid_lo().is_positive() {
            break;
        }
        match one.div(&frac) {
            Some(next) => cur = next,
            None => break,
        }
    }
    out
}

/// First `n_terms` partial quotients of `|log δ / log γ|`, each certified by
/// interval arithmetic. Precision doubles from `precision_bits` until every
/// quotient is decided or [`MAX_PRECISION_BITS`] is exceeded.
pub fn cf_log_ratio(
    delta: &Rational,
    gamma: &Rational,
    n_terms: usize,
    precision_bits: u32,
) -> Result<ContinuedFractionPrefix> {
    for (name, v) in [("gamma", gamma), ("delta", delta)] {
        if !v.is_positive() || v.is_one() {
            return Err(Error::invalid(format!("{name} must be positive and different from 1, got {v}")));
        }
    }
    if n_terms == 0 {
        return Err(Error::invalid("n_terms must be positive"));
    }
    // A rational log-ratio has a finite expansion that interval arithmetic
    // can never certify, so dependence is settled exactly first.
    if !mult_independent(gamma, delta)? {
        return Err(Error::Dependent);
    }
    let mut bits = precision_bits.max(16);
    loop {
        if let Some(enclosure) = log_ratio_enclosure(delta, gamma, bits) {
            let quotients = certified_quotients(&enclosure, n_terms);
            if quotients.len() == n_terms {
                return Ok(ContinuedFractionPrefix {
                    delta: delta.clone(),
                    gamma: gamma.clone(),
                    quotients,
                    certified_bits: bits,
                    enclosure,
                });
            }
        }
        if bits >= MAX_PRECISION_BITS {
            return Err(Error::PrecisionExhausted {
                context: format!("{n_terms} partial quotients of log({delta})/log({gamma})"),
                bits,
            });
        }
        bits = (bits * 2).min(MAX_PRECISION_BITS);
    }
}

/// Convergents `p_k / q_k` from the standard three-term recurrence.
pub fn convergents(quotients: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let (mut p2, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q2, mut q1) = (BigInt::one(), BigInt::zero());
    quotients
        .iter()
        .map(|a| {
            let p = a * &p1 + &p2;
            let q = a * &q1 + &q2;
            p2 = std::mem::replace(&mut p1, p.clone());
            q2 = std::mem::replace(&mut q1, q.clone());
            (p, q)
        })
        .collect()
}

/// How the generators were normalized to `γ' > 0`, `δ' > 1` before the
/// search. Exponents found for `(γ', δ')` map back as
/// `a = a'·(2 if gamma_squared)` and
/// `b = b'·(-1 if delta_inverted)·(2 if delta_squared)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Normalization {
    pub gamma_squared: bool,
    pub delta_squared: bool,
    pub delta_inverted: bool,
}

/// `σ = γ^a / δ^b` with `1 < σ < 1 + ε`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearOneElement {
    pub a: BigInt,
    pub b: BigInt,
    pub sigma: Rational,
    /// Index `k` of the convergent `p_k/q_k` of `|log δ'/log γ'|` used.
    pub convergent_index: usize,
    pub normalization: Normalization,
}

/// `x^e` for a signed exponent.
pub fn pow_rational(x: &Rational, e: &BigInt) -> Result<Rational> {
    let mag = e.magnitude().to_u32().ok_or_else(|| Error::ResourceLimit(format!("exponent {e} too large")))?;
    let base = if e.is_negative() { x.recip() } else { x.clone() };
    Ok(Rational::new(base.numer().pow(mag), base.denom().pow(mag)))
}

const MAX_TERMS: usize = 4096;

/// Finds `a ≥ 1`, `b ∈ Z` with `1 < γ^a/δ^b < 1 + ε`, verified exactly.
///
/// With `γ' > 1` the search walks odd-index convergents of
/// `log δ'/log γ'` (over-approximations, `a, b > 0`); with `γ' < 1` it walks
/// even-index convergents of `|log δ'/log γ'|` (under-approximations, which
/// are the odd-index convergents of the negative ratio), giving `b < 0`.
pub fn find_near_one(gamma: &Rational, delta: &Rational, eps: &Rational) -> Result<NearOneElement> {
    if !eps.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if !mult_independent(gamma, delta)? {
        return Err(Error::Dependent);
    }
    let mut norm = Normalization::default();
    let g = if gamma.is_negative() {
        norm.gamma_squared = true;
        gamma * gamma
    } else {
        gamma.clone()
    };
    let mut d = if delta.is_negative() {
        norm.delta_squared = true;
        delta * delta
    } else {
        delta.clone()
    };
    if d < Rational::one() {
        norm.delta_inverted = true;
        d = d.recip();
    }
    let expanding = g > Rational::one();
    let parity = if expanding { 1 } else { 0 };
    let upper = Rational::one() + eps;

    let mut n_terms = 8;
    let mut next_index = 0;
    loop {
        let cf = cf_log_ratio(&d, &g, n_terms, 128)?;
        let convs = convergents(&cf.quotients);
        for (k, (p, q)) in convs.iter().enumerate().skip(next_index) {
            if k % 2 != parity || p.is_zero() {
                continue;
            }
            let a_n = p.clone();
            let b_n = if expanding { q.clone() } else { -q.clone() };
            let sigma = pow_rational(&g, &a_n)? / pow_rational(&d, &b_n)?;
            if sigma > Rational::one() && sigma < upper {
                let a = if norm.gamma_squared { a_n * 2 } else { a_n };
                let mut b = if norm.delta_inverted { -b_n } else { b_n };
                if norm.delta_squared {
                    b *= 2;
                }
                let check = pow_rational(gamma, &a)? / pow_rational(delta, &b)?;
                debug_assert_eq!(check, sigma);
                return Ok(NearOneElement { a, b, sigma: check, convergent_index: k, normalization: norm });
            }
        }
        next_index = convs.len();
        if n_terms >= MAX_TERMS {
            return Err(Error::ResourceLimit(format!("no convergent within {MAX_TERMS} terms satisfies the bound")));
        }
        n_terms *= 2;
    }
}

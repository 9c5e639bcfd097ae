//! Exact p-adic digit expansions of rationals and the periodic
//! representatives `(s/t - A_i) / P^i`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::number::{check_prime, factorize, mod_inverse, split_prime, valuation_unchecked, Rational, Valuation};

/// Eventually periodic expansion `Σ_k d_k p^(valuation + k)`: the digit
/// stream is `preperiod` followed by `period` repeated forever.
///
/// `valuation` is `min(v_p(x), 0)`, so p-adic integers always expand from
/// index 0 and pure periodicity is a property of the digit stream alone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicExpansion {
    pub p: u64,
    pub valuation: i64,
    pub preperiod: Vec<u64>,
    pub period: Vec<u64>,
}

impl PAdicExpansion {
    /// Digit at stream position `k` (coefficient of `p^(valuation + k)`).
    pub fn digit(&self, k: usize) -> u64 {
        if k < self.preperiod.len() {
            self.preperiod[k]
        } else {
            self.period[(k - self.preperiod.len()) % self.period.len()]
        }
    }

    pub fn digits(&self) -> impl Iterator<Item = u64> + '_ {
        (0..).map(move |k| self.digit(k))
    }

    /// Reconstructs the rational value.
    pub fn to_rational(&self) -> Rational {
        let p = BigInt::from(self.p);
        let eval =
            |ds: &[u64]| -> BigInt { ds.iter().rev().fold(BigInt::zero(), |acc, &d| acc * &p + BigInt::from(d)) };
        let pre = Rational::from_integer(eval(&self.preperiod));
        let block = eval(&self.period);
        let cycle = p.pow(self.period.len() as u32) - BigInt::one();
        // Σ_j block p^(jm) = block / (1 - p^m)
        let periodic = Rational::new(-block, cycle);
        let shift = Rational::from_integer(p.pow(self.preperiod.len() as u32));
        let value = pre + periodic * shift;
        value * crate::number::prime_power_rational(self.p, self.valuation)
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.valuation >= 0 && self.preperiod.is_empty()
    }
}

impl fmt::Display for PAdicExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ds: &[u64]| ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "p={} v={} pre=[{}] period=[{}]", self.p, self.valuation, join(&self.preperiod), join(&self.period))
    }
}

/// Exact expansion of `x` in `Q_p`. Zero expands to the all-zero stream.
pub fn expand(x: &Rational, p: u64) -> Result<PAdicExpansion> {
    check_prime(p)?;
    if x.is_zero() {
        return Ok(PAdicExpansion { p, valuation: 0, preperiod: Vec::new(), period: vec![0] });
    }
    let v = match valuation_unchecked(x, p) {
        Valuation::Finite(v) => v,
        Valuation::Infinity => unreachable!(),
    };
    let start = v.min(0);
    // y = x p^(-start) = n / d with p ∤ d
    let (_, d) = split_prime(x.denom(), p);
    let y = x * crate::number::prime_power_rational(p, -start);
    debug_assert_eq!(y.denom(), &d);
    let mut n = y.numer().clone();
    let pb = BigInt::from(p);
    let d_inv = mod_inverse(&d, &pb).expect("p-free denominator");

    // The state n/d is exactly the value of the remaining stream, so the
    // first repeated state gives the minimal preperiod and period.
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut digits = Vec::new();
    loop {
        if let Some(&first) = seen.get(&n) {
            let period = digits.split_off(first);
            return Ok(PAdicExpansion { p, valuation: start, preperiod: digits, period });
        }
        seen.insert(n.clone(), digits.len());
        let digit = (&n * &d_inv).mod_floor(&pb);
        n = (&n - &digit * &d) / &pb;
        digits.push(digit.to_u64().expect("digit below p"));
    }
}

/// True iff the expansion of `x` at `p` starts at index 0 and has no
/// preperiod. Equivalent to `x ∈ Z_p` and `-1 ≤ x ≤ 0`.
pub fn is_purely_periodic(x: &Rational, p: u64) -> Result<bool> {
    Ok(expand(x, p)?.is_purely_periodic())
}

/// The open-interval condition `-1 < x < 0`.
pub fn in_open_negative_unit(x: &Rational) -> bool {
    x.is_negative() && x > &-Rational::one()
}

/// `A_i ≡ s/t (mod P^i)` with `0 ≤ A_i < P^i`, and `ξ_i = (s/t - A_i)/P^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiElement {
    pub s_over_t: Rational,
    pub base: BigUint,
    pub i: u32,
    pub residue: BigInt,
    pub xi: Rational,
}

impl XiElement {
    /// `ξ_i ∈ (-1, 0)` and purely periodic at every prime dividing `P`.
    pub fn is_stable(&self) -> Result<bool> {
        if !in_open_negative_unit(&self.xi) {
            return Ok(false);
        }
        for pp in factorize(&self.base) {
            let p = pp.p.to_u64().ok_or_else(|| Error::invalid("prime factor of P exceeds 64 bits"))?;
            if !is_purely_periodic(&self.xi, p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn xi(s_over_t: &Rational, base: &BigUint, i: u32) -> Result<XiElement> {
    if base < &BigUint::from(2u32) {
        return Err(Error::invalid("P must be at least 2"));
    }
    if i == 0 {
        return Err(Error::invalid("i must be positive"));
    }
    let modulus = BigInt::from(base.pow(i));
    let inv = mod_inverse(s_over_t.denom(), &modulus)
        .ok_or_else(|| Error::invalid(format!("denominator of {s_over_t} is not prime to {base}")))?;
    let residue = (s_over_t.numer() * inv).mod_floor(&modulus);
    let xi = (s_over_t - Rational::from_integer(residue.clone())) / Rational::from_integer(modulus);
    Ok(XiElement { s_over_t: s_over_t.clone(), base: base.clone(), i, residue, xi })
}

/// Smallest observed `I` such that `ξ_i` is stable for every `I < i ≤ i_max`,
/// or `None` if `ξ_{i_max}` itself is not stable.
pub fn xi_threshold(s_over_t: &Rational, base: &BigUint, i_max: u32) -> Result<Option<u32>> {
    let mut threshold = None;
    for i in (1..=i_max).rev() {
        if xi(s_over_t, base, i)?.is_stable()? {
            threshold = Some(i - 1);
        } else {
            break;
        }
    }
    Ok(threshold)
}

//! ε-density certificates, semigroup orbits and empirical coverage.

mod certificate;
mod coverage;
mod orbit;

pub use certificate::{approximate, certificate, Approximation, DensityCertificate};
pub use coverage::{coverage, probe_targets, CellCounts, CellKey, CoverageReport};
pub use orbit::{
    accumulation_profile, enumerate_orbit, orbit_row, AccumulationProfile, OrbitOptions, OrbitPoint, ShellSummary,
    Trend,
};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde_json::json;

use crate::error::{Error, Result};
use crate::number::{abs_unchecked, mult_independent, prime_divisors_u64, Rational};
use crate::solenoid::Multiplier;

/// The semigroup `{γ^a δ^b : a, b ≥ 0}` with its expanding primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemigroupSpec {
    gamma: Multiplier,
    delta: Multiplier,
    prime_set: Vec<u64>,
    p_value: BigInt,
}

impl SemigroupSpec {
    /// Rejects zero and multiplicatively dependent generators.
    pub fn new(gamma: Rational, delta: Rational) -> Result<Self> {
        if !mult_independent(&gamma, &delta)? {
            return Err(Error::Dependent);
        }
        let prime_set = prime_divisors_u64(gamma.denom())?;
        // |γ|_p > 1 exactly at the primes of den(γ)
        let mut p_value = BigInt::one();
        for &p in &prime_set {
            p_value *= abs_unchecked(&gamma, p).to_integer();
        }
        Ok(SemigroupSpec { gamma: Multiplier::new(gamma)?, delta: Multiplier::new(delta)?, prime_set, p_value })
    }

    pub fn gamma(&self) -> &Rational {
        self.gamma.value()
    }

    pub fn delta(&self) -> &Rational {
        self.delta.value()
    }

    pub fn gamma_multiplier(&self) -> &Multiplier {
        &self.gamma
    }

    pub fn delta_multiplier(&self) -> &Multiplier {
        &self.delta
    }

    /// Primes with `|γ|_p > 1`.
    pub fn prime_set(&self) -> &[u64] {
        &self.prime_set
    }

    /// `P = ∏_{p ∈ 𝒫} |γ|_p`.
    pub fn p_value(&self) -> &BigInt {
        &self.p_value
    }

    /// `max(|γ|, |δ|) < 1`.
    pub fn is_contracting(&self) -> bool {
        self.gamma().abs() < Rational::one() && self.delta().abs() < Rational::one()
    }

    /// `δ` is an integer, as the density theorem requires.
    pub fn delta_is_integer(&self) -> bool {
        self.delta().is_integer()
    }

    /// `γ^a δ^b`.
    pub fn element(&self, a: u32, b: u32) -> Rational {
        let pow = |x: &Rational, e: u32| Rational::new(x.numer().pow(e), x.denom().pow(e));
        pow(self.gamma(), a) * pow(self.delta(), b)
    }

    /// Union of the prime supports of both generators.
    pub fn primes(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.gamma.primes().iter().chain(self.delta.primes()).copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "gamma": fmt(self.gamma()),
            "delta": fmt(self.delta()),
            "prime_set": self.prime_set,
            "P": self.p_value.to_string(),
        })
    }
}

pub(crate) fn fmt(x: &Rational) -> String {
    crate::interval::fmt_rational(x)
}

pub(crate) fn tracked_json(m: &BTreeMap<u64, Rational>) -> serde_json::Value {
    serde_json::Value::Object(m.iter().map(|(p, c)| (p.to_string(), json!(fmt(c)))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::rat;

    #[test]
    fn spec_fields() {
        let s = SemigroupSpec::new(rat(3, 2), rat(2, 1)).unwrap();
        assert_eq!(s.prime_set(), &[2]);
        assert_eq!(s.p_value(), &BigInt::from(2));
        let s = SemigroupSpec::new(rat(1, 4), rat(5, 64)).unwrap();
        assert_eq!(s.p_value(), &BigInt::from(4));
        assert!(s.is_contracting());
        assert_eq!(s.element(1, 1), rat(5, 256));
        let s = SemigroupSpec::new(rat(5, 12), rat(7, 1)).unwrap();
        assert_eq!((s.prime_set(), s.p_value()), (&[2u64, 3][..], &BigInt::from(12)));
        assert_eq!(SemigroupSpec::new(rat(1, 4), rat(1, 4)), Err(Error::Dependent));
        assert!(SemigroupSpec::new(rat(0, 1), rat(2, 1)).is_err());
        assert!(SemigroupSpec::new(rat(8, 1), rat(729, 1)).unwrap().p_value().is_one());
        assert!(!SemigroupSpec::new(rat(3, 2), rat(2, 1)).unwrap().is_contracting());
    }
}

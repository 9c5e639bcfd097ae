use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::json;

use super::fmt;
use crate::error::{Error, Result};
use crate::number::{crt, pow_big, primes_from, residue_mod, Rational};
use crate::solenoid::{metric, RealCoord, SolenoidPoint};

/// The exponents `k_p(ε)` and `N(ε) = ∏ p^{k_p}`. Primes with `k_p = 0` are
/// omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityCertificate {
    pub eps: Rational,
    pub kp: BTreeMap<u64, u32>,
    pub n: BigInt,
}

impl DensityCertificate {
    /// `p^{k_p}`, or 1 for primes not in the table.
    pub fn modulus(&self, p: u64) -> BigInt {
        pow_big(p, self.kp.get(&p).copied().unwrap_or(0))
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.kp.keys().copied()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "eps": fmt(&self.eps),
            "kp": self.kp.iter().map(|(p, k)| (p.to_string(), json!(k))).collect::<serde_json::Map<_, _>>(),
            "N": self.n.to_string(),
        })
    }
}

/// `k_p = max(0, j - 1)` with `j` minimal such that `p^j ≥ 1/ε`, for every
/// prime `p < 1/ε`.
pub fn certificate(eps: &Rational) -> Result<DensityCertificate> {
    if !eps.is_positive() || eps >= &Rational::new(1.into(), 2.into()) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1/2), got {eps}")));
    }
    let inv = eps.recip();
    let mut kp = BTreeMap::new();
    let mut n = BigInt::one();
    for p in primes_from(2) {
        let pr = Rational::from_integer(p.into());
        if pr >= inv {
            break;
        }
        let mut j = 0u32;
        let mut pow = Rational::one();
        while pow < inv {
            pow *= &pr;
            j += 1;
        }
        if j > 1 {
            kp.insert(p, j - 1);
            n *= pow_big(p, j - 1);
        }
    }
    Ok(DensityCertificate { eps: eps.clone(), kp, n })
}

/// A diagonal point `(x; n, n, ...)` within `ε` of a target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approximation {
    pub x: Rational,
    pub n: BigInt,
    pub point: SolenoidPoint,
    /// Certified upper bound (or exact value) of the distance.
    pub dist_bound: RealCoord,
}

/// Nearest grid point in the real coordinate and the CRT solution
/// `n ≡ α_p (mod p^{k_p})` at the certificate primes, with `1 ≤ n ≤ N`.
/// When the nearest grid point is 1 the real coordinate wraps to 0 and the
/// congruences become `n ≡ α_p - 1`.
pub fn approximate(alpha: &SolenoidPoint, cert: &DensityCertificate, grid_size: u64) -> Result<Approximation> {
    if grid_size == 0 || Rational::new(1.into(), grid_size.into()) > &cert.eps * Rational::from_integer(2.into()) {
        return Err(Error::invalid(format!("grid of size {grid_size} is not {}-dense", cert.eps)));
    }
    let g = BigInt::from(grid_size);
    let center = match alpha.real() {
        RealCoord::Exact(x) => x.clone(),
        RealCoord::Interval(i) => i.midpoint(),
    };
    let half = Rational::new(1.into(), 2.into());
    let mut j = (center * Rational::from_integer(g.clone()) + half).floor().to_integer();
    // rounding up to 1 means (1; n, n, ...) = (0; n-1, n-1, ...)
    let wrap = if j >= g { Rational::one() } else { Rational::zero() };
    if j >= g {
        j = BigInt::zero();
    }
    let x = Rational::new(j, g);

    let mut system = Vec::new();
    for p in cert.primes() {
        let m = cert.modulus(p);
        system.push((m.clone(), residue_mod(&(alpha.coordinate(p) - &wrap), &m)?));
    }
    let n = crt(&system)?;
    let point = SolenoidPoint::new(x.clone(), BTreeMap::new(), Rational::from_integer(n.clone()))?;
    let dist_bound = metric(alpha, &point);
    if dist_bound.upper() > cert.eps {
        return match alpha.real() {
            RealCoord::Interval(i) => Err(Error::PrecisionExhausted {
                context: format!("distance bound {} exceeds epsilon {}", dist_bound.upper(), cert.eps),
                bits: i.scale(),
            }),
            RealCoord::Exact(_) => {
                Err(Error::invalid(format!("distance {} exceeds epsilon {}", dist_bound.upper(), cert.eps)))
            }
        };
    }
    Ok(Approximation { x, n, point, dist_bound })
}

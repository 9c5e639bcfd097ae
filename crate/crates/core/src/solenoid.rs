//! Points of the fundamental domain `[0,1) × ∏_p Z_p` of the adelic
//! solenoid, the multiplicative action of `Q^×`, and the quotient metric.
//!
//! A point carries a real coordinate, explicit coordinates at finitely many
//! tracked primes, and a single rational `tail` that is its coordinate at
//! every other prime. Multiplication by a rational and translation by the
//! diagonal copy of `Q` both preserve this shape exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{fmt_rational, DyadicInterval};
use crate::number::{
    abs_unchecked, check_prime, factorize, floor_rational, is_prime, prime_divisors_u64, prime_power_rational,
    residue_mod, split_prime, valuation_unchecked, Rational, Valuation,
};

/// Default working precision for certified real coordinates.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

// ---------------------------------------------------------------------------
// real coordinate

/// The archimedean coordinate: an exact rational or a certified interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RealCoord {
    Exact(Rational),
    Interval(DyadicInterval),
}

impl From<Rational> for RealCoord {
    fn from(x: Rational) -> Self {
        RealCoord::Exact(x)
    }
}

impl From<DyadicInterval> for RealCoord {
    fn from(i: DyadicInterval) -> Self {
        RealCoord::Interval(i)
    }
}

impl RealCoord {
    pub fn is_exact(&self) -> bool {
        matches!(self, RealCoord::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            RealCoord::Exact(x) => Some(x),
            RealCoord::Interval(_) => None,
        }
    }

    pub fn lower(&self) -> Rational {
        match self {
            RealCoord::Exact(x) => x.clone(),
            RealCoord::Interval(i) => i.lo(),
        }
    }

    pub fn upper(&self) -> Rational {
        match self {
            RealCoord::Exact(x) => x.clone(),
            RealCoord::Interval(i) => i.hi(),
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            RealCoord::Exact(y) => x == y,
            RealCoord::Interval(i) => i.contains(x),
        }
    }

    /// Working grid scale, if this is an interval.
    pub fn scale(&self) -> Option<u32> {
        match self {
            RealCoord::Exact(_) => None,
            RealCoord::Interval(i) => Some(i.scale()),
        }
    }

    pub fn add_rational(&self, r: &Rational) -> Self {
        match self {
            RealCoord::Exact(x) => RealCoord::Exact(x + r),
            RealCoord::Interval(i) => RealCoord::Interval(i.add_rational(r)),
        }
    }

    pub fn sub_rational(&self, r: &Rational) -> Self {
        self.add_rational(&-r)
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        match self {
            RealCoord::Exact(x) => RealCoord::Exact(x * r),
            RealCoord::Interval(i) => RealCoord::Interval(i.mul_rational(r)),
        }
    }

    pub fn add_integer(&self, n: &BigInt) -> Self {
        match self {
            RealCoord::Exact(x) => RealCoord::Exact(x + Rational::from_integer(n.clone())),
            RealCoord::Interval(i) => RealCoord::Interval(i.add_integer(n)),
        }
    }

    fn to_interval(&self, scale: u32) -> DyadicInterval {
        match self {
            RealCoord::Exact(x) => DyadicInterval::from_rational(x, scale),
            RealCoord::Interval(i) => i.clone(),
        }
    }

    fn combine(
        &self,
        other: &Self,
        exact: impl Fn(&Rational, &Rational) -> Rational,
        interval: impl Fn(&DyadicInterval, &DyadicInterval) -> DyadicInterval,
    ) -> Self {
        match (self, other) {
            (RealCoord::Exact(a), RealCoord::Exact(b)) => RealCoord::Exact(exact(a, b)),
            _ => {
                let scale = self.scale().into_iter().chain(other.scale()).max().expect("one interval");
                RealCoord::Interval(interval(&self.to_interval(scale), &other.to_interval(scale)))
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b, |a, b| a.sub(b))
    }

    pub fn max(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a.max(b).clone(), |a, b| a.max(b))
    }

    pub fn min(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a.min(b).clone(), |a, b| a.min(b))
    }

    pub fn abs(&self) -> Self {
        match self {
            RealCoord::Exact(x) => RealCoord::Exact(x.abs()),
            RealCoord::Interval(i) => RealCoord::Interval(i.abs()),
        }
    }

    /// Floor of the coordinate; fails for intervals that straddle an integer.
    pub fn floor(&self) -> Result<BigInt> {
        match self {
            RealCoord::Exact(x) => Ok(floor_rational(x)),
            RealCoord::Interval(i) => i.floor().ok_or_else(|| Error::PrecisionExhausted {
                context: format!("interval {i} straddles an integer; refine beyond {} bits", i.precision_bits()),
                bits: i.scale(),
            }),
        }
    }
}

impl fmt::Display for RealCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealCoord::Exact(x) => f.write_str(&fmt_rational(x)),
            RealCoord::Interval(i) => write!(f, "{i}"),
        }
    }
}

impl FromStr for RealCoord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('[') {
            let (body, bits) =
                rest.split_once("]@").ok_or_else(|| Error::invalid(format!("malformed interval {s:?}")))?;
            let (lo, hi) = body.split_once(',').ok_or_else(|| Error::invalid(format!("malformed interval {s:?}")))?;
            let scale: u32 = bits.parse().map_err(|_| Error::invalid(format!("bad precision in {s:?}")))?;
            let lo = crate::number::parse_rational(lo)?;
            let hi = crate::number::parse_rational(hi)?;
            let i = DyadicInterval::from_bounds(&lo, &hi, scale);
            if i.lo() != lo || i.hi() != hi || lo > hi {
                return Err(Error::invalid(format!("interval {s:?} is not on its 2^-{scale} grid")));
            }
            Ok(RealCoord::Interval(i))
        } else {
            Ok(RealCoord::Exact(crate::number::parse_rational(s)?))
        }
    }
}

/// A real number that can be realized at any requested precision.
///
/// Irrational values come from a small catalog of quadratic surds
/// `coeff·√radicand + offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealSource {
    Exact(Rational),
    Surd { coeff: Rational, radicand: u64, offset: Rational },
}

impl RealSource {
    pub fn sqrt_minus_one(radicand: u64) -> Self {
        RealSource::Surd { coeff: Rational::one(), radicand, offset: -Rational::one() }
    }

    pub fn golden_ratio() -> Self {
        let half = Rational::new(1.into(), 2.into());
        RealSource::Surd { coeff: half.clone(), radicand: 5, offset: half }
    }

    pub fn realize(&self, bits: u32) -> RealCoord {
        match self {
            RealSource::Exact(x) => RealCoord::Exact(x.clone()),
            RealSource::Surd { coeff, radicand, offset } => {
                let root = DyadicInterval::sqrt_of(&BigUint::from(*radicand), bits);
                RealCoord::Interval(root.mul_rational(coeff).add_rational(offset))
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, RealSource::Exact(_))
    }
}

impl fmt::Display for RealSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealSource::Exact(x) => f.write_str(&fmt_rational(x)),
            RealSource::Surd { coeff, radicand, offset } => {
                if !coeff.is_one() {
                    write!(f, "{}*", fmt_rational(coeff))?;
                }
                write!(f, "sqrt({radicand})")?;
                if offset.is_negative() {
                    write!(f, "-{}", fmt_rational(&-offset))
                } else if offset.is_zero() {
                    Ok(())
                } else {
                    write!(f, "+{}", fmt_rational(offset))
                }
            }
        }
    }
}

impl FromStr for RealSource {
    type Err = Error;

    /// Accepts a fraction, `phi`, `sqrt(n)`, or `sqrt(n)±r`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "phi" || s == "golden" {
            return Ok(RealSource::golden_ratio());
        }
        let (coeff, s) = match s.split_once("*sqrt(") {
            Some((c, rest)) => (crate::number::parse_rational(c)?, &s[s.len() - rest.len() - 5..]),
            None => (Rational::one(), s),
        };
        if coeff.is_zero() {
            return Err(Error::invalid("zero coefficient"));
        }
        if let Some(rest) = s.strip_prefix("sqrt(") {
            let (n, tail) = rest.split_once(')').ok_or_else(|| Error::invalid(format!("malformed {s:?}")))?;
            let radicand: u64 = n.trim().parse().map_err(|_| Error::invalid(format!("bad radicand in {s:?}")))?;
            let offset = match tail.trim() {
                "" => Rational::zero(),
                t if t.starts_with('+') => crate::number::parse_rational(&t[1..])?,
                t if t.starts_with('-') => -crate::number::parse_rational(&t[1..])?,
                t => return Err(Error::invalid(format!("unexpected {t:?} after sqrt(..)"))),
            };
            let root = BigUint::from(radicand).sqrt();
            if &root * &root == BigUint::from(radicand) {
                return Ok(RealSource::Exact(coeff * Rational::from_integer(BigInt::from(root)) + offset));
            }
            return Ok(RealSource::Surd { coeff, radicand, offset });
        }
        if !coeff.is_one() {
            return Err(Error::invalid(format!("malformed {s:?}")));
        }
        Ok(RealSource::Exact(crate::number::parse_rational(s)?))
    }
}

// ---------------------------------------------------------------------------
// points

/// A point with arbitrary coordinates, before reduction into the
/// fundamental domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPoint {
    pub real: RealCoord,
    pub tracked: BTreeMap<u64, Rational>,
    pub tail: Rational,
}

impl RawPoint {
    pub fn coordinate(&self, p: u64) -> &Rational {
        self.tracked.get(&p).unwrap_or(&self.tail)
    }
}

/// A reduced point: real coordinate in `[0, 1)`, every p-adic coordinate in
/// `Z_p`, and every prime of `den(tail)` tracked. Untracked coordinates whose
/// value equals the tail are never stored, which makes the representation
/// canonical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolenoidPoint {
    real: RealCoord,
    tracked: BTreeMap<u64, Rational>,
    tail: Rational,
}

/// The rational `q` with `input - output = q` at every coordinate.
///
/// `q = Σ_p r_p + shift`, where `r_p ∈ [0,1)` is the principal part at each
/// prime where the input had negative valuation and `shift` is the integer
/// floor of the adjusted real coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionWitness {
    pub q: Rational,
    pub principal_parts: BTreeMap<u64, Rational>,
    pub shift: BigInt,
}

/// A nonzero rational multiplier together with its prime support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiplier {
    value: Rational,
    primes: Vec<u64>,
}

impl Multiplier {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::invalid("cannot act by zero"));
        }
        let mut primes = prime_divisors_u64(value.numer())?;
        primes.extend(prime_divisors_u64(value.denom())?);
        primes.sort_unstable();
        primes.dedup();
        Ok(Multiplier { value, primes })
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }
}

/// Principal part of `c` at `p`: the rational in `[0,1)` with p-power
/// denominator such that `c - r ∈ Z_p`. Zero when `c ∈ Z_p`.
pub fn principal_part(c: &Rational, p: u64) -> Rational {
    match valuation_unchecked(c, p) {
        Valuation::Finite(v) if v < 0 => {
            let pk = crate::number::pow_big(p, (-v) as u32);
            let scaled = c * Rational::from_integer(pk.clone());
            let res = residue_mod(&scaled, &pk).expect("p-free denominator after scaling");
            Rational::new(res, pk)
        }
        _ => Rational::zero(),
    }
}

/// Which representative interval of the real coordinate to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealDomain {
    /// `[0, 1)`, the canonical domain.
    Unit,
    /// `[-1/2, 1/2)`.
    Centered,
    /// `(-1, 0]`.
    NonPositive,
}

impl SolenoidPoint {
    /// Builds and reduces a point. Every prime dividing the denominator of
    /// `tail` needs an explicit coordinate.
    pub fn new(real: impl Into<RealCoord>, tracked: BTreeMap<u64, Rational>, tail: Rational) -> Result<Self> {
        Ok(Self::reduce(RawPoint { real: real.into(), tracked, tail })?.0)
    }

    /// The point `(x; 0, 0, ...)`.
    pub fn real_only(x: impl Into<RealCoord>) -> Result<Self> {
        Self::new(x, BTreeMap::new(), Rational::zero())
    }

    pub fn zero() -> Self {
        SolenoidPoint { real: RealCoord::Exact(Rational::zero()), tracked: BTreeMap::new(), tail: Rational::zero() }
    }

    pub fn real(&self) -> &RealCoord {
        &self.real
    }

    pub fn tracked(&self) -> &BTreeMap<u64, Rational> {
        &self.tracked
    }

    pub fn tail(&self) -> &Rational {
        &self.tail
    }

    /// Coordinate at the prime `p`.
    pub fn coordinate(&self, p: u64) -> &Rational {
        self.tracked.get(&p).unwrap_or(&self.tail)
    }

    pub fn to_raw(&self) -> RawPoint {
        RawPoint { real: self.real.clone(), tracked: self.tracked.clone(), tail: self.tail.clone() }
    }

    /// Translates a point into the fundamental domain by a diagonal rational.
    pub fn reduce(raw: RawPoint) -> Result<(Self, ReductionWitness)> {
        for &p in raw.tracked.keys() {
            check_prime(p)?;
        }
        let mut rest = raw.tail.denom().clone();
        for &p in raw.tracked.keys() {
            rest = split_prime(&rest, p).1;
        }
        if !rest.is_one() {
            let smallest = factorize(rest.magnitude())[0].p.clone();
            let p = u64::try_from(smallest).map_err(|_| Error::invalid("tail prime exceeds 64 bits"))?;
            return Err(Error::UntrackedTailPrime(p));
        }

        let mut principal_parts = BTreeMap::new();
        let mut sum = Rational::zero();
        for (&p, c) in &raw.tracked {
            let r = principal_part(c, p);
            if !r.is_zero() {
                sum += &r;
                principal_parts.insert(p, r);
            }
        }
        let shift = raw.real.sub_rational(&sum).floor()?;
        let q = sum + Rational::from_integer(shift.clone());

        let real = raw.real.sub_rational(&q);
        let tail = raw.tail - &q;
        let tracked: BTreeMap<u64, Rational> =
            raw.tracked.into_iter().map(|(p, c)| (p, c - &q)).filter(|(_, c)| c != &tail).collect();
        debug_assert!(tracked.iter().all(|(&p, c)| valuation_unchecked(c, p) >= Valuation::Finite(0)));
        Ok((SolenoidPoint { real, tracked, tail }, ReductionWitness { q, principal_parts, shift }))
    }

    /// Multiplies every coordinate by `sigma` and reduces.
    pub fn act(&self, sigma: &Rational) -> Result<(Self, ReductionWitness)> {
        self.act_by(&Multiplier::new(sigma.clone())?)
    }

    pub fn act_by(&self, m: &Multiplier) -> Result<(Self, ReductionWitness)> {
        Self::reduce(self.scaled(m))
    }

    /// Coordinatewise product with the tracked set enlarged by the primes
    /// of the multiplier (unreduced).
    pub fn scaled(&self, m: &Multiplier) -> RawPoint {
        let sigma = &m.value;
        let mut tracked: BTreeMap<u64, Rational> = self.tracked.iter().map(|(&p, c)| (p, c * sigma)).collect();
        let tail = &self.tail * sigma;
        for &p in &m.primes {
            tracked.entry(p).or_insert_with(|| tail.clone());
        }
        RawPoint { real: self.real.mul_rational(sigma), tracked, tail }
    }

    /// The real coordinate of the representative in `domain`, together with
    /// the integer `n` such that the representative is `self - n`.
    pub fn real_in(&self, domain: RealDomain) -> Result<(RealCoord, BigInt)> {
        let half = Rational::new(1.into(), 2.into());
        let shift = match domain {
            RealDomain::Unit => BigInt::zero(),
            RealDomain::Centered => self.real.sub_rational(&-half).floor()?.max(BigInt::zero()),
            RealDomain::NonPositive => match &self.real {
                RealCoord::Exact(x) if x.is_zero() => BigInt::zero(),
                RealCoord::Exact(_) => BigInt::one(),
                RealCoord::Interval(i) if i.lo().is_positive() => BigInt::one(),
                RealCoord::Interval(i) => {
                    return Err(Error::PrecisionExhausted {
                        context: "real coordinate may be zero; (-1,0] representative undecided".into(),
                        bits: i.scale(),
                    })
                }
            },
        };
        Ok((self.real.add_integer(&-&shift), shift))
    }

    /// Upper bound on `|x|` for the representative `x ∈ [-1/2, 1/2)`.
    ///
    /// Intervals that straddle `1/2` are bounded by both representatives.
    pub fn centered_abs_upper(&self) -> Rational {
        let half = Rational::new(1.into(), 2.into());
        match self.real_in(RealDomain::Centered) {
            Ok((r, _)) => r.abs().upper(),
            // straddles 1/2, so |x| is within rounding of 1/2
            Err(_) => half,
        }
    }

    /// Primes at which either point has an explicit coordinate.
    pub fn tracked_union(&self, other: &Self) -> BTreeSet<u64> {
        self.tracked.keys().chain(other.tracked.keys()).copied().collect()
    }
}

/// `d(a,b) = min_{η ∈ {0,±1}} max(|a_∞ - b_∞ - η|, max_p |a_p - b_p - η|_p / p)`.
///
/// The supremum over infinitely many primes reduces to a finite scan: at an
/// untracked prime both coordinates are the tails, so the difference is the
/// fixed rational `z = tail_a - tail_b - η`, whose denominator involves
/// tracked primes only. For `z ≠ 0` the term at an untracked prime `p` is
/// `p^(-v_p(z)-1)`, which is `1/p` unless `p | num(z)`. Scanning untracked
/// primes in increasing order up to and including the first one not dividing
/// `num(z)` covers every term that can be the maximum: all later primes give
/// at most `1/p'` with `p'` larger.
pub fn metric(a: &SolenoidPoint, b: &SolenoidPoint) -> RealCoord {
    let union = a.tracked_union(b);
    let diff = a.real.sub(&b.real);
    let mut best: Option<RealCoord> = None;
    for eta in [-1i64, 0, 1] {
        let eta = Rational::from_integer(eta.into());
        let mut padic = Rational::zero();
        for &p in &union {
            let z = a.coordinate(p) - b.coordinate(p) - &eta;
            let term = abs_unchecked(&z, p) / Rational::from_integer(p.into());
            padic = padic.max(term);
        }
        let z = &a.tail - &b.tail - &eta;
        if !z.is_zero() {
            for p in crate::number::primes_from(2).filter(|p| !union.contains(p)) {
                let (v, _) = split_prime(z.numer(), p);
                padic = padic.max(prime_power_rational(p, -(v as i64) - 1));
                if v == 0 {
                    break;
                }
            }
        }
        let real_term = diff.sub_rational(&eta).abs();
        let candidate = real_term.max(&RealCoord::Exact(padic));
        best = Some(match best {
            None => candidate,
            Some(b) => b.min(&candidate),
        });
    }
    best.expect("three candidates")
}

/// Equality in the quotient. Reduced forms are canonical, so this compares
/// coordinates. Interval real coordinates make the question undecidable.
pub fn equals_in_quotient(a: &SolenoidPoint, b: &SolenoidPoint) -> Result<bool> {
    let (Some(x), Some(y)) = (a.real.as_exact(), b.real.as_exact()) else {
        return Err(Error::Undecidable("equality of interval real coordinates".into()));
    };
    if x != y || a.tail != b.tail {
        return Ok(false);
    }
    Ok(a.tracked_union(b).into_iter().all(|p| a.coordinate(p) == b.coordinate(p)))
}

impl fmt::Display for SolenoidPoint {
    /// `real;p:a/b,...;tail`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tracked: Vec<String> = self.tracked.iter().map(|(p, c)| format!("{p}:{}", fmt_rational(c))).collect();
        write!(f, "{};{};{}", self.real, tracked.join(","), fmt_rational(&self.tail))
    }
}

impl FromStr for SolenoidPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(';').collect();
        let [real, tracked, tail] = parts.as_slice() else {
            return Err(Error::invalid(format!("expected real;tracked;tail, got {s:?}")));
        };
        let real: RealCoord = real.parse()?;
        let mut map = BTreeMap::new();
        for entry in tracked.split(',').filter(|e| !e.trim().is_empty()) {
            let (p, c) =
                entry.split_once(':').ok_or_else(|| Error::invalid(format!("malformed tracked entry {entry:?}")))?;
            let p: u64 = p.trim().parse().map_err(|_| Error::invalid(format!("bad prime in {entry:?}")))?;
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            map.insert(p, crate::number::parse_rational(c)?);
        }
        let tail = crate::number::parse_rational(tail)?;
        let raw = RawPoint { real, tracked: map, tail };
        let (point, witness) = SolenoidPoint::reduce(raw.clone())?;
        if !witness.q.is_zero() || point.to_raw() != raw {
            return Err(Error::invalid(format!("{s:?} is not a reduced point")));
        }
        Ok(point)
    }
}

/// A base point whose real coordinate can be re-realized at higher
/// precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasePoint {
    pub real: RealSource,
    pub tracked: BTreeMap<u64, Rational>,
    pub tail: Rational,
}

impl BasePoint {
    pub fn new(real: RealSource, tracked: BTreeMap<u64, Rational>, tail: Rational) -> Self {
        BasePoint { real, tracked, tail }
    }

    pub fn realize(&self, bits: u32) -> Result<SolenoidPoint> {
        SolenoidPoint::new(self.real.realize(bits), self.tracked.clone(), self.tail.clone())
    }
}

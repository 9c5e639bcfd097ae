//! Closed intervals with dyadic endpoints on a fixed grid `2^-scale`.
//!
//! Every operation rounds outward, so the true value is always enclosed.
//! The grid scale is chosen when an interval is created and is preserved
//! by arithmetic with rationals; binary operations use the finer grid.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::number::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    lo: BigInt,
    hi: BigInt,
    scale: u32,
}

fn floor_div(n: &BigInt, d: &BigInt) -> BigInt {
    n.div_floor(d)
}

fn ceil_div(n: &BigInt, d: &BigInt) -> BigInt {
    -((-n).div_floor(d))
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

/// `floor(x * 2^scale)`.
pub fn grid_floor(x: &Rational, scale: u32) -> BigInt {
    floor_div(&(x.numer() << scale), x.denom())
}

/// `ceil(x * 2^scale)`.
pub fn grid_ceil(x: &Rational, scale: u32) -> BigInt {
    ceil_div(&(x.numer() << scale), x.denom())
}

impl DyadicInterval {
    /// Interval from grid numerators: `[lo / 2^scale, hi / 2^scale]`.
    pub fn from_grid(lo: BigInt, hi: BigInt, scale: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        DyadicInterval { lo, hi, scale }
    }

    /// Smallest grid interval containing `x`.
    pub fn from_rational(x: &Rational, scale: u32) -> Self {
        Self::from_bounds(x, x, scale)
    }

    /// Smallest grid interval containing `[lo, hi]`.
    pub fn from_bounds(lo: &Rational, hi: &Rational, scale: u32) -> Self {
        Self::from_grid(grid_floor(lo, scale), grid_ceil(hi, scale), scale)
    }

    pub fn lo(&self) -> Rational {
        Rational::new(self.lo.clone(), pow2(self.scale))
    }

    pub fn hi(&self) -> Rational {
        Rational::new(self.hi.clone(), pow2(self.scale))
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn grid_lo(&self) -> &BigInt {
        &self.lo
    }

    pub fn grid_hi(&self) -> &BigInt {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        Rational::new(&self.hi - &self.lo, pow2(self.scale))
    }

    pub fn midpoint(&self) -> Rational {
        Rational::new(&self.hi + &self.lo, pow2(self.scale + 1))
    }

    /// Largest `k` with `hi - lo ≤ 2^(1-k)`.
    pub fn precision_bits(&self) -> i64 {
        let w = &self.hi - &self.lo;
        if w.is_zero() {
            // exact at grid resolution
            return self.scale as i64 + 1;
        }
        // w ≤ 2^c with c = ceil(log2 w)
        let bits = w.bits();
        let c = if (&w & (&w - 1u32)).is_zero() { bits - 1 } else { bits };
        self.scale as i64 + 1 - c as i64
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo() <= x && x <= &self.hi()
    }

    pub fn encloses(&self, other: &DyadicInterval) -> bool {
        self.lo() <= other.lo() && other.hi() <= self.hi()
    }

    /// Re-expresses on a (possibly coarser) grid, rounding outward.
    pub fn rescale(&self, scale: u32) -> Self {
        match scale.cmp(&self.scale) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let s = scale - self.scale;
                Self::from_grid(&self.lo << s, &self.hi << s, scale)
            }
            Ordering::Less => {
                let d = pow2(self.scale - scale);
                Self::from_grid(floor_div(&self.lo, &d), ceil_div(&self.hi, &d), scale)
            }
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let s = self.scale.max(other.scale);
        (self.rescale(s), other.rescale(s))
    }

    pub fn add_rational(&self, r: &Rational) -> Self {
        Self::from_grid(&self.lo + grid_floor(r, self.scale), &self.hi + grid_ceil(r, self.scale), self.scale)
    }

    /// Adds an integer exactly.
    pub fn add_integer(&self, n: &BigInt) -> Self {
        let shifted = n << self.scale;
        Self::from_grid(&self.lo + &shifted, &self.hi + &shifted, self.scale)
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        let (n, d) = (r.numer(), r.denom());
        let a = &self.lo * n;
        let b = &self.hi * n;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Self::from_grid(floor_div(&lo, d), ceil_div(&hi, d), self.scale)
    }

    pub fn neg(&self) -> Self {
        Self::from_grid(-&self.hi, -&self.lo, self.scale)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self::from_grid(&a.lo + &b.lo, &a.hi + &b.hi, a.scale)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let products = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let lo = products.iter().min().unwrap();
        let hi = products.iter().max().unwrap();
        let d = pow2(a.scale);
        Self::from_grid(floor_div(lo, &d), ceil_div(hi, &d), a.scale)
    }

    /// Quotient, or `None` when the divisor contains zero.
    pub fn div(&self, other: &Self) -> Option<Self> {
        let (a, b) = self.aligned(other);
        if b.lo.sign() != b.hi.sign() || b.lo.is_zero() || b.hi.is_zero() {
            return None;
        }
        let s = a.scale;
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for x in [&a.lo, &a.hi] {
            for y in [&b.lo, &b.hi] {
                let n = x << s;
                let f = floor_div(&n, y);
                let c = ceil_div(&n, y);
                lo = Some(match lo {
                    Some(v) if v <= f => v,
                    _ => f,
                });
                hi = Some(match hi {
                    Some(v) if v >= c => v,
                    _ => c,
                });
            }
        }
        Some(Self::from_grid(lo.unwrap(), hi.unwrap(), s))
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let m = (-&self.lo).max(self.hi.clone());
            Self::from_grid(BigInt::zero(), m, self.scale)
        }
    }

    /// Enclosure of `max(x, y)` for `x` in self and `y` in other.
    pub fn max(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self::from_grid(a.lo.max(b.lo), a.hi.max(b.hi), a.scale)
    }

    pub fn min(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self::from_grid(a.lo.min(b.lo), a.hi.min(b.hi), a.scale)
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self::from_grid(a.lo.min(b.lo), a.hi.max(b.hi), a.scale)
    }

    /// Floor of every enclosed value, if they all agree.
    pub fn floor(&self) -> Option<BigInt> {
        let d = pow2(self.scale);
        let a = floor_div(&self.lo, &d);
        let b = floor_div(&self.hi, &d);
        (a == b).then_some(a)
    }

    /// Floors of the two endpoints.
    pub fn floor_range(&self) -> (BigInt, BigInt) {
        let d = pow2(self.scale);
        (floor_div(&self.lo, &d), floor_div(&self.hi, &d))
    }

    /// Enclosure of `sqrt(n)`.
    pub fn sqrt_of(n: &BigUint, scale: u32) -> Self {
        let shifted: BigUint = n << (2 * scale);
        let r = shifted.sqrt();
        let exact = &r * &r == shifted;
        let r = BigInt::from(r);
        let hi = if exact { r.clone() } else { &r + 1 };
        Self::from_grid(r, hi, scale)
    }

    /// Enclosure of the natural logarithm of a positive rational.
    pub fn ln(x: &Rational, scale: u32) -> Self {
        assert!(x.is_positive(), "logarithm of a non-positive number");
        let work = scale + 32;
        // x = 2^k * y with y in [1, 2)
        let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
        let mut y = x / crate::number::prime_power_rational(2, k);
        if y < Rational::one() {
            y *= Rational::from_integer(2.into());
            k -= 1;
        }
        debug_assert!(y >= Rational::one() && y < Rational::from_integer(2.into()));
        let one = Rational::one();
        let z = (&y - &one) / (&y + &one);
        let ln_y = atanh_series(&z, work).mul_rational(&Rational::from_integer(2.into()));
        let ln2 =
            atanh_series(&Rational::new(1.into(), 3.into()), work).mul_rational(&Rational::from_integer(2.into()));
        let total = ln2.mul_rational(&Rational::from_integer(k.into())).add(&ln_y);
        total.rescale(scale)
    }
}

/// Enclosure of `atanh(z) = Σ z^(2n+1)/(2n+1)` for rational `0 ≤ z ≤ 1/3`.
fn atanh_series(z: &Rational, scale: u32) -> DyadicInterval {
    debug_assert!(!z.is_negative() && z <= &Rational::new(1.into(), 3.into()));
    if z.is_zero() {
        return DyadicInterval::from_grid(BigInt::zero(), BigInt::zero(), scale);
    }
    let z2 = z * z;
    let ulp = Rational::new(BigInt::one(), pow2(scale));
    let mut power = z.clone();
    let mut n: u64 = 0;
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    loop {
        let term = &power / Rational::from_integer((2 * n + 1).into());
        lo += grid_floor(&term, scale);
        hi += grid_ceil(&term, scale);
        power *= &z2;
        n += 1;
        if power < ulp {
            break;
        }
    }
    // remainder Σ_{j≥n} z^(2j+1)/(2j+1) ≤ z^(2n+1) / ((2n+1)(1 - z²))
    let rem = &power / (Rational::from_integer((2 * n + 1).into()) * (Rational::one() - &z2));
    hi += grid_ceil(&rem, scale);
    DyadicInterval::from_grid(lo, hi, scale)
}

impl fmt::Display for DyadicInterval {
    /// `[lo,hi]@scale` with endpoints as reduced fractions.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]@{}", fmt_rational(&self.lo()), fmt_rational(&self.hi()), self.scale)
    }
}

/// Renders a rational as `a/b`, always with an explicit denominator.
pub fn fmt_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

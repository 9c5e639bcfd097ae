//! Property tests against independent oracles.

use std::collections::BTreeMap;

use crate::approx::{cf_log_ratio, convergents, find_near_one};
use crate::density::{approximate, certificate, coverage, enumerate_orbit, OrbitOptions, SemigroupSpec};
use crate::ifs::hutchinson_dimension;
use crate::interval::DyadicInterval;
use crate::number::{crt, rat, Rational};
use crate::padic::{expand, is_purely_periodic};
use crate::solenoid::{equals_in_quotient, metric, BasePoint, RawPoint, RealCoord, RealSource, SolenoidPoint};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

const TRACKED: [u64; 4] = [2, 3, 5, 7];
const SMOOTH_DENS: [i64; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 15];

fn small_rational(num: i64, den: i64) -> impl Strategy<Value = Rational> {
    (-num..=num, 1..=den).prop_map(|(a, b)| rat(a, b))
}

fn smooth_rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 0..SMOOTH_DENS.len()).prop_map(|(a, i)| rat(a, SMOOTH_DENS[i]))
}

fn raw_point() -> impl Strategy<Value = RawPoint> {
    (small_rational(60, 48), prop::collection::vec(small_rational(60, 48), 4), -30i64..=30).prop_map(
        |(real, coords, tail)| RawPoint {
            real: real.into(),
            tracked: TRACKED.iter().copied().zip(coords).collect(),
            tail: Rational::from_integer(tail.into()),
        },
    )
}

fn point() -> impl Strategy<Value = SolenoidPoint> {
    raw_point().prop_map(|r| SolenoidPoint::reduce(r).unwrap().0)
}

fn primes_below(n: u64) -> Vec<u64> {
    (2..n).filter(|&k| (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0)).collect()
}

/// `|x|_p` by repeated division.
fn abs_p(x: &Rational, p: u64) -> Rational {
    if x.is_zero() {
        return Rational::zero();
    }
    let p = BigInt::from(p);
    let mut v = 0i32;
    let (mut n, mut d) = (x.numer().abs(), x.denom().clone());
    while n.is_multiple_of(&p) {
        n /= &p;
        v += 1;
    }
    while d.is_multiple_of(&p) {
        d /= &p;
        v -= 1;
    }
    let pr = Rational::from_integer(p);
    if v >= 0 {
        Rational::one() / pr.pow(v)
    } else {
        pr.pow(-v)
    }
}

fn coord(pt: &SolenoidPoint, p: u64) -> Rational {
    pt.coordinate(p).clone()
}

/// The metric with every prime below 200 scanned directly. Coordinates are
/// tracked at primes ≤ 7 and tails are integers of size ≤ 61, so some prime
/// below 200 contributes at least as much as any larger prime.
fn brute_metric(a: &SolenoidPoint, b: &SolenoidPoint) -> Rational {
    let x = a.real().as_exact().unwrap() - b.real().as_exact().unwrap();
    let primes = primes_below(200);
    [-1i64, 0, 1]
        .iter()
        .map(|&e| {
            let eta = Rational::from_integer(e.into());
            let mut m = (&x - &eta).abs();
            for &p in &primes {
                let z = coord(a, p) - coord(b, p) - &eta;
                m = m.max(abs_p(&z, p) / Rational::from_integer(p.into()));
            }
            m
        })
        .min()
        .unwrap()
}

fn exact(d: RealCoord) -> Rational {
    d.as_exact().cloned().expect("exact distance")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduced_points_are_canonical(raw in raw_point()) {
        let (pt, w) = SolenoidPoint::reduce(raw.clone()).unwrap();
        let x = pt.real().as_exact().unwrap();
        prop_assert!(!x.is_negative() && x < &Rational::one());
        for p in TRACKED {
            prop_assert!(abs_p(&coord(&pt, p), p) <= Rational::one());
            prop_assert_eq!(raw.coordinate(p) - &w.q, coord(&pt, p));
        }
        prop_assert_eq!(raw.real.as_exact().unwrap() - &w.q, x.clone());
        prop_assert_eq!(&raw.tail - &w.q, pt.tail().clone());
        let (again, w2) = SolenoidPoint::reduce(pt.to_raw()).unwrap();
        prop_assert!(w2.q.is_zero());
        prop_assert_eq!(again, pt);
    }

    #[test]
    fn shifted_representatives_agree(raw in raw_point(), q in smooth_rational()) {
        let shifted = RawPoint {
            real: raw.real.add_rational(&q),
            tracked: raw.tracked.iter().map(|(&p, c)| (p, c + &q)).collect(),
            tail: &raw.tail + &q,
        };
        let a = SolenoidPoint::reduce(raw).unwrap().0;
        let b = SolenoidPoint::reduce(shifted).unwrap().0;
        prop_assert!(equals_in_quotient(&a, &b).unwrap());
        prop_assert!(exact(metric(&a, &b)).is_zero());
    }

    #[test]
    fn metric_matches_prime_scan(a in point(), b in point()) {
        prop_assert_eq!(exact(metric(&a, &b)), brute_metric(&a, &b));
    }

    #[test]
    fn metric_axioms(a in point(), b in point(), c in point()) {
        let ab = exact(metric(&a, &b));
        let bc = exact(metric(&b, &c));
        let ac = exact(metric(&a, &c));
        prop_assert_eq!(&ab, &exact(metric(&b, &a)));
        prop_assert!(!ab.is_negative());
        prop_assert_eq!(ab.is_zero(), equals_in_quotient(&a, &b).unwrap());
        prop_assert!(ac <= &ab + &bc);
        prop_assert!(exact(metric(&a, &a)).is_zero());
    }

    #[test]
    fn action_composes(pt in point(), s in 0usize..6, t in 0usize..6) {
        let sigmas = [rat(3, 2), rat(2, 1), rat(5, 7), rat(-4, 9), rat(7, 10), rat(6, 1)];
        let (s, t) = (&sigmas[s], &sigmas[t]);
        let step = pt.act(s).unwrap().0.act(t).unwrap().0;
        let once = pt.act(&(s * t)).unwrap().0;
        prop_assert!(equals_in_quotient(&step, &once).unwrap());
    }

    #[test]
    fn display_round_trips(pt in point()) {
        let text = pt.to_string();
        prop_assert_eq!(text.parse::<SolenoidPoint>().unwrap(), pt);
    }

    #[test]
    fn padic_expansion_round_trips(x in small_rational(500, 500), pi in 0usize..5) {
        let p = [2u64, 3, 5, 7, 11][pi];
        let e = expand(&x, p).unwrap();
        prop_assert_eq!(e.to_rational(), x.clone());
        prop_assert!(e.preperiod.iter().chain(&e.period).all(|&d| d < p));
        prop_assert!(!e.period.is_empty());
    }

    #[test]
    fn pure_periodicity_criterion(x in small_rational(500, 500), pi in 0usize..5) {
        let p = [2u64, 3, 5, 7, 11][pi];
        let integral = !x.denom().is_multiple_of(&BigInt::from(p));
        let expected = integral && x >= rat(-1, 1) && x <= Rational::zero();
        prop_assert_eq!(is_purely_periodic(&x, p).unwrap(), expected);
    }

    #[test]
    fn crt_solves_every_congruence(
        es in prop::collection::vec(1u32..4, 4),
        rs in prop::collection::vec(0i64..1000, 4),
    ) {
        let pairs: Vec<(BigInt, BigInt)> = TRACKED
            .iter()
            .zip(&es)
            .zip(&rs)
            .map(|((&p, &e), &r)| (BigInt::from(p).pow(e), BigInt::from(r)))
            .collect();
        let n = crt(&pairs).unwrap();
        let modulus: BigInt = pairs.iter().map(|(m, _)| m.clone()).product();
        prop_assert!(n >= BigInt::one() && n <= modulus);
        for (m, r) in &pairs {
            prop_assert_eq!(n.mod_floor(m), r.mod_floor(m));
        }
    }

    #[test]
    fn convergent_determinants(gi in 0usize..5, di in 0usize..5) {
        let gens = [rat(2, 1), rat(3, 1), rat(3, 2), rat(5, 1), rat(7, 3)];
        prop_assume!(gi != di);
        let prefix = cf_log_ratio(&gens[di], &gens[gi], 12, 64).unwrap();
        let cs = convergents(&prefix.quotients);
        for k in 1..cs.len() {
            let (p1, q1) = &cs[k - 1];
            let (p2, q2) = &cs[k];
            prop_assert_eq!((p2 * q1 - p1 * q2).abs(), BigInt::one());
        }
        for (p, q) in &cs {
            let c = Rational::new(p.clone(), q.clone());
            // Every convergent lies in or next to the certified enclosure.
            let width = prefix.enclosure.width() + Rational::new(BigInt::one(), q * q);
            prop_assert!((&c - prefix.enclosure.midpoint()).abs() <= width);
        }
    }

    #[test]
    fn certificate_matches_power_scan(m in 3i64..400) {
        let eps = rat(1, m);
        let cert = certificate(&eps).unwrap();
        let mut n = BigInt::one();
        for p in primes_below(m as u64) {
            let j = (0u32..).find(|&j| BigInt::from(p).pow(j) >= BigInt::from(m)).unwrap();
            let k = j.saturating_sub(1);
            prop_assert_eq!(cert.kp.get(&p).copied().unwrap_or(0), k);
            n *= BigInt::from(p).pow(k);
        }
        prop_assert_eq!(cert.n, n);
    }

    #[test]
    fn approximation_within_eps(pt in point(), m in 3i64..40) {
        let eps = rat(1, m);
        let cert = certificate(&eps).unwrap();
        let grid = (m as u64).div_ceil(2).max(1) * 2;
        let ap = approximate(&pt, &cert, grid).unwrap();
        prop_assert!(ap.n >= BigInt::one() && ap.n <= cert.n);
        let d = exact(metric(&pt, &ap.point));
        prop_assert!(d <= eps);
        prop_assert!(exact(ap.dist_bound) >= d);
    }

    #[test]
    fn interval_arithmetic_encloses(
        x in small_rational(1000, 97),
        y in small_rational(1000, 89),
        scale in 4u32..80,
    ) {
        let ix = DyadicInterval::from_rational(&x, scale);
        let iy = DyadicInterval::from_rational(&y, scale);
        prop_assert!(ix.add(&iy).contains(&(&x + &y)));
        prop_assert!(ix.sub(&iy).contains(&(&x - &y)));
        prop_assert!(ix.mul(&iy).contains(&(&x * &y)));
        if let Some(q) = ix.div(&iy) {
            prop_assert!(y.is_zero() || q.contains(&(&x / &y)));
        }
    }

    #[test]
    fn sqrt_enclosure(n in 2u64..10_000, scale in 4u32..120) {
        let s = DyadicInterval::sqrt_of(&BigUint::from(n), scale);
        let target = Rational::from_integer(n.into());
        prop_assert!(s.lo().pow(2) <= target && s.hi().pow(2) >= target);
    }

    #[test]
    fn hutchinson_equation_holds(dens in prop::collection::vec(2i64..12, 2..6)) {
        let ratios: Vec<Rational> = dens.iter().map(|&d| rat(1, d)).collect();
        let dim = hutchinson_dimension(&ratios).unwrap();
        let sum: f64 = ratios.iter().map(|r| r.to_f64().unwrap().powf(dim.value)).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-10, "Σ r^s = {sum}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn near_one_deepens_as_eps_shrinks(gi in 0usize..4, di in 0usize..4) {
        let gens = [rat(2, 1), rat(3, 1), rat(3, 2), rat(5, 1)];
        prop_assume!(gi != di);
        let (g, d) = (&gens[gi], &gens[di]);
        let mut last = BigInt::zero();
        for m in [3i64, 10, 100, 1000] {
            let eps = rat(1, m);
            let e = find_near_one(g, d, &eps).unwrap();
            prop_assert!(e.sigma > Rational::one() && e.sigma < Rational::one() + &eps);
            prop_assert!(e.b.abs() >= last);
            last = e.b.abs();
        }
    }

    #[test]
    fn eight_and_729_fix_two_sevenths(
        tail in -50i64..=50,
        c2 in (-20i64..=20, prop::sample::select(vec![1i64, 3, 5])).prop_map(|(a, b)| rat(a, b)),
        c3 in (-20i64..=20, prop::sample::select(vec![1i64, 2, 4])).prop_map(|(a, b)| rat(a, b)),
    ) {
        // c2 is a 2-adic integer and c3 a 3-adic integer; their denominators
        // are tracked at the other prime or untracked altogether.
        let spec = SemigroupSpec::new(rat(8, 1), rat(729, 1)).unwrap();
        let tracked: BTreeMap<u64, Rational> = [(2, c2), (3, c3)].into_iter().collect();
        let base = BasePoint::new(RealSource::Exact(rat(2, 7)), tracked, rat(tail, 1));
        let base = match base.realize(64) {
            Ok(_) => base,
            Err(_) => return Ok(()),
        };
        for p in enumerate_orbit(&base, &spec, 10, 10, &OrbitOptions::default()).unwrap() {
            prop_assert_eq!(p.point.real(), &RealCoord::Exact(rat(2, 7)));
        }
    }

    #[test]
    fn incremental_orbit_matches_direct(real in small_rational(30, 29), c2 in small_rational(9, 9), every in 2u32..9) {
        prop_assume!(c2.denom().is_odd());
        let spec = SemigroupSpec::new(rat(3, 2), rat(2, 1)).unwrap();
        let base = BasePoint::new(RealSource::Exact(real), [(2, c2)].into_iter().collect(), rat(0, 1));
        let alpha = base.realize(64).unwrap();
        let opts = OrbitOptions { reanchor_every: every, ..OrbitOptions::default() };
        for p in enumerate_orbit(&base, &spec, 4, 12, &opts).unwrap() {
            let (direct, _) = alpha.act(&spec.element(p.a, p.b)).unwrap();
            prop_assert!(equals_in_quotient(&p.point, &direct).unwrap());
        }
    }

    #[test]
    fn sharding_is_deterministic(threads in 2usize..6, radicand in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let spec = SemigroupSpec::new(rat(3, 2), rat(2, 1)).unwrap();
        let base = BasePoint::new(RealSource::sqrt_minus_one(radicand), BTreeMap::new(), rat(0, 1));
        let serial = enumerate_orbit(&base, &spec, 10, 10, &OrbitOptions::default()).unwrap();
        let sharded = enumerate_orbit(&base, &spec, 10, 10, &OrbitOptions { threads, ..OrbitOptions::default() }).unwrap();
        prop_assert_eq!(serial, sharded);
    }

    #[test]
    fn coverage_grows_with_bounds(lo in 2u32..6, extra in 1u32..5, m in prop::sample::select(vec![2u64, 4, 8])) {
        let spec = SemigroupSpec::new(rat(3, 2), rat(2, 1)).unwrap();
        let base = BasePoint::new(RealSource::sqrt_minus_one(2), BTreeMap::new(), rat(0, 1));
        let cert = certificate(&rat(1, 6)).unwrap();
        let opts = OrbitOptions::default();
        let small = enumerate_orbit(&base, &spec, lo, lo, &opts).unwrap();
        let large = enumerate_orbit(&base, &spec, lo + extra, lo + extra, &opts).unwrap();
        let a = coverage(&small, &cert, m, 0, 0).unwrap();
        let b = coverage(&large, &cert, m, 0, 0).unwrap();
        prop_assert!(a.fraction_covered <= b.fraction_covered);
    }
}

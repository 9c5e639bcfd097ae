//! Replayable checks over every worked example, grouped by subject.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approx::{cf_log_ratio, find_near_one, pow_rational};
use crate::density::{
    accumulation_profile, approximate, certificate, enumerate_orbit, OrbitOptions, SemigroupSpec, Trend,
};
use crate::error::Result;
use crate::ifs::{
    box_counting, dimension_report, four_map_system, generate_attractor, hutchinson_dimension, t3_within_t2,
    t4_within_t1, verify_correspondence_with, AttractorMode, IfsSystem,
};
use crate::interval::fmt_rational;
use crate::number::{crt, rat, Rational};
use crate::padic::{expand, is_purely_periodic, xi};
use crate::solenoid::{metric, BasePoint, RawPoint, RealCoord, RealSource, SolenoidPoint};

pub const GROUPS: [&str; 7] = ["number", "padic", "solenoid", "density", "approx", "ifs", "nondense"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported for context, never counted as a failure.
    Info,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub group: &'static str,
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        };
        write!(f, "{tag} [{}] {}: {}", self.group, self.name, self.detail)
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// A group name or a substring of check names.
    pub filter: Option<String>,
    pub seed: u64,
    /// The system compared against the action in the correspondence checks.
    pub system: IfsSystem,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { filter: None, seed: 2024, system: four_map_system() }
    }
}

struct Suite {
    out: Vec<CheckResult>,
    filter: Option<String>,
}

impl Suite {
    fn wants(&self, group: &str, name: &str) -> bool {
        match &self.filter {
            None => true,
            Some(f) => f == group || name.contains(f.as_str()),
        }
    }

    fn check(&mut self, group: &'static str, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        if !self.wants(group, name) {
            return;
        }
        let (status, detail) = match f() {
            Ok((true, d)) => (Status::Pass, d),
            Ok((false, d)) => (Status::Fail, d),
            Err(e) => (Status::Fail, format!("error: {e}")),
        };
        self.out.push(CheckResult { group, name: name.into(), status, detail });
    }

    fn info(&mut self, group: &'static str, name: &str, f: impl FnOnce() -> Result<String>) {
        if !self.wants(group, name) {
            return;
        }
        let detail = f().unwrap_or_else(|e| format!("error: {e}"));
        self.out.push(CheckResult { group, name: name.into(), status: Status::Info, detail });
    }
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(BigInt::from(rng.gen_range(-60i64..=60)), BigInt::from(rng.gen_range(1i64..=40)))
}

fn unit_rational(rng: &mut ChaCha8Rng) -> Rational {
    let d = rng.gen_range(1i64..=200);
    rat(rng.gen_range(0..d), d)
}

/// Exact point with coordinates at 2, 3, 5 and an integer tail.
fn random_point(rng: &mut ChaCha8Rng) -> Result<SolenoidPoint> {
    let tracked: BTreeMap<u64, Rational> = [2u64, 3, 5].iter().map(|&p| (p, small_rational(rng))).collect();
    let tail = Rational::from_integer(BigInt::from(rng.gen_range(-20i64..=20)));
    Ok(SolenoidPoint::reduce(RawPoint { real: small_rational(rng).into(), tracked, tail })?.0)
}

fn as_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Runs every selected check in a fixed order.
pub fn run_suite(opts: &SuiteOptions) -> Vec<CheckResult> {
    let mut s = Suite { out: Vec::new(), filter: opts.filter.clone() };
    let seed = opts.seed;

    s.check("number", "crt-315", || {
        let n = crt(&[(BigInt::from(8), BigInt::from(3)), (BigInt::from(315), BigInt::zero())])?;
        Ok((n == BigInt::from(315), format!("n = {n}")))
    });

    s.check("padic", "expand(-1/3, 2)", || {
        let e = expand(&rat(-1, 3), 2)?;
        Ok((e.preperiod.is_empty() && e.period == vec![1, 0], e.to_string()))
    });
    s.check("padic", "xi(1/3, 2, 2)", || {
        let x = xi(&rat(1, 3), &2u32.into(), 2)?;
        let periodic = is_purely_periodic(&x.xi, 2)?;
        Ok((x.xi == rat(-2, 3) && periodic && x.is_stable()?, format!("A_2 = {}, xi = {}", x.residue, x.xi)))
    });
    s.check("padic", "round-trip", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut n = 0;
        for _ in 0..500 {
            let x = small_rational(&mut rng);
            for p in [2u64, 3, 5, 7, 11] {
                if expand(&x, p)?.to_rational() != x {
                    return Ok((false, format!("{x} at {p}")));
                }
                n += 1;
            }
        }
        Ok((true, format!("{n} exact reconstructions")))
    });

    s.check("solenoid", "reduce-witness", || {
        let raw = RawPoint {
            real: rat(1, 8).into(),
            tracked: [(2, rat(1, 12)), (3, rat(0, 1))].into_iter().collect(),
            tail: rat(0, 1),
        };
        let (p, w) = SolenoidPoint::reduce(raw)?;
        let ok = p.real() == &RealCoord::Exact(rat(3, 8)) && p.coordinate(2) == &rat(1, 3) && w.q == rat(-1, 4);
        Ok((ok, format!("{p}, q = {}", fmt_rational(&w.q))))
    });
    s.check("solenoid", "metric-axioms", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = rat(1, 2);
        for _ in 0..200 {
            let (a, b, c) = (random_point(&mut rng)?, random_point(&mut rng)?, random_point(&mut rng)?);
            let (ab, ba) = (metric(&a, &b).upper(), metric(&b, &a).upper());
            let (bc, ac) = (metric(&b, &c).upper(), metric(&a, &c).upper());
            if ab != ba || ac > &ab + &bc || ab > half || (ab.is_zero() != (a == b)) {
                return Ok((false, format!("{a} | {b} | {c}")));
            }
        }
        Ok((true, "200 triples: symmetric, triangle, diameter <= 1/2".into()))
    });
    s.check("solenoid", "action-composition", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..200 {
            let a = random_point(&mut rng)?;
            let nz = |rng: &mut ChaCha8Rng| loop {
                let r = small_rational(rng);
                if !r.is_zero() {
                    return r;
                }
            };
            let (s1, s2) = (nz(&mut rng), nz(&mut rng));
            let (x, _) = a.act(&s1)?;
            let (y, _) = x.act(&s2)?;
            let (z, _) = a.act(&(&s1 * &s2))?;
            if y != z {
                return Ok((false, format!("{a} by {s1}, {s2}")));
            }
        }
        Ok((true, "200 pairs".into()))
    });

    s.check("density", "certificate(1/10)", || {
        let c = certificate(&rat(1, 10))?;
        let want: BTreeMap<u64, u32> = [(2, 3), (3, 2), (5, 1), (7, 1)].into_iter().collect();
        Ok((c.kp == want && c.n == BigInt::from(2520), format!("N = {}, k = {:?}", c.n, c.kp)))
    });
    s.check("density", "certificate(1/4), certificate(49/100)", || {
        let a = certificate(&rat(1, 4))?;
        let b = certificate(&rat(49, 100))?;
        Ok((a.n == BigInt::from(6) && b.n == BigInt::from(2), format!("N = {}, {}", a.n, b.n)))
    });
    s.check("density", "approximate-315", || {
        let c = certificate(&rat(1, 10))?;
        let alpha = SolenoidPoint::new(rat(0, 1), [(2, rat(1, 3))].into_iter().collect(), rat(0, 1))?;
        let a = approximate(&alpha, &c, 5)?;
        Ok((a.n == BigInt::from(315), format!("n = {}, d <= {}", a.n, fmt_rational(&a.dist_bound.upper()))))
    });
    s.check("density", "approximate-random", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let mut worst = Vec::new();
        for eps in [rat(1, 4), rat(1, 10), rat(1, 50)] {
            let c = certificate(&eps)?;
            let grid: u64 = (eps.recip().to_integer() / 2u32 + 1u32).try_into().unwrap_or(u64::MAX);
            let mut max = Rational::zero();
            for _ in 0..100 {
                let a = approximate(&random_point(&mut rng)?, &c, grid)?;
                max = max.max(a.dist_bound.upper());
            }
            if max > eps {
                return Ok((false, format!("eps {eps}: {max}")));
            }
            worst.push(format!("{eps}: {}", fmt_rational(&max)));
        }
        Ok((true, format!("max distance {}", worst.join(", "))))
    });

    s.check("approx", "cf(log 3 / log 2)", || {
        let cf = cf_log_ratio(&rat(3, 1), &rat(2, 1), 8, 128)?;
        let want: Vec<BigInt> = [1, 1, 1, 2, 2, 3, 1, 5].iter().map(|&x| BigInt::from(x)).collect();
        let shown: Vec<String> = cf.quotients.iter().map(|q| q.to_string()).collect();
        Ok((cf.quotients == want, format!("[{}] at {} bits", shown.join(","), cf.certified_bits)))
    });
    s.check("approx", "near-one(2, 3, 6/100)", || {
        let e = find_near_one(&rat(2, 1), &rat(3, 1), &rat(6, 100))?;
        let ok = e.sigma == rat(256, 243) && e.sigma > Rational::one() && e.sigma < rat(53, 50);
        Ok((ok, format!("a = {}, b = {}, sigma = {}", e.a, e.b, e.sigma)))
    });
    s.check("approx", "near-one(2, 3, 1/100)", || {
        let e = find_near_one(&rat(2, 1), &rat(3, 1), &rat(1, 100))?;
        let exact = pow_rational(&rat(2, 1), &e.a)? / pow_rational(&rat(3, 1), &e.b)?;
        let ok = exact == e.sigma && exact > Rational::one() && exact < rat(101, 100);
        Ok((ok, format!("a = {}, b = {}, sigma ~ {:.6}", e.a, e.b, as_f64(&exact))))
    });
    s.info("approx", "2^65/3^41", || {
        let x = pow_rational(&rat(2, 1), &BigInt::from(65))? / pow_rational(&rat(3, 1), &BigInt::from(41))?;
        Ok(format!("~ {:.6}, below 101/100: {}", as_f64(&x), x < rat(101, 100)))
    });

    s.check("ifs", "containments", || {
        let sys = &opts.system;
        Ok((t3_within_t2(sys) && t4_within_t1(sys), "T3 in T2, T4 in T1".into()))
    });
    s.check("ifs", "correspondence-0", || {
        let checks = verify_correspondence_with(&opts.system, &Rational::zero())?;
        let shown: Vec<String> =
            checks.iter().map(|c| format!("{} -> {}", c.map, fmt_rational(&c.actual_real))).collect();
        Ok((checks.iter().all(|c| c.passed), shown.join(", ")))
    });
    s.check("ifs", "correspondence-random", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        for _ in 0..50 {
            let x = unit_rational(&mut rng);
            for c in verify_correspondence_with(&opts.system, &x)? {
                if !c.passed {
                    return Ok((
                        false,
                        format!(
                            "x = {x}, {}: real {} vs {}, 2-adic {} vs {}",
                            c.map,
                            fmt_rational(&c.actual_real),
                            fmt_rational(&c.expected_real),
                            fmt_rational(&c.actual_two_adic),
                            fmt_rational(&c.expected_two_adic)
                        ),
                    ));
                }
            }
        }
        Ok((true, "50 random x, exact".into()))
    });
    s.check("ifs", "hutchinson", || {
        let d = hutchinson_dimension(&[rat(1, 4), rat(1, 4)])?;
        Ok(((d.value - 0.5).abs() <= 1e-12, format!("s = {}", d.value)))
    });
    s.check("ifs", "box-count-reduced", || {
        let two = opts.system.reduced();
        let pts = generate_attractor(&two, AttractorMode::FullTree { depth: 10 }, 1 << 20)?;
        let scales: Vec<u64> = (2..=10).map(|e| 1u64 << e).collect();
        let b = box_counting(&pts, &scales)?;
        Ok(((b.slope - 0.5).abs() <= 0.05, format!("slope {:.4}, residual {:.2e}", b.slope, b.residual)))
    });
    s.info("ifs", "box-count-four-maps", || {
        let pts = generate_attractor(&opts.system, AttractorMode::FullTree { depth: 8 }, 1 << 20)?;
        let scales: Vec<u64> = (2..=10).map(|e| 1u64 << e).collect();
        let b = box_counting(&pts, &scales)?;
        let r = dimension_report(&opts.system)?;
        Ok(format!("slope {:.4}, residual {:.2e}; Moran value of all maps {:.4}", b.slope, b.residual, r.raw.value))
    });

    s.check("nondense", "8-729-real-2/7", || {
        let spec = SemigroupSpec::new(rat(8, 1), rat(729, 1))?;
        let base = BasePoint::new(RealSource::Exact(rat(2, 7)), BTreeMap::new(), rat(0, 1));
        let pts = enumerate_orbit(&base, &spec, 10, 10, &OrbitOptions::default())?;
        let all = pts.iter().all(|p| p.point.real() == &RealCoord::Exact(rat(2, 7)));
        Ok((all, format!("{} points", pts.len())))
    });
    s.check("nondense", "contraction", || {
        let spec = SemigroupSpec::new(rat(1, 4), rat(5, 64))?;
        let base = BasePoint::new(RealSource::sqrt_minus_one(2), BTreeMap::new(), rat(0, 1));
        let pts = enumerate_orbit(&base, &spec, 12, 12, &OrbitOptions::default())?;
        let prof = accumulation_profile(&pts, &spec, &[4, 8, 12]);
        let last = prof.shells[2].max_abs_real.clone().unwrap_or_else(Rational::one);
        let ok = prof.trend == Trend::Decreasing && last < rat(1, 100_000);
        Ok((ok, format!("trend {}, shell 12 max ~ {:.3e}", prof.trend.label(), as_f64(&last))))
    });
    s.out
}

/// True when no selected check failed.
pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.status != Status::Fail)
}

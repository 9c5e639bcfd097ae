//! Affine iterated function systems on `[0, 1)`: the four maps induced by
//! the multipliers `1/4` and `5/64`, Hutchinson dimension, attractor
//! sampling, box counting and the exact correspondence with the action.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::interval::{fmt_rational, grid_floor};
use crate::number::{rat, Rational};
use crate::solenoid::SolenoidPoint;

/// `x ↦ slope·x + offset` with `0 < slope < 1`, mapping `[0,1)` into itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineContraction {
    slope: Rational,
    offset: Rational,
}

impl AffineContraction {
    pub fn new(slope: Rational, offset: Rational) -> Result<Self> {
        if !slope.is_positive() || slope >= Rational::one() {
            return Err(Error::invalid(format!("slope {slope} is not in (0,1)")));
        }
        if offset.is_negative() || &slope + &offset > Rational::one() {
            return Err(Error::invalid(format!("x ↦ {slope}x + {offset} does not map [0,1) into itself")));
        }
        Ok(AffineContraction { slope, offset })
    }

    pub fn slope(&self) -> &Rational {
        &self.slope
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.offset
    }

    /// The image of `[0,1)` is `[offset, offset + slope)`.
    pub fn image_within(&self, other: &AffineContraction) -> bool {
        other.offset <= self.offset && &self.offset + &self.slope <= &other.offset + &other.slope
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IfsSystem {
    maps: Vec<AffineContraction>,
}

impl IfsSystem {
    pub fn new(maps: Vec<AffineContraction>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::invalid("an IFS needs at least one map"));
        }
        Ok(IfsSystem { maps })
    }

    pub fn maps(&self) -> &[AffineContraction] {
        &self.maps
    }

    pub fn ratios(&self) -> Vec<Rational> {
        self.maps.iter().map(|m| m.slope.clone()).collect()
    }

    /// Drops every map whose image of `[0,1)` lies inside the image of a
    /// map that is kept.
    pub fn reduced(&self) -> IfsSystem {
        let mut keep = vec![true; self.maps.len()];
        for i in 0..self.maps.len() {
            keep[i] = !(0..self.maps.len()).any(|j| j != i && keep[j] && self.maps[i].image_within(&self.maps[j]));
        }
        let maps = self.maps.iter().zip(keep).filter(|(_, k)| *k).map(|(m, _)| m.clone()).collect();
        IfsSystem { maps }
    }
}

fn affine(slope: Rational, offset: Rational) -> AffineContraction {
    AffineContraction::new(slope, offset).expect("valid contraction")
}

/// `T1 = x/4 + 1/4`, `T2 = x/4 + 1/2`, `T3 = 5x/64 + 41/64`,
/// `T4 = 5x/64 + 9/32`, in that order.
pub fn four_map_system() -> IfsSystem {
    IfsSystem {
        maps: vec![
            affine(rat(1, 4), rat(1, 4)),
            affine(rat(1, 4), rat(1, 2)),
            affine(rat(5, 64), rat(41, 64)),
            affine(rat(5, 64), rat(9, 32)),
        ],
    }
}

/// `T3([0,1)) ⊂ T2([0,1))`.
pub fn t3_within_t2(system: &IfsSystem) -> bool {
    system.maps[2].image_within(&system.maps[1])
}

/// `T4([0,1)) ⊂ T1([0,1))`.
pub fn t4_within_t1(system: &IfsSystem) -> bool {
    system.maps[3].image_within(&system.maps[0])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub closed_form: bool,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// The `s ≥ 0` with `Σ r_i^s = 1`.
pub fn hutchinson_dimension(ratios: &[Rational]) -> Result<DimensionEstimate> {
    hutchinson_dimension_tol(ratios, DEFAULT_TOLERANCE)
}

pub fn hutchinson_dimension_tol(ratios: &[Rational], tol: f64) -> Result<DimensionEstimate> {
    if ratios.is_empty() {
        return Err(Error::invalid("no contraction ratios"));
    }
    if ratios.iter().any(|r| !r.is_positive() || r >= &Rational::one()) {
        return Err(Error::invalid("contraction ratios must lie in (0,1)"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if ratios.iter().all(|r| r == &ratios[0]) {
        let r = ratios[0].to_f64().expect("ratio in (0,1)");
        let value = (ratios.len() as f64).ln() / (1.0 / r).ln();
        return Ok(DimensionEstimate { value, error_bound: 0.0, closed_form: true });
    }
    let rs: Vec<f64> = ratios.iter().map(|r| r.to_f64().expect("ratio in (0,1)")).collect();
    let f = |s: f64| rs.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DimensionEstimate { value: 0.5 * (lo + hi), error_bound: 0.5 * (hi - lo), closed_form: false })
}

/// Dimension of the reduced system next to the raw Moran value of all maps.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionReport {
    pub reduced: DimensionEstimate,
    pub reduced_maps: usize,
    pub raw: DimensionEstimate,
    pub raw_maps: usize,
    pub note: String,
}

impl DimensionReport {
    pub fn to_json(&self) -> serde_json::Value {
        let est = |e: &DimensionEstimate| json!({ "value": e.value, "error_bound": e.error_bound, "closed_form": e.closed_form });
        json!({
            "reduced": est(&self.reduced),
            "reduced_maps": self.reduced_maps,
            "raw": est(&self.raw),
            "raw_maps": self.raw_maps,
            "note": self.note,
        })
    }
}

pub fn dimension_report(system: &IfsSystem) -> Result<DimensionReport> {
    let reduced_system = system.reduced();
    let reduced = hutchinson_dimension(&reduced_system.ratios())?;
    let raw = hutchinson_dimension(&system.ratios())?;
    let note = format!(
        "{} of {} maps have [0,1)-images inside another kept image; the reduced value ignores them, \
         the raw value treats all maps as separated",
        system.maps.len() - reduced_system.maps.len(),
        system.maps.len()
    );
    Ok(DimensionReport { reduced, reduced_maps: reduced_system.maps.len(), raw, raw_maps: system.maps.len(), note })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttractorMode {
    /// All compositions of `depth` maps applied to 0.
    FullTree { depth: u32 },
    /// `count` points of a random walk from 0 with uniform map choice,
    /// after a burn-in of [`CHAOS_BURN_IN`] steps.
    ChaosGame { seed: u64, count: usize },
}

pub const CHAOS_BURN_IN: usize = 64;
/// Chaos-game points are truncated to the grid `2^-CHAOS_GRID_BITS` so
/// denominators stay bounded.
pub const CHAOS_GRID_BITS: u32 = 96;

pub fn generate_attractor(system: &IfsSystem, mode: AttractorMode, budget: usize) -> Result<Vec<Rational>> {
    match mode {
        AttractorMode::FullTree { depth } => {
            if depth == 0 {
                return Err(Error::invalid("depth must be at least 1"));
            }
            let total = (system.maps.len() as u128).checked_pow(depth);
            if total.is_none_or(|t| t > budget as u128) {
                return Err(Error::ResourceLimit(format!(
                    "{}^{depth} points exceed the budget of {budget}",
                    system.maps.len()
                )));
            }
            let mut level = vec![Rational::zero()];
            for _ in 0..depth {
                level = attractor_step(system, &level);
            }
            Ok(level)
        }
        AttractorMode::ChaosGame { seed, count } => {
            if count == 0 {
                return Err(Error::invalid("count must be at least 1"));
            }
            if count > budget {
                return Err(Error::ResourceLimit(format!("{count} points exceed the budget of {budget}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let denom = BigInt::one() << CHAOS_GRID_BITS;
            let mut x = Rational::zero();
            let mut out = Vec::with_capacity(count);
            for step in 0..CHAOS_BURN_IN + count {
                let map = &system.maps[rng.gen_range(0..system.maps.len())];
                x = Rational::new(grid_floor(&map.apply(&x), CHAOS_GRID_BITS), denom.clone());
                if step >= CHAOS_BURN_IN {
                    out.push(x.clone());
                }
            }
            Ok(out)
        }
    }
}

/// `⋃_i T_i(points)`, map-major order.
pub fn attractor_step(system: &IfsSystem, points: &[Rational]) -> Vec<Rational> {
    system.maps.par_iter().map(|m| points.iter().map(|x| m.apply(x)).collect::<Vec<_>>()).collect::<Vec<_>>().concat()
}

/// `index<TAB>coordinate` lines.
pub fn two_column(points: &[Rational]) -> String {
    let mut s = String::new();
    for (i, x) in points.iter().enumerate() {
        let _ = writeln!(s, "{i}\t{:.17e}", x.to_f64().unwrap_or(f64::NAN));
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxCount {
    pub scales: Vec<u64>,
    pub counts: Vec<u64>,
    /// Least-squares slope of `ln count` against `ln scale`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

impl BoxCount {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "scales": self.scales,
            "counts": self.counts,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual_rms": self.residual,
        })
    }
}

/// Occupied boxes `[j/k, (j+1)/k)` at each scale `k`.
pub fn box_counting(points: &[Rational], scales: &[u64]) -> Result<BoxCount> {
    if scales.len() < 2 {
        return Err(Error::invalid("box counting needs at least two scales"));
    }
    if let Some(k) = scales.iter().find(|&&k| k < 2) {
        return Err(Error::invalid(format!("degenerate scale {k}")));
    }
    if points.is_empty() {
        return Err(Error::invalid("no points"));
    }
    if points.iter().any(|x| x.is_negative() || x >= &Rational::one()) {
        return Err(Error::invalid("points must lie in [0,1)"));
    }
    let counts: Vec<u64> = scales
        .iter()
        .map(|&k| {
            let kb = BigInt::from(k);
            let boxes: HashSet<BigInt> = points.iter().map(|x| (x.numer() * &kb).div_floor(x.denom())).collect();
            boxes.len() as u64
        })
        .collect();
    let xs: Vec<f64> = scales.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("scales must not all be equal"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(BoxCount { scales: scales.to_vec(), counts, slope, intercept, residual: (ssr / n).sqrt() })
}

/// One row of the action-versus-map table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrespondenceCheck {
    pub map: &'static str,
    pub sigma: Rational,
    pub input_two_adic: Rational,
    pub expected_real: Rational,
    pub actual_real: Rational,
    pub expected_two_adic: Rational,
    pub actual_two_adic: Rational,
    /// The rational `q` subtracted by the reduction.
    pub witness: Rational,
    pub passed: bool,
}

impl CorrespondenceCheck {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "map": self.map,
            "sigma": fmt_rational(&self.sigma),
            "input_two_adic": fmt_rational(&self.input_two_adic),
            "expected_real": fmt_rational(&self.expected_real),
            "actual_real": fmt_rational(&self.actual_real),
            "expected_two_adic": fmt_rational(&self.expected_two_adic),
            "actual_two_adic": fmt_rational(&self.actual_two_adic),
            "witness": fmt_rational(&self.witness),
            "passed": self.passed,
        })
    }
}

/// Acts on `(x; 2-adic c, 0 elsewhere)` by `1/4` and `5/64` with
/// `c ∈ {1/3, 2/3}` and compares with `T1..T4` of [`four_map_system`].
pub fn verify_correspondence(x: &Rational) -> Result<Vec<CorrespondenceCheck>> {
    verify_correspondence_with(&four_map_system(), x)
}

/// As [`verify_correspondence`], comparing against the maps of `system`
/// (which must have four maps in the order `T1, T2, T3, T4`).
pub fn verify_correspondence_with(system: &IfsSystem, x: &Rational) -> Result<Vec<CorrespondenceCheck>> {
    if system.maps.len() != 4 {
        return Err(Error::invalid("expected four maps"));
    }
    if x.is_negative() || x >= &Rational::one() {
        return Err(Error::invalid(format!("{x} is not in [0,1)")));
    }
    let rows: [(&'static str, usize, Rational, Rational, Rational); 4] = [
        ("T1", 0, rat(1, 3), rat(1, 4), rat(1, 3)),
        ("T3", 2, rat(1, 3), rat(5, 64), rat(2, 3)),
        ("T2", 1, rat(2, 3), rat(1, 4), rat(2, 3)),
        ("T4", 3, rat(2, 3), rat(5, 64), rat(1, 3)),
    ];
    rows.into_iter()
        .map(|(name, idx, coord, sigma, expected_two_adic)| {
            let tracked: BTreeMap<u64, Rational> = [(2, coord.clone())].into_iter().collect();
            let point = SolenoidPoint::new(x.clone(), tracked, Rational::zero())?;
            let (image, witness) = point.act(&sigma)?;
            let actual_real = image.real().as_exact().cloned().expect("exact input");
            let actual_two_adic = image.coordinate(2).clone();
            let expected_real = system.maps[idx].apply(x);
            let passed = actual_real == expected_real && actual_two_adic == expected_two_adic;
            Ok(CorrespondenceCheck {
                map: name,
                sigma,
                input_two_adic: coord,
                expected_real,
                actual_real,
                expected_two_adic,
                actual_two_adic,
                witness: witness.q,
                passed,
            })
        })
        .collect()
}

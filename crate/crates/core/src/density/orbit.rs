use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde_json::json;

use super::{fmt, tracked_json, SemigroupSpec};
use crate::error::{Error, Result};
use crate::number::{valuation_unchecked, Rational, Valuation};
use crate::solenoid::{BasePoint, ReductionWitness, SolenoidPoint, DEFAULT_PRECISION_BITS};

/// `γ^a δ^b · α`, reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPoint {
    pub a: u32,
    pub b: u32,
    pub point: SolenoidPoint,
    /// Witness of the reduction that produced this point from its parent:
    /// the base point at row anchors, otherwise the previous point in the
    /// row (acted on by `δ`).
    pub witness: Option<ReductionWitness>,
}

impl OrbitPoint {
    /// One line-delimited record.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "a": self.a,
            "b": self.b,
            "real": self.point.real().to_string(),
            "tracked": tracked_json(self.point.tracked()),
            "tail": fmt(self.point.tail()),
        });
        if let Some(w) = &self.witness {
            v["witness"] = json!({ "q": fmt(&w.q), "shift": w.shift.to_string() });
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitOptions {
    /// Initial precision for interval real coordinates.
    pub precision_bits: u32,
    /// Rows that still straddle a floor at this precision fail.
    pub max_precision_bits: u32,
    /// Recompute directly from the base point every this many steps.
    pub reanchor_every: u32,
    pub keep_witnesses: bool,
    /// Worker count; rows are sharded when greater than 1.
    pub threads: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            precision_bits: DEFAULT_PRECISION_BITS,
            max_precision_bits: 1 << 14,
            reanchor_every: 64,
            keep_witnesses: false,
            threads: 1,
        }
    }
}

/// The points `(a, 0..=b_max)` of one row. Each row is a function of `a`
/// alone, so sharding rows across workers cannot change the output.
pub fn orbit_row(
    base: &BasePoint,
    spec: &SemigroupSpec,
    a: u32,
    b_max: u32,
    opts: &OrbitOptions,
) -> Result<Vec<OrbitPoint>> {
    let every = opts.reanchor_every.max(1);
    let mut bits = opts.precision_bits;
    'retry: loop {
        let alpha = base.realize(bits)?;
        let mut row: Vec<OrbitPoint> = Vec::with_capacity(b_max as usize + 1);
        for b in 0..=b_max {
            let step = if b % every == 0 {
                alpha.act(&spec.element(a, b))
            } else {
                row.last().expect("anchor precedes").point.act_by(spec.delta_multiplier())
            };
            match step {
                Ok((point, w)) => row.push(OrbitPoint { a, b, point, witness: opts.keep_witnesses.then_some(w) }),
                Err(Error::PrecisionExhausted { context, .. }) => {
                    if base.real.is_exact() || bits >= opts.max_precision_bits {
                        return Err(Error::PrecisionExhausted { context: format!("orbit ({a},{b}): {context}"), bits });
                    }
                    bits = (bits * 2).min(opts.max_precision_bits);
                    continue 'retry;
                }
                Err(e) => return Err(e),
            }
        }
        return Ok(row);
    }
}

/// Orbit points for `0 ≤ a ≤ a_max`, `0 ≤ b ≤ b_max` in row-major order.
/// Exponents start at 0, so `(0, 0)` is the base point itself.
pub fn enumerate_orbit(
    base: &BasePoint,
    spec: &SemigroupSpec,
    a_max: u32,
    b_max: u32,
    opts: &OrbitOptions,
) -> Result<Vec<OrbitPoint>> {
    let rows: Vec<Vec<OrbitPoint>> = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::ResourceLimit(e.to_string()))?;
        pool.install(|| {
            (0..=a_max).into_par_iter().map(|a| orbit_row(base, spec, a, b_max, opts)).collect::<Result<_>>()
        })?
    } else {
        (0..=a_max).map(|a| orbit_row(base, spec, a, b_max, opts)).collect::<Result<_>>()?
    };
    Ok(rows.into_iter().flatten().collect())
}

/// Contraction trend across shells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Decreasing,
    NotDecreasing,
    NonContracting,
}

impl Trend {
    pub fn label(self) -> &'static str {
        match self {
            Trend::Decreasing => "decreasing",
            Trend::NotDecreasing => "not-decreasing",
            Trend::NonContracting => "non-contracting",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShellSummary {
    /// `a + b`.
    pub shell: u32,
    pub points: usize,
    /// Upper bound on `|x_∞|` over the shell, real coordinate taken in
    /// `[-1/2, 1/2)`. `None` for an empty shell.
    pub max_abs_real: Option<Rational>,
    /// Minimum valuation over the shell at each generator or tracked prime.
    pub min_valuations: BTreeMap<u64, Valuation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccumulationProfile {
    pub contracting: bool,
    pub shells: Vec<ShellSummary>,
    pub trend: Trend,
}

impl AccumulationProfile {
    pub fn to_json(&self) -> serde_json::Value {
        let shells: Vec<_> = self
            .shells
            .iter()
            .map(|s| {
                json!({
                    "shell": s.shell,
                    "points": s.points,
                    "max_abs_real": s.max_abs_real.as_ref().map(fmt),
                    "min_valuations": s.min_valuations.iter()
                        .map(|(p, v)| (p.to_string(), json!(v.to_string())))
                        .collect::<serde_json::Map<_, _>>(),
                })
            })
            .collect();
        json!({ "contracting": self.contracting, "trend": self.trend.label(), "shells": shells })
    }
}

/// Per-shell maxima of the centered real coordinate. The trend is
/// `Decreasing` when the maxima of the nonempty requested shells are
/// strictly decreasing, and `NonContracting` when the semigroup is not
/// contracting.
pub fn accumulation_profile(points: &[OrbitPoint], spec: &SemigroupSpec, shells: &[u32]) -> AccumulationProfile {
    let spec_primes = spec.primes();
    let summaries: Vec<ShellSummary> = shells
        .iter()
        .map(|&shell| {
            let members: Vec<&OrbitPoint> = points.iter().filter(|p| p.a + p.b == shell).collect();
            let max_abs_real = members.iter().map(|p| p.point.centered_abs_upper()).max();
            let mut primes: BTreeSet<u64> = spec_primes.iter().copied().collect();
            for m in &members {
                primes.extend(m.point.tracked().keys());
            }
            let min_valuations = if members.is_empty() {
                BTreeMap::new()
            } else {
                primes
                    .into_iter()
                    .map(|p| {
                        let v = members
                            .iter()
                            .map(|m| valuation_unchecked(m.point.coordinate(p), p))
                            .min()
                            .unwrap_or(Valuation::Infinity);
                        (p, v)
                    })
                    .collect()
            };
            ShellSummary { shell, points: members.len(), max_abs_real, min_valuations }
        })
        .collect();
    let contracting = spec.is_contracting();
    let trend = if !contracting {
        Trend::NonContracting
    } else {
        let maxima: Vec<&Rational> = summaries.iter().filter_map(|s| s.max_abs_real.as_ref()).collect();
        if maxima.windows(2).all(|w| w[1] < w[0]) {
            Trend::Decreasing
        } else {
            Trend::NotDecreasing
        }
    };
    AccumulationProfile { contracting, shells: summaries, trend }
}

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{fmt, DensityCertificate, OrbitPoint};
use crate::error::{Error, Result};
use crate::number::{pow_big, residue_mod, Rational};
use crate::solenoid::{metric, SolenoidPoint};

/// Real bucket index and the residues mod `p^{k_p}` in certificate order.
pub type CellKey = (u64, Vec<BigInt>);

/// Occupancy counts. Merging is commutative and associative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CellCounts {
    pub counts: BTreeMap<CellKey, u64>,
    pub points: u64,
    /// Points whose real enclosure spans more than one bucket; they count
    /// toward every bucket they touch.
    pub straddling: u64,
}

impl CellCounts {
    pub fn add_point(&mut self, point: &SolenoidPoint, cert: &DensityCertificate, m: u64) -> Result<()> {
        let mut residues = Vec::with_capacity(cert.kp.len());
        for p in cert.primes() {
            residues.push(residue_mod(point.coordinate(p), &cert.modulus(p))?);
        }
        let mb = Rational::from_integer(m.into());
        let bucket = |x: Rational| -> u64 { (x * &mb).floor().to_integer().to_u64().unwrap_or(0).min(m - 1) };
        let lo = bucket(point.real().lower());
        let hi = bucket(point.real().upper());
        if lo != hi {
            self.straddling += 1;
        }
        for j in lo..=hi {
            *self.counts.entry((j, residues.clone())).or_insert(0) += 1;
        }
        self.points += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: CellCounts) {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.points += other.points;
        self.straddling += other.straddling;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageReport {
    pub eps: Rational,
    pub real_buckets: u64,
    pub n: BigInt,
    pub cells: CellCounts,
    /// Nonempty cells over `M·N`.
    pub fraction_covered: Rational,
    /// Largest probe gap. This is a sampled lower bound on the covering
    /// radius, not the radius itself.
    pub max_observed_gap: Rational,
    /// Per-probe certified upper bound on the distance to the nearest
    /// orbit point.
    pub probe_gaps: Vec<Rational>,
    pub seed: u64,
}

impl CoverageReport {
    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<_> = self
            .cells
            .counts
            .iter()
            .map(|((j, res), c)| {
                json!({
                    "bucket": j,
                    "residues": res.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                    "count": c,
                })
            })
            .collect();
        json!({
            "eps": fmt(&self.eps),
            "real_buckets": self.real_buckets,
            "N": self.n.to_string(),
            "total_cells": (&self.n * BigInt::from(self.real_buckets)).to_string(),
            "nonempty_cells": self.cells.counts.len(),
            "points": self.cells.points,
            "straddling_points": self.cells.straddling,
            "fraction_covered": fmt(&self.fraction_covered),
            "max_observed_gap": fmt(&self.max_observed_gap),
            "max_observed_gap_kind": "probe lower bound on covering radius",
            "seed": self.seed,
            "probe_gaps": self.probe_gaps.iter().map(fmt).collect::<Vec<_>>(),
            "cells": cells,
        })
    }
}

/// Seeded random targets: real coordinate on the grid `2^-64`, integer
/// coordinates below `p^{k_p+1}` at the certificate primes and an integer
/// tail below `N`.
pub fn probe_targets(cert: &DensityCertificate, count: usize, seed: u64) -> Vec<SolenoidPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let below = |rng: &mut ChaCha8Rng, bound: &BigInt| -> BigInt {
        let b = bound.to_u64().expect("probe moduli fit in 64 bits");
        BigInt::from(rng.gen_range(0..b))
    };
    (0..count)
        .map(|_| {
            let real = Rational::new(BigInt::from(rng.gen::<u64>()), BigInt::one() << 64);
            let tracked: BTreeMap<u64, Rational> = cert
                .primes()
                .map(|p| {
                    let bound = pow_big(p, cert.kp[&p] + 1);
                    (p, Rational::from_integer(below(&mut rng, &bound)))
                })
                .collect();
            let tail = Rational::from_integer(below(&mut rng, &cert.n));
            SolenoidPoint::new(real, tracked, tail).expect("integer coordinates are reduced")
        })
        .collect()
}

/// Cell occupancy of an orbit sample and its probe gaps.
pub fn coverage(
    points: &[OrbitPoint],
    cert: &DensityCertificate,
    m: u64,
    probes: usize,
    seed: u64,
) -> Result<CoverageReport> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::invalid(format!("bucket count must be an even integer ≥ 2, got {m}")));
    }
    let mut cells = CellCounts::default();
    for p in points {
        cells.add_point(&p.point, cert, m)?;
    }
    let total = &cert.n * BigInt::from(m);
    let fraction_covered = Rational::new(BigInt::from(cells.counts.len()), total);
    let half = Rational::new(1.into(), 2.into());
    let probe_gaps: Vec<Rational> = probe_targets(cert, probes, seed)
        .par_iter()
        .map(|t| points.iter().map(|p| metric(t, &p.point).upper()).min().unwrap_or_else(|| half.clone()))
        .collect();
    let max_observed_gap =
        probe_gaps.iter().max().cloned().unwrap_or_else(|| if points.is_empty() { half } else { Rational::zero() });
    Ok(CoverageReport {
        eps: cert.eps.clone(),
        real_buckets: m,
        n: cert.n.clone(),
        cells,
        fraction_covered,
        max_observed_gap,
        probe_gaps,
        seed,
    })
}

//! Cube distributions generated by a random bias: draw `p` from a base
//! measure on `[-1, 1]`, then `d` independent bits with mean `p`.
//!
//! Such a law is exchangeable, so it is described by the distribution of the
//! number `j` of `+1` coordinates. Every point with `j` positive coordinates
//! has mass `count_pmf[j] / C(d, j)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::binomial;

use super::discrete::DiscreteDist;
use crate::error::{Error, Result};
use crate::moment::{AtomicMeasure, HybridMeasure};

/// Largest dimension for which [`ProductMixtureCube::enumerate`] is allowed.
pub const ENUMERATION_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMeasure {
    Atomic(AtomicMeasure),
    Hybrid(HybridMeasure),
}

impl From<AtomicMeasure> for BaseMeasure {
    fn from(m: AtomicMeasure) -> Self {
        BaseMeasure::Atomic(m)
    }
}

impl From<HybridMeasure> for BaseMeasure {
    fn from(m: HybridMeasure) -> Self {
        BaseMeasure::Hybrid(m)
    }
}

/// Coefficients of `(1 + p)^j (1 - p)^(d - j) / 2^d` in `p`.
fn bit_polynomial(d: usize, j: usize) -> Vec<f64> {
    let mut c = vec![1.0 / 2f64.powi(d as i32)];
    for step in 0..d {
        let s = if step < j { 1.0 } else { -1.0 };
        let mut next = vec![0.0; c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i] += v;
            next[i + 1] += s * v;
        }
        c = next;
    }
    c
}

impl BaseMeasure {
    pub fn support(&self) -> (f64, f64) {
        match self {
            BaseMeasure::Atomic(m) => m.support(),
            BaseMeasure::Hybrid(m) => m.support(),
        }
    }

    pub fn moment(&self, i: usize) -> f64 {
        match self {
            BaseMeasure::Atomic(m) => m.moment(i),
            BaseMeasure::Hybrid(m) => m.moment(i),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            BaseMeasure::Atomic(m) => m.sample(rng),
            BaseMeasure::Hybrid(m) => m.sample(rng),
        }
    }

    pub fn negate(&self) -> Self {
        match self {
            BaseMeasure::Atomic(m) => BaseMeasure::Atomic(m.negate()),
            BaseMeasure::Hybrid(m) => BaseMeasure::Hybrid(m.negate()),
        }
    }

    /// `Pr[j coordinates equal +1]` for `j = 0..=d`.
    pub fn count_pmf(&self, d: usize) -> Vec<f64> {
        (0..=d)
            .map(|j| {
                let per_point = match self {
                    BaseMeasure::Atomic(m) => m.expect(|p| {
                        let q = (1.0 + p) / 2.0;
                        q.powi(j as i32) * (1.0 - q).powi((d - j) as i32)
                    }),
                    BaseMeasure::Hybrid(m) => {
                        let atom = m.atom();
                        let q = (1.0 + atom.location) / 2.0;
                        let atom_part = atom.weight * q.powi(j as i32) * (1.0 - q).powi((d - j) as i32);
                        let exp = m.exp_component();
                        let coeffs = bit_polynomial(d, j);
                        let exp_part: f64 = coeffs
                            .iter()
                            .enumerate()
                            .map(|(i, c)| c * exp.moment(i))
                            .sum();
                        atom_part + exp.weight * exp_part
                    }
                };
                binomial(d as u64, j as u64) * per_point.max(0.0)
            })
            .collect()
    }
}

/// `sum over x with j plus-ones of chi_S(x)` for `|S| = s`.
pub fn krawtchouk(d: usize, s: usize, j: usize) -> f64 {
    let minus = d - j;
    (0..=s.min(minus))
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(s as u64, i as u64) * binomial((d - s) as u64, (minus - i) as u64)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    None,
    /// Keep only points with `sum_i x_i / d >= threshold`.
    MajorityAtLeast(f64),
    /// Keep only points with `sum_i x_i / d <= threshold`.
    MajorityAtMost(f64),
}

#[derive(Debug, Clone)]
pub struct ProductMixtureCube {
    base: BaseMeasure,
    d: usize,
    conditioning: Conditioning,
    counts: Vec<f64>,
    removed_mass: f64,
}

/// Lifts a bias measure to `{-1, 1}^d`.
pub fn lift(base: impl Into<BaseMeasure>, d: usize) -> Result<ProductMixtureCube> {
    ProductMixtureCube::new(base.into(), d)
}

impl ProductMixtureCube {
    pub fn new(base: BaseMeasure, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("dimension must be positive".into()));
        }
        let (lo, hi) = base.support();
        if lo < -1.0 || hi > 1.0 {
            return Err(Error::BiasOutOfRange { lo, hi });
        }
        let counts = base.count_pmf(d);
        Ok(Self {
            base,
            d,
            conditioning: Conditioning::None,
            counts,
            removed_mass: 0.0,
        })
    }

    /// Conditions on `sum_i x_i / d >= threshold`.
    pub fn conditioned_on_majority(&self, threshold: f64) -> Result<Self> {
        let d = self.d as f64;
        let unconditioned = self.base.count_pmf(self.d);
        let keep = |j: usize| (2.0 * j as f64 - d) / d >= threshold;
        let kept: f64 = unconditioned
            .iter()
            .enumerate()
            .filter(|(j, _)| keep(*j))
            .map(|(_, c)| c)
            .sum();
        if kept <= 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "no mass with sum/d >= {threshold}"
            )));
        }
        let counts = unconditioned
            .iter()
            .enumerate()
            .map(|(j, c)| if keep(j) { c / kept } else { 0.0 })
            .collect();
        Ok(Self {
            base: self.base.clone(),
            d: self.d,
            conditioning: Conditioning::MajorityAtLeast(threshold),
            counts,
            removed_mass: 1.0 - kept,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn base(&self) -> &BaseMeasure {
        &self.base
    }

    pub fn conditioning(&self) -> Conditioning {
        self.conditioning
    }

    pub fn removed_mass(&self) -> f64 {
        self.removed_mass
    }

    /// `Pr[j coordinates equal +1]`.
    pub fn count_pmf(&self) -> &[f64] {
        &self.counts
    }

    /// Mass of a single point with `j` positive coordinates.
    pub fn point_mass(&self, j: usize) -> f64 {
        self.counts[j] / binomial(self.d as u64, j as u64)
    }

    pub fn pmf(&self, x: &[i8]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::DomainMismatch(format!(
                "point of length {} in dimension {}",
                x.len(),
                self.d
            )));
        }
        Ok(self.point_mass(x.iter().filter(|&&v| v > 0).count()))
    }

    /// `E[chi_S(x)]` for any `S` with `|S| = card`.
    pub fn fourier_by_card(&self, card: usize) -> f64 {
        assert!(card <= self.d, "set larger than the dimension");
        match self.conditioning {
            Conditioning::None => self.base.moment(card),
            _ => self.fourier_by_counts(card),
        }
    }

    /// `E[chi_S(x)]`; depends on `S` only through its size.
    pub fn fourier_coeff(&self, set: &[usize]) -> Result<f64> {
        if set.iter().any(|&i| i >= self.d) {
            return Err(Error::DomainMismatch(format!("set {set:?} not within [{}]", self.d)));
        }
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Ok(self.fourier_by_card(sorted.len()))
    }

    /// Same quantity evaluated by summing over count classes.
    pub fn fourier_by_counts(&self, card: usize) -> f64 {
        (0..=self.d)
            .map(|j| self.point_mass(j) * krawtchouk(self.d, card, j))
            .sum()
    }

    /// The law of `-x`.
    pub fn negate(&self) -> Self {
        let mut counts = self.counts.clone();
        counts.reverse();
        let conditioning = match self.conditioning {
            Conditioning::None => Conditioning::None,
            Conditioning::MajorityAtLeast(t) => Conditioning::MajorityAtMost(-t),
            Conditioning::MajorityAtMost(t) => Conditioning::MajorityAtLeast(-t),
        };
        Self {
            base: self.base.negate(),
            d: self.d,
            conditioning,
            counts,
            removed_mass: self.removed_mass,
        }
    }

    /// Exact total variation, valid because both laws are exchangeable.
    pub fn tv(&self, other: &Self) -> Result<f64> {
        if self.d != other.d {
            return Err(Error::DomainMismatch(format!("dimensions {} and {}", self.d, other.d)));
        }
        Ok(0.5 * self.counts.iter().zip(&other.counts).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Support count classes with positive mass.
    pub fn support_counts(&self) -> Vec<usize> {
        (0..=self.d).filter(|&j| self.counts[j] > 0.0).collect()
    }

    /// One draw: a bias, then `d` bits, with rejection for the conditioning.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i8> {
        loop {
            let x = self.sample_unconditioned(rng);
            let accept = match self.conditioning {
                Conditioning::None => true,
                _ => {
                    let j = x.iter().filter(|&&v| v > 0).count();
                    self.counts[j] > 0.0
                }
            };
            if accept {
                return x;
            }
        }
    }

    fn sample_unconditioned<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i8> {
        let p = self.base.sample(rng);
        let q = (1.0 + p) / 2.0;
        (0..self.d)
            .map(|_| if rng.gen::<f64>() < q { 1 } else { -1 })
            .collect()
    }

    /// Full pmf over `2^d` points.
    pub fn enumerate(&self) -> Result<DiscreteDist> {
        if self.d > ENUMERATION_BITS {
            return Err(Error::EnumerationBudgetExceeded {
                bits: self.d,
                budget: ENUMERATION_BITS,
            });
        }
        let masses: Vec<f64> = (0..=self.d).map(|j| self.point_mass(j)).collect();
        let probs = (0..1usize << self.d)
            .map(|idx| masses[self.d - idx.count_ones() as usize])
            .collect();
        DiscreteDist::cube(self.d, probs)
    }
}

/// Largest `|P1^(S) - P-1^(S)|` over `|S| <= max_card`.
pub fn fourier_gap(p1: &ProductMixtureCube, pm1: &ProductMixtureCube, max_card: usize) -> Result<f64> {
    Ok(fourier_gaps(p1, pm1, max_card)?.into_iter().fold(0.0, f64::max))
}

/// Coefficient gaps by set size `0..=max_card`.
pub fn fourier_gaps(p1: &ProductMixtureCube, pm1: &ProductMixtureCube, max_card: usize) -> Result<Vec<f64>> {
    if p1.d != pm1.d {
        return Err(Error::DomainMismatch(format!("dimensions {} and {}", p1.d, pm1.d)));
    }
    Ok((0..=max_card.min(p1.d))
        .map(|s| (p1.fourier_by_card(s) - pm1.fourier_by_card(s)).abs())
        .collect())
}

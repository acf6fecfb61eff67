//! Experiments behind the non-adaptive lower bound: the Parseval variance
//! identity, Chebyshev sweeps over `a` and the product-coefficient bound.

use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cube::discrete::{fwht, index_to_point};
use crate::cube::{fourier_gap, random_signs, DiscreteDist, HardFamily, HardInstance};
use crate::error::{Error, Result};
use crate::sq::dist::LabeledDistribution;
use crate::sq::query::StatQuery;
use crate::sq::session::{SqOracle, SqOracleSession};

const VARIANCE_BITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

impl VarianceIdentity {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// `E_a[(h1(P_a) - h1(Q_a))^2]` over every `a`, against
/// `sum_S h1^(S)^2 (P^(S) - Q^(S))^2`.
pub fn variance_identity_check(h1: &dyn Fn(&[f64]) -> f64, p: &DiscreteDist, q: &DiscreteDist) -> Result<VarianceIdentity> {
    let n = match (p.bits(), q.bits()) {
        (Some(a), Some(b)) if a == b => a,
        _ => return Err(Error::DomainMismatch("variance identity needs two cube laws of equal dimension".into())),
    };
    if n > VARIANCE_BITS {
        return Err(Error::EnumerationBudgetExceeded {
            bits: n,
            budget: VARIANCE_BITS,
        });
    }
    let size = 1usize << n;
    let hv: Vec<f64> = (0..size)
        .map(|idx| {
            let x: Vec<f64> = index_to_point(idx, n).into_iter().map(f64::from).collect();
            h1(&x).clamp(-1.0, 1.0)
        })
        .collect();

    let mut lhs = 0.0;
    for a in 0..size {
        let mut diff = 0.0;
        for (x, (pp, qq)) in p.probs().iter().zip(q.probs()).enumerate() {
            diff += (pp - qq) * hv[a ^ x];
        }
        lhs += diff * diff;
    }
    lhs /= size as f64;

    let mut hhat = hv;
    fwht(&mut hhat);
    let (ph, qh) = (p.fourier_all(), q.fourier_all());
    let rhs = hhat
        .iter()
        .zip(ph.iter().zip(&qh))
        .map(|(h, (a, b))| {
            let c = h / size as f64;
            c * c * (a - b) * (a - b)
        })
        .sum();
    Ok(VarianceIdentity { lhs, rhs })
}

/// `D_{1,0 | y=1}` and `D_{1,1 | y=1}` over `2d` bits.
pub fn family_conditionals(family: &HardFamily) -> Result<(DiscreteDist, DiscreteDist)> {
    let p1 = family.p1().enumerate()?;
    let pm1 = family.pm1().enumerate()?;
    Ok((p1.product(&pm1), pm1.product(&p1)))
}

/// `theta = 2 max_S |P_1^(S) - P_{-1}^(S)|` over all `S` in `[d]`.
pub fn family_theta(family: &HardFamily) -> Result<f64> {
    Ok(2.0 * fourier_gap(family.p1(), family.pm1(), family.d())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub queries: usize,
    pub threshold: f64,
    pub samples: usize,
    pub theta: f64,
    /// Fraction of sampled `a` with some gap `>= threshold`.
    pub fraction: f64,
    /// `k * 2 theta^2 / t^2`.
    pub bound: f64,
    /// One-sided 99% Hoeffding half-width for `fraction`.
    pub half_width: f64,
    pub max_gap: f64,
}

impl SweepReport {
    pub fn within_bound(&self) -> bool {
        self.fraction <= self.bound + self.half_width
    }
}

fn pair_for(family: &Arc<HardFamily>, a: Vec<i8>) -> Result<(HardInstance, HardInstance)> {
    let i0 = HardInstance::new(family.clone(), a, 0)?;
    let i1 = i0.partner();
    Ok((i0, i1))
}

/// `|h(D_{a,0}) - h(D_{a,1})|` for each query.
pub fn pair_gaps(queries: &[StatQuery], family: &Arc<HardFamily>, a: &[i8]) -> Result<Vec<f64>> {
    let (i0, i1) = pair_for(family, a.to_vec())?;
    let v0 = i0.expectation_batch(queries)?;
    let v1 = i1.expectation_batch(queries)?;
    Ok(v0.iter().zip(&v1).map(|(x, y)| (x - y).abs()).collect())
}

/// Empirical `Pr_a[max_j |h_j(D_{a,0}) - h_j(D_{a,1})| >= t]` against the
/// union of Chebyshev bounds.
pub fn chebyshev_sweep(
    queries: &[StatQuery],
    family: &Arc<HardFamily>,
    t: f64,
    n_a: usize,
    rng: &mut dyn RngCore,
) -> Result<SweepReport> {
    if !(t > 0.0) || n_a == 0 || queries.is_empty() {
        return Err(Error::InvalidParams("sweep needs t > 0, samples and queries".into()));
    }
    let theta = family_theta(family)?;
    let mut hits = 0usize;
    let mut max_gap = 0.0f64;
    for _ in 0..n_a {
        let a = random_signs(2 * family.d(), rng);
        let gaps = pair_gaps(queries, family, &a)?;
        let g = gaps.into_iter().fold(0.0, f64::max);
        max_gap = max_gap.max(g);
        if g >= t {
            hits += 1;
        }
    }
    Ok(SweepReport {
        queries: queries.len(),
        threshold: t,
        samples: n_a,
        theta,
        fraction: hits as f64 / n_a as f64,
        bound: queries.len() as f64 * 2.0 * theta * theta / (t * t),
        half_width: ((1.0f64 / 0.01).ln() / (2.0 * n_a as f64)).sqrt(),
        max_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub samples: usize,
    /// Fraction of `a` where both sessions gave identical transcripts.
    pub identical_fraction: f64,
    pub bound: f64,
}

/// Runs adversarial sessions for `b = 0` and `b = 1` with the same `a` and
/// compares every answer.
pub fn pairing_sweep(
    queries: &[StatQuery],
    family: &Arc<HardFamily>,
    tau: f64,
    n_a: usize,
    rng: &mut dyn RngCore,
) -> Result<PairingReport> {
    let theta = family_theta(family)?;
    let mut same = 0usize;
    for _ in 0..n_a {
        let a = random_signs(2 * family.d(), rng);
        let (i0, i1) = pair_for(family, a)?;
        let (d0, d1): (Arc<dyn LabeledDistribution>, Arc<dyn LabeledDistribution>) = (Arc::new(i0), Arc::new(i1));
        let mut answers = Vec::new();
        for b in 0..2u8 {
            let mut s = SqOracleSession::adversarial(d0.clone(), d1.clone(), b, tau)?
                .non_adaptive()
                .with_budget(queries.len());
            for q in queries {
                s.submit(q.clone())?;
            }
            answers.push(s.answers()?);
        }
        if answers[0] == answers[1] {
            same += 1;
        }
    }
    Ok(PairingReport {
        samples: n_a,
        identical_fraction: same as f64 / n_a as f64,
        bound: (1.0 - queries.len() as f64 * 2.0 * theta * theta / (tau * tau)).max(0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorReport {
    pub trials: usize,
    /// `max |(P x Q)^(S1, S2) - P^(S1) Q^(S2)|`.
    pub factorization_error: f64,
    /// `max` of the coefficient gap minus its bound; `<= 0` when the bound holds.
    pub max_excess: f64,
}

impl TensorReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_excess <= tol && self.factorization_error <= tol
    }
}

/// Checks `|(P x Q)^(S1,S2) - (P' x Q')^(S1,S2)| <= |P^(S1) - P'^(S1)| + |Q^(S2) - Q'^(S2)|`
/// on random `(S1, S2)`.
pub fn tensor_gap_bound_check(
    p: &DiscreteDist,
    p2: &DiscreteDist,
    q: &DiscreteDist,
    q2: &DiscreteDist,
    trials: usize,
    rng: &mut dyn RngCore,
) -> Result<TensorReport> {
    let (np, nq) = match (p.bits(), p2.bits(), q.bits(), q2.bits()) {
        (Some(a), Some(b), Some(c), Some(d)) if a == b && c == d => (a, c),
        _ => return Err(Error::DomainMismatch("tensor check needs matching cube laws".into())),
    };
    if np + nq > crate::cube::product::ENUMERATION_BITS {
        return Err(Error::EnumerationBudgetExceeded {
            bits: np + nq,
            budget: crate::cube::product::ENUMERATION_BITS,
        });
    }
    let pq = p.product(q);
    let pq2 = p2.product(q2);
    let mut factorization_error = 0.0f64;
    let mut max_excess = f64::NEG_INFINITY;
    for _ in 0..trials {
        let s1 = rng.gen_range(0..1usize << np);
        let s2 = rng.gen_range(0..1usize << nq);
        let mask = s1 | s2 << np;
        let joint = pq.fourier(mask);
        let joint2 = pq2.fourier(mask);
        factorization_error = factorization_error
            .max((joint - p.fourier(s1) * q.fourier(s2)).abs())
            .max((joint2 - p2.fourier(s1) * q2.fourier(s2)).abs());
        let rhs = (p.fourier(s1) - p2.fourier(s1)).abs() + (q.fourier(s2) - q2.fourier(s2)).abs();
        max_excess = max_excess.max((joint - joint2).abs() - rhs);
    }
    Ok(TensorReport {
        trials,
        factorization_error,
        max_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::discrete::parity;
    use crate::cube::lift;
    use crate::moment::{AtomicMeasure, ConstructionParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn atomic_lift(d: usize, atoms: &[(f64, f64)]) -> DiscreteDist {
        let m = AtomicMeasure::new(atoms.to_vec()).unwrap();
        lift(m, d).unwrap().enumerate().unwrap()
    }

    #[test]
    fn constant_query_has_zero_variance() {
        let p = atomic_lift(3, &[(0.5, 0.5), (-0.2, 0.5)]);
        let q = atomic_lift(3, &[(0.1, 1.0)]);
        let r = variance_identity_check(&|_| 0.7, &p, &q).unwrap();
        assert!(r.lhs.abs() < 1e-15 && r.rhs.abs() < 1e-15);
    }

    #[test]
    fn single_parity_closed_form() {
        let p = atomic_lift(3, &[(0.6, 0.3), (-0.3, 0.7)]);
        let q = atomic_lift(3, &[(0.2, 0.5), (-0.4, 0.5)]);
        let mask = 0b101;
        let r = variance_identity_check(&|x| x[0] * x[2], &p, &q).unwrap();
        let expected = (p.fourier(mask) - q.fourier(mask)).powi(2);
        assert!((r.rhs - expected).abs() < 1e-14);
        assert!((r.lhs - expected).abs() < 1e-14);
        assert_eq!(parity(mask, mask), 1.0);
    }

    #[test]
    fn identical_lifts_never_separate() {
        let params = ConstructionParams::explicit(0.1, 0.1 * 3f64.powf(-1.5), 3).unwrap();
        let fam = Arc::new(HardFamily::new(&params, 4).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = StatQuery::constant(0.3);
        let r = chebyshev_sweep(&[q], &fam, 1e-6, 50, &mut rng).unwrap();
        assert_eq!(r.fraction, 0.0);
    }

    #[test]
    fn tensor_bound_on_identical_pairs() {
        let p = atomic_lift(3, &[(0.6, 0.3), (-0.3, 0.7)]);
        let q = atomic_lift(2, &[(0.2, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = tensor_gap_bound_check(&p, &p, &q, &q, 40, &mut rng).unwrap();
        assert!(r.max_excess <= 0.0);
        assert!(r.factorization_error < 1e-15);
    }
}

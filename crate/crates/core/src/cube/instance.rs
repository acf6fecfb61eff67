//! The labeled hard family `(D_{a,b}, f_{a,b})`.
//!
//! With `z1 ~ P1`, `z-1 ~ P-1` and a uniform hidden label `y`, a point of
//! `D_{a,0}` is `a * (y z1, y z-1)` and a point of `D_{a,1}` is
//! `a * (y z-1, y z1)`. The target `f_{a,b}` is the sign of the `a`-weighted
//! sum over the half that carries `z1`, with `sign(0) = +1`.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::discrete::{index_to_point, DiscreteDist};
use super::product::{fourier_gaps, lift, ProductMixtureCube, ENUMERATION_BITS};
use crate::error::{Error, Result};
use crate::moment::{
    construct_q_detailed, rescale_and_condition, CanonicalQ, ConditionReport, ConstructionParams, MixtureP,
};

pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// `min label <x, w> / (|x| |w|)` over the points.
pub fn margin_of<T: Copy + Into<f64>>(w: &[f64], points: &[(Vec<T>, i8)]) -> Result<f64> {
    let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if wn == 0.0 {
        return Err(Error::ZeroWeightVector);
    }
    if points.is_empty() {
        return Err(Error::InvalidParams("no points".into()));
    }
    let mut best = f64::INFINITY;
    for (x, label) in points {
        if x.len() != w.len() {
            return Err(Error::DomainMismatch("point and weight lengths differ".into()));
        }
        let xs: Vec<f64> = x.iter().map(|&v| v.into()).collect();
        let xn = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if xn == 0.0 {
            return Err(Error::InvalidParams("zero point".into()));
        }
        let dot: f64 = xs.iter().zip(w).map(|(a, b)| a * b).sum();
        best = best.min(*label as f64 * dot / (xn * wn));
    }
    Ok(best)
}

/// Checks and measured constants for a hard family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyCertificate {
    pub params: ConstructionParams,
    pub d: usize,
    pub in_theorem_regime: bool,
    pub root_path: crate::moment::RootPath,
    #[serde(with = "crate::decimal::vec")]
    pub moment_residuals: Vec<f64>,
    #[serde(with = "crate::decimal")]
    pub rho_at_node: f64,
    /// `(1 - rho_k(-gamma')) / eta`.
    #[serde(with = "crate::decimal")]
    pub measured_c_rho: f64,
    pub conditioning: ConditionReport,
    /// `|P1^(S) - P-1^(S)|` by `|S| = 0..=d`.
    #[serde(with = "crate::decimal::vec")]
    pub fourier_gaps: Vec<f64>,
    /// `max_S |P1^(S) - P-1^(S)|`, which is `theta / 2`.
    #[serde(with = "crate::decimal")]
    pub half_theta: f64,
    #[serde(with = "crate::decimal")]
    pub tv_p1_neg_pm1: f64,
    /// `d_TV(P1, -P-1) / eta`.
    #[serde(with = "crate::decimal")]
    pub measured_c_tv: f64,
    /// Mass of `P_B` removed by the majority conditioning.
    #[serde(with = "crate::decimal")]
    pub majority_removed: f64,
    /// `exp(-d gamma~^2 / 8)`.
    #[serde(with = "crate::decimal")]
    pub chernoff_bound: f64,
    /// Smallest `sum_i x_i / d` on the support of `P1`.
    #[serde(with = "crate::decimal")]
    pub min_support_bias: f64,
    /// Exact margin of `f_{a,b}` on `D_{a,b}`.
    #[serde(with = "crate::decimal")]
    pub margin: f64,
    /// `Pr_{D_{a,b}}[f_{a,0} = f_{a,1}]`.
    #[serde(with = "crate::decimal")]
    pub agreement: f64,
}

/// `P1`, `P-1` and the intermediate objects, shared by every `(a, b)`.
#[derive(Debug, Clone)]
pub struct HardFamily {
    params: ConstructionParams,
    d: usize,
    q: CanonicalQ,
    conditioning: ConditionReport,
    p1: ProductMixtureCube,
    pm1: ProductMixtureCube,
}

impl HardFamily {
    pub fn new(params: &ConstructionParams, d: usize) -> Result<Self> {
        Self::with_threshold(params, d, params.gamma_tilde / 2.0)
    }

    /// `P1` conditions `P_B` on `sum_i x_i / d >= threshold`.
    pub fn with_threshold(params: &ConstructionParams, d: usize, threshold: f64) -> Result<Self> {
        if let Some(required) = params.min_dimension() {
            if d < required {
                return Err(Error::DimensionTooSmall { d, required });
            }
        }
        let q = construct_q_detailed(params)?;
        let cond = rescale_and_condition(&MixtureP::new(params.eta)?, &q.measure, params, d.max(2 * params.k))?;
        let p1 = lift(cond.p_prime, d)?.conditioned_on_majority(threshold)?;
        let pm1 = lift(cond.q_prime, d)?;
        Ok(Self {
            params: *params,
            d,
            q,
            conditioning: cond.report,
            p1,
            pm1,
        })
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p1(&self) -> &ProductMixtureCube {
        &self.p1
    }

    pub fn pm1(&self) -> &ProductMixtureCube {
        &self.pm1
    }

    pub fn canonical_q(&self) -> &CanonicalQ {
        &self.q
    }

    pub fn condition_report(&self) -> &ConditionReport {
        &self.conditioning
    }

    /// `Pr[f_{a,0} = f_{a,1}]` under either `D_{a,b}`; it only involves `P-1`.
    pub fn agreement(&self) -> f64 {
        let d = self.d as f64;
        self.pm1
            .count_pmf()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let s = 2.0 * j as f64 - d;
                if s > 0.0 {
                    *c
                } else if s == 0.0 {
                    0.5 * c
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn margin(&self) -> f64 {
        let d = self.d as f64;
        self.p1
            .support_counts()
            .into_iter()
            .map(|j| (2.0 * j as f64 - d) / (2f64.sqrt() * d))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn certificate(&self) -> Result<FamilyCertificate> {
        let d = self.d as f64;
        let gaps = fourier_gaps(&self.p1, &self.pm1, self.d)?;
        let tv = self.p1.tv(&self.pm1.negate())?;
        let min_support_bias = self
            .p1
            .support_counts()
            .into_iter()
            .map(|j| (2.0 * j as f64 - d) / d)
            .fold(f64::INFINITY, f64::min);
        Ok(FamilyCertificate {
            params: self.params,
            d: self.d,
            in_theorem_regime: self.params.in_theorem_regime(),
            root_path: self.q.path,
            moment_residuals: self.q.moment_residuals.clone(),
            rho_at_node: self.q.rho_x0,
            measured_c_rho: self.q.measured_c(),
            conditioning: self.conditioning.clone(),
            half_theta: gaps.iter().cloned().fold(0.0, f64::max),
            fourier_gaps: gaps,
            tv_p1_neg_pm1: tv,
            measured_c_tv: tv / self.params.eta,
            majority_removed: self.p1.removed_mass(),
            chernoff_bound: (-d * self.params.gamma_tilde.powi(2) / 8.0).exp(),
            min_support_bias,
            margin: self.margin(),
            agreement: self.agreement(),
        })
    }
}

/// One member `(D_{a,b}, f_{a,b})`.
#[derive(Debug, Clone)]
pub struct HardInstance {
    family: Arc<HardFamily>,
    a: Vec<i8>,
    b: u8,
}

pub fn build_instance(params: &ConstructionParams, d: usize, a: Vec<i8>, b: u8) -> Result<HardInstance> {
    HardInstance::new(Arc::new(HardFamily::new(params, d)?), a, b)
}

/// Uniform sign vector.
pub fn random_signs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<i8> {
    (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()
}

impl HardInstance {
    pub fn new(family: Arc<HardFamily>, a: Vec<i8>, b: u8) -> Result<Self> {
        if a.len() != 2 * family.d || a.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidParams(format!(
                "a must be a sign vector of length {}",
                2 * family.d
            )));
        }
        if b > 1 {
            return Err(Error::InvalidParams(format!("b = {b} is not a bit")));
        }
        Ok(Self { family, a, b })
    }

    pub fn family(&self) -> &Arc<HardFamily> {
        &self.family
    }

    pub fn a(&self) -> &[i8] {
        &self.a
    }

    pub fn b(&self) -> u8 {
        self.b
    }

    pub fn d(&self) -> usize {
        self.family.d
    }

    /// The member with the other `b` and the same `a`.
    pub fn partner(&self) -> Self {
        Self {
            family: self.family.clone(),
            a: self.a.clone(),
            b: 1 - self.b,
        }
    }

    /// Laws of the first and second halves before the sign flip by `a y`.
    pub fn halves(&self) -> (&ProductMixtureCube, &ProductMixtureCube) {
        if self.b == 0 {
            (&self.family.p1, &self.family.pm1)
        } else {
            (&self.family.pm1, &self.family.p1)
        }
    }

    /// `f_{a,b}(x)`.
    pub fn target(&self, x: &[i8]) -> i8 {
        let d = self.family.d;
        let range = if self.b == 0 { 0..d } else { d..2 * d };
        let s: i32 = range.map(|i| self.a[i] as i32 * x[i] as i32).sum();
        if s >= 0 {
            1
        } else {
            -1
        }
    }

    /// The weight vector `a'` supported on the target half.
    pub fn target_weights(&self) -> Vec<f64> {
        let d = self.family.d;
        (0..2 * d)
            .map(|i| {
                let on = if self.b == 0 { i < d } else { i >= d };
                if on { self.a[i] as f64 } else { 0.0 }
            })
            .collect()
    }

    /// A point and its hidden label.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<i8>, i8) {
        let y: i8 = if rng.gen::<bool>() { 1 } else { -1 };
        let (first, second) = self.halves();
        let z1 = first.sample(rng);
        let z2 = second.sample(rng);
        let x = z1
            .iter()
            .chain(&z2)
            .zip(&self.a)
            .map(|(z, a)| z * a * y)
            .collect();
        (x, y)
    }

    /// `D_{a,b}` conditioned on the hidden label, over `2d` bits.
    pub fn enumerate_conditional(&self, y: i8) -> Result<DiscreteDist> {
        let n = 2 * self.family.d;
        if n > ENUMERATION_BITS {
            return Err(Error::EnumerationBudgetExceeded {
                bits: n,
                budget: ENUMERATION_BITS,
            });
        }
        let (first, second) = self.halves();
        let joint = first.enumerate()?.product(&second.enumerate()?);
        let signs: Vec<i8> = self.a.iter().map(|a| a * y).collect();
        joint.flip(&signs)
    }

    /// Points of `supp(D_{a,b})` with their labels, by enumeration.
    pub fn support(&self) -> Result<Vec<(Vec<i8>, i8)>> {
        let mut out = Vec::new();
        for y in [1i8, -1] {
            let dist = self.enumerate_conditional(y)?;
            for (idx, p) in dist.probs().iter().enumerate() {
                if *p > 0.0 {
                    out.push((index_to_point(idx, 2 * self.family.d), y));
                }
            }
        }
        Ok(out)
    }
}

/// Serialized instance: parameters, `a`, `b`, seed and certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub params: ConstructionParams,
    pub d: usize,
    pub a: Vec<i8>,
    pub b: u8,
    pub seed: u64,
    pub certificate: FamilyCertificate,
}

impl InstanceFile {
    pub fn new(instance: &HardInstance, seed: u64) -> Result<Self> {
        Ok(Self {
            params: instance.family.params,
            d: instance.family.d,
            a: instance.a.clone(),
            b: instance.b,
            seed,
            certificate: instance.family.certificate()?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Rebuilds the instance from the stored parameters.
    pub fn instance(&self) -> Result<HardInstance> {
        build_instance(&self.params, self.d, self.a.clone(), self.b)
    }
}

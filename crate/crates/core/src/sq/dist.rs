//! Labeled distributions and exact or Monte Carlo query values.

use std::collections::HashMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::cube::discrete::index_to_point;
use crate::cube::product::ENUMERATION_BITS;
use crate::cube::{HardInstance, ProductMixtureCube};
use crate::error::{Error, Result};
use crate::sq::query::{tie_eps, GateFeature, QueryStructure, StatQuery};

/// A distribution over labeled examples `(x, y)` with `y` in `{-1, 1}`.
pub trait LabeledDistribution: Send + Sync {
    fn dim(&self) -> usize;

    /// `E[h(x, y)]` computed without sampling.
    fn expectation(&self, q: &StatQuery) -> Result<f64>;

    fn expectation_batch(&self, qs: &[StatQuery]) -> Result<Vec<f64>> {
        qs.iter().map(|q| self.expectation(q)).collect()
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> (Vec<f64>, f64);
}

/// Finitely supported labeled distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteLabeled {
    dim: usize,
    points: Vec<(Vec<f64>, f64)>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl FiniteLabeled {
    pub fn new(points: Vec<(Vec<f64>, f64)>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::InvalidMeasure("points and probabilities differ in length".into()));
        }
        let dim = points[0].0.len();
        if points.iter().any(|(x, y)| x.len() != dim || (*y != 1.0 && *y != -1.0)) {
            return Err(Error::InvalidMeasure("inconsistent dimension or non-sign label".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidMeasure("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMeasure(format!("probabilities sum to {total}")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            dim,
            points,
            probs,
            cumulative,
        })
    }

    pub fn uniform(points: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n as f64; n])
    }

    /// Exhaustive support of a hard instance with `2d <= 20`.
    pub fn from_instance(inst: &HardInstance) -> Result<Self> {
        let n = 2 * inst.d();
        let mut points = Vec::new();
        let mut probs = Vec::new();
        for y in [1i8, -1] {
            let dist = inst.enumerate_conditional(y)?;
            for (idx, p) in dist.probs().iter().enumerate() {
                if *p > 0.0 {
                    let x = index_to_point(idx, n).into_iter().map(f64::from).collect();
                    points.push((x, y as f64));
                    probs.push(0.5 * p);
                }
            }
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Self::new(points, probs)
    }

    pub fn points(&self) -> &[(Vec<f64>, f64)] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl LabeledDistribution for FiniteLabeled {
    fn dim(&self) -> usize {
        self.dim
    }

    fn expectation(&self, q: &StatQuery) -> Result<f64> {
        Ok(self
            .points
            .iter()
            .zip(&self.probs)
            .map(|((x, y), p)| p * q.eval(x, *y))
            .sum())
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> (Vec<f64>, f64) {
        let u = rand::Rng::gen::<f64>(rng) * self.cumulative[self.cumulative.len() - 1];
        let i = self.cumulative.partition_point(|c| *c <= u).min(self.points.len() - 1);
        self.points[i].clone()
    }
}

/// `s(z) = <u, z>` over all `z` in `{-1, 1}^d`, indexed as in the cube layer.
fn all_inner_products(u: &[f64]) -> Vec<f64> {
    let d = u.len();
    let mut s = vec![0.0; 1 << d];
    s[0] = u.iter().sum();
    for idx in 1..(1usize << d) {
        let low = idx.trailing_zeros() as usize;
        s[idx] = s[idx & (idx - 1)] - 2.0 * u[low];
    }
    s
}

fn point_masses(half: &ProductMixtureCube) -> Vec<f64> {
    let d = half.d();
    let per_count: Vec<f64> = (0..=d).map(|j| half.point_mass(j)).collect();
    (0..(1usize << d))
        .map(|idx| per_count[d - idx.count_ones() as usize])
        .collect()
}

#[inline]
fn coord(idx: usize, i: usize) -> f64 {
    if idx >> i & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `Pr[s <= t]`, `Pr[s < -t]` and `E[z_i 1(s <= t)]` for `s = <u, z>`.
struct GatedPass {
    mass: f64,
    strict_below: f64,
    coords: Vec<f64>,
}

fn gated_pass(first: &ProductMixtureCube, second: &ProductMixtureCube, u: &[f64], t: f64, eps: f64) -> GatedPass {
    let d = first.d();
    let (ua, ub) = u.split_at(d);
    let sa = all_inner_products(ua);
    let sb = all_inner_products(ub);
    let pa = point_masses(first);
    let pb = point_masses(second);

    let mut order: Vec<usize> = (0..sb.len()).filter(|&i| pb[i] > 0.0).collect();
    order.sort_by(|&i, &j| sb[i].total_cmp(&sb[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| sb[i]).collect();
    let mut pref_mass = vec![0.0; order.len() + 1];
    let mut pref_coord = vec![vec![0.0; order.len() + 1]; d];
    for (k, &idx) in order.iter().enumerate() {
        pref_mass[k + 1] = pref_mass[k] + pb[idx];
        for (i, pc) in pref_coord.iter_mut().enumerate() {
            pc[k + 1] = pc[k] + pb[idx] * coord(idx, i);
        }
    }

    let mut mass = 0.0;
    let mut strict_below = 0.0;
    let mut coords = vec![0.0; 2 * d];
    for (ia, &p) in pa.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let k = sorted.partition_point(|s| sa[ia] + s <= t + eps);
        let ks = sorted.partition_point(|s| sa[ia] + s < -t - eps);
        let mb = pref_mass[k];
        mass += p * mb;
        strict_below += p * pref_mass[ks];
        for i in 0..d {
            coords[i] += p * coord(ia, i) * mb;
            coords[d + i] += p * pref_coord[i][k];
        }
    }
    GatedPass {
        mass,
        strict_below,
        coords,
    }
}

fn weight_key(w: &[f64], t: f64) -> Vec<u64> {
    w.iter().map(|v| v.to_bits()).chain(std::iter::once(t.to_bits())).collect()
}

impl HardInstance {
    fn label_moment(power: usize) -> f64 {
        if power % 2 == 0 {
            1.0
        } else {
            0.0
        }
    }

    fn parity_value(&self, set: &[usize], label_power: u8) -> Result<f64> {
        let d = self.d();
        if set.iter().any(|&i| i >= 2 * d) {
            return Err(Error::DomainMismatch(format!("set {set:?} outside [{}]", 2 * d)));
        }
        let chi_a: f64 = set.iter().map(|&i| self.a()[i] as f64).product();
        let card_a = set.iter().filter(|&&i| i < d).count();
        let card_b = set.len() - card_a;
        let (first, second) = self.halves();
        Ok(chi_a
            * Self::label_moment(label_power as usize + set.len())
            * first.fourier_by_card(card_a)
            * second.fourier_by_card(card_b))
    }

    fn folded_weights(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != 2 * self.d() {
            return Err(Error::DomainMismatch(format!(
                "weight vector of length {} in dimension {}",
                w.len(),
                2 * self.d()
            )));
        }
        Ok(w.iter().zip(self.a()).map(|(w, a)| w * *a as f64).collect())
    }

    fn pass(&self, w: &[f64], t: f64) -> Result<GatedPass> {
        let u = self.folded_weights(w)?;
        let (first, second) = self.halves();
        Ok(gated_pass(first, second, &u, t, tie_eps(w)))
    }

    fn from_pass(&self, q: &QueryStructure, pass: &GatedPass) -> f64 {
        match q {
            QueryStructure::Misclassification { .. } => pass.strict_below + 0.5 * (pass.mass - pass.strict_below),
            QueryStructure::MarginGated { feature, .. } => match feature {
                GateFeature::One => pass.mass,
                GateFeature::LabelTimesCoord(i) => self.a()[*i] as f64 * pass.coords[*i],
            },
            QueryStructure::LabeledParity { .. } => unreachable!(),
        }
    }

    fn pass_key(q: &QueryStructure) -> Option<(Vec<f64>, f64)> {
        match q {
            QueryStructure::Misclassification { w } => Some((w.clone(), 0.0)),
            QueryStructure::MarginGated { w, threshold, .. } => Some((w.clone(), *threshold)),
            QueryStructure::LabeledParity { .. } => None,
        }
    }

    fn check_feature(&self, q: &QueryStructure) -> Result<()> {
        if let QueryStructure::MarginGated {
            feature: GateFeature::LabelTimesCoord(i),
            ..
        } = q
        {
            if *i >= 2 * self.d() {
                return Err(Error::DomainMismatch(format!("coordinate {i} out of range")));
            }
        }
        Ok(())
    }

    fn enumerated_value(&self, q: &StatQuery) -> Result<f64> {
        let n = 2 * self.d();
        let mut total = 0.0;
        for y in [1i8, -1] {
            let dist = self.enumerate_conditional(y)?;
            let mut x = vec![0.0; n];
            for (idx, p) in dist.probs().iter().enumerate() {
                if *p > 0.0 {
                    for (i, xi) in x.iter_mut().enumerate() {
                        *xi = coord(idx, i);
                    }
                    total += 0.5 * p * q.eval(&x, y as f64);
                }
            }
        }
        Ok(total)
    }
}

impl LabeledDistribution for HardInstance {
    fn dim(&self) -> usize {
        2 * self.d()
    }

    fn expectation(&self, q: &StatQuery) -> Result<f64> {
        Ok(self.expectation_batch(std::slice::from_ref(q))?[0])
    }

    fn expectation_batch(&self, qs: &[StatQuery]) -> Result<Vec<f64>> {
        let mut cache: HashMap<Vec<u64>, GatedPass> = HashMap::new();
        let mut out = Vec::with_capacity(qs.len());
        for q in qs {
            let v = match q.structure() {
                Some(QueryStructure::LabeledParity { set, label_power }) => self.parity_value(set, *label_power)?,
                Some(s) => {
                    self.check_feature(s)?;
                    let (w, t) = Self::pass_key(s).expect("gated structure");
                    let key = weight_key(&w, t);
                    if !cache.contains_key(&key) {
                        let pass = self.pass(&w, t)?;
                        cache.insert(key.clone(), pass);
                    }
                    self.from_pass(s, &cache[&key])
                }
                None => {
                    if 2 * self.d() > ENUMERATION_BITS {
                        return Err(Error::EnumerationBudgetExceeded {
                            bits: 2 * self.d(),
                            budget: ENUMERATION_BITS,
                        });
                    }
                    self.enumerated_value(q)?
                }
            };
            out.push(v);
        }
        Ok(out)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> (Vec<f64>, f64) {
        let (x, y) = self.sample(rng);
        (x.into_iter().map(f64::from).collect(), y as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqEstimate {
    pub value: f64,
    /// Half-width of a 99% Hoeffding interval; zero for exact values.
    pub half_width: f64,
}

/// Half-width of the 99% Hoeffding interval for `n` samples in `[-1, 1]`.
pub fn hoeffding_half_width(n: usize, confidence: f64) -> f64 {
    let delta = 1.0 - confidence;
    (2.0 * (2.0 / delta).ln() / n as f64).sqrt()
}

/// `h(D) = E_{(x, y) ~ D}[h(x, y)]`.
pub fn sq_value(h: &StatQuery, dist: &dyn LabeledDistribution, mode: EvalMode, rng: &mut dyn RngCore) -> Result<SqEstimate> {
    match mode {
        EvalMode::Exact => Ok(SqEstimate {
            value: dist.expectation(h)?,
            half_width: 0.0,
        }),
        EvalMode::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::InvalidParams("Monte Carlo needs at least one sample".into()));
            }
            let mut sum = 0.0;
            for _ in 0..samples {
                let (x, y) = dist.sample_point(rng);
                sum += h.eval(&x, y);
            }
            Ok(SqEstimate {
                value: sum / samples as f64,
                half_width: hoeffding_half_width(samples, 0.99),
            })
        }
    }
}

//! Hypotheses, learner reports and synthetic separable data.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sq::{predict, FiniteLabeled, LabeledDistribution, StatQuery};

/// `x -> sign(<w, x>)` with `sign(0) = +1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    #[serde(with = "crate::decimal::vec")]
    pub w: Vec<f64>,
}

impl Hypothesis {
    pub fn new(w: Vec<f64>) -> Self {
        Self { w }
    }

    pub fn zero(dim: usize) -> Self {
        Self { w: vec![0.0; dim] }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        predict(&self.w, x)
    }

    pub fn norm(&self) -> f64 {
        self.w.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Radial projection onto the unit ball.
    pub fn project_to_ball(&mut self) {
        let n = self.norm();
        if n > 1.0 {
            self.w.iter_mut().for_each(|v| *v /= n);
        }
    }

    /// Exact classification error under `dist`.
    pub fn error(&self, dist: &dyn LabeledDistribution) -> Result<f64> {
        dist.expectation(&StatQuery::misclassification(self.w.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerReport {
    pub learner: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub rounds: usize,
    pub queries_used: usize,
    #[serde(with = "crate::decimal")]
    pub final_err: f64,
    #[serde(with = "crate::decimal")]
    pub final_loss: f64,
}

impl LearnerReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v = gaussian_vector(dim, rng);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `n` uniform points on the sphere with `|<w*, x>| >= gamma`, labeled by
/// `sign(<w*, x>)`, together with the unit separator `w*`.
pub fn separable_sphere_instance<R: Rng + ?Sized>(
    dim: usize,
    gamma: f64,
    n: usize,
    rng: &mut R,
) -> Result<(FiniteLabeled, Vec<f64>)> {
    if dim == 0 || n == 0 || !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "need dim > 0, n > 0 and gamma in (0, 1], got {dim}, {n}, {gamma}"
        )));
    }
    let w_star = unit_vector(dim, rng);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let x = if gamma >= 1.0 {
            let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            w_star.iter().map(|v| v * s).collect()
        } else {
            let u = unit_vector(dim, rng);
            let along: f64 = u.iter().zip(&w_star).map(|(a, b)| a * b).sum();
            if along.abs() < gamma {
                continue;
            }
            u
        };
        let t: f64 = x.iter().zip(&w_star).map(|(a, b)| a * b).sum();
        points.push((x, if t >= 0.0 { 1.0 } else { -1.0 }));
    }
    Ok((FiniteLabeled::uniform(points)?, w_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::margin_of;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_instance_has_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (d, w) = separable_sphere_instance(4, 0.3, 100, &mut rng).unwrap();
        let pts: Vec<(Vec<f64>, i8)> = d.points().iter().map(|(x, y)| (x.clone(), *y as i8)).collect();
        assert!(margin_of(&w, &pts).unwrap() >= 0.3);
        assert_eq!(Hypothesis::new(w).error(&d).unwrap(), 0.0);
    }

    #[test]
    fn projection() {
        let mut h = Hypothesis::new(vec![3.0, 4.0]);
        h.project_to_ball();
        assert!((h.norm() - 1.0).abs() < 1e-15);
    }
}

//! Non-adaptive learners: best-of-random halfspaces and degree-one
//! label correlations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::report::{gaussian_vector, Hypothesis};
use crate::sq::{SqOracle, StatQuery};

/// `ceil(exp(c ln(1/eps) / gamma^2))`.
pub fn candidate_count(gamma: f64, eps: f64, c: f64) -> usize {
    (c * (1.0 / eps).ln() / (gamma * gamma)).exp().ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Smallest queried error.
    Error,
    /// First candidate, in draw order, with queried error at most `1/2 - advantage`;
    /// falls back to the smallest error.
    Advantage { advantage: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceRun {
    pub hypothesis: Hypothesis,
    pub chosen: usize,
    pub queried_err: f64,
    pub queries_used: usize,
    /// Queried error of every candidate, in draw order.
    pub candidate_errs: Vec<f64>,
}

/// Draws `m` standard Gaussian directions, asks for all their errors at
/// once and keeps the best.
pub fn random_halfspace_learner<R: Rng + ?Sized>(
    oracle: &mut dyn SqOracle,
    dim: usize,
    m: usize,
    mode: ThresholdMode,
    rng: &mut R,
) -> Result<HalfspaceRun> {
    if m == 0 || dim == 0 {
        return Err(Error::InvalidParams("need at least one candidate and dim > 0".into()));
    }
    let candidates: Vec<Vec<f64>> = (0..m).map(|_| gaussian_vector(dim, rng)).collect();
    let base = oracle.queries_used();
    for w in &candidates {
        oracle.submit(StatQuery::misclassification(w.clone()))?;
    }
    let errs = oracle.answers()?[base..base + m].to_vec();
    let argmin = errs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("m > 0");
    let chosen = match mode {
        ThresholdMode::Error => argmin,
        ThresholdMode::Advantage { advantage } => errs.iter().position(|e| *e <= 0.5 - advantage).unwrap_or(argmin),
    };
    Ok(HalfspaceRun {
        hypothesis: Hypothesis::new(candidates[chosen].clone()),
        chosen,
        queried_err: errs[chosen],
        queries_used: oracle.queries_used(),
        candidate_errs: errs,
    })
}

/// Subsets of `[dim]` by increasing size, up to `max_degree`, first `limit`.
fn parity_sets(dim: usize, max_degree: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_degree {
        if out.len() >= limit {
            break;
        }
        let mut next = Vec::new();
        for s in &layer {
            for i in s.last().map_or(0, |v| v + 1)..dim {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out.truncate(limit);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowDegreeRun {
    pub hypothesis: Hypothesis,
    pub queries_used: usize,
    /// Answers for every declared query, in order.
    pub answers: Vec<f64>,
    pub descriptors: Vec<String>,
}

/// Declares `y chi_S` for all `|S| <= max_degree` that fit in `budget`,
/// reads the answers once and returns `w_i = E[y x_i]`.
pub fn lowdeg_nonadaptive_learner(
    oracle: &mut dyn SqOracle,
    dim: usize,
    max_degree: usize,
    budget: usize,
) -> Result<LowDegreeRun> {
    if max_degree == 0 || budget < dim + 1 {
        return Err(Error::QueryBudgetExceeded { budget });
    }
    let sets = parity_sets(dim, max_degree, budget);
    let queries: Vec<StatQuery> = sets.iter().map(|s| StatQuery::labeled_parity(s.clone(), 1)).collect();
    let descriptors = queries.iter().map(|q| q.descriptor().to_string()).collect();
    let base = oracle.queries_used();
    for q in queries {
        oracle.submit(q)?;
    }
    let answers = oracle.answers()?[base..base + sets.len()].to_vec();
    let w = (0..dim).map(|i| answers[1 + i]).collect();
    Ok(LowDegreeRun {
        hypothesis: Hypothesis::new(w),
        queries_used: oracle.queries_used(),
        answers,
        descriptors,
    })
}

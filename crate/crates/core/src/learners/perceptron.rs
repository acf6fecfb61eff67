//! Interactive Perceptron driven by statistical queries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::report::Hypothesis;
use crate::sq::{GateFeature, SqOracle, StatQuery};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptronConfig {
    pub dim: usize,
    /// Largest `|x|_2` in the support.
    pub radius: f64,
    /// Stop once the queried error is at most this.
    pub target_err: f64,
    pub max_rounds: usize,
    /// Return `NoProgress` instead of the last iterate when rounds run out.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptronRun {
    pub hypothesis: Hypothesis,
    pub rounds: usize,
    pub updates: usize,
    pub queries_used: usize,
    pub queried_err: f64,
    pub converged: bool,
}

/// Each round asks for the error of `w`, the mass of points with
/// `y <w, x> <= 0` and every coordinate of `E[y x 1(y <w, x> <= 0)]`, then
/// adds the conditional mean of `y x / radius` over that set.
pub fn perceptron_sq(oracle: &mut dyn SqOracle, cfg: &PerceptronConfig) -> Result<PerceptronRun> {
    if cfg.dim == 0 || !(cfg.radius > 0.0) {
        return Err(Error::InvalidParams("perceptron needs dim > 0 and radius > 0".into()));
    }
    let mut w = vec![0.0; cfg.dim];
    let mut updates = 0;
    let mut queried_err = 1.0;
    for round in 0..cfg.max_rounds {
        let base = oracle.submit(StatQuery::misclassification(w.clone()))?;
        oracle.submit(StatQuery::margin_gated(w.clone(), 0.0, GateFeature::One))?;
        for i in 0..cfg.dim {
            oracle.submit(StatQuery::margin_gated(w.clone(), 0.0, GateFeature::LabelTimesCoord(i)))?;
        }
        let answers = oracle.answers()?;
        let round_answers = &answers[base..base + cfg.dim + 2];
        queried_err = round_answers[0];
        let mass = round_answers[1];
        if queried_err <= cfg.target_err || mass <= 0.0 {
            return Ok(PerceptronRun {
                hypothesis: Hypothesis::new(w),
                rounds: round + 1,
                updates,
                queries_used: oracle.queries_used(),
                queried_err,
                converged: true,
            });
        }
        for (wi, u) in w.iter_mut().zip(&round_answers[2..]) {
            *wi += u / (mass * cfg.radius);
        }
        updates += 1;
    }
    if cfg.strict {
        return Err(Error::NoProgress {
            rounds: cfg.max_rounds,
            error: queried_err,
        });
    }
    Ok(PerceptronRun {
        hypothesis: Hypothesis::new(w),
        rounds: cfg.max_rounds,
        updates,
        queries_used: oracle.queries_used(),
        queried_err,
        converged: false,
    })
}

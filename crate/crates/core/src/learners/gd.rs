//! Projected gradient descent on `E[phi(y <w, s x>)]` with gradients read
//! off statistical queries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::loss::LossSpec;
use crate::learners::report::Hypothesis;
use crate::sq::{dot, SqOracle, StatQuery};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    pub dim: usize,
    /// Inputs are multiplied by this before the loss; `1/sqrt(n)` for cube points.
    pub input_scale: f64,
    pub steps: usize,
    /// Defaults to `1 / (L sqrt(steps))`.
    pub step_size: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdRun {
    pub hypothesis: Hypothesis,
    pub steps: usize,
    pub queries_used: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
}

fn margin(w: &[f64], x: &[f64], y: f64, scale: f64) -> f64 {
    (y * scale * dot(w, x)).clamp(-1.0, 1.0)
}

fn loss_query(loss: LossSpec, w: &[f64], scale: f64) -> StatQuery {
    let w = w.to_vec();
    let top = loss.max_value();
    StatQuery::new(format!("loss:{:?}", loss.kind), move |x, y| loss.value(margin(&w, x, y, scale)) / top)
}

fn gradient_query(loss: LossSpec, w: &[f64], scale: f64, i: usize) -> StatQuery {
    let w = w.to_vec();
    let l = loss.lipschitz;
    StatQuery::new(format!("grad{i}:{:?}", loss.kind), move |x, y| {
        loss.derivative(margin(&w, x, y, scale)) * y * scale * x[i] / l
    })
}

fn queried_loss(oracle: &mut dyn SqOracle, loss: LossSpec, w: &[f64], scale: f64) -> Result<f64> {
    Ok(oracle.query(loss_query(loss, w, scale))? * loss.max_value())
}

/// Starts at `w0` (zero by default), projects onto the unit ball after each
/// step and stops with `DivergenceDetected` if the loss grows tenfold.
pub fn sq_gradient_descent(
    oracle: &mut dyn SqOracle,
    loss: &LossSpec,
    cfg: &GdConfig,
    w0: Option<Vec<f64>>,
) -> Result<GdRun> {
    let loss = *loss;
    let mut h = Hypothesis::new(w0.unwrap_or_else(|| vec![0.0; cfg.dim]));
    if h.w.len() != cfg.dim {
        return Err(Error::DomainMismatch("initial point has the wrong dimension".into()));
    }
    let initial_loss = queried_loss(oracle, loss, &h.w, cfg.input_scale)?;
    if cfg.steps == 0 {
        return Ok(GdRun {
            hypothesis: h,
            steps: 0,
            queries_used: oracle.queries_used(),
            initial_loss,
            final_loss: initial_loss,
        });
    }
    let eta = cfg
        .step_size
        .unwrap_or(1.0 / (loss.lipschitz * (cfg.steps as f64).sqrt()));
    let mut current = initial_loss;
    for _ in 0..cfg.steps {
        let base = oracle.queries_used();
        for i in 0..cfg.dim {
            oracle.submit(gradient_query(loss, &h.w, cfg.input_scale, i))?;
        }
        let grads = oracle.answers()?[base..base + cfg.dim].to_vec();
        for (wi, g) in h.w.iter_mut().zip(&grads) {
            *wi -= eta * g * loss.lipschitz;
        }
        h.project_to_ball();
        current = queried_loss(oracle, loss, &h.w, cfg.input_scale)?;
        if initial_loss > 0.0 && current > 10.0 * initial_loss {
            return Err(Error::DivergenceDetected {
                loss: current,
                initial: initial_loss,
            });
        }
    }
    Ok(GdRun {
        hypothesis: h,
        steps: cfg.steps,
        queries_used: oracle.queries_used(),
        initial_loss,
        final_loss: current,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sq::{FiniteLabeled, HonestNoise, LabeledDistribution, SqOracleSession};
    use std::sync::Arc;

    fn exact(d: FiniteLabeled) -> SqOracleSession {
        let d: Arc<dyn LabeledDistribution> = Arc::new(d);
        SqOracleSession::honest(d, 1e-9, HonestNoise::Zero).unwrap()
    }

    #[test]
    fn quadratic_reaches_closed_form_optimum() {
        // E[(1 - y<w,x>)^2 / 2] with orthogonal inputs has optimum w_i = E[y x_i] / E[x_i^2].
        let d = FiniteLabeled::new(
            vec![
                (vec![0.5, 0.0], 1.0),
                (vec![0.0, 0.5], -1.0),
                (vec![-0.5, 0.0], 1.0),
            ],
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        let ex: [f64; 2] = [(0.5 * 0.5 - 0.2 * 0.5) / (0.7 * 0.25), (-0.3 * 0.5) / (0.3 * 0.25)];
        let norm = (ex[0] * ex[0] + ex[1] * ex[1]).sqrt();
        assert!(norm > 1.0);
        let mut o = exact(d.clone());
        let cfg = GdConfig {
            dim: 2,
            input_scale: 1.0,
            steps: 1000,
            step_size: Some(1.0),
        };
        let run = sq_gradient_descent(&mut o, &LossSpec::squared(), &cfg, None).unwrap();
        // Constrained optimum: minimize the separable quadratic over the unit ball.
        let c: [f64; 2] = [0.7 * 0.25, 0.3 * 0.25];
        let b: [f64; 2] = [0.5 * 0.5 - 0.2 * 0.5, -0.3 * 0.5];
        let mut lo = 0.0;
        let mut hi = 100.0;
        for _ in 0..200 {
            let lam = 0.5 * (lo + hi);
            let n: f64 = (0..2).map(|i| (b[i] / (c[i] + lam)).powi(2)).sum::<f64>().sqrt();
            if n > 1.0 {
                lo = lam;
            } else {
                hi = lam;
            }
        }
        let w_star: Vec<f64> = (0..2).map(|i| b[i] / (c[i] + hi)).collect();
        let l_star = LossSpec::squared().expected(&w_star, &d);
        assert!((run.final_loss - l_star).abs() < 1e-3);
        for i in 0..2 {
            assert!((run.hypothesis.w[i] - w_star[i]).abs() < 1e-3);
        }
    }

    #[test]
    fn zero_steps_returns_start() {
        let d = FiniteLabeled::uniform(vec![(vec![1.0], 1.0)]).unwrap();
        let mut o = exact(d);
        let cfg = GdConfig {
            dim: 1,
            input_scale: 1.0,
            steps: 0,
            step_size: None,
        };
        let run = sq_gradient_descent(&mut o, &LossSpec::phi(0.3), &cfg, Some(vec![0.25])).unwrap();
        assert_eq!(run.hypothesis.w, vec![0.25]);
    }

    #[test]
    fn divergence_detected() {
        let d = FiniteLabeled::uniform(vec![(vec![1.0], 1.0)]).unwrap();
        let mut o = exact(d);
        let cfg = GdConfig {
            dim: 1,
            input_scale: 1.0,
            steps: 5,
            step_size: Some(-10.0),
        };
        let r = sq_gradient_descent(&mut o, &LossSpec::phi(0.3), &cfg, Some(vec![0.9]));
        assert!(matches!(r, Err(Error::DivergenceDetected { .. })));
    }
}

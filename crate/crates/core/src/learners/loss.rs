//! Margin losses `phi(y <w, x>)` and the error/loss bridge.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sq::{dot, FiniteLabeled, LabeledDistribution, StatQuery};

/// `max(0, gamma - <w, x> y)`.
pub fn hinge_loss(w: &[f64], x: &[f64], y: f64, gamma: f64) -> f64 {
    (gamma - dot(w, x) * y).max(0.0)
}

/// `(1 - t)^2 / 8` plus the piecewise penalty that vanishes above `gamma`.
pub fn phi_gamma(t: f64, gamma: f64) -> f64 {
    let base = (1.0 - t).powi(2) / 8.0;
    base + if t <= 0.0 {
        1.0 - 2.0 * t / gamma
    } else if t <= gamma {
        (t - gamma).powi(2) / (gamma * gamma)
    } else {
        0.0
    }
}

pub fn phi_gamma_derivative(t: f64, gamma: f64) -> f64 {
    let base = -(1.0 - t) / 4.0;
    base + if t <= 0.0 {
        -2.0 / gamma
    } else if t <= gamma {
        2.0 * (t - gamma) / (gamma * gamma)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    Hinge { gamma: f64 },
    Phi { gamma: f64 },
    ScaledPhi { theta: f64, gamma: f64 },
    /// `(1 - t)^2 / 2`
    Squared,
}

/// A loss of the margin `t = y <w, x>` with its certified constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    #[serde(with = "crate::decimal")]
    pub lipschitz: f64,
    #[serde(with = "crate::decimal")]
    pub smooth: f64,
    #[serde(with = "crate::decimal")]
    pub strongly_convex: f64,
    #[serde(with = "crate::decimal")]
    pub alpha: f64,
}

impl LossSpec {
    pub fn hinge(gamma: f64) -> Self {
        Self {
            kind: LossKind::Hinge { gamma },
            lipschitz: 1.0,
            smooth: f64::INFINITY,
            strongly_convex: 0.0,
            alpha: gamma / 3.0,
        }
    }

    pub fn phi(gamma: f64) -> Self {
        Self {
            kind: LossKind::Phi { gamma },
            lipschitz: 3.0 / gamma,
            smooth: 3.0 / (gamma * gamma),
            strongly_convex: 0.25,
            alpha: 0.125,
        }
    }

    pub fn scaled_phi(theta: f64, gamma: f64) -> Self {
        Self {
            kind: LossKind::ScaledPhi { theta, gamma },
            lipschitz: 3.0 * theta / gamma,
            smooth: 3.0 * theta / (gamma * gamma),
            strongly_convex: theta / 4.0,
            alpha: theta / 8.0,
        }
    }

    pub fn squared() -> Self {
        Self {
            kind: LossKind::Squared,
            lipschitz: 2.0,
            smooth: 1.0,
            strongly_convex: 1.0,
            alpha: 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            LossKind::Hinge { gamma } => (gamma - t).max(0.0),
            LossKind::Phi { gamma } => phi_gamma(t, gamma),
            LossKind::ScaledPhi { theta, gamma } => theta * phi_gamma(t, gamma),
            LossKind::Squared => (1.0 - t).powi(2) / 2.0,
        }
    }

    /// Derivative in `t`; the hinge uses the left derivative at its kink.
    pub fn derivative(&self, t: f64) -> f64 {
        match self.kind {
            LossKind::Hinge { gamma } => {
                if t <= gamma {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::Phi { gamma } => phi_gamma_derivative(t, gamma),
            LossKind::ScaledPhi { theta, gamma } => theta * phi_gamma_derivative(t, gamma),
            LossKind::Squared => t - 1.0,
        }
    }

    /// `max_{t in [-1, 1]}` of the loss; every kind is non-increasing.
    pub fn max_value(&self) -> f64 {
        self.value(-1.0)
    }

    /// `E[phi(y <w, x>)]` over a finite distribution.
    pub fn expected(&self, w: &[f64], dist: &FiniteLabeled) -> f64 {
        dist.points()
            .iter()
            .zip(dist.probs())
            .map(|((x, y), p)| p * self.value((y * dot(w, x)).clamp(-1.0, 1.0)))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    #[serde(with = "crate::decimal")]
    pub err: f64,
    #[serde(with = "crate::decimal")]
    pub loss: f64,
    /// `err <= loss / (9/8)`.
    pub holds: bool,
}

/// Classification error of `sign(<w, .>)` and `phi_gamma` loss of `w`.
pub fn err_loss_bridge(w: &[f64], dist: &FiniteLabeled, gamma: f64) -> Result<BridgeReport> {
    let err = dist.expectation(&StatQuery::misclassification(w.to_vec()))?;
    let loss = LossSpec::phi(gamma).expected(w, dist);
    Ok(BridgeReport {
        err,
        loss,
        holds: err <= loss / (9.0 / 8.0) + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hinge_examples() {
        let w = [0.6, 0.8];
        let x = [0.6, 0.8];
        assert_eq!(hinge_loss(&w, &x, 1.0, 1.0), 0.0);
        assert_eq!(hinge_loss(&[0.0, 0.0], &x, -1.0, 0.3), 0.3);
        assert!((hinge_loss(&w, &[0.8, -0.6], 1.0, 0.3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn phi_landmarks() {
        for g in [0.1, 0.35, 0.9] {
            assert_eq!(phi_gamma(1.0, g), 0.0);
            assert_eq!(phi_gamma(0.0, g), 9.0 / 8.0);
            assert!((phi_gamma(g, g) - (1.0 - g).powi(2) / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_continuous_at_breaks() {
        let g = 0.3;
        let h = 1e-9;
        for t in [0.0, g] {
            let l = phi_gamma_derivative(t - h, g);
            let r = phi_gamma_derivative(t + h, g);
            assert!((l - r).abs() < 1e-6);
            let fd = (phi_gamma(t + h, g) - phi_gamma(t - h, g)) / (2.0 * h);
            assert!((fd - l).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_vector_bridge_is_vacuous() {
        let d = FiniteLabeled::uniform(vec![(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], -1.0)]).unwrap();
        let r = err_loss_bridge(&[0.0, 0.0], &d, 0.4).unwrap();
        assert_eq!(r.loss, 9.0 / 8.0);
        assert!(r.holds && r.err <= 1.0);
    }
}

//! Parameters of the hard construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Margin-derived quantities.
///
/// `eta = gamma^(1-r)`, `gamma' = gamma^(1-2r/5)`, `k = floor(gamma^(-2r/5))`,
/// `gamma~ = gamma' / (16k + 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub gamma: Option<f64>,
    pub r: Option<f64>,
    pub eta: f64,
    pub gamma_prime: f64,
    pub k: usize,
    pub gamma_tilde: f64,
}

impl ConstructionParams {
    pub fn from_gamma_r(gamma: f64, r: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParams(format!("gamma = {gamma} must lie in (0, 1)")));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParams(format!("r = {r} must lie in (0, 1)")));
        }
        let eta = gamma.powf(1.0 - r);
        let gamma_prime = gamma.powf(1.0 - 2.0 * r / 5.0);
        let k = gamma.powf(-2.0 * r / 5.0).floor() as usize;
        let mut params = Self::explicit(eta, gamma_prime, k)?;
        params.gamma = Some(gamma);
        params.r = Some(r);
        Ok(params)
    }

    /// Direct choice of `(eta, gamma', k)` without an underlying margin.
    pub fn explicit(eta: f64, gamma_prime: f64, k: usize) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParams(format!("eta = {eta} must lie in (0, 1)")));
        }
        if !(gamma_prime > 0.0 && gamma_prime < 1.0) {
            return Err(Error::InvalidParams(format!(
                "gamma' = {gamma_prime} must lie in (0, 1)"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidParams("k = 0 matches no moments".into()));
        }
        let limit = eta * (k as f64).powf(-1.5);
        if gamma_prime > limit * (1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "gamma' = {gamma_prime} exceeds eta * k^(-3/2) = {limit}"
            )));
        }
        Ok(Self {
            gamma: None,
            r: None,
            eta,
            gamma_prime,
            k,
            gamma_tilde: gamma_prime / (16 * k + 2) as f64,
        })
    }

    /// `8k + 1`, the rescaling divisor.
    pub fn scale(&self) -> f64 {
        (8 * self.k + 1) as f64
    }

    /// Whether `eta, gamma' <= 1/2` and `gamma < 2^(-1/(1-r))`, the regime in
    /// which the asymptotic guarantees are stated. Outside it the construction
    /// still runs and every check is measured.
    pub fn in_theorem_regime(&self) -> bool {
        let margin_ok = match (self.gamma, self.r) {
            (Some(g), Some(r)) => g < 2f64.powf(-1.0 / (1.0 - r)),
            _ => true,
        };
        self.eta <= 0.5 && self.gamma_prime <= 0.5 && margin_ok
    }

    /// `ceil(gamma^(-2-2r/5))` when the margin is known.
    pub fn min_dimension(&self) -> Option<usize> {
        match (self.gamma, self.r) {
            (Some(g), Some(r)) => Some((g.powf(-2.0 - 2.0 * r / 5.0) - 1e-9).ceil() as usize),
            _ => None,
        }
    }

    /// Default tolerance `exp(-c2 gamma^(-2r/5))`, or `exp(-c2 k)` without a margin.
    pub fn default_tau(&self, c2: f64) -> f64 {
        (-c2 * self.exponent()).exp()
    }

    /// Default query budget `ceil(exp(c1 gamma^(-2r/5)))`.
    pub fn default_query_budget(&self, c1: f64) -> usize {
        (c1 * self.exponent()).exp().ceil() as usize
    }

    fn exponent(&self) -> f64 {
        match (self.gamma, self.r) {
            (Some(g), Some(r)) => g.powf(-2.0 * r / 5.0),
            _ => self.k as f64,
        }
    }
}

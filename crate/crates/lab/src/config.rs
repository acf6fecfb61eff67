//! Experiment configuration: file loading, flag overrides and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use sqsep_core::moment::{ConstructionParams, DEFAULT_C_CEILING};

use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    Lowdeg,
    Perceptron,
}

/// Direct `(eta, gamma', k)` in place of `(gamma, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitParams {
    pub eta: f64,
    pub gamma_prime: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub gamma: f64,
    pub r: f64,
    pub explicit: Option<ExplicitParams>,
    pub d: usize,
    /// Defaults to `exp(-c2 gamma^(-2r/5))`.
    pub tau: Option<f64>,
    /// Defaults to `ceil(exp(c1 gamma^(-2r/5)))`.
    pub query_budget: Option<usize>,
    pub c1: f64,
    pub c2: f64,
    pub c_ceiling: f64,
    #[serde(serialize_with = "ser_eps", deserialize_with = "de_eps")]
    pub epsilon: f64,
    pub n_users: usize,
    pub seed: u64,
    pub n_a: usize,
    pub learners: Vec<Learner>,
    pub max_degree: usize,
    pub perceptron_rounds: usize,
    pub perceptron_target: f64,
    /// Honest tolerance for the Perceptron; defaults to a eighth of the margin.
    pub perceptron_tau: Option<f64>,
    pub sweep_gammas: Vec<f64>,
    pub sweep_rs: Vec<f64>,
    /// Not serialized, so outputs and the hash do not depend on where they are written.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.35,
            r: 0.5,
            explicit: None,
            d: 12,
            tau: None,
            query_budget: None,
            c1: 3.0,
            c2: 1.0,
            c_ceiling: DEFAULT_C_CEILING,
            epsilon: 1.0,
            n_users: 10_000,
            seed: 20_240_601,
            n_a: 200,
            learners: vec![Learner::Lowdeg, Learner::Perceptron],
            max_degree: 2,
            perceptron_rounds: 200,
            perceptron_target: 0.05,
            perceptron_tau: None,
            sweep_gammas: vec![0.2, 0.25, 0.3, 0.35, 0.4],
            sweep_rs: vec![0.3, 0.5, 0.7],
            output_dir: PathBuf::from("sqsep-out"),
        }
    }
}

fn ser_eps<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&sqsep_core::decimal::to_string(*x))
    }
}

fn de_eps<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Text(s) => sqsep_core::decimal::parse(&s).map_err(serde::de::Error::custom),
    }
}

/// Command-line values that replace file values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub r: Option<f64>,
    pub d: Option<usize>,
    pub tau: Option<f64>,
    pub query_budget: Option<usize>,
    pub epsilon: Option<f64>,
    pub n_users: Option<usize>,
    pub seed: Option<u64>,
    pub n_a: Option<usize>,
    pub learners: Option<Vec<Learner>>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads JSON or TOML by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| LabError::Config(e.to_string())),
            Some("toml") => toml::from_str(&text).map_err(|e| LabError::Config(e.to_string())),
            _ => Err(LabError::Config(format!("{}: expected a .json or .toml file", path.display()))),
        }
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &o.$f { self.$f = v.clone(); })*};
        }
        set!(gamma, r, d, epsilon, n_users, seed, n_a, learners, output_dir);
        if o.tau.is_some() {
            self.tau = o.tau;
        }
        if o.query_budget.is_some() {
            self.query_budget = o.query_budget;
        }
        self
    }

    pub fn params(&self) -> Result<ConstructionParams> {
        let p = match self.explicit {
            Some(e) => ConstructionParams::explicit(e.eta, e.gamma_prime, e.k),
            None => ConstructionParams::from_gamma_r(self.gamma, self.r),
        };
        p.map_err(|e| LabError::Config(e.to_string()))
    }

    /// Validates and fills in the defaulted fields.
    pub fn resolve(mut self) -> Result<Resolved> {
        let params = self.params()?;
        let bad = |m: String| Err(LabError::Config(m));
        if let Some(required) = params.min_dimension() {
            if self.d < required {
                return bad(format!("d = {} is below the required {required}", self.d));
            }
        }
        if self.d == 0 || self.d > 63 {
            return bad(format!("d = {} must lie in 1..=63", self.d));
        }
        let tau = self.tau.unwrap_or_else(|| params.default_tau(self.c2));
        let k = self.query_budget.unwrap_or_else(|| params.default_query_budget(self.c1));
        if !(tau > 0.0 && tau <= 1.0) {
            return bad(format!("tau = {tau} must lie in (0, 1]"));
        }
        if k == 0 {
            return bad("query budget must be positive".into());
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon = {} must be positive", self.epsilon));
        }
        if self.n_users == 0 || self.n_a == 0 {
            return bad("n_users and n_a must be positive".into());
        }
        if self.learners.is_empty() {
            return bad("no learners selected".into());
        }
        if self.max_degree == 0 || self.perceptron_rounds == 0 {
            return bad("max_degree and perceptron_rounds must be positive".into());
        }
        if !(self.perceptron_target > 0.0 && self.perceptron_target < 0.5) {
            return bad(format!("perceptron_target = {} must lie in (0, 1/2)", self.perceptron_target));
        }
        if let Some(t) = self.perceptron_tau {
            if !(t > 0.0 && t <= 1.0) {
                return bad(format!("perceptron_tau = {t} must lie in (0, 1]"));
            }
        }
        if !(self.c_ceiling > 0.0) {
            return bad("c_ceiling must be positive".into());
        }
        if self.sweep_gammas.is_empty() || self.sweep_rs.is_empty() {
            return bad("sweep grids must be non-empty".into());
        }
        self.tau = Some(tau);
        self.query_budget = Some(k);
        Ok(Resolved { config: self, params })
    }
}

/// A validated config with every default filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub params: ConstructionParams,
}

impl Resolved {
    pub fn tau(&self) -> f64 {
        self.config.tau.expect("resolved")
    }

    pub fn query_budget(&self) -> usize {
        self.config.query_budget.expect("resolved")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.config).expect("config serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_canonical() {
        let r = ExperimentConfig::default().resolve().unwrap();
        assert_eq!(r.params.k, 1);
        assert!((r.tau() - (-(0.35f64).powf(-0.2)).exp()).abs() < 1e-15);
        assert_eq!(r.query_budget(), 41);
        assert_eq!(r.hash().len(), 64);
    }

    #[test]
    fn flags_win() {
        let o = Overrides {
            d: Some(14),
            seed: Some(7),
            ..Default::default()
        };
        let c = ExperimentConfig::default().apply(&o);
        assert_eq!((c.d, c.seed), (14, 7));
    }

    #[test]
    fn rejections() {
        let mut c = ExperimentConfig::default();
        c.d = 10;
        assert!(matches!(c.resolve(), Err(LabError::Config(_))));
        let mut c = ExperimentConfig::default();
        c.explicit = Some(ExplicitParams {
            eta: 0.1,
            gamma_prime: 0.1,
            k: 3,
        });
        assert!(matches!(c.resolve(), Err(LabError::Config(_))));
        let mut c = ExperimentConfig::default();
        c.gamma = 1.5;
        assert!(matches!(c.resolve(), Err(LabError::Config(_))));
    }

    #[test]
    fn toml_and_infinite_epsilon() {
        let c: ExperimentConfig = toml::from_str("gamma = 0.3\nepsilon = inf\n").unwrap();
        assert!(c.epsilon.is_infinite());
        let j = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&j).unwrap();
        assert_eq!(back.gamma, c.gamma);
        assert!(back.epsilon.is_infinite());
        assert!(toml::from_str::<ExperimentConfig>("gamm = 0.3").is_err());
    }
}

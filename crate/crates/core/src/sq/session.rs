//! Tolerance-`tau` oracles, adaptive and non-adaptive.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sq::dist::LabeledDistribution;
use crate::sq::query::StatQuery;

/// Interface learners use to ask statistical queries.
pub trait SqOracle {
    /// Queue a query; returns its index.
    fn submit(&mut self, q: StatQuery) -> Result<usize>;

    /// Answers to every query submitted so far, in order.
    fn answers(&mut self) -> Result<Vec<f64>>;

    fn queries_used(&self) -> usize;

    fn tolerance(&self) -> f64;

    fn query(&mut self, q: StatQuery) -> Result<f64> {
        let i = self.submit(q)?;
        Ok(self.answers()?[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HonestNoise {
    Zero,
    /// Moves each answer by `tau` toward the uninformative value.
    WorstCase,
    Uniform { seed: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LogEntry {
    pub query_descriptor: String,
    #[serde(with = "crate::decimal::vec")]
    pub true_values: Vec<f64>,
    #[serde(with = "crate::decimal")]
    pub answer: f64,
    pub branch: String,
}

enum Policy {
    Honest {
        dist: Arc<dyn LabeledDistribution>,
        noise: HonestNoise,
    },
    /// Answers with the `b = 0` value whenever that is `tau`-valid for the truth.
    Adversarial {
        d0: Arc<dyn LabeledDistribution>,
        d1: Arc<dyn LabeledDistribution>,
        b: u8,
    },
}

pub struct SqOracleSession {
    tau: f64,
    policy: Policy,
    adaptive: bool,
    budget: Option<usize>,
    pending: Vec<StatQuery>,
    answered: Vec<f64>,
    log: Vec<LogEntry>,
    released: bool,
    rng: ChaCha8Rng,
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParams(format!("tolerance {tau} outside (0, 1]")));
    }
    Ok(())
}

impl SqOracleSession {
    pub fn honest(dist: Arc<dyn LabeledDistribution>, tau: f64, noise: HonestNoise) -> Result<Self> {
        check_tau(tau)?;
        let seed = match noise {
            HonestNoise::Uniform { seed } => seed,
            _ => 0,
        };
        Ok(Self::build(tau, Policy::Honest { dist, noise }, seed))
    }

    pub fn adversarial(
        d0: Arc<dyn LabeledDistribution>,
        d1: Arc<dyn LabeledDistribution>,
        b: u8,
        tau: f64,
    ) -> Result<Self> {
        check_tau(tau)?;
        if b > 1 {
            return Err(Error::InvalidParams(format!("b = {b} is not a bit")));
        }
        if d0.dim() != d1.dim() {
            return Err(Error::DomainMismatch("paired distributions differ in dimension".into()));
        }
        Ok(Self::build(tau, Policy::Adversarial { d0, d1, b }, 0))
    }

    fn build(tau: f64, policy: Policy, seed: u64) -> Self {
        Self {
            tau,
            policy,
            adaptive: true,
            budget: None,
            pending: Vec::new(),
            answered: Vec::new(),
            log: Vec::new(),
            released: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Once answers are read no further queries are accepted.
    pub fn non_adaptive(mut self) -> Self {
        self.adaptive = false;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn is_adaptive(&self) -> bool {
        self.adaptive
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn transcript_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.log {
            out.push_str(&serde_json::to_string(e).map_err(|e| Error::Serialization(e.to_string()))?);
            out.push('\n');
        }
        Ok(out)
    }

    fn honest_answer(&mut self, v: f64, error_query: bool, noise: HonestNoise) -> f64 {
        let tau = self.tau;
        let a = match noise {
            HonestNoise::Zero => v,
            HonestNoise::WorstCase => {
                let target = if error_query { 0.5 } else { 0.0 };
                v + (target - v).clamp(-tau, tau)
            }
            HonestNoise::Uniform { .. } => v + self.rng.gen_range(-tau..=tau),
        };
        a.clamp(-1.0, 1.0)
    }

    fn resolve_pending(&mut self) -> Result<()> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let qs = std::mem::take(&mut self.pending);
        match &self.policy {
            Policy::Honest { dist, noise } => {
                let (dist, noise) = (dist.clone(), *noise);
                let vals = dist.expectation_batch(&qs)?;
                for (q, v) in qs.iter().zip(vals) {
                    let a = self.honest_answer(v, q.is_error_query(), noise);
                    self.answered.push(a);
                    self.log.push(LogEntry {
                        query_descriptor: q.descriptor().to_string(),
                        true_values: vec![v],
                        answer: a,
                        branch: "honest".into(),
                    });
                }
            }
            Policy::Adversarial { d0, d1, b } => {
                let v0s = d0.expectation_batch(&qs)?;
                let v1s = d1.expectation_batch(&qs)?;
                for ((q, v0), v1) in qs.iter().zip(v0s).zip(v1s) {
                    let (a, branch) = if *b == 0 {
                        (v0, "b0")
                    } else if (v0 - v1).abs() <= self.tau {
                        (v0, "paired")
                    } else {
                        (v1, "truthful")
                    };
                    self.answered.push(a);
                    self.log.push(LogEntry {
                        query_descriptor: q.descriptor().to_string(),
                        true_values: vec![v0, v1],
                        answer: a,
                        branch: branch.into(),
                    });
                }
            }
        }
        Ok(())
    }
}

impl SqOracle for SqOracleSession {
    fn submit(&mut self, q: StatQuery) -> Result<usize> {
        if !self.adaptive && self.released {
            return Err(Error::AdaptiveQuery);
        }
        let used = self.queries_used();
        if let Some(budget) = self.budget {
            if used >= budget {
                return Err(Error::QueryBudgetExceeded { budget });
            }
        }
        self.pending.push(q);
        Ok(used)
    }

    fn answers(&mut self) -> Result<Vec<f64>> {
        self.resolve_pending()?;
        self.released = true;
        Ok(self.answered.clone())
    }

    fn queries_used(&self) -> usize {
        self.answered.len() + self.pending.len()
    }

    fn tolerance(&self) -> f64 {
        self.tau
    }
}

/// Replays a recorded transcript; descriptors must match in order.
pub struct ReplayOracle {
    entries: Vec<LogEntry>,
    tau: f64,
    submitted: usize,
}

impl ReplayOracle {
    pub fn from_jsonl(s: &str, tau: f64) -> Result<Self> {
        let entries = s
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::Serialization(e.to_string())))
            .collect::<Result<Vec<LogEntry>>>()?;
        Ok(Self {
            entries,
            tau,
            submitted: 0,
        })
    }
}

impl SqOracle for ReplayOracle {
    fn submit(&mut self, q: StatQuery) -> Result<usize> {
        let i = self.submitted;
        let entry = self.entries.get(i).ok_or(Error::QueryBudgetExceeded {
            budget: self.entries.len(),
        })?;
        if entry.query_descriptor != q.descriptor() {
            return Err(Error::DomainMismatch(format!(
                "replay expected {} but got {}",
                entry.query_descriptor,
                q.descriptor()
            )));
        }
        self.submitted += 1;
        Ok(i)
    }

    fn answers(&mut self) -> Result<Vec<f64>> {
        Ok(self.entries[..self.submitted].iter().map(|e| e.answer).collect())
    }

    fn queries_used(&self) -> usize {
        self.submitted
    }

    fn tolerance(&self) -> f64 {
        self.tau
    }
}

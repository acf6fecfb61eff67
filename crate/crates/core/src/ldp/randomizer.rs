//! Local randomizers with finite message spaces and closed-form kernels.

use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::sq::StatQuery;

/// Slack allowed when comparing an audited epsilon with the claim.
pub const AUDIT_TOL: f64 = 1e-12;

pub trait LocalRandomizer: Send + Sync {
    fn id(&self) -> String;

    /// Messages are `0..message_count()`.
    fn message_count(&self) -> usize;

    /// `None` for extractors that make no privacy claim.
    fn epsilon_claimed(&self) -> Option<f64>;

    /// Law of `R(x, y)` over messages.
    fn kernel(&self, x: &[f64], y: f64) -> Vec<f64>;

    fn randomize(&self, x: &[f64], y: f64, rng: &mut dyn RngCore) -> usize {
        let k = self.kernel(x, y);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (w, p) in k.iter().enumerate() {
            acc += p;
            if u < acc {
                return w;
            }
        }
        k.len() - 1
    }
}

/// `(e^eps - 1) / (e^eps + 1)`.
pub fn rr_kappa(epsilon: f64) -> f64 {
    (epsilon / 2.0).tanh()
}

/// Standard error bound `1 / (kappa sqrt(n))` of the randomized-response mean.
pub fn rr_std_error(epsilon: f64, n: usize) -> f64 {
    1.0 / (rr_kappa(epsilon) * (n as f64).sqrt())
}

/// Rounds `h(z)` to a sign, then flips it with probability `1 / (e^eps + 1)`.
/// Message 1 is `+1`, message 0 is `-1`.
#[derive(Debug, Clone)]
pub struct RandomizedResponse {
    query: StatQuery,
    epsilon: f64,
}

impl RandomizedResponse {
    pub fn new(query: StatQuery, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParams(format!("epsilon {epsilon} must be positive")));
        }
        Ok(Self { query, epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn query(&self) -> &StatQuery {
        &self.query
    }

    /// Unbiased estimate of `h(z)` from one message.
    pub fn debias(&self, message: usize) -> f64 {
        let b = if message == 1 { 1.0 } else { -1.0 };
        b / rr_kappa(self.epsilon)
    }
}

impl LocalRandomizer for RandomizedResponse {
    fn id(&self) -> String {
        format!("rr(eps={}):{}", self.epsilon, self.query.descriptor())
    }

    fn message_count(&self) -> usize {
        2
    }

    fn epsilon_claimed(&self) -> Option<f64> {
        Some(self.epsilon)
    }

    fn kernel(&self, x: &[f64], y: f64) -> Vec<f64> {
        let h = self.query.eval(x, y);
        let plus = 0.5 + 0.5 * h * rr_kappa(self.epsilon);
        vec![1.0 - plus, plus]
    }
}

/// Ignores its input.
#[derive(Debug, Clone)]
pub struct ConstantRandomizer {
    messages: usize,
    output: usize,
}

impl ConstantRandomizer {
    pub fn new(messages: usize, output: usize) -> Result<Self> {
        if output >= messages {
            return Err(Error::InvalidParams("output outside the message space".into()));
        }
        Ok(Self { messages, output })
    }
}

impl LocalRandomizer for ConstantRandomizer {
    fn id(&self) -> String {
        format!("const({}/{})", self.output, self.messages)
    }

    fn message_count(&self) -> usize {
        self.messages
    }

    fn epsilon_claimed(&self) -> Option<f64> {
        Some(0.0)
    }

    fn kernel(&self, _: &[f64], _: f64) -> Vec<f64> {
        let mut k = vec![0.0; self.messages];
        k[self.output] = 1.0;
        k
    }
}

/// Independent randomizers on the same input; the message is the
/// mixed-radix tuple with the first part least significant.
#[derive(Clone)]
pub struct Composed {
    parts: Vec<Arc<dyn LocalRandomizer>>,
}

impl Composed {
    pub fn new(parts: Vec<Arc<dyn LocalRandomizer>>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParams("nothing to compose".into()));
        }
        let total: f64 = parts.iter().map(|p| p.message_count() as f64).product();
        if total > (1u64 << 62) as f64 {
            return Err(Error::InvalidParams("composed message space too large".into()));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[Arc<dyn LocalRandomizer>] {
        &self.parts
    }

    pub fn split(&self, mut message: usize) -> Vec<usize> {
        self.parts
            .iter()
            .map(|p| {
                let m = message % p.message_count();
                message /= p.message_count();
                m
            })
            .collect()
    }
}

impl LocalRandomizer for Composed {
    fn id(&self) -> String {
        format!("compose[{}]", self.parts.iter().map(|p| p.id()).collect::<Vec<_>>().join(";"))
    }

    fn message_count(&self) -> usize {
        self.parts.iter().map(|p| p.message_count()).product()
    }

    fn epsilon_claimed(&self) -> Option<f64> {
        self.parts.iter().map(|p| p.epsilon_claimed()).sum()
    }

    /// Materializes every message; meant for small compositions.
    fn kernel(&self, x: &[f64], y: f64) -> Vec<f64> {
        let mut k = vec![1.0];
        for p in self.parts.iter() {
            let pk = p.kernel(x, y);
            let mut next = Vec::with_capacity(k.len() * pk.len());
            for b in &pk {
                for a in &k {
                    next.push(a * b);
                }
            }
            k = next;
        }
        k
    }

    fn randomize(&self, x: &[f64], y: f64, rng: &mut dyn RngCore) -> usize {
        let mut message = 0;
        let mut radix = 1;
        for p in &self.parts {
            message += radix * p.randomize(x, y, rng);
            radix *= p.message_count();
        }
        message
    }
}

/// `max_{z1, z2, w} ln(Pr[R(z1) = w] / Pr[R(z2) = w])` over the probe inputs.
pub fn audited_epsilon(r: &dyn LocalRandomizer, probes: &[(Vec<f64>, f64)]) -> f64 {
    let kernels: Vec<Vec<f64>> = probes.iter().map(|(x, y)| r.kernel(x, *y)).collect();
    let mut worst = 0.0f64;
    for k1 in &kernels {
        for k2 in &kernels {
            for (p, q) in k1.iter().zip(k2) {
                if *p > 0.0 {
                    worst = worst.max(if *q > 0.0 { (p / q).ln() } else { f64::INFINITY });
                }
            }
        }
    }
    worst
}

/// Audited epsilon, or `PrivacyViolation` when it exceeds the claim.
pub fn audit_epsilon(r: &dyn LocalRandomizer, probes: &[(Vec<f64>, f64)]) -> Result<f64> {
    let audited = audited_epsilon(r, probes);
    if let Some(claimed) = r.epsilon_claimed() {
        if audited > claimed + AUDIT_TOL {
            return Err(Error::PrivacyViolation { claimed, audited });
        }
    }
    Ok(audited)
}

/// The all-ones point, its negation and every single-coordinate flip, under both labels.
pub fn extreme_probes(dim: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::new();
    for y in [1.0, -1.0] {
        out.push((vec![1.0; dim], y));
        out.push((vec![-1.0; dim], y));
        for i in 0..dim {
            let mut x = vec![1.0; dim];
            x[i] = -1.0;
            out.push((x, y));
        }
    }
    out
}

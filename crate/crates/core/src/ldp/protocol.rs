//! The `LR_S` oracle and the non-interactive protocol runner.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldp::randomizer::{rr_std_error, Composed, LocalRandomizer, RandomizedResponse, AUDIT_TOL};
use crate::sq::{LabeledDistribution, SqOracle, StatQuery};

/// Per-user sample stream: stream `user` of a ChaCha generator seeded by `seed`.
pub fn user_rng(seed: u64, user: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(user as u64);
    rng
}

/// Holds one sample per user; each randomizer must be declared before any
/// message is released and each sample is touched once.
pub struct LrOracle {
    samples: Vec<(Vec<f64>, f64)>,
    epsilon: f64,
    declared: Vec<Option<Arc<dyn LocalRandomizer>>>,
    released: bool,
}

impl LrOracle {
    pub fn new(samples: Vec<(Vec<f64>, f64)>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParams(format!("epsilon {epsilon} must be positive")));
        }
        let n = samples.len();
        Ok(Self {
            samples,
            epsilon,
            declared: vec![None; n],
            released: false,
        })
    }

    pub fn users(&self) -> usize {
        self.samples.len()
    }

    pub fn declare(&mut self, user: usize, r: Arc<dyn LocalRandomizer>) -> Result<()> {
        if self.released {
            return Err(Error::AdaptiveQuery);
        }
        if user >= self.samples.len() {
            return Err(Error::DomainMismatch(format!("no user {user}")));
        }
        if self.declared[user].is_some() {
            return Err(Error::SampleReuse(user));
        }
        let requested = r
            .epsilon_claimed()
            .ok_or_else(|| Error::InvalidParams(format!("{} makes no privacy claim", r.id())))?;
        if requested > self.epsilon + AUDIT_TOL {
            return Err(Error::BudgetExceeded {
                user,
                requested,
                budget: self.epsilon,
            });
        }
        self.declared[user] = Some(r);
        Ok(())
    }

    /// Messages of every declared user; `None` for idle users.
    pub fn release(&mut self, seed: u64) -> Result<Vec<Option<usize>>> {
        if self.released {
            let first = self.declared.iter().position(|d| d.is_some()).unwrap_or(0);
            return Err(Error::SampleReuse(first));
        }
        self.released = true;
        Ok(self
            .declared
            .iter()
            .zip(&self.samples)
            .enumerate()
            .map(|(u, (r, (x, y)))| r.as_ref().map(|r| r.randomize(x, *y, &mut user_rng(seed, u))))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    /// User `j` answers query `j mod k` with the full budget.
    Split,
    /// Every user answers every query with budget `eps / k` each.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub user_id: usize,
    pub randomizer_id: String,
    pub message: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolHeader {
    #[serde(with = "crate::decimal")]
    pub epsilon: f64,
    pub query_descriptors: Vec<String>,
    pub seed: u64,
    pub users: usize,
    pub assignment: Assignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub header: ProtocolHeader,
    #[serde(with = "crate::decimal::vec")]
    pub estimates: Vec<f64>,
    #[serde(with = "crate::decimal::vec")]
    pub std_errors: Vec<f64>,
    /// `1 / (kappa sqrt(n_j))` at the per-query budget.
    #[serde(with = "crate::decimal::vec")]
    pub std_error_bounds: Vec<f64>,
    pub transcript: Vec<TranscriptLine>,
}

impl ProtocolRun {
    /// Header line followed by one line per user.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = json(&self.header)?;
        out.push('\n');
        for line in &self.transcript {
            out.push_str(&json(line)?);
            out.push('\n');
        }
        Ok(out)
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Serialization(e.to_string()))
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Randomized-response estimates of `E[h_j]` from one sample per user.
pub fn run_noninteractive(
    queries: &[StatQuery],
    epsilon: f64,
    samples: Vec<(Vec<f64>, f64)>,
    assignment: Assignment,
    seed: u64,
) -> Result<ProtocolRun> {
    let k = queries.len();
    let n = samples.len();
    if k == 0 {
        return Err(Error::InvalidParams("no queries".into()));
    }
    if assignment == Assignment::Split && n < k {
        return Err(Error::InvalidParams(format!("{n} users cannot cover {k} queries")));
    }
    let mut oracle = LrOracle::new(samples, epsilon)?;
    let per_query = match assignment {
        Assignment::Split => epsilon,
        Assignment::Shared => epsilon / k as f64,
    };
    let rrs: Vec<Arc<RandomizedResponse>> = queries
        .iter()
        .map(|q| RandomizedResponse::new(q.clone(), per_query).map(Arc::new))
        .collect::<Result<_>>()?;

    let mut ids = Vec::with_capacity(n);
    let shared = match assignment {
        Assignment::Split => {
            for u in 0..n {
                oracle.declare(u, rrs[u % k].clone())?;
                ids.push(format!("rr:q{}", u % k));
            }
            None
        }
        Assignment::Shared => {
            let parts: Vec<Arc<dyn LocalRandomizer>> =
                rrs.iter().map(|r| r.clone() as Arc<dyn LocalRandomizer>).collect();
            let c = Arc::new(Composed::new(parts)?);
            for u in 0..n {
                oracle.declare(u, c.clone())?;
                ids.push(format!("rr:q0..q{}", k - 1));
            }
            Some(c)
        }
    };
    let messages = oracle.release(seed)?;

    let mut per_query_values: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut transcript = Vec::with_capacity(n);
    for (u, m) in messages.into_iter().enumerate() {
        let m = m.expect("every user declared");
        match &shared {
            None => per_query_values[u % k].push(rrs[u % k].debias(m)),
            Some(c) => {
                for (j, part) in c.split(m).into_iter().enumerate() {
                    per_query_values[j].push(rrs[j].debias(part));
                }
            }
        }
        transcript.push(TranscriptLine {
            user_id: u,
            randomizer_id: ids[u].clone(),
            message: m,
        });
    }
    let (estimates, std_errors): (Vec<f64>, Vec<f64>) = per_query_values.iter().map(|v| mean_and_se(v)).unzip();
    let std_error_bounds = per_query_values
        .iter()
        .map(|v| rr_std_error(per_query, v.len()))
        .collect();
    Ok(ProtocolRun {
        header: ProtocolHeader {
            epsilon,
            query_descriptors: queries.iter().map(|q| q.descriptor().to_string()).collect(),
            seed,
            users: n,
            assignment,
        },
        estimates,
        std_errors,
        std_error_bounds,
        transcript,
    })
}

/// Draws `n` labeled samples, one per user stream.
pub fn draw_users(dist: &dyn LabeledDistribution, n: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    (0..n).map(|_| dist.sample_point(&mut rng)).collect()
}

/// Non-adaptive SQ oracle answered by randomized response over fresh users.
pub struct LdpSqOracle {
    dist: Arc<dyn LabeledDistribution>,
    epsilon: f64,
    users: usize,
    assignment: Assignment,
    seed: u64,
    pending: Vec<StatQuery>,
    run: Option<ProtocolRun>,
}

impl LdpSqOracle {
    pub fn new(dist: Arc<dyn LabeledDistribution>, epsilon: f64, users: usize, assignment: Assignment, seed: u64) -> Self {
        Self {
            dist,
            epsilon,
            users,
            assignment,
            seed,
            pending: Vec::new(),
            run: None,
        }
    }

    pub fn run(&self) -> Option<&ProtocolRun> {
        self.run.as_ref()
    }
}

impl SqOracle for LdpSqOracle {
    fn submit(&mut self, q: StatQuery) -> Result<usize> {
        if self.run.is_some() {
            return Err(Error::AdaptiveQuery);
        }
        self.pending.push(q);
        Ok(self.pending.len() - 1)
    }

    fn answers(&mut self) -> Result<Vec<f64>> {
        if self.run.is_none() {
            let samples = draw_users(self.dist.as_ref(), self.users, self.seed);
            self.run = Some(run_noninteractive(&self.pending, self.epsilon, samples, self.assignment, self.seed)?);
        }
        Ok(self.run.as_ref().map(|r| r.estimates.clone()).unwrap_or_default())
    }

    fn queries_used(&self) -> usize {
        self.pending.len()
    }

    /// Three standard-error bounds at the per-query sample size.
    fn tolerance(&self) -> f64 {
        let k = self.pending.len().max(1);
        match self.assignment {
            Assignment::Split => 3.0 * rr_std_error(self.epsilon, self.users / k),
            Assignment::Shared => 3.0 * rr_std_error(self.epsilon / k as f64, self.users),
        }
    }
}

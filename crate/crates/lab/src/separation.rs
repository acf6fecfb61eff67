//! Non-adaptive versus interactive learners on the hard family.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use sqsep_core::cube::{random_signs, HardFamily, HardInstance};
use sqsep_core::learners::{lowdeg_nonadaptive_learner, perceptron_sq, Hypothesis, PerceptronConfig};
use sqsep_core::sq::{HonestNoise, LabeledDistribution, SqOracleSession};

use crate::config::{Learner, Resolved};
use crate::output::{task_rng, Stamp};
use crate::Result;

/// The Perceptron diagnostic against the pairing oracle.
pub const PERCEPTRON_ADVERSARIAL: &str = "perceptron_adversarial";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub learner: String,
    pub oracle: String,
    /// Empty on summary rows.
    pub a_index: Option<usize>,
    pub b: Option<u8>,
    pub accuracy: f64,
    pub queries: Option<usize>,
    pub rounds: Option<usize>,
    pub seed: u64,
    pub config_hash: String,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub tau: f64,
    pub query_budget: usize,
    pub perceptron_tau: f64,
    pub margin: f64,
    pub in_theorem_regime: bool,
    pub mean_accuracy: BTreeMap<String, f64>,
    /// Mean Perceptron accuracy minus mean low-degree accuracy.
    pub gap: Option<f64>,
    /// Fraction of `a` whose low-degree transcripts coincide for `b = 0, 1`.
    pub identical_fraction: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

struct Outcome {
    learner: &'static str,
    oracle: &'static str,
    b: u8,
    accuracy: f64,
    queries: usize,
    rounds: usize,
}

struct PerA {
    outcomes: Vec<Outcome>,
    identical: Option<bool>,
}

fn accuracy(h: &Hypothesis, inst: &HardInstance) -> Result<f64> {
    Ok(1.0 - h.error(inst)?)
}

fn run_a(res: &Resolved, family: &Arc<HardFamily>, index: usize, perceptron_tau: f64) -> Result<PerA> {
    let cfg = &res.config;
    let dim = 2 * cfg.d;
    let a = random_signs(dim, &mut task_rng(cfg.seed, index as u64));
    let inst: [Arc<HardInstance>; 2] = [
        Arc::new(HardInstance::new(family.clone(), a.clone(), 0)?),
        Arc::new(HardInstance::new(family.clone(), a, 1)?),
    ];
    let d0: Arc<dyn LabeledDistribution> = inst[0].clone();
    let d1: Arc<dyn LabeledDistribution> = inst[1].clone();
    let pcfg = PerceptronConfig {
        dim,
        radius: (dim as f64).sqrt(),
        target_err: cfg.perceptron_target,
        max_rounds: cfg.perceptron_rounds,
        strict: false,
    };
    let mut outcomes = Vec::new();
    let mut transcripts = Vec::new();
    for b in 0..2u8 {
        let truth = inst[b as usize].as_ref();
        if cfg.learners.contains(&Learner::Lowdeg) {
            let k = res.query_budget();
            let mut s = SqOracleSession::adversarial(d0.clone(), d1.clone(), b, res.tau())?
                .non_adaptive()
                .with_budget(k);
            let run = lowdeg_nonadaptive_learner(&mut s, dim, cfg.max_degree, k)?;
            transcripts.push((run.descriptors, run.answers));
            outcomes.push(Outcome {
                learner: "lowdeg",
                oracle: "adversarial",
                b,
                accuracy: accuracy(&run.hypothesis, truth)?,
                queries: run.queries_used,
                rounds: 1,
            });
        }
        if cfg.learners.contains(&Learner::Perceptron) {
            let dist: Arc<dyn LabeledDistribution> = inst[b as usize].clone();
            let mut honest = SqOracleSession::honest(dist, perceptron_tau, HonestNoise::WorstCase)?;
            let run = perceptron_sq(&mut honest, &pcfg)?;
            outcomes.push(Outcome {
                learner: "perceptron",
                oracle: "honest_worst_case",
                b,
                accuracy: accuracy(&run.hypothesis, truth)?,
                queries: run.queries_used,
                rounds: run.rounds,
            });
            let mut adv = SqOracleSession::adversarial(d0.clone(), d1.clone(), b, res.tau())?;
            let run = perceptron_sq(&mut adv, &pcfg)?;
            outcomes.push(Outcome {
                learner: PERCEPTRON_ADVERSARIAL,
                oracle: "adversarial",
                b,
                accuracy: accuracy(&run.hypothesis, truth)?,
                queries: run.queries_used,
                rounds: run.rounds,
            });
        }
    }
    let identical = (transcripts.len() == 2).then(|| transcripts[0] == transcripts[1]);
    Ok(PerA { outcomes, identical })
}

pub fn run_separation(res: &Resolved) -> Result<Report> {
    let cfg = &res.config;
    let family = Arc::new(HardFamily::new(&res.params, cfg.d)?);
    let margin = family.margin();
    let perceptron_tau = cfg.perceptron_tau.unwrap_or(margin / 8.0);
    let per_a: Vec<PerA> = (0..cfg.n_a)
        .into_par_iter()
        .map(|i| run_a(res, &family, i, perceptron_tau))
        .collect::<Result<_>>()?;

    let stamp = Stamp::new(res);
    let row = |learner: &str, oracle: &str, a_index, b, accuracy, queries, rounds| Row {
        learner: learner.to_string(),
        oracle: oracle.to_string(),
        a_index,
        b,
        accuracy,
        queries,
        rounds,
        seed: cfg.seed,
        config_hash: stamp.config_hash.clone(),
        version: stamp.version,
    };
    let mut rows = Vec::new();
    let mut sums: BTreeMap<String, (f64, usize, &str)> = BTreeMap::new();
    for (i, p) in per_a.iter().enumerate() {
        for o in &p.outcomes {
            rows.push(row(o.learner, o.oracle, Some(i), Some(o.b), o.accuracy, Some(o.queries), Some(o.rounds)));
            let e = sums.entry(o.learner.to_string()).or_insert((0.0, 0, o.oracle));
            e.0 += o.accuracy;
            e.1 += 1;
        }
    }
    let mean_accuracy: BTreeMap<String, f64> = sums.iter().map(|(k, v)| (k.clone(), v.0 / v.1 as f64)).collect();
    for (learner, (_, _, oracle)) in &sums {
        rows.push(row(learner, &format!("mean:{oracle}"), None, None, mean_accuracy[learner], None, None));
    }
    let gap = match (mean_accuracy.get("perceptron"), mean_accuracy.get("lowdeg")) {
        (Some(p), Some(l)) => Some(p - l),
        _ => None,
    };
    if let Some(g) = gap {
        rows.push(row("gap", "perceptron-lowdeg", None, None, g, None, None));
    }
    let flags: Vec<bool> = per_a.iter().filter_map(|p| p.identical).collect();
    let identical_fraction =
        (!flags.is_empty()).then(|| flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64);
    Ok(Report {
        rows,
        summary: Summary {
            stamp,
            tau: res.tau(),
            query_budget: res.query_budget(),
            perceptron_tau,
            margin,
            in_theorem_regime: res.params.in_theorem_regime(),
            mean_accuracy,
            gap,
            identical_fraction,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn small_run_is_deterministic() {
        let mut c = ExperimentConfig::default();
        c.n_a = 3;
        let r = c.resolve().unwrap();
        let a = run_separation(&r).unwrap();
        let b = run_separation(&r).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.len(), 3 * 6 + 3 + 1);
        assert!(a.summary.gap.is_some());
    }
}

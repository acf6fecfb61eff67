//! Privacy audits of the registered randomizers and an end-to-end estimate.

use std::sync::Arc;

use serde::Serialize;
use sqsep_core::cube::{random_signs, HardFamily, HardInstance};
use sqsep_core::ldp::{
    audited_epsilon, draw_users, extreme_probes, run_noninteractive, Assignment, Composed, ConstantRandomizer,
    LocalRandomizer, RandomizedResponse,
};
use sqsep_core::sq::StatQuery;

use crate::config::Resolved;
use crate::output::{task_rng, Stamp};
use crate::Result;

pub const AUDIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct AuditRow {
    pub randomizer: String,
    pub claimed: Option<f64>,
    pub audited: f64,
    /// Audited value within tolerance of the claim.
    pub tight: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EndToEnd {
    pub query: String,
    pub users: usize,
    pub truth: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub within_three: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub epsilon: f64,
    pub notice: Option<String>,
    pub audits: Vec<AuditRow>,
    pub end_to_end: EndToEnd,
    pub passed: bool,
}

/// Randomized response on the label, a constant map and a two-part composition.
pub fn registered(epsilon: f64) -> Result<Vec<Arc<dyn LocalRandomizer>>> {
    let half: Vec<Arc<dyn LocalRandomizer>> = vec![
        Arc::new(RandomizedResponse::new(StatQuery::label(), epsilon / 2.0)?),
        Arc::new(RandomizedResponse::new(StatQuery::labeled_parity(vec![0], 0), epsilon / 2.0)?),
    ];
    Ok(vec![
        Arc::new(RandomizedResponse::new(StatQuery::label(), epsilon)?),
        Arc::new(ConstantRandomizer::new(2, 0)?),
        Arc::new(Composed::new(half)?),
    ])
}

pub fn run_audit(res: &Resolved) -> Result<AuditReport> {
    let cfg = &res.config;
    let family = Arc::new(HardFamily::new(&res.params, cfg.d)?);
    let a = random_signs(2 * cfg.d, &mut task_rng(cfg.seed, u64::MAX));
    let inst = HardInstance::new(family, a, 0)?;
    let one = StatQuery::constant(1.0);
    let samples = draw_users(&inst, cfg.n_users, cfg.seed);

    if cfg.epsilon.is_infinite() {
        let estimate = samples.iter().map(|(x, y)| one.eval(x, *y)).sum::<f64>() / samples.len() as f64;
        return Ok(AuditReport {
            stamp: Stamp::new(res),
            epsilon: cfg.epsilon,
            notice: Some("epsilon is infinite: passthrough channel, privacy audit skipped".into()),
            audits: Vec::new(),
            end_to_end: EndToEnd {
                query: one.descriptor().to_string(),
                users: cfg.n_users,
                truth: 1.0,
                estimate,
                std_error: 0.0,
                within_three: estimate == 1.0,
            },
            passed: estimate == 1.0,
        });
    }

    let probes = extreme_probes(2 * cfg.d);
    let audits: Vec<AuditRow> = registered(cfg.epsilon)?
        .iter()
        .map(|r| {
            let audited = audited_epsilon(r.as_ref(), &probes);
            let claimed = r.epsilon_claimed();
            let (tight, passed) = match claimed {
                Some(c) => ((audited - c).abs() <= AUDIT_TOL, audited <= c + AUDIT_TOL),
                None => (false, true),
            };
            AuditRow {
                randomizer: r.id(),
                claimed,
                audited,
                tight,
                passed,
            }
        })
        .collect();

    let run = run_noninteractive(&[one.clone()], cfg.epsilon, samples, Assignment::Split, cfg.seed)?;
    let (estimate, std_error) = (run.estimates[0], run.std_error_bounds[0]);
    let within_three = (estimate - 1.0).abs() <= 3.0 * std_error;
    let passed = within_three && audits.iter().all(|r| r.passed);
    Ok(AuditReport {
        stamp: Stamp::new(res),
        epsilon: cfg.epsilon,
        notice: None,
        audits,
        end_to_end: EndToEnd {
            query: one.descriptor().to_string(),
            users: cfg.n_users,
            truth: 1.0,
            estimate,
            std_error,
            within_three,
        },
        passed,
    })
}

//! Construction certificate with named ceiling checks.

use serde::Serialize;
use sqsep_core::cube::{FamilyCertificate, HardFamily};
use sqsep_core::moment::{MOMENT_TOL, RHO_TOL};

use crate::config::Resolved;
use crate::output::Stamp;
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            passed: value <= limit,
        }
    }

    fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            passed: value >= limit,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub theta: f64,
    pub family: FamilyCertificate,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Certificate {
    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

pub fn family(res: &Resolved) -> Result<HardFamily> {
    Ok(HardFamily::new(&res.params, res.config.d)?)
}

pub fn certify(res: &Resolved) -> Result<Certificate> {
    let fam = family(res)?;
    let cert = fam.certificate()?;
    let q = fam.canonical_q();
    let ceiling = res.config.c_ceiling;
    let min_weight = q.measure.atoms().iter().map(|a| a.weight).fold(f64::INFINITY, f64::min);
    let node_weight = q.measure.mass_at(-res.params.gamma_prime);
    let cond = &cert.conditioning;
    let checks = vec![
        Check::at_most("moment_residual", q.max_residual(), MOMENT_TOL),
        Check::at_least("min_atom_weight", min_weight, 0.0),
        Check::at_most("node_weight_vs_rho", (node_weight - q.rho_x0).abs(), RHO_TOL),
        Check::at_most("rho_constant", cert.measured_c_rho, ceiling),
        Check::at_most("conditioning_constant", cond.measured_c, ceiling),
        Check::at_least("conditioning_small_moment_rate", cond.measured_c_small, f64::MIN_POSITIVE),
        Check::at_least("conditioning_high_moments", if cond.high_moments_ok { 1.0 } else { 0.0 }, 1.0),
        Check::at_most("tv_constant", cert.measured_c_tv, ceiling),
        Check::at_least("margin", cert.margin, f64::MIN_POSITIVE),
        Check::at_most("majority_removed", cert.majority_removed, cert.chernoff_bound),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(Certificate {
        stamp: Stamp::new(res),
        theta: 2.0 * cert.half_theta,
        family: cert,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn canonical_passes() {
        let c = certify(&ExperimentConfig::default().resolve().unwrap()).unwrap();
        assert!(c.passed, "{:?}", c.failed());
        assert!((c.family.margin - 0.1178511301977579).abs() < 1e-12);
    }
}

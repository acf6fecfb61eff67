//! Rescaling by `x -> (x + gamma'/2) / (8k + 1)` and conditioning on `[-1/2, 1/2]`.

use serde::{Deserialize, Serialize};

use super::measure::{AtomicMeasure, HybridMeasure};
use super::ortho::MixtureP;
use super::params::ConstructionParams;
use crate::error::{Error, Result};

/// Default ceiling on the measured `C` in `P'(gamma~) >= 1 - C eta`.
pub const DEFAULT_C_CEILING: f64 = 10.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    #[serde(with = "crate::decimal")]
    pub removed_p: f64,
    #[serde(with = "crate::decimal")]
    pub removed_q: f64,
    /// `(4t)^(-2k)` at `t = 1/2`.
    #[serde(with = "crate::decimal")]
    pub tail_bound: f64,
    #[serde(with = "crate::decimal")]
    pub p_atom_mass: f64,
    #[serde(with = "crate::decimal")]
    pub q_atom_mass: f64,
    /// `max((1 - P'(gamma~)) / eta, (1 - Q'(-gamma~)) / eta)`.
    #[serde(with = "crate::decimal")]
    pub measured_c: f64,
    /// `|E_P'[x^i] - E_Q'[x^i]|` for `i = 0..=max_degree`.
    #[serde(with = "crate::decimal::vec")]
    pub moment_gaps: Vec<f64>,
    /// Largest `c` with `gap_i <= 2 exp(-c k)` for all `1 <= i <= k`.
    #[serde(with = "crate::decimal")]
    pub measured_c_small: f64,
    /// Every `i > k` satisfies `gap_i <= 2^(1-i)`.
    pub high_moments_ok: bool,
}

impl ConditionReport {
    pub fn passes(&self, c_ceiling: f64) -> bool {
        self.measured_c <= c_ceiling && self.measured_c_small > 0.0 && self.high_moments_ok
    }
}

#[derive(Debug, Clone)]
pub struct Conditioned {
    pub p_prime: HybridMeasure,
    pub q_prime: AtomicMeasure,
    pub report: ConditionReport,
}

/// Produces `P'` and `Q'`. Moment gaps are reported up to `max_degree`.
pub fn rescale_and_condition(
    p: &MixtureP,
    q: &AtomicMeasure,
    params: &ConstructionParams,
    max_degree: usize,
) -> Result<Conditioned> {
    let s = params.scale();
    let beta = params.gamma_prime / 2.0 / s;
    let p_mapped = HybridMeasure::mixture(p.eta())?.affine(1.0 / s, beta)?;
    let q_mapped = q.affine(1.0 / s, beta)?;
    let tail_bound = 2f64.powi(-2 * params.k as i32);
    let (p_prime, removed_p) = p_mapped.condition(-0.5, 0.5)?;
    let (q_prime, removed_q) = q_mapped.condition(-0.5, 0.5)?;
    let removed = removed_p.max(removed_q);
    if removed > 10.0 * tail_bound {
        return Err(Error::ConditioningMassLoss {
            removed,
            bound: tail_bound,
        });
    }

    let p_atom_mass = p_prime.mass_at(params.gamma_tilde);
    let q_atom_mass = q_prime.mass_at(-params.gamma_tilde);
    let measured_c = ((1.0 - p_atom_mass) / params.eta).max((1.0 - q_atom_mass) / params.eta);
    let moment_gaps: Vec<f64> = (0..=max_degree)
        .map(|i| (p_prime.moment(i) - q_prime.moment(i)).abs())
        .collect();
    let k = params.k;
    let measured_c_small = (1..=k.min(max_degree))
        .map(|i| {
            let g = moment_gaps[i];
            if g == 0.0 { f64::INFINITY } else { -(g / 2.0).ln() / k as f64 }
        })
        .fold(f64::INFINITY, f64::min);
    let high_moments_ok = moment_gaps
        .iter()
        .enumerate()
        .skip(k + 1)
        .all(|(i, &g)| g <= 2f64.powi(1 - i as i32) * (1.0 + 1e-12));
    Ok(Conditioned {
        p_prime,
        q_prime,
        report: ConditionReport {
            removed_p,
            removed_q,
            tail_bound,
            p_atom_mass,
            q_atom_mass,
            measured_c,
            moment_gaps,
            measured_c_small,
            high_moments_ok,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::canonical::construct_q;
    use approx::assert_relative_eq;

    fn build(params: &ConstructionParams) -> Conditioned {
        let q = construct_q(params).unwrap();
        rescale_and_condition(&MixtureP::new(params.eta).unwrap(), &q, params, 20).unwrap()
    }

    #[test]
    fn canonical_atoms() {
        let params = ConstructionParams::from_gamma_r(0.35, 0.5).unwrap();
        let c = build(&params);
        let q = c.q_prime.atoms();
        assert_eq!(q.len(), 2);
        assert_relative_eq!(q[0].location, -params.gamma_tilde, max_relative = 1e-12);
        assert_relative_eq!(q[0].weight, 0.443_076_845_037_191_3, max_relative = 1e-12);
        assert_relative_eq!(q[1].location, 0.180_186, max_relative = 1e-5);
        assert_eq!(c.p_prime.atom().location, params.gamma_tilde);
        let e_hi = 4.5 - params.gamma_prime / 2.0;
        assert_relative_eq!(c.report.removed_p, params.eta * (-e_hi).exp(), max_relative = 1e-10);
        assert_eq!(c.report.removed_q, 0.0);
        assert!(c.report.high_moments_ok);
        assert!(c.report.measured_c_small > 0.0);
    }

    #[test]
    fn first_k_moments_nearly_match() {
        let params = ConstructionParams::explicit(0.1, 0.1 * 3f64.powf(-1.5), 3).unwrap();
        let c = build(&params);
        for i in 0..=3 {
            assert!(c.report.moment_gaps[i] <= 2.0 * c.report.removed_p.max(1e-15) + 1e-12);
        }
        assert!(c.report.passes(DEFAULT_C_CEILING));
        assert!(c.p_prime.support().1 <= 0.5 && c.q_prime.support().1 <= 0.5);
    }

    #[test]
    fn tail_mass_obeys_markov_bound() {
        let params = ConstructionParams::explicit(0.1, 0.1 * 3f64.powf(-1.5), 3).unwrap();
        let q = construct_q(&params).unwrap();
        let s = params.scale();
        let mapped = q.affine(1.0 / s, params.gamma_prime / 2.0 / s).unwrap();
        for t in [0.5, 0.75, 1.0, 2.0] {
            assert!(mapped.mass_outside(-t, t) <= (4.0 * t as f64).powi(-6));
        }
    }
}

//! Moment-matched atomic measure with a prescribed atom.
//!
//! Nodes are `x0` together with the zeros of the kernel
//! `y -> sum_{i <= k} p_i(x0) p_i(y)`; node `y` gets weight `rho_k(y)`. The
//! resulting rule integrates every polynomial of degree `<= 2k` exactly
//! against `P`, so it matches the first `2k` moments and puts mass
//! `rho_k(x0)` on `x0`.

use nalgebra::DMatrix;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::measure::AtomicMeasure;
use super::ortho::{moments_p, OrthoBasis};
use super::params::ConstructionParams;
use super::poly::{rational, to_f64, Polynomial};
use crate::error::{Error, Result};

pub const MOMENT_TOL: f64 = 1e-8;
pub const RHO_TOL: f64 = 1e-9;

/// How the kernel zeros were located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootPath {
    Companion,
    Sturm,
}

#[derive(Debug, Clone)]
pub struct CanonicalQ {
    pub measure: AtomicMeasure,
    pub basis: OrthoBasis,
    pub x0: f64,
    pub rho_x0: f64,
    pub path: RootPath,
    /// `|E_Q[x^i] - E_P[x^i]| / max(1, |E_P[x^i]|)` for `i = 0..=2k`.
    pub moment_residuals: Vec<f64>,
}

impl CanonicalQ {
    pub fn max_residual(&self) -> f64 {
        self.moment_residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// `(1 - rho_k(x0)) / eta`, the constant in `rho_k(x0) >= 1 - C eta`.
    pub fn measured_c(&self) -> f64 {
        (1.0 - self.rho_x0) / self.basis.eta()
    }
}

/// Builds `Q` for the construction parameters, with the fixed atom at `-gamma'`.
pub fn construct_q(params: &ConstructionParams) -> Result<AtomicMeasure> {
    Ok(construct_q_detailed(params)?.measure)
}

pub fn construct_q_detailed(params: &ConstructionParams) -> Result<CanonicalQ> {
    canonical_representation(params.eta, params.k, -params.gamma_prime)
}

/// Canonical representation of the mixture with `eta` through the node `x0`.
pub fn canonical_representation(eta: f64, k: usize, x0: f64) -> Result<CanonicalQ> {
    if k == 0 {
        return Err(Error::InvalidParams("k = 0 matches no moments".into()));
    }
    let basis = OrthoBasis::new(eta, k)?;
    let x0_exact = rational(x0);
    let kernel = basis.kernel_at(&x0_exact);
    let (roots, path) = match companion_roots(&kernel) {
        Some(r) => (r, RootPath::Companion),
        None => (sturm_roots(&kernel), RootPath::Sturm),
    };
    if roots.len() != k {
        return Err(Error::MomentMatchFailure {
            order: 0,
            relative: f64::INFINITY,
            tolerance: MOMENT_TOL,
        });
    }
    let rho_x0 = to_f64(&basis.rho_exact(&x0_exact));
    let mut atoms = vec![(x0, rho_x0)];
    atoms.extend(roots.iter().map(|&y| (y, basis.rho(y))));
    for &(location, weight) in &atoms {
        if weight < 0.0 {
            return Err(Error::NegativeWeight { location, weight });
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::MomentMatchFailure {
            order: 0,
            relative: (total - 1.0).abs(),
            tolerance: 1e-12,
        });
    }
    let measure = AtomicMeasure::new(atoms)?;

    let target = moments_p(eta, 2 * k);
    let moment_residuals: Vec<f64> = target
        .iter()
        .enumerate()
        .map(|(i, t)| (measure.moment(i) - t).abs() / t.abs().max(1.0))
        .collect();
    for (order, &relative) in moment_residuals.iter().enumerate() {
        if !(relative <= MOMENT_TOL) {
            return Err(Error::MomentMatchFailure {
                order,
                relative,
                tolerance: MOMENT_TOL,
            });
        }
    }
    let weight_x0 = measure.mass_at(x0);
    if (weight_x0 - rho_x0).abs() > RHO_TOL {
        return Err(Error::MomentMatchFailure {
            order: 0,
            relative: (weight_x0 - rho_x0).abs(),
            tolerance: RHO_TOL,
        });
    }
    Ok(CanonicalQ {
        measure,
        basis,
        x0,
        rho_x0,
        path,
        moment_residuals,
    })
}

/// Largest `f64` strictly between `a < b` for which bisection can still split.
fn midpoint(a: f64, b: f64) -> Option<f64> {
    let m = a + (b - a) / 2.0;
    (m > a && m < b).then_some(m)
}

/// Refines a sign-changing bracket by bisection with exact sign evaluation.
fn bisect(p: &Polynomial, mut a: f64, mut b: f64) -> f64 {
    let mut sa = p.sign_at(&rational(a));
    if sa == 0 {
        return a;
    }
    while let Some(m) = midpoint(a, b) {
        if (b - a) <= 1e-15 * m.abs().max(1e-300) {
            break;
        }
        let sm = p.sign_at(&rational(m));
        if sm == 0 {
            return m;
        }
        if sm == sa {
            a = m;
            sa = sm;
        } else {
            b = m;
        }
    }
    a + (b - a) / 2.0
}

/// Zeros from the eigenvalues of the companion matrix, each refined inside an
/// exactly verified sign change. `None` if the eigenvalues are not `deg`
/// separated real values.
pub fn companion_roots(p: &Polynomial) -> Option<Vec<f64>> {
    let n = p.degree()?;
    if n == 0 {
        return Some(Vec::new());
    }
    let c = p.to_f64_coefficients();
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    let eig = m.complex_eigenvalues();
    let mut approx: Vec<f64> = Vec::with_capacity(n);
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * z.re.abs().max(1.0) {
            return None;
        }
        approx.push(z.re);
    }
    approx.sort_by(f64::total_cmp);
    let mut roots = Vec::with_capacity(n);
    for (idx, &r) in approx.iter().enumerate() {
        let lo_limit = if idx > 0 { (approx[idx - 1] + r) / 2.0 } else { f64::NEG_INFINITY };
        let hi_limit = if idx + 1 < n { (approx[idx + 1] + r) / 2.0 } else { f64::INFINITY };
        let mut h = 1e-9 * r.abs().max(1.0);
        let bracket = loop {
            let a = (r - h).max(lo_limit);
            let b = (r + h).min(hi_limit);
            let sa = p.sign_at(&rational(a));
            let sb = p.sign_at(&rational(b));
            if sa == 0 {
                break Some((a, a));
            }
            if sb == 0 {
                break Some((b, b));
            }
            if sa != sb {
                break Some((a, b));
            }
            if a <= lo_limit && b >= hi_limit {
                break None;
            }
            h *= 4.0;
            if !h.is_finite() {
                break None;
            }
        }?;
        roots.push(if bracket.0 == bracket.1 { bracket.0 } else { bisect(p, bracket.0, bracket.1) });
    }
    if roots.windows(2).any(|w| w[0] >= w[1]) {
        return None;
    }
    Some(roots)
}

fn sturm_chain(p: &Polynomial) -> Vec<Polynomial> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            break;
        }
        let (_, rem) = chain[n - 2].div_rem(&chain[n - 1]);
        if rem.is_zero() {
            break;
        }
        chain.push(-&rem);
    }
    chain
}

fn sign_changes(chain: &[Polynomial], x: &BigRational) -> usize {
    let signs: Vec<i8> = chain.iter().map(|q| q.sign_at(x)).filter(|&s| s != 0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Distinct real zeros by Sturm-sequence isolation in exact arithmetic.
pub fn sturm_roots(p: &Polynomial) -> Vec<f64> {
    let Some(n) = p.degree() else {
        return Vec::new();
    };
    if n == 0 {
        return Vec::new();
    }
    let chain = sturm_chain(p);
    let lead = to_f64(p.leading().unwrap()).abs();
    // Cauchy bound.
    let bound = 1.0
        + p.to_f64_coefficients()[..n]
            .iter()
            .map(|c| c.abs() / lead)
            .fold(0.0, f64::max);
    let count = |x: f64| sign_changes(&chain, &rational(x));
    let mut out = Vec::new();
    let mut stack = vec![(-bound, bound, count(-bound), count(bound))];
    while let Some((a, b, ca, cb)) = stack.pop() {
        let inside = ca - cb;
        if inside == 0 {
            continue;
        }
        let Some(m) = midpoint(a, b) else {
            out.push(a);
            continue;
        };
        if inside == 1 && p.sign_at(&rational(a)) * p.sign_at(&rational(b)) < 0 {
            out.push(bisect(p, a, b));
            continue;
        }
        let cm = count(m);
        stack.push((a, m, ca, cm));
        stack.push((m, b, cm, cb));
    }
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly_from_roots(roots: &[f64]) -> Polynomial {
        roots.iter().fold(Polynomial::constant(rational(1.0)), |acc, &r| {
            &acc * &Polynomial::new(vec![rational(-r), rational(1.0)])
        })
    }

    #[test]
    fn two_atom_closed_form() {
        // w0 = rho_1(-0.05) = 76/85, other node from the first two moments.
        let q = canonical_representation(0.1, 1, -0.05).unwrap();
        let atoms = q.measure.atoms();
        assert_eq!(atoms.len(), 2);
        assert_relative_eq!(atoms[0].weight, 76.0 / 85.0, max_relative = 1e-14);
        assert_relative_eq!(atoms[1].location, 41.0 / 30.0, max_relative = 1e-14);
        let (w0, w1, x0, y) = (atoms[0].weight, atoms[1].weight, atoms[0].location, atoms[1].location);
        assert_relative_eq!(w0 * x0 + w1 * y, 0.1, max_relative = 1e-13);
        assert_relative_eq!(w0 * x0 * x0 + w1 * y * y, 0.2, max_relative = 1e-13);
    }

    #[test]
    fn stress_config_matches_six_moments() {
        let gp = 0.1 * 3f64.powf(-1.5);
        let params = ConstructionParams::explicit(0.1, gp, 3).unwrap();
        let q = construct_q_detailed(&params).unwrap();
        assert_eq!(q.measure.len(), 4);
        assert!(q.max_residual() <= MOMENT_TOL);
        assert_relative_eq!(q.rho_x0, 0.859_336_465_200_970_6, max_relative = 1e-12);
        assert!(q.rho_x0 >= 1.0 - 10.0 * 0.1);
    }

    #[test]
    fn canonical_config() {
        let params = ConstructionParams::from_gamma_r(0.35, 0.5).unwrap();
        let q = construct_q_detailed(&params).unwrap();
        assert_relative_eq!(q.rho_x0, 0.443_076_845_037_191_3, max_relative = 1e-12);
        assert_relative_eq!(q.measure.atoms()[1].location, 1.405_788_445_523_18, max_relative = 1e-12);
    }

    #[test]
    fn sturm_agrees_with_companion() {
        for (eta, k, x0) in [(0.1, 3, -0.01), (0.05, 6, -0.002), (0.3, 8, -0.01)] {
            let basis = OrthoBasis::new(eta, k).unwrap();
            let kernel = basis.kernel_at(&rational(x0));
            let a = companion_roots(&kernel).unwrap();
            let b = sturm_roots(&kernel);
            assert_eq!(a.len(), k);
            assert_eq!(b.len(), k);
            for (x, y) in a.iter().zip(&b) {
                assert_relative_eq!(x, y, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn sturm_finds_clustered_roots() {
        let p = poly_from_roots(&[1.0, 1.0 + 1e-9, 3.0]);
        let r = sturm_roots(&p);
        assert_eq!(r.len(), 3);
        assert_relative_eq!(r[1] - r[0], 1e-9, max_relative = 1e-5);
    }

    #[test]
    fn rejects_k_zero() {
        assert!(canonical_representation(0.1, 0, -0.01).is_err());
    }

    #[test]
    fn high_degree_matches_moments() {
        for k in 1..=8 {
            let gp = 0.05 * (k as f64).powf(-1.5);
            let q = canonical_representation(0.05, k, -gp).unwrap();
            assert!(q.max_residual() <= MOMENT_TOL, "k={k}: {}", q.max_residual());
            assert!(q.measure.atoms().iter().all(|a| a.weight >= 0.0));
            assert!(q.rho_x0 >= 1.0 - 10.0 * 0.05);
        }
    }
}

//! Probability measures on the real line: finitely supported ones and an
//! atom plus a (possibly truncated) affine exponential.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};

pub const WEIGHT_TOL: f64 = 1e-12;

fn same_location(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "crate::decimal")]
    pub location: f64,
    #[serde(with = "crate::decimal")]
    pub weight: f64,
}

/// Finitely supported probability measure, atoms sorted by location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AtomicRaw", into = "AtomicRaw")]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct AtomicRaw {
    atoms: Vec<Atom>,
}

impl TryFrom<AtomicRaw> for AtomicMeasure {
    type Error = Error;
    fn try_from(raw: AtomicRaw) -> Result<Self> {
        AtomicMeasure::new(raw.atoms.iter().map(|a| (a.location, a.weight)).collect())
    }
}

impl From<AtomicMeasure> for AtomicRaw {
    fn from(m: AtomicMeasure) -> Self {
        AtomicRaw { atoms: m.atoms }
    }
}

impl AtomicMeasure {
    /// Validates nonnegativity (to `WEIGHT_TOL`), total mass `1 +- WEIGHT_TOL`
    /// and distinct finite locations.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(location, weight)| Atom { location, weight })
            .collect();
        for a in &atoms {
            if !a.location.is_finite() || !a.weight.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite atom {a:?}")));
            }
            if a.weight < -WEIGHT_TOL {
                return Err(Error::NegativeWeight {
                    location: a.location,
                    weight: a.weight,
                });
            }
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMeasure(format!("total weight {total}")));
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        if atoms.windows(2).any(|w| w[0].location == w[1].location) {
            return Err(Error::InvalidMeasure("repeated location".into()));
        }
        Ok(Self { atoms })
    }

    pub fn point_mass(location: f64) -> Self {
        Self {
            atoms: vec![Atom { location, weight: 1.0 }],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn moment(&self, i: usize) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * a.location.powi(i as i32))
            .sum()
    }

    pub fn moments(&self, upto: usize) -> Vec<f64> {
        (0..=upto).map(|i| self.moment(i)).collect()
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.weight * f(a.location)).sum()
    }

    /// Mass of the atom at `x`, or zero.
    pub fn mass_at(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| same_location(a.location, x))
            .map(|a| a.weight)
            .sum()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.atoms[0].location, self.atoms[self.atoms.len() - 1].location)
    }

    /// Law of `alpha x + beta`.
    pub fn affine(&self, alpha: f64, beta: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("affine map with alpha = {alpha}")));
        }
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom {
                location: alpha * a.location + beta,
                weight: a.weight,
            })
            .collect();
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(Self { atoms })
    }

    pub fn negate(&self) -> Self {
        self.affine(-1.0, 0.0).expect("negation is a valid map")
    }

    pub fn mass_outside(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.location < lo || a.location > hi)
            .map(|a| a.weight)
            .sum()
    }

    /// Restriction to `[lo, hi]`, renormalized, together with the removed mass.
    pub fn condition(&self, lo: f64, hi: f64) -> Result<(Self, f64)> {
        let kept: Vec<Atom> = self
            .atoms
            .iter()
            .filter(|a| a.location >= lo && a.location <= hi)
            .copied()
            .collect();
        if kept.len() == self.atoms.len() {
            return Ok((self.clone(), 0.0));
        }
        let mass: f64 = kept.iter().map(|a| a.weight).sum();
        if kept.is_empty() || mass <= 0.0 {
            return Err(Error::InvalidMeasure(format!("no mass in [{lo}, {hi}]")));
        }
        let atoms = kept
            .into_iter()
            .map(|a| Atom {
                location: a.location,
                weight: a.weight / mass,
            })
            .collect();
        Ok((Self { atoms }, 1.0 - mass))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.weight;
            if u < acc {
                return a.location;
            }
        }
        self.atoms[self.atoms.len() - 1].location
    }
}

/// `shift + scale * E` with `E ~ Exp(1)` conditioned on `E in [lo, hi]`,
/// carrying total mass `weight`. `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpComponent {
    #[serde(with = "crate::decimal")]
    pub weight: f64,
    #[serde(with = "crate::decimal")]
    pub scale: f64,
    #[serde(with = "crate::decimal")]
    pub shift: f64,
    #[serde(with = "crate::decimal")]
    pub lo: f64,
    #[serde(with = "crate::decimal")]
    pub hi: f64,
}

/// `P(E in [a, b])` for a unit exponential.
fn exp_mass(a: f64, b: f64) -> f64 {
    let tail_b = if b.is_infinite() { 0.0 } else { (-b).exp() };
    if a == 0.0 {
        if b.is_infinite() { 1.0 } else { -(-b).exp_m1() }
    } else {
        (-a).exp() - tail_b
    }
}

/// Regularized lower incomplete gamma with the endpoint cases handled.
fn lower_reg(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(s, x)
    }
}

/// `E[E^j | E in [a, b]]` for a unit exponential.
pub fn truncated_exp_moment(j: usize, a: f64, b: f64) -> f64 {
    let fact: f64 = (1..=j).map(|i| i as f64).product();
    if j == 0 {
        return 1.0;
    }
    let s = (j + 1) as f64;
    fact * (lower_reg(s, b) - lower_reg(s, a)) / exp_mass(a, b)
}

impl ExpComponent {
    pub fn moment(&self, i: usize) -> f64 {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..=i {
            acc += binom
                * self.shift.powi((i - j) as i32)
                * self.scale.powi(j as i32)
                * truncated_exp_moment(j, self.lo, self.hi);
            binom = binom * (i - j) as f64 / (j + 1) as f64;
        }
        acc
    }

    /// Interval occupied by the component.
    pub fn support(&self) -> (f64, f64) {
        let a = self.shift + self.scale * self.lo;
        let b = self.shift + self.scale * self.hi;
        (a.min(b), a.max(b))
    }

    /// `E`-interval mapped into `[lo, hi]` in location space, before
    /// intersecting with the current truncation.
    fn preimage(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (a, b) = ((lo - self.shift) / self.scale, (hi - self.shift) / self.scale);
        let (a, b) = (a.min(b), a.max(b));
        (a.max(self.lo), b.min(self.hi))
    }

    pub fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Inverse CDF of the truncated exponential.
        let u: f64 = rng.gen();
        let tail_a = (-self.lo).exp();
        let tail_b = if self.hi.is_infinite() { 0.0 } else { (-self.hi).exp() };
        let e = -(tail_a - u * (tail_a - tail_b)).ln();
        self.shift + self.scale * e.clamp(self.lo, self.hi)
    }
}

/// An atom plus an affine, possibly truncated exponential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HybridRaw", into = "HybridRaw")]
pub struct HybridMeasure {
    atom: Atom,
    exp: ExpComponent,
}

#[derive(Serialize, Deserialize)]
struct HybridRaw {
    atom: Atom,
    exp_component: ExpComponent,
}

impl TryFrom<HybridRaw> for HybridMeasure {
    type Error = Error;
    fn try_from(raw: HybridRaw) -> Result<Self> {
        HybridMeasure::new(raw.atom, raw.exp_component)
    }
}

impl From<HybridMeasure> for HybridRaw {
    fn from(m: HybridMeasure) -> Self {
        HybridRaw {
            atom: m.atom,
            exp_component: m.exp,
        }
    }
}

impl HybridMeasure {
    pub fn new(atom: Atom, exp: ExpComponent) -> Result<Self> {
        if atom.weight < 0.0 || exp.weight < 0.0 {
            return Err(Error::InvalidMeasure("negative component weight".into()));
        }
        if ((atom.weight + exp.weight) - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMeasure(format!(
                "total weight {}",
                atom.weight + exp.weight
            )));
        }
        if exp.scale == 0.0 || !exp.scale.is_finite() || !exp.shift.is_finite() {
            return Err(Error::InvalidMeasure("degenerate exponential scale".into()));
        }
        if !(exp.lo >= 0.0 && exp.lo < exp.hi) {
            return Err(Error::InvalidMeasure(format!(
                "truncation [{}, {}] is not a nonempty subset of [0, inf]",
                exp.lo, exp.hi
            )));
        }
        Ok(Self { atom, exp })
    }

    /// `(1 - eta) delta_0 + eta Exp(1)`.
    pub fn mixture(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParams(format!("eta = {eta} must lie in (0, 1)")));
        }
        Self::new(
            Atom {
                location: 0.0,
                weight: 1.0 - eta,
            },
            ExpComponent {
                weight: eta,
                scale: 1.0,
                shift: 0.0,
                lo: 0.0,
                hi: f64::INFINITY,
            },
        )
    }

    pub fn atom(&self) -> Atom {
        self.atom
    }

    pub fn exp_component(&self) -> ExpComponent {
        self.exp
    }

    pub fn moment(&self, i: usize) -> f64 {
        self.atom.weight * self.atom.location.powi(i as i32) + self.exp.weight * self.exp.moment(i)
    }

    pub fn moments(&self, upto: usize) -> Vec<f64> {
        (0..=upto).map(|i| self.moment(i)).collect()
    }

    /// `E[sum_i c_i x^i]`.
    pub fn expect_polynomial(&self, coefficients: &[f64]) -> f64 {
        coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.moment(i))
            .sum()
    }

    pub fn mass_at(&self, x: f64) -> f64 {
        if same_location(self.atom.location, x) {
            self.atom.weight
        } else {
            0.0
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.exp.support();
        (a.min(self.atom.location), b.max(self.atom.location))
    }

    pub fn affine(&self, alpha: f64, beta: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("affine map with alpha = {alpha}")));
        }
        Self::new(
            Atom {
                location: alpha * self.atom.location + beta,
                weight: self.atom.weight,
            },
            ExpComponent {
                scale: alpha * self.exp.scale,
                shift: alpha * self.exp.shift + beta,
                ..self.exp
            },
        )
    }

    pub fn negate(&self) -> Self {
        self.affine(-1.0, 0.0).expect("negation is a valid map")
    }

    pub fn mass_outside(&self, lo: f64, hi: f64) -> f64 {
        let atom_out = if self.atom.location < lo || self.atom.location > hi {
            self.atom.weight
        } else {
            0.0
        };
        let (a, b) = self.exp.preimage(lo, hi);
        let kept = if a < b {
            exp_mass(a, b) / exp_mass(self.exp.lo, self.exp.hi)
        } else {
            0.0
        };
        atom_out + self.exp.weight * (1.0 - kept)
    }

    /// Restriction to `[lo, hi]`, renormalized, with the removed mass.
    pub fn condition(&self, lo: f64, hi: f64) -> Result<(Self, f64)> {
        let atom_kept = if self.atom.location >= lo && self.atom.location <= hi {
            self.atom.weight
        } else {
            0.0
        };
        let (a, b) = self.exp.preimage(lo, hi);
        if !(a < b) {
            return Err(Error::InvalidMeasure(format!(
                "exponential component has no mass in [{lo}, {hi}]"
            )));
        }
        let exp_kept = self.exp.weight * exp_mass(a, b) / exp_mass(self.exp.lo, self.exp.hi);
        let z = atom_kept + exp_kept;
        let atom = Atom {
            location: self.atom.location,
            weight: atom_kept / z,
        };
        let exp = ExpComponent {
            weight: 1.0 - atom.weight,
            lo: a,
            hi: b,
            ..self.exp
        };
        Ok((Self::new(atom, exp)?, 1.0 - z))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.gen::<f64>() < self.atom.weight {
            self.atom.location
        } else {
            self.exp.sample_unit(rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn atomic_validation() {
        assert!(AtomicMeasure::new(vec![(0.0, 0.5), (1.0, 0.5)]).is_ok());
        assert!(matches!(
            AtomicMeasure::new(vec![(0.0, 1.1), (1.0, -0.1)]),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(AtomicMeasure::new(vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(AtomicMeasure::new(vec![(1.0, 0.5), (1.0, 0.5)]).is_err());
    }

    #[test]
    fn affine_of_point_mass() {
        let m = AtomicMeasure::point_mass(0.0).affine(1.0 / 9.0, 0.05 / 9.0).unwrap();
        assert_eq!(m.atoms()[0].location, 0.05 / 9.0);
    }

    #[test]
    fn atomic_conditioning() {
        let m = AtomicMeasure::new(vec![(-1.0, 0.25), (0.0, 0.5), (2.0, 0.25)]).unwrap();
        let (c, removed) = m.condition(-0.5, 0.5).unwrap();
        assert_eq!(removed, 0.5);
        assert_eq!(c.len(), 1);
        assert_eq!(c.mass_at(0.0), 1.0);
    }

    #[test]
    fn mixture_moments() {
        let p = HybridMeasure::mixture(0.1).unwrap();
        for (i, expect) in [1.0, 0.1, 0.2, 0.6, 2.4].iter().enumerate() {
            assert_relative_eq!(p.moment(i), *expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn truncated_moments_against_quadrature() {
        use gauss_quad::GaussLegendre;
        let quad = GaussLegendre::new(60).unwrap();
        let (a, b) = (0.3, 4.2);
        let z = quad.integrate(a, b, |x| (-x).exp());
        for j in 0..8 {
            let num = quad.integrate(a, b, |x| x.powi(j as i32) * (-x).exp());
            assert_relative_eq!(truncated_exp_moment(j, a, b), num / z, max_relative = 1e-12);
        }
    }

    #[test]
    fn hybrid_conditioning_and_affine() {
        let p = HybridMeasure::mixture(0.2).unwrap();
        let s = 9.0;
        let shifted = p.affine(1.0 / s, 0.01).unwrap();
        let (c, removed) = shifted.condition(-0.5, 0.5).unwrap();
        let e_hi = (0.5 - 0.01) * s;
        assert_relative_eq!(removed, 0.2 * (-e_hi).exp(), max_relative = 1e-12);
        assert_relative_eq!(c.mass_at(0.01), 0.8 / (1.0 - removed), max_relative = 1e-14);
        assert!(c.support().1 <= 0.5 + 1e-15);
        assert_relative_eq!(shifted.mass_outside(-0.5, 0.5), removed, max_relative = 1e-12);
        let neg = c.negate();
        assert_relative_eq!(neg.moment(3), -c.moment(3), max_relative = 1e-14);
        assert_relative_eq!(neg.moment(2), c.moment(2), max_relative = 1e-14);
    }

    #[test]
    fn hybrid_sampling_mean() {
        let p = HybridMeasure::mixture(0.3)
            .unwrap()
            .affine(0.1, 0.0)
            .unwrap()
            .condition(-0.5, 0.5)
            .unwrap()
            .0;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - p.moment(1)).abs() < 5e-4);
    }

    #[test]
    fn json_round_trip_is_decimal() {
        let q = AtomicMeasure::new(vec![(-0.1, 0.3), (0.7, 0.7)]).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        assert!(s.contains("\"-0.1\""));
        let back: AtomicMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        let h = HybridMeasure::mixture(0.25).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        assert!(s.contains("\"inf\""));
        let back: HybridMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
        assert!(serde_json::from_str::<AtomicMeasure>(
            r#"{"atoms":[{"location":"0","weight":"0.5"}]}"#
        )
        .is_err());
    }
}

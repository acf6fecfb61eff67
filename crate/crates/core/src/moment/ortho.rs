//! Orthogonal polynomials of the atom-plus-exponential mixture.
//!
//! The mixture puts mass `1 - eta` on the origin and `eta` on a unit-rate
//! exponential. Its orthonormal family is a combination of Laguerre
//! polynomials,
//!
//! ```text
//! p_m / mu_m = sum_i ((m + c) C(m, i) - C(m, i + 1)) (-1)^i / i! x^i,   c = eta / (1 - eta)
//! mu_m^-2    = eta (m + c)^2 + eta m + eta^2 / (1 - eta)
//! ```
//!
//! Everything except `mu_m` itself is rational in `eta`, so the scaled
//! polynomials and `mu_m^-2` are kept as exact rationals. Inner products,
//! orthonormality and the Christoffel function `rho_k` are then computed
//! without rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{binomial, factorial, rational, to_f64, Polynomial};
use crate::error::{Error, Result};

/// Tolerance for the analytic orthonormality check.
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

/// `(1 - eta) delta_0 + eta Exp(1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureP {
    eta: f64,
}

impl MixtureP {
    /// Accepts any `eta` in `(0, 1)`. The coefficient bounds of
    /// [`OrthoBasis::coefficient_bounds_hold`] additionally need `eta <= 1/2`.
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParams(format!("eta = {eta} must lie in (0, 1)")));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn moment(&self, m: usize) -> f64 {
        moments_p(self.eta, m)[m]
    }
}

/// `L_m(x) = sum_i C(m, i) (-1)^i / i! x^i`, exactly.
pub fn laguerre(m: usize) -> Polynomial {
    let m64 = m as u64;
    Polynomial::new(
        (0..=m64)
            .map(|i| {
                let sign = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                BigRational::new(sign * binomial(m64, i), factorial(i))
            })
            .collect(),
    )
}

/// Raw moments `1, eta 1!, eta 2!, ...` up to and including order `upto`.
pub fn moments_p(eta: f64, upto: usize) -> Vec<f64> {
    moments_p_exact(&rational(eta), upto).iter().map(to_f64).collect()
}

pub fn moments_p_exact(eta: &BigRational, upto: usize) -> Vec<BigRational> {
    (0..=upto)
        .map(|m| {
            if m == 0 {
                BigRational::one()
            } else {
                eta * BigRational::from_integer(factorial(m as u64))
            }
        })
        .collect()
}

/// `E_P[f g] = (1 - eta) f(0) g(0) + eta sum_i (fg)_i i!`, exactly.
pub fn inner_product_p(eta: &BigRational, f: &Polynomial, g: &Polynomial) -> BigRational {
    let prod = f * g;
    let one = BigRational::one();
    let atom = (&one - eta) * prod.coefficient(0);
    let exp_part = prod
        .coefficients()
        .iter()
        .enumerate()
        .fold(BigRational::zero(), |acc, (i, c)| {
            acc + c * BigRational::from_integer(factorial(i as u64))
        });
    atom + eta * exp_part
}

/// Orthonormal polynomials `p_0..p_k` of [`MixtureP`].
///
/// `p_m = mu_m * scaled[m]`, with the sign chosen so the leading coefficient
/// is positive.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    eta: f64,
    eta_exact: BigRational,
    k: usize,
    scaled: Vec<Polynomial>,
    inv_mu_sq: Vec<BigRational>,
    mus: Vec<f64>,
}

impl OrthoBasis {
    pub fn new(eta: f64, k: usize) -> Result<Self> {
        MixtureP::new(eta)?;
        let eta_exact = rational(eta);
        let one = BigRational::one();
        let c = &eta_exact / (&one - &eta_exact);

        let mut scaled = Vec::with_capacity(k + 1);
        let mut inv_mu_sq = Vec::with_capacity(k + 1);
        for m in 0..=k {
            let m64 = m as u64;
            let mc = BigRational::from_integer(BigInt::from(m)) + &c;
            // (-1)^m makes the leading coefficient positive.
            let flip = m % 2 == 1;
            let coefficients = (0..=m64)
                .map(|i| {
                    let comb = &mc * BigRational::from_integer(binomial(m64, i))
                        - BigRational::from_integer(binomial(m64, i + 1));
                    let mut v = comb / BigRational::from_integer(factorial(i));
                    if (i % 2 == 1) != flip {
                        v = -v;
                    }
                    v
                })
                .collect();
            scaled.push(Polynomial::new(coefficients));
            let mm = BigRational::from_integer(BigInt::from(m));
            inv_mu_sq.push(
                &eta_exact * &mc * &mc
                    + &eta_exact * &mm
                    + &eta_exact * &eta_exact / (&one - &eta_exact),
            );
        }
        let mus = inv_mu_sq.iter().map(|v| 1.0 / to_f64(v).sqrt()).collect();
        let basis = Self {
            eta,
            eta_exact,
            k,
            scaled,
            inv_mu_sq,
            mus,
        };
        basis.verify_orthonormal(ORTHONORMALITY_TOL)?;
        Ok(basis)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta_exact(&self) -> &BigRational {
        &self.eta_exact
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `p_m / mu_m`, exact.
    pub fn scaled(&self, m: usize) -> &Polynomial {
        &self.scaled[m]
    }

    /// `mu_m^-2`, exact.
    pub fn inv_mu_sq(&self, m: usize) -> &BigRational {
        &self.inv_mu_sq[m]
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    /// Coefficients `xi_{m,i}` of `p_m`, rounded to `f64`.
    pub fn coefficients(&self, m: usize) -> Vec<f64> {
        self.scaled[m]
            .to_f64_coefficients()
            .into_iter()
            .map(|c| c * self.mus[m])
            .collect()
    }

    pub fn eval(&self, m: usize, x: f64) -> f64 {
        self.mus[m] * self.scaled[m].eval_f64(x)
    }

    /// `<p_m, p_l>_P - 1[m = l]` computed from exact rationals.
    pub fn orthonormality_deviation(&self, m: usize, l: usize) -> f64 {
        let ip = inner_product_p(&self.eta_exact, &self.scaled[m], &self.scaled[l]);
        if m == l {
            to_f64(&(ip / &self.inv_mu_sq[m] - BigRational::one()))
        } else {
            to_f64(&ip) * self.mus[m] * self.mus[l]
        }
    }

    pub fn verify_orthonormal(&self, tolerance: f64) -> Result<()> {
        for m in 0..=self.k {
            for l in 0..=m {
                let deviation = self.orthonormality_deviation(m, l).abs();
                if !(deviation <= tolerance) {
                    return Err(Error::OrthonormalityFailure {
                        m,
                        l,
                        deviation,
                        tolerance,
                    });
                }
            }
        }
        Ok(())
    }

    /// `sum_m p_m(x)^2`, exactly.
    pub fn christoffel_sum(&self, x: &BigRational) -> BigRational {
        self.scaled
            .iter()
            .zip(&self.inv_mu_sq)
            .fold(BigRational::zero(), |acc, (q, inv)| {
                let v = q.eval(x);
                acc + &v * &v / inv
            })
    }

    pub fn rho_exact(&self, x: &BigRational) -> BigRational {
        BigRational::one() / self.christoffel_sum(x)
    }

    /// `rho_k(x) = 1 / sum_{i <= k} p_i(x)^2`.
    pub fn rho(&self, x: f64) -> f64 {
        to_f64(&self.rho_exact(&rational(x)))
    }

    /// The reproducing kernel `y -> sum_m p_m(x0) p_m(y)`, exact.
    pub fn kernel_at(&self, x0: &BigRational) -> Polynomial {
        self.scaled
            .iter()
            .zip(&self.inv_mu_sq)
            .fold(Polynomial::zero(), |acc, (q, inv)| {
                let w = q.eval(x0) / inv;
                &acc + &q.scale(&w)
            })
    }

    /// `|xi_{m,i}| <= C(m,i) / (i! sqrt(eta))` for `i >= 1` and
    /// `|xi_{m,0}| <= 2 sqrt(eta) / m` for `m >= 1`. Only meaningful for
    /// `eta <= 1/2`.
    pub fn coefficient_bounds_hold(&self) -> bool {
        let sqrt_eta = self.eta.sqrt();
        (1..=self.k).all(|m| {
            let xi = self.coefficients(m);
            xi.iter().enumerate().all(|(i, c)| {
                let bound = if i == 0 {
                    2.0 * sqrt_eta / m as f64
                } else {
                    to_f64(&BigRational::new(binomial(m as u64, i as u64), factorial(i as u64))) / sqrt_eta
                };
                c.abs() <= bound * (1.0 + 1e-12)
            })
        })
    }

    /// Leading coefficients are positive and degrees match.
    pub fn is_well_formed(&self) -> bool {
        self.scaled
            .iter()
            .enumerate()
            .all(|(m, p)| p.degree() == Some(m) && p.leading().is_some_and(|c| c.is_positive()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn laguerre_low_orders() {
        assert_eq!(laguerre(0).to_f64_coefficients(), vec![1.0]);
        assert_eq!(laguerre(1).to_f64_coefficients(), vec![1.0, -1.0]);
        assert_eq!(laguerre(2).to_f64_coefficients(), vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn laguerre_is_orthonormal_under_exponential() {
        // Pure exponential: <f, g> = sum_i (fg)_i i!
        for m in 0..6 {
            for l in 0..6 {
                let prod = &laguerre(m) * &laguerre(l);
                let ip = prod
                    .coefficients()
                    .iter()
                    .enumerate()
                    .fold(BigRational::zero(), |acc, (i, c)| {
                        acc + c * BigRational::from_integer(factorial(i as u64))
                    });
                let expect = if m == l { BigRational::one() } else { BigRational::zero() };
                assert_eq!(ip, expect, "m={m} l={l}");
            }
        }
    }

    #[test]
    fn moments_of_mixture() {
        let m = moments_p(0.1, 4);
        assert_eq!(m[0], 1.0);
        assert_relative_eq!(m[1], 0.1, max_relative = 1e-15);
        assert_relative_eq!(m[4], 2.4, max_relative = 1e-15);
    }

    #[test]
    fn first_normalizer() {
        // mu^-2 = 0.1 (1 + 1/9)^2 + 0.1 + 0.01 / 0.9 = 19/81
        let b = OrthoBasis::new(0.1, 1).unwrap();
        assert_relative_eq!(to_f64(b.inv_mu_sq(1)), 0.234_567_901_234_567_9, max_relative = 1e-12);
        assert_relative_eq!(b.mus()[1], 2.064_741_604_835_056, max_relative = 1e-12);
    }

    #[test]
    fn p0_is_one() {
        let b = OrthoBasis::new(0.1, 0).unwrap();
        assert_eq!(b.coefficients(0), vec![1.0]);
        assert_eq!(b.rho(3.7), 1.0);
    }

    #[test]
    fn rho_at_origin_at_least_atom_mass() {
        for eta in [0.05, 0.2, 0.5] {
            for k in 1..6 {
                let b = OrthoBasis::new(eta, k).unwrap();
                assert!(b.rho(0.0) >= 1.0 - eta - 1e-15);
            }
        }
    }

    #[test]
    fn rho_regression_value() {
        // Frozen from the Hankel-matrix form 1 / (v^T H^-1 v), evaluated at 50 digits.
        let b = OrthoBasis::new(0.2, 2).unwrap();
        assert_relative_eq!(b.rho(-0.01), 0.848_837_119_549_948_1, max_relative = 1e-13);
    }

    #[test]
    fn structure_and_coefficient_bounds() {
        for eta in [0.05, 0.1, 0.3, 0.5] {
            let b = OrthoBasis::new(eta, 8).unwrap();
            assert!(b.is_well_formed());
            assert!(b.coefficient_bounds_hold(), "eta={eta}");
        }
    }

    #[test]
    fn rejects_out_of_range_eta() {
        assert!(OrthoBasis::new(0.0, 2).is_err());
        assert!(OrthoBasis::new(1.0, 2).is_err());
    }
}

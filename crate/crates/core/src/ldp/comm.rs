//! The `l`-bit communication-bounded oracle.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sq::{dot, StatQuery};

/// A deterministic map from a sample to `l` bits.
pub trait Extractor: Send + Sync {
    fn id(&self) -> String;
    fn bits(&self) -> usize;
    fn extract(&self, x: &[f64], y: f64) -> u64;
}

/// One bit: `1` when `h(z) >= 0`.
#[derive(Debug, Clone)]
pub struct SignExtractor {
    query: StatQuery,
}

impl SignExtractor {
    pub fn new(query: StatQuery) -> Self {
        Self { query }
    }
}

impl Extractor for SignExtractor {
    fn id(&self) -> String {
        format!("sign:{}", self.query.descriptor())
    }

    fn bits(&self) -> usize {
        1
    }

    fn extract(&self, x: &[f64], y: f64) -> u64 {
        (self.query.eval(x, y) >= 0.0) as u64
    }
}

/// Uniform `l`-bit quantizer of `<w, x>` clamped to `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Quantizer {
    w: Vec<f64>,
    bits: usize,
}

impl Quantizer {
    pub fn new(w: Vec<f64>, bits: usize) -> Result<Self> {
        if bits == 0 || bits > 32 {
            return Err(Error::InvalidParams(format!("{bits} bits outside 1..=32")));
        }
        Ok(Self { w, bits })
    }

    fn cells(&self) -> u64 {
        1u64 << self.bits
    }

    /// Midpoint of the cell a message names.
    pub fn reconstruct(&self, message: u64) -> f64 {
        let width = 2.0 / self.cells() as f64;
        -1.0 + width * (message as f64 + 0.5)
    }
}

impl Extractor for Quantizer {
    fn id(&self) -> String {
        format!("quant{}:{:?}", self.bits, self.w)
    }

    fn bits(&self) -> usize {
        self.bits
    }

    fn extract(&self, x: &[f64], _: f64) -> u64 {
        let v = dot(&self.w, x).clamp(-1.0, 1.0);
        let cell = ((v + 1.0) / 2.0 * self.cells() as f64).floor() as u64;
        cell.min(self.cells() - 1)
    }
}

/// `R(z)` for a single sample.
pub fn comm_oracle(r: &dyn Extractor, sample: &(Vec<f64>, f64)) -> u64 {
    r.extract(&sample.0, sample.1)
}

/// One sample per user; extractors are declared up front and each sample is
/// read once.
pub struct CommOracle {
    samples: Vec<(Vec<f64>, f64)>,
    declared: Vec<Option<Arc<dyn Extractor>>>,
    released: bool,
}

impl CommOracle {
    pub fn new(samples: Vec<(Vec<f64>, f64)>) -> Self {
        let n = samples.len();
        Self {
            samples,
            declared: vec![None; n],
            released: false,
        }
    }

    pub fn declare(&mut self, user: usize, r: Arc<dyn Extractor>) -> Result<()> {
        if self.released {
            return Err(Error::AdaptiveQuery);
        }
        if user >= self.samples.len() {
            return Err(Error::DomainMismatch(format!("no user {user}")));
        }
        if self.declared[user].is_some() {
            return Err(Error::SampleReuse(user));
        }
        self.declared[user] = Some(r);
        Ok(())
    }

    pub fn release(&mut self) -> Result<Vec<Option<u64>>> {
        if self.released {
            let first = self.declared.iter().position(|d| d.is_some()).unwrap_or(0);
            return Err(Error::SampleReuse(first));
        }
        self.released = true;
        Ok(self
            .declared
            .iter()
            .zip(&self.samples)
            .map(|(r, s)| r.as_ref().map(|r| comm_oracle(r.as_ref(), s)))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_channel_is_noiseless() {
        let e = SignExtractor::new(StatQuery::new("x0", |x, _| x[0]));
        assert_eq!(comm_oracle(&e, &(vec![0.3], 1.0)), 1);
        assert_eq!(comm_oracle(&e, &(vec![-0.3], 1.0)), 0);
    }

    #[test]
    fn quantizer_error_bound() {
        let w = vec![0.6, 0.8];
        for bits in 1..=8 {
            let q = Quantizer::new(w.clone(), bits).unwrap();
            for i in 0..=200 {
                let t = std::f64::consts::PI * i as f64 / 100.0;
                let x = [t.cos(), t.sin()];
                let v = dot(&w, &x);
                let err = (q.reconstruct(q.extract(&x, 1.0)) - v).abs();
                assert!(err <= 2f64.powi(1 - bits as i32) + 1e-15);
                assert!(q.extract(&x, 1.0) < 1 << bits);
            }
        }
    }

    #[test]
    fn single_access() {
        let mut o = CommOracle::new(vec![(vec![1.0], 1.0), (vec![-1.0], -1.0)]);
        let e: Arc<dyn Extractor> = Arc::new(SignExtractor::new(StatQuery::label()));
        o.declare(1, e.clone()).unwrap();
        assert_eq!(o.declare(1, e.clone()), Err(Error::SampleReuse(1)));
        assert_eq!(o.release().unwrap(), vec![None, Some(0)]);
        assert_eq!(o.declare(0, e), Err(Error::AdaptiveQuery));
    }
}

//! Finite distributions, stochastic channels and total variation.
//!
//! A cube distribution on `{-1, 1}^n` is stored as `2^n` masses; bit `i` of
//! the index is set exactly when `x_i = -1`.

use rand::Rng;

use crate::error::{Error, Result};

const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    bits: Option<usize>,
    probs: Vec<f64>,
}

pub fn index_to_point(idx: usize, n: usize) -> Vec<i8> {
    (0..n).map(|i| if idx >> i & 1 == 1 { -1 } else { 1 }).collect()
}

pub fn point_to_index(x: &[i8]) -> usize {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v < 0)
        .fold(0, |acc, (i, _)| acc | 1 << i)
}

/// `chi_S(x)` for index-encoded `x` and bitmask `S`.
pub fn parity(idx: usize, mask: usize) -> f64 {
    if (idx & mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl DiscreteDist {
    /// Distribution over `probs.len()` unlabeled outcomes.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::validate(&probs)?;
        Ok(Self { bits: None, probs })
    }

    /// Distribution over `{-1, 1}^n`.
    pub fn cube(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1 << n {
            return Err(Error::DomainMismatch(format!(
                "{} masses for a cube of dimension {n}",
                probs.len()
            )));
        }
        Self::validate(&probs)?;
        Ok(Self { bits: Some(n), probs })
    }

    fn validate(probs: &[f64]) -> Result<()> {
        if probs.iter().any(|&p| !(p >= -MASS_TOL)) {
            return Err(Error::InvalidMeasure("negative mass".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {total}")));
        }
        Ok(())
    }

    pub fn point_mass_at(n: usize, idx: usize) -> Result<Self> {
        let mut probs = vec![0.0; 1 << n];
        probs[idx] = 1.0;
        Self::cube(n, probs)
    }

    pub fn uniform_cube(n: usize) -> Self {
        let m = 1usize << n;
        Self {
            bits: Some(n),
            probs: vec![1.0 / m as f64; m],
        }
    }

    pub fn bits(&self) -> Option<usize> {
        self.bits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `E[chi_S(x)]` for the bitmask `S`.
    pub fn fourier(&self, mask: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(idx, p)| p * parity(idx, mask))
            .sum()
    }

    /// All `2^n` coefficients by the fast Walsh-Hadamard transform.
    pub fn fourier_all(&self) -> Vec<f64> {
        let mut v = self.probs.clone();
        fwht(&mut v);
        v
    }

    /// Law of `-x`.
    pub fn negate(&self) -> Result<Self> {
        let n = self.cube_bits()?;
        let all = (1usize << n) - 1;
        let mut probs = vec![0.0; self.probs.len()];
        for (idx, p) in self.probs.iter().enumerate() {
            probs[idx ^ all] = *p;
        }
        Ok(Self { bits: Some(n), probs })
    }

    /// Law of `a * x` coordinatewise.
    pub fn flip(&self, a: &[i8]) -> Result<Self> {
        let n = self.cube_bits()?;
        if a.len() != n {
            return Err(Error::DomainMismatch("sign vector length".into()));
        }
        let mask = point_to_index(a);
        let mut probs = vec![0.0; self.probs.len()];
        for (idx, p) in self.probs.iter().enumerate() {
            probs[idx ^ mask] = *p;
        }
        Ok(Self { bits: Some(n), probs })
    }

    /// Independent product; `self` occupies the low coordinates.
    pub fn product(&self, other: &Self) -> Self {
        let mut probs = Vec::with_capacity(self.probs.len() * other.probs.len());
        for q in &other.probs {
            for p in &self.probs {
                probs.push(p * q);
            }
        }
        let bits = match (self.bits, other.bits) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Self { bits, probs }
    }

    fn cube_bits(&self) -> Result<usize> {
        self.bits
            .ok_or_else(|| Error::DomainMismatch("not a cube distribution".into()))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (idx, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return idx;
            }
        }
        self.probs.len() - 1
    }
}

/// In-place unnormalized Walsh-Hadamard transform.
pub fn fwht(v: &mut [f64]) {
    let n = v.len();
    assert!(n.is_power_of_two(), "length must be a power of two");
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `1/2 sum |p1 - p2|`.
pub fn tv_exact(d1: &DiscreteDist, d2: &DiscreteDist) -> Result<f64> {
    if d1.probs.len() != d2.probs.len() || d1.bits != d2.bits {
        return Err(Error::DomainMismatch(format!(
            "domains of size {} and {}",
            d1.probs.len(),
            d2.probs.len()
        )));
    }
    Ok(0.5 * d1.probs.iter().zip(&d2.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Row-stochastic matrix: `rows[i][o] = Pr[output o | input i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rows: Vec<Vec<f64>>,
    outputs: usize,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let outputs = rows.first().map_or(0, Vec::len);
        for (row, r) in rows.iter().enumerate() {
            let sum: f64 = r.iter().sum();
            if r.len() != outputs || r.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > MASS_TOL {
                return Err(Error::RowNotStochastic { row, sum });
            }
        }
        Ok(Self { rows, outputs })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|o| if i == o { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { rows, outputs: n }
    }

    /// Every input goes to `output`.
    pub fn constant(inputs: usize, outputs: usize, output: usize) -> Self {
        let rows = (0..inputs)
            .map(|_| (0..outputs).map(|o| if o == output { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { rows, outputs }
    }

    /// Deterministic map `i -> f(i)`.
    pub fn deterministic(inputs: usize, outputs: usize, f: impl Fn(usize) -> usize) -> Self {
        let rows = (0..inputs)
            .map(|i| {
                let t = f(i);
                (0..outputs).map(|o| if o == t { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        Self { rows, outputs }
    }

    /// Rows with i.i.d. uniform entries, normalized.
    pub fn random<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let rows = (0..inputs)
            .map(|_| {
                let r: Vec<f64> = (0..outputs).map(|_| rng.gen::<f64>() + 1e-12).collect();
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            })
            .collect();
        Self { rows, outputs }
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }
}

/// Law of the channel output when the input has law `dist`.
pub fn push_forward(dist: &DiscreteDist, channel: &Channel) -> Result<DiscreteDist> {
    if dist.probs.len() != channel.inputs() {
        return Err(Error::DomainMismatch(format!(
            "distribution over {} points, channel over {}",
            dist.probs.len(),
            channel.inputs()
        )));
    }
    let mut out = vec![0.0; channel.outputs];
    for (p, row) in dist.probs.iter().zip(&channel.rows) {
        for (o, q) in out.iter_mut().zip(row) {
            *o += p * q;
        }
    }
    Ok(DiscreteDist { bits: None, probs: out })
}

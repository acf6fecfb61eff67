//! Statistical queries `h : X x {-1, 1} -> [-1, 1]`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub type Evaluator = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Inner products within this multiple of `|w|_1` count as zero.
pub const TIE_TOL: f64 = 1e-12;

pub fn tie_eps(w: &[f64]) -> f64 {
    TIE_TOL * w.iter().map(|v| v.abs()).sum::<f64>()
}

pub fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// `sign` with `sign(0) = +1` and near-zero values snapped to zero.
pub fn predict(w: &[f64], x: &[f64]) -> f64 {
    if dot(w, x) >= -tie_eps(w) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateFeature {
    One,
    /// `y * x_i`
    LabelTimesCoord(usize),
}

/// Known closed forms that evaluators may exploit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryStructure {
    /// `y^label_power * prod_{i in set} x_i`
    LabeledParity { set: Vec<usize>, label_power: u8 },
    /// `1[y <w, x> <= threshold] * feature`
    MarginGated {
        w: Vec<f64>,
        threshold: f64,
        feature: GateFeature,
    },
    /// `1[sign(<w, x>) != y]`
    Misclassification { w: Vec<f64> },
}

#[derive(Clone)]
pub struct StatQuery {
    evaluator: Evaluator,
    descriptor: String,
    fourier_support_hint: Option<usize>,
    structure: Option<QueryStructure>,
}

impl fmt::Debug for StatQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatQuery")
            .field("descriptor", &self.descriptor)
            .field("fourier_support_hint", &self.fourier_support_hint)
            .field("structure", &self.structure)
            .finish()
    }
}

fn format_weights(w: &[f64]) -> String {
    w.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(",")
}

impl StatQuery {
    /// Opaque query; values are clamped to `[-1, 1]`.
    pub fn new(descriptor: impl Into<String>, f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            evaluator: Arc::new(f),
            descriptor: descriptor.into(),
            fourier_support_hint: None,
            structure: None,
        }
    }

    pub fn with_fourier_hint(mut self, degree: usize) -> Self {
        self.fourier_support_hint = Some(degree);
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const:{c}"), move |_, _| c).with_fourier_hint(0)
    }

    /// `y^label_power * chi_S(x)`.
    pub fn labeled_parity(set: Vec<usize>, label_power: u8) -> Self {
        let mut set = set;
        set.sort_unstable();
        set.dedup();
        let descriptor = format!(
            "parity:y^{label_power}:{}",
            set.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        );
        let s = set.clone();
        let lp = label_power;
        let degree = set.len();
        let mut q = Self::new(descriptor, move |x, y| {
            let chi: f64 = s.iter().map(|&i| x[i]).product();
            y.powi(lp as i32) * chi
        })
        .with_fourier_hint(degree);
        q.structure = Some(QueryStructure::LabeledParity { set, label_power });
        q
    }

    /// `h(x, y) = y`.
    pub fn label() -> Self {
        Self::labeled_parity(Vec::new(), 1)
    }

    pub fn margin_gated(w: Vec<f64>, threshold: f64, feature: GateFeature) -> Self {
        let eps = tie_eps(&w);
        let feat = match feature {
            GateFeature::One => "1".to_string(),
            GateFeature::LabelTimesCoord(i) => format!("y*x{i}"),
        };
        let descriptor = format!("gated:thr={threshold:e}:{feat}:w={}", format_weights(&w));
        let wc = w.clone();
        let mut q = Self::new(descriptor, move |x, y| {
            if y * dot(&wc, x) <= threshold + eps {
                match feature {
                    GateFeature::One => 1.0,
                    GateFeature::LabelTimesCoord(i) => y * x[i],
                }
            } else {
                0.0
            }
        });
        q.structure = Some(QueryStructure::MarginGated { w, threshold, feature });
        q
    }

    pub fn misclassification(w: Vec<f64>) -> Self {
        let descriptor = format!("err:w={}", format_weights(&w));
        let wc = w.clone();
        let mut q = Self::new(descriptor, move |x, y| if predict(&wc, x) != y { 1.0 } else { 0.0 });
        q.structure = Some(QueryStructure::Misclassification { w });
        q
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn fourier_support_hint(&self) -> Option<usize> {
        self.fourier_support_hint
    }

    pub fn structure(&self) -> Option<&QueryStructure> {
        self.structure.as_ref()
    }

    pub fn is_error_query(&self) -> bool {
        matches!(self.structure, Some(QueryStructure::Misclassification { .. }))
    }

    /// `h(x, y)` clamped to `[-1, 1]`.
    pub fn eval(&self, x: &[f64], y: f64) -> f64 {
        let v = (self.evaluator)(x, y);
        if v.is_nan() {
            0.0
        } else {
            v.clamp(-1.0, 1.0)
        }
    }

    /// `x -> h(x, label)`.
    pub fn restrict(&self, label: f64) -> impl Fn(&[f64]) -> f64 + '_ {
        move |x| self.eval(x, label)
    }
}

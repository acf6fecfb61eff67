//! One-dimensional moment machinery: the mixture `P`, its orthogonal
//! polynomials, the moment-matched measure `Q` and their rescaled,
//! conditioned versions.

pub mod canonical;
pub mod condition;
pub mod measure;
pub mod ortho;
pub mod params;
pub mod poly;

pub use canonical::{canonical_representation, construct_q, construct_q_detailed, CanonicalQ, RootPath, MOMENT_TOL, RHO_TOL};
pub use condition::{rescale_and_condition, ConditionReport, Conditioned, DEFAULT_C_CEILING};
pub use measure::{Atom, AtomicMeasure, ExpComponent, HybridMeasure};
pub use ortho::{laguerre, moments_p, MixtureP, OrthoBasis};
pub use params::ConstructionParams;
pub use poly::Polynomial;

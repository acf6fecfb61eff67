//! Statistical queries, their exact evaluation on the hard family, tolerant
//! oracles and the lower-bound experiments.

pub mod dist;
pub mod hardness;
pub mod query;
pub mod session;

pub use dist::{hoeffding_half_width, sq_value, EvalMode, FiniteLabeled, LabeledDistribution, SqEstimate};
pub use hardness::{
    chebyshev_sweep, family_conditionals, family_theta, pair_gaps, pairing_sweep, tensor_gap_bound_check,
    variance_identity_check, PairingReport, SweepReport, TensorReport, VarianceIdentity,
};
pub use query::{dot, predict, GateFeature, QueryStructure, StatQuery};
pub use session::{HonestNoise, LogEntry, ReplayOracle, SqOracle, SqOracleSession};

//! Local differential privacy and bounded communication: randomizers with
//! auditable kernels, the one-shot `LR_S` oracle and the `l`-bit oracle.

pub mod comm;
pub mod protocol;
pub mod randomizer;

pub use comm::{comm_oracle, CommOracle, Extractor, Quantizer, SignExtractor};
pub use protocol::{
    draw_users, run_noninteractive, user_rng, Assignment, LdpSqOracle, LrOracle, ProtocolHeader, ProtocolRun,
    TranscriptLine,
};
pub use randomizer::{
    audit_epsilon, audited_epsilon, extreme_probes, rr_kappa, rr_std_error, Composed, ConstantRandomizer,
    LocalRandomizer, RandomizedResponse,
};

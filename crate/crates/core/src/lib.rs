//! Hard instances separating adaptive from non-adaptive statistical-query
//! learning of large-margin halfspaces, with the oracles, local randomizers
//! and learners used to exercise them.

pub mod cube;
pub mod decimal;
pub mod error;
pub mod ldp;
pub mod learners;
pub mod moment;
pub mod sq;

pub use error::{Error, Result};

//! Variational and oscillation estimates for discrete and continuous operator families.

pub mod analyticity;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod semigroup;
mod par;
mod quad;
pub mod serde_ext;
pub mod variation;

pub use error::{Error, Result};
pub use lp::{LpVector, MatrixOperator, MeasureSpace, NormEstimate};
pub use semigroup::GeneratorModel;
pub use variation::{BlockPartition, ScalarSequence, VariationExponent};

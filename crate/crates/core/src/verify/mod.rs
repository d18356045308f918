//! Slow, independent reference computations for checking the fast paths.
//!
//! Nothing here calls into the tensor, integral or solver internals: the
//! oracles work from closures, plain letter sequences and grid values, and
//! each one reports its own error estimate.

mod ou;
mod pde;
mod stieltjes;
mod words;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use ou::{ou_transition_variance, ou_variance_oracle, sample_variance, VarianceEstimate};
pub use pde::{classical_pde_reference, stable_substeps, ReferenceProblem, ReferenceSolution};
pub use stieltjes::{riemann_stieltjes, stieltjes_on_grid};
pub use words::{exp_entry, segment_signature_entry, shuffle_enumerate, MAX_SHUFFLE_LETTERS};

/// A reference value with its self-estimated error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub name: String,
    pub values: Vec<f64>,
    /// Estimated absolute error, from the difference of the last two
    /// refinements.
    pub error_estimate: f64,
    /// SHA-256 of the name and numeric inputs, hex encoded.
    pub digest: String,
}

/// Hex SHA-256 of `name` followed by the little-endian bytes of `inputs`.
pub fn digest_inputs(name: &str, inputs: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(name.as_bytes());
    for v in inputs {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

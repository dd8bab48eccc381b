//! Finite exponent-`p` groups of nilpotency class at most 2, built from
//! bilinear factor systems over `F_p`, together with the combinatorics of
//! level trees and set families that index their central automorphisms.
//!
//! Every fast structural computation in [`analysis`] has a brute-force
//! counterpart in [`oracle`] that works from the multiplication table alone.

pub mod abaut;
pub mod analysis;
mod bits;
pub mod combinat;
pub mod constructions;
pub mod error;
pub mod formgroup;
pub mod fpspace;
pub mod oracle;
pub mod selftest;

pub use error::{Error, Result};
pub use formgroup::{FactorSystem, FormGroup, GroupElement};
pub use fpspace::{BilinearMap, FpVec, Subspace};

use serde::{Deserialize, Serialize};

/// Capacity caps shared by the exhaustive procedures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest group order for element-by-element passes.
    pub max_elements: u64,
    /// Largest group order for exhaustive subgroup sweeps.
    pub max_subgroup_order: u64,
    /// Largest generator dimension for isotropic-subspace search.
    pub max_isotropic_dim: usize,
    /// Node budget for branch-and-bound searches (set cover, cliques).
    pub max_search_nodes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_elements: 6561,
            max_subgroup_order: 729,
            max_isotropic_dim: fpspace::DEFAULT_MAX_ISOTROPIC_DIM,
            max_search_nodes: 20_000_000,
        }
    }
}

//! Constructive upper bounds. Every routine returns a [`Decomposition`]
//! (or parts of one) that the core verifier can check.
//!
//! [`Decomposition`]: crate::Decomposition

mod approx;
mod brcompl;
mod cover;
mod hd1;
mod poly;
mod relu;
mod sparse;
mod sparse_boolean;

pub use approx::{amplify_eval, approx_hd1, greedy_code, ApproxHd1, Code};
pub use brcompl::{brcompl, brcompl_cap, spiky_to_blocky, spiky_to_blocky_cap};
pub use cover::cover_to_blocky;
pub use hd1::{hd1_blocky, sign_hd1};
pub use poly::poly_compose_blocky;
pub use relu::{circuit_to_spiky, relu_to_spiky, threshold_to_blocky, ReluGate};
pub use sparse::sparse_to_spiky;
pub use sparse_boolean::{find_one_rectangle, sparse_boolean_to_blocky};

use crate::decomposition::{BlockyTerm, Decomposition, Term};
use crate::pattern::BlockyPattern;

pub(crate) fn single_block(
    nrows: usize,
    ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
) -> BlockyPattern {
    BlockyPattern::single(nrows, ncols, rows, cols)
        .expect("caller passes a nonempty in-range block")
}

/// `ceil(sqrt(m))` without floating point.
pub(crate) fn ceil_sqrt(m: usize) -> usize {
    let mut s = (m as f64).sqrt() as usize;
    while s * s > m {
        s -= 1;
    }
    while s * s < m {
        s += 1;
    }
    s
}

/// Blocky view of a decomposition whose spiky terms are all-ones on their
/// patterns (what the sparse sweep produces on Boolean input).
pub(crate) fn spiky_ones_to_blocky(d: &Decomposition) -> Vec<BlockyTerm> {
    d.terms()
        .iter()
        .map(|t| match t {
            Term::Blocky(b) => b.clone(),
            Term::Spiky(s) => {
                debug_assert!(s.pattern.cells().all(|(i, j)| s.u[i] * s.v[j] == 1.0));
                BlockyTerm::new(s.pattern.clone(), 1.0)
            }
        })
        .collect()
}

//! Blocky and spiky rank of matrices.
//!
//! Construction, verification and bounding of decompositions into blocky
//! matrices (0/1 matrices supported on disjoint rectangles) and spiky
//! matrices (blocky patterns carrying a rank-one factor). Every constructive
//! routine returns a [`Decomposition`] that [`verify_decomposition`] can check
//! independently; the [`oracle`] module provides exhaustive ground truth at
//! tiny sizes.

pub mod bounds;
mod cert;
pub mod decomp;
pub mod decomposition;
pub mod error;
pub mod gen;
pub mod matrix;
pub mod oracle;
pub mod pattern;

pub use decomposition::{
    is_spiky, verify_decomposition, BlockyTerm, Decomposition, DecompositionKind, Failure,
    SpikyTerm, Term, VerificationReport,
};
pub use error::{Error, Result};
pub use matrix::{gf2_rank, Field, Matrix};
pub use pattern::{is_blocky, support_blocks, Block, BlockyPattern};

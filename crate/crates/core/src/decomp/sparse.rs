use std::collections::BTreeMap;

use super::{ceil_sqrt, single_block};
use crate::decomposition::{Decomposition, SpikyTerm};
use crate::matrix::Matrix;
use crate::pattern::{Block, BlockyPattern};

/// Spiky decomposition with at most `2·ceil(sqrt(m))` terms, `m` the sparsity.
///
/// Columns holding more than `sqrt(m)` nonzeros become one term each. The rest
/// is peeled in sweeps: sweep `s` takes the `s`-th nonzero of every remaining
/// column, and the entries landing in the same row share one `1 × c` block, so
/// each sweep is a single spiky term.
pub fn sparse_to_spiky(m: &Matrix) -> Decomposition {
    let (nrows, ncols) = m.shape();
    let sp = m.sparsity();
    let mut cols: Vec<Vec<usize>> = (0..ncols)
        .map(|j| (0..nrows).filter(|&i| m.get(i, j) != 0.0).collect())
        .collect();

    let mut terms = Vec::new();
    for (j, support) in cols.iter_mut().enumerate() {
        if support.len() * support.len() > sp {
            let mut u = vec![0.0; nrows];
            let mut v = vec![0.0; ncols];
            for &i in support.iter() {
                u[i] = m.get(i, j);
            }
            v[j] = 1.0;
            let p = single_block(nrows, ncols, std::mem::take(support), vec![j]);
            terms.push(SpikyTerm::new(p, u, v).expect("factor lengths match"));
        }
    }
    let dense_columns = terms.len();

    let depth = cols.iter().map(Vec::len).max().unwrap_or(0);
    for s in 0..depth {
        let mut by_row: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (j, support) in cols.iter().enumerate() {
            if let Some(&i) = support.get(s) {
                by_row.entry(i).or_default().push(j);
            }
        }
        let mut u = vec![0.0; nrows];
        let mut v = vec![0.0; ncols];
        let mut blocks = Vec::with_capacity(by_row.len());
        for (i, row_cols) in by_row {
            u[i] = 1.0;
            for &j in &row_cols {
                v[j] = m.get(i, j);
            }
            blocks.push(Block::new(vec![i], row_cols));
        }
        let p = BlockyPattern::new(nrows, ncols, blocks).expect("sweep blocks are disjoint");
        terms.push(SpikyTerm::new(p, u, v).expect("factor lengths match"));
    }

    let bound = 2 * ceil_sqrt(sp);
    assert!(terms.len() <= bound, "sweep count exceeded 2*ceil(sqrt(m))");
    let count = terms.len();
    Decomposition::spiky_sum(m.field(), nrows, ncols, terms)
        .expect("terms match target shape")
        .with_metadata("algo", "sparse-spiky")
        .with_metadata("claimedBound", bound)
        .with_metadata("termCount", count)
        .with_metadata("denseColumnTerms", dense_columns)
        .with_target(m)
}

//! Blocky patterns: unions of combinatorial rectangles with pairwise disjoint
//! row sets and pairwise disjoint column sets.

use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Block {
    pub fn new(mut rows: Vec<usize>, mut cols: Vec<usize>) -> Block {
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        Block { rows, cols }
    }

    pub fn size(&self) -> usize {
        self.rows.len() * self.cols.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockyPattern {
    nrows: usize,
    ncols: usize,
    blocks: Vec<Block>,
    row_block: Vec<Option<u32>>,
    col_block: Vec<Option<u32>>,
}

impl BlockyPattern {
    /// Validates disjointness, ranges and non-emptiness. Row and column lists
    /// are sorted; empty blocks are rejected.
    pub fn new(nrows: usize, ncols: usize, blocks: Vec<Block>) -> Result<Self> {
        let mut row_block = vec![None; nrows];
        let mut col_block = vec![None; ncols];
        let mut sorted = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.into_iter().enumerate() {
            let block = Block::new(block.rows, block.cols);
            if block.rows.is_empty() || block.cols.is_empty() {
                return Err(Error::InvalidPattern(format!("block {b} is empty")));
            }
            for &i in &block.rows {
                let slot = row_block.get_mut(i).ok_or(Error::IndexOutOfRange {
                    index: i,
                    bound: nrows,
                })?;
                if slot.is_some() {
                    return Err(Error::InvalidPattern(format!(
                        "row {i} appears in two blocks"
                    )));
                }
                *slot = Some(b as u32);
            }
            for &j in &block.cols {
                let slot = col_block.get_mut(j).ok_or(Error::IndexOutOfRange {
                    index: j,
                    bound: ncols,
                })?;
                if slot.is_some() {
                    return Err(Error::InvalidPattern(format!(
                        "column {j} appears in two blocks"
                    )));
                }
                *slot = Some(b as u32);
            }
            sorted.push(block);
        }
        Ok(BlockyPattern {
            nrows,
            ncols,
            blocks: sorted,
            row_block,
            col_block,
        })
    }

    pub fn empty(nrows: usize, ncols: usize) -> Self {
        BlockyPattern {
            nrows,
            ncols,
            blocks: Vec::new(),
            row_block: vec![None; nrows],
            col_block: vec![None; ncols],
        }
    }

    /// One block covering every entry.
    pub fn full(nrows: usize, ncols: usize) -> Self {
        if nrows == 0 || ncols == 0 {
            return Self::empty(nrows, ncols);
        }
        Self::new(
            nrows,
            ncols,
            vec![Block::new((0..nrows).collect(), (0..ncols).collect())],
        )
        .expect("a single full block is valid")
    }

    pub fn single(nrows: usize, ncols: usize, rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        Self::new(nrows, ncols, vec![Block::new(rows, cols)])
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    #[inline]
    pub fn covers(&self, i: usize, j: usize) -> bool {
        match (self.row_block[i], self.col_block[j]) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Index of the block containing row `i`, if any.
    pub fn block_of_row(&self, i: usize) -> Option<usize> {
        self.row_block[i].map(|b| b as usize)
    }

    pub fn block_of_col(&self, j: usize) -> Option<usize> {
        self.col_block[j].map(|b| b as usize)
    }

    /// Number of covered entries.
    pub fn support_size(&self) -> usize {
        self.blocks.iter().map(Block::size).sum()
    }

    /// Covered entries in block order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blocks.iter().flat_map(|b| {
            b.rows
                .iter()
                .flat_map(move |&i| b.cols.iter().map(move |&j| (i, j)))
        })
    }

    /// Entrywise product of two blocky matrices, which is again blocky.
    pub fn intersect(&self, other: &BlockyPattern) -> BlockyPattern {
        debug_assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut blocks = Vec::new();
        for a in &self.blocks {
            for b in &other.blocks {
                let rows = intersect_sorted(&a.rows, &b.rows);
                if rows.is_empty() {
                    continue;
                }
                let cols = intersect_sorted(&a.cols, &b.cols);
                if cols.is_empty() {
                    continue;
                }
                blocks.push(Block { rows, cols });
            }
        }
        blocks.sort();
        BlockyPattern::new(self.nrows, self.ncols, blocks)
            .expect("intersection of blocky patterns is blocky")
    }

    /// Pattern restricted to a submatrix: `rows[k]` becomes row `k`.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> BlockyPattern {
        let mut groups: Vec<Block> = vec![
            Block {
                rows: Vec::new(),
                cols: Vec::new()
            };
            self.blocks.len()
        ];
        for (k, &i) in rows.iter().enumerate() {
            if let Some(b) = self.block_of_row(i) {
                groups[b].rows.push(k);
            }
        }
        for (k, &j) in cols.iter().enumerate() {
            if let Some(b) = self.block_of_col(j) {
                groups[b].cols.push(k);
            }
        }
        let blocks = groups
            .into_iter()
            .filter(|b| !b.rows.is_empty() && !b.cols.is_empty())
            .collect();
        BlockyPattern::new(rows.len(), cols.len(), blocks)
            .expect("restriction of a blocky pattern is blocky")
    }

    /// Inverse of [`restrict`](Self::restrict): lifts a pattern on a submatrix
    /// back to ambient coordinates.
    pub fn embed(
        &self,
        rows: &[usize],
        cols: &[usize],
        nrows: usize,
        ncols: usize,
    ) -> BlockyPattern {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Block::new(
                    b.rows.iter().map(|&i| rows[i]).collect(),
                    b.cols.iter().map(|&j| cols[j]).collect(),
                )
            })
            .collect();
        BlockyPattern::new(nrows, ncols, blocks).expect("embedding preserves disjointness")
    }

    pub fn transpose(&self) -> BlockyPattern {
        let blocks = self
            .blocks
            .iter()
            .map(|b| Block::new(b.cols.clone(), b.rows.clone()))
            .collect();
        BlockyPattern::new(self.ncols, self.nrows, blocks).expect("transpose is blocky")
    }

    /// Union of two patterns whose blocks use disjoint rows and columns.
    pub fn merge(&self, other: &BlockyPattern) -> Result<BlockyPattern> {
        let blocks = self.blocks.iter().chain(&other.blocks).cloned().collect();
        BlockyPattern::new(self.nrows, self.ncols, blocks)
    }

    pub fn to_matrix(&self, field: Field) -> Matrix {
        Matrix::from_fn(field, self.nrows, self.ncols, |i, j| {
            self.covers(i, j) as u8 as f64
        })
    }

    /// Blocks in canonical order (sorted by least row index).
    pub fn canonical(&self) -> BlockyPattern {
        let mut blocks = self.blocks.clone();
        blocks.sort();
        BlockyPattern::new(self.nrows, self.ncols, blocks).expect("reordering is valid")
    }
}

pub(crate) fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Blocks of the support of `m`, if the support is a disjoint union of
/// rectangles. Components of the bipartite support graph must each be
/// complete bipartite.
pub fn support_blocks(m: &Matrix) -> Option<BlockyPattern> {
    let (nrows, ncols) = m.shape();
    // Two rows are in the same component iff their supports coincide
    // when the support is blocky, so grouping by row support suffices.
    let mut col_owner: Vec<Option<usize>> = vec![None; ncols];
    let mut blocks: Vec<Block> = Vec::new();
    let mut block_sig: Vec<Vec<usize>> = Vec::new();
    for i in 0..nrows {
        let sig: Vec<usize> = (0..ncols).filter(|&j| m.get(i, j) != 0.0).collect();
        if sig.is_empty() {
            continue;
        }
        match col_owner[sig[0]] {
            Some(b) => {
                if block_sig[b] != sig {
                    return None;
                }
                blocks[b].rows.push(i);
            }
            None => {
                if sig.iter().any(|&j| col_owner[j].is_some()) {
                    return None;
                }
                let b = blocks.len();
                for &j in &sig {
                    col_owner[j] = Some(b);
                }
                blocks.push(Block {
                    rows: vec![i],
                    cols: sig.clone(),
                });
                block_sig.push(sig);
            }
        }
    }
    Some(BlockyPattern::new(nrows, ncols, blocks).expect("support groups are disjoint"))
}

/// Returns the pattern when `m` is a blocky matrix: blocky support and every
/// covered entry equal to 1. The zero matrix yields the empty pattern.
pub fn is_blocky(m: &Matrix) -> Option<BlockyPattern> {
    let p = support_blocks(m)?;
    let ones = p.cells().all(|(i, j)| m.get(i, j) == 1.0);
    ones.then_some(p)
}

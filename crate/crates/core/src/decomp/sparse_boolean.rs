use std::collections::BTreeMap;

use super::{sparse_to_spiky, spiky_ones_to_blocky};
use crate::decomposition::{BlockyTerm, Decomposition};
use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix};
use crate::pattern::{Block, BlockyPattern};

/// Search nodes allowed for rectangles with more than three rows.
const RECTANGLE_BUDGET: usize = 1 << 20;

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn popcount(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

fn bit_indices(bits: &[u64]) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(w, &x)| {
        (0..64)
            .filter(move |b| x >> b & 1 == 1)
            .map(move |b| w * 64 + b)
    })
}

/// `k` rows out of `rows` (index, bitset) sharing at least `l` ones.
fn rectangle_in(
    rows: &[(usize, Vec<u64>)],
    k: usize,
    l: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if k == 0 || l == 0 {
        return None;
    }
    let mut order: Vec<&(usize, Vec<u64>)> =
        rows.iter().filter(|(_, b)| popcount(b) >= l).collect();
    order.sort_by_key(|(i, b)| (std::cmp::Reverse(popcount(b)), *i));
    let budget = if k <= 3 { usize::MAX } else { RECTANGLE_BUDGET };
    let mut nodes = 0usize;
    let mut chosen = Vec::with_capacity(k);

    fn dfs(
        order: &[&(usize, Vec<u64>)],
        from: usize,
        common: Option<Vec<u64>>,
        k: usize,
        l: usize,
        chosen: &mut Vec<usize>,
        nodes: &mut usize,
        budget: usize,
    ) -> Option<Vec<u64>> {
        if chosen.len() == k {
            return common;
        }
        for pos in from..order.len() {
            if order.len() - pos < k - chosen.len() || *nodes >= budget {
                return None;
            }
            *nodes += 1;
            let (i, bits) = order[pos];
            let next: Vec<u64> = match &common {
                None => bits.clone(),
                Some(c) => c.iter().zip(bits).map(|(a, b)| a & b).collect(),
            };
            if popcount(&next) < l {
                continue;
            }
            chosen.push(*i);
            if let Some(found) = dfs(order, pos + 1, Some(next), k, l, chosen, nodes, budget) {
                return Some(found);
            }
            chosen.pop();
        }
        None
    }

    let common = dfs(&order, 0, None, k, l, &mut chosen, &mut nodes, budget)?;
    chosen.sort_unstable();
    Some((chosen, bit_indices(&common).take(l).collect()))
}

/// A `k × l` all-ones submatrix, searched depth-first over rows taken in
/// decreasing density with pruning on the shared columns.
///
/// Exhaustive (hence complete) for `k ≤ 3`; larger `k` stops after a fixed
/// node budget, so `None` is then not a proof of absence.
pub fn find_one_rectangle(m: &Matrix, k: usize, l: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let w = words(m.ncols());
    let rows: Vec<(usize, Vec<u64>)> = (0..m.nrows())
        .map(|i| {
            let mut bits = vec![0u64; w];
            for j in 0..m.ncols() {
                if m.get(i, j) == 1.0 {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            (i, bits)
        })
        .collect();
    rectangle_in(&rows, k, l)
}

/// Remaining ones during the pipeline, in original coordinates (possibly
/// transposed).
#[derive(Clone)]
struct Grid {
    nrows: usize,
    ncols: usize,
    cells: Vec<bool>,
}

impl Grid {
    fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.ncols + j]
    }

    fn transpose(&self) -> Grid {
        let mut cells = vec![false; self.cells.len()];
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                cells[j * self.nrows + i] = self.get(i, j);
            }
        }
        Grid {
            nrows: self.ncols,
            ncols: self.nrows,
            cells,
        }
    }

    fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    fn row_cols(&self, i: usize) -> Vec<usize> {
        (0..self.ncols).filter(|&j| self.get(i, j)).collect()
    }

    fn active_rows(&self) -> usize {
        (0..self.nrows)
            .filter(|&i| (0..self.ncols).any(|j| self.get(i, j)))
            .count()
    }

    fn active_cols(&self) -> usize {
        (0..self.ncols)
            .filter(|&j| (0..self.nrows).any(|i| self.get(i, j)))
            .count()
    }

    fn remove(&mut self, blocks: &[Block]) {
        for b in blocks {
            for &i in &b.rows {
                for &j in &b.cols {
                    debug_assert!(self.get(i, j), "removing a cell that is not a one");
                    self.cells[i * self.ncols + j] = false;
                }
            }
        }
    }
}

fn transpose_blocks(blocks: Vec<Block>) -> Vec<Block> {
    blocks
        .into_iter()
        .map(|b| Block {
            rows: b.cols,
            cols: b.rows,
        })
        .collect()
}

/// One entry per nonempty column, grouped by row into `1 × c` blocks.
fn column_sweep(grid: &Grid) -> Vec<Block> {
    let mut by_row: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for j in 0..grid.ncols {
        if let Some(i) = (0..grid.nrows).find(|&i| grid.get(i, j)) {
            by_row.entry(i).or_default().push(j);
        }
    }
    by_row
        .into_iter()
        .map(|(i, cols)| Block {
            rows: vec![i],
            cols,
        })
        .collect()
}

fn sweep_terms(grid: &Grid) -> Vec<Vec<Block>> {
    let m = Matrix::from_fn(Field::Real, grid.nrows, grid.ncols, |i, j| {
        grid.get(i, j) as u8 as f64
    });
    spiky_ones_to_blocky(&sparse_to_spiky(&m))
        .into_iter()
        .map(|t| t.pattern.blocks().to_vec())
        .collect()
}

struct Params {
    k: usize,
    l: usize,
    spar_floor: f64,
}

/// Halves the number of nonempty columns of `grid`, returning emitted terms.
fn halving_round(grid: &mut Grid, p: &Params) -> Vec<Vec<Block>> {
    let mut out = Vec::new();
    let c_t = grid.active_cols();
    let w = words(grid.ncols);
    loop {
        let mut alive_rows = vec![true; grid.nrows];
        let mut alive_cols = vec![true; grid.ncols];
        let mut found: Vec<Block> = Vec::new();
        loop {
            let rows: Vec<(usize, Vec<u64>)> = (0..grid.nrows)
                .filter(|&i| alive_rows[i])
                .map(|i| {
                    let mut bits = vec![0u64; w];
                    for j in (0..grid.ncols).filter(|&j| alive_cols[j] && grid.get(i, j)) {
                        bits[j / 64] |= 1 << (j % 64);
                    }
                    (i, bits)
                })
                .collect();
            let spar: usize = rows.iter().map(|(_, b)| popcount(b)).sum();
            if spar == 0 || (spar as f64) < p.spar_floor {
                break;
            }
            let Some((r, c)) = rectangle_in(&rows, p.k, p.l) else {
                break;
            };
            r.iter().for_each(|&i| alive_rows[i] = false);
            c.iter().for_each(|&j| alive_cols[j] = false);
            found.push(Block { rows: r, cols: c });
        }

        let t = found.len();
        if t > 0 && 2 * t * p.l >= c_t {
            grid.remove(&found);
            out.push(found);
            continue;
        }

        let spoiled: Vec<usize> = found.iter().flat_map(|b| b.rows.iter().copied()).collect();
        let mut packed: Vec<(Vec<Block>, Vec<bool>)> = Vec::new();
        for &i in &spoiled {
            let cols = grid.row_cols(i);
            if cols.is_empty() {
                continue;
            }
            let slot = packed
                .iter_mut()
                .find(|(_, used)| cols.iter().all(|&j| !used[j]));
            let (blocks, used) = match slot {
                Some(s) => s,
                None => {
                    packed.push((Vec::new(), vec![false; grid.ncols]));
                    packed.last_mut().unwrap()
                }
            };
            cols.iter().for_each(|&j| used[j] = true);
            blocks.push(Block {
                rows: vec![i],
                cols,
            });
        }
        for (blocks, _) in packed {
            grid.remove(&blocks);
            out.push(blocks);
        }

        let mut rest = grid.clone();
        for i in 0..grid.nrows {
            for j in 0..grid.ncols {
                if !(alive_rows[i] && alive_cols[j]) {
                    rest.cells[i * grid.ncols + j] = false;
                }
            }
        }
        for blocks in sweep_terms(&rest) {
            grid.remove(&blocks);
            out.push(blocks);
        }
        debug_assert!(2 * grid.active_cols() < c_t.max(1) || grid.is_empty());
        return out;
    }
}

fn pipeline(m: &Matrix, sp: usize) -> (Vec<Vec<Block>>, Params) {
    let mf = sp as f64;
    let log_m = mf.log2();
    let loglog = log_m.log2();
    let params = Params {
        k: if loglog > 0.0 {
            ((log_m / (100.0 * loglog)).floor() as usize).max(1)
        } else {
            1
        },
        l: (mf.powf(0.25).ceil() as usize).max(1),
        spar_floor: if log_m > 0.0 { mf / log_m.powi(4) } else { 0.0 },
    };
    let mut grid = Grid {
        nrows: m.nrows(),
        ncols: m.ncols(),
        cells: m.data().iter().map(|&x| x != 0.0).collect(),
    };
    let mut terms = Vec::new();

    let wide = mf.sqrt() * log_m;
    while !grid.is_empty() {
        if grid.active_cols() as f64 >= wide {
            let b = column_sweep(&grid);
            grid.remove(&b);
            terms.push(b);
        } else if grid.active_rows() as f64 >= wide {
            let b = transpose_blocks(column_sweep(&grid.transpose()));
            grid.remove(&b);
            terms.push(b);
        } else {
            break;
        }
    }

    let root = mf.sqrt();
    while !grid.is_empty() && (grid.active_cols() as f64 > root || grid.active_rows() as f64 > root)
    {
        if grid.active_cols() as f64 > root {
            terms.extend(halving_round(&mut grid, &params));
        } else {
            let mut t = grid.transpose();
            let emitted = halving_round(&mut t, &params);
            grid = t.transpose();
            terms.extend(emitted.into_iter().map(transpose_blocks));
        }
    }

    let mut row_types: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut col_types: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for i in 0..grid.nrows {
        let cols = grid.row_cols(i);
        if !cols.is_empty() {
            row_types.entry(cols).or_default().push(i);
        }
    }
    for j in 0..grid.ncols {
        let rows: Vec<usize> = (0..grid.nrows).filter(|&i| grid.get(i, j)).collect();
        if !rows.is_empty() {
            col_types.entry(rows).or_default().push(j);
        }
    }
    if row_types.len() <= col_types.len() {
        terms.extend(
            row_types
                .into_iter()
                .map(|(cols, rows)| vec![Block { rows, cols }]),
        );
    } else {
        terms.extend(
            col_types
                .into_iter()
                .map(|(rows, cols)| vec![Block { rows, cols }]),
        );
    }
    (terms, params)
}

fn isqrt(x: usize) -> usize {
    let mut s = (x as f64).sqrt() as usize;
    while s * s > x {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= x {
        s += 1;
    }
    s
}

/// Blocky partition of a Boolean matrix: disjoint all-ones pieces with
/// coefficient 1.
///
/// Runs the rectangle-extraction pipeline (sweeps while the matrix is wide,
/// then column/row halving rounds built from `k × l` all-ones rectangles, then
/// one term per distinct row or column type) and also the plain sweep
/// decomposition, returning whichever uses fewer terms. Both counts are
/// recorded in the metadata.
pub fn sparse_boolean_to_blocky(m: &Matrix) -> Result<Decomposition> {
    if !m.is_boolean() {
        return Err(Error::Precondition(
            "sparse_boolean_to_blocky needs a Boolean matrix".into(),
        ));
    }
    let (nrows, ncols) = m.shape();
    let sp = m.sparsity();
    let (blocks, params) = pipeline(m, sp);
    let piped: Vec<BlockyTerm> = blocks
        .into_iter()
        .map(|b| {
            BlockyTerm::new(
                BlockyPattern::new(nrows, ncols, b).expect("pipeline terms are blocky"),
                1.0,
            )
        })
        .collect();
    let direct = spiky_ones_to_blocky(&sparse_to_spiky(m));
    let (piped_n, direct_n) = (piped.len(), direct.len());
    let (strategy, terms) = if piped_n <= direct_n {
        ("pipeline", piped)
    } else {
        ("sweep", direct)
    };
    let count = terms.len();
    Ok(Decomposition::blocky_sum(m.field(), nrows, ncols, terms)?
        .with_metadata("algo", "sparse-boolean-blocky")
        .with_metadata("claimedBound", isqrt(4 * sp))
        .with_metadata("termCount", count)
        .with_metadata("pipelineTerms", piped_n)
        .with_metadata("sweepTerms", direct_n)
        .with_metadata("strategy", strategy)
        .with_metadata("rectangleRows", params.k)
        .with_metadata("rectangleCols", params.l)
        .with_target(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::verify_decomposition;

    #[test]
    fn rectangles_in_named_matrices() {
        let j = Matrix::ones(Field::Real, 8, 8);
        let (r, c) = find_one_rectangle(&j, 3, 3).unwrap();
        assert_eq!((r.len(), c.len()), (3, 3));
        assert!(find_one_rectangle(&gen::identity(6).unwrap(), 2, 1).is_none());
        assert!(find_one_rectangle(&gen::identity(6).unwrap(), 1, 1).is_some());
    }

    #[test]
    fn dense_random_matches_pair_scan() {
        let m = gen::random_boolean(16, 0.9, 5).unwrap();
        let mut exists = false;
        for a in 0..16 {
            for b in a + 1..16 {
                let common = (0..16)
                    .filter(|&j| m.get(a, j) == 1.0 && m.get(b, j) == 1.0)
                    .count();
                exists |= common >= 4;
            }
        }
        let found = find_one_rectangle(&m, 2, 4);
        assert_eq!(found.is_some(), exists);
        if let Some((r, c)) = found {
            assert!(r.iter().all(|&i| c.iter().all(|&j| m.get(i, j) == 1.0)));
        }
    }

    #[test]
    fn partitions_verify_and_stay_under_bound() {
        let j = Matrix::ones(Field::Real, 16, 16);
        assert_eq!(sparse_boolean_to_blocky(&j).unwrap().len(), 1);
        let id = gen::identity(9).unwrap();
        let d = sparse_boolean_to_blocky(&id).unwrap();
        assert!(verify_decomposition(&d, &id, 0.0).ok);
        assert!(d.len() <= 9);
        for seed in 0..10 {
            let m = gen::random_boolean(32, 0.2, seed).unwrap();
            let d = sparse_boolean_to_blocky(&m).unwrap();
            assert!(verify_decomposition(&d, &m, 0.0).ok);
            assert!((d.len() as f64) <= 2.0 * (m.sparsity() as f64).sqrt());
            let cells: usize = d
                .blocky_terms()
                .unwrap()
                .iter()
                .map(|t| t.pattern.support_size())
                .sum();
            assert_eq!(cells, m.sparsity(), "terms must partition the ones");
        }
    }

    #[test]
    fn pipeline_alone_is_a_partition() {
        for seed in 0..10 {
            let m = gen::random_boolean_rect(24, 40, 0.35, seed).unwrap();
            let (blocks, _) = pipeline(&m, m.sparsity());
            let mut seen = vec![0u32; 24 * 40];
            for term in &blocks {
                BlockyPattern::new(24, 40, term.clone()).unwrap();
                for b in term {
                    for &i in &b.rows {
                        for &j in &b.cols {
                            seen[i * 40 + j] += 1;
                        }
                    }
                }
            }
            for i in 0..24 {
                for j in 0..40 {
                    assert_eq!(seen[i * 40 + j] as f64, m.get(i, j));
                }
            }
        }
    }

    #[test]
    fn rejects_non_boolean() {
        let m = gen::diagonal(&[1.0, 2.0]).unwrap();
        assert!(sparse_boolean_to_blocky(&m).is_err());
    }
}

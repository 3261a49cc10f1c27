//! Independent reference computations and generators shared by the
//! integration tests. Nothing here calls into the oracle module.

#![allow(dead_code)]

use std::collections::VecDeque;

use blocky_core::decomp::ReluGate;
use blocky_core::{Block, BlockyPattern, Field, Matrix, SpikyTerm};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_7e57)
}

pub fn mask_to_matrix(mask: u32, nrows: usize, ncols: usize, field: Field) -> Matrix {
    Matrix::from_fn(field, nrows, ncols, |i, j| {
        (mask >> (i * ncols + j) & 1) as f64
    })
}

fn row_bits(mask: u32, i: usize, ncols: usize) -> u32 {
    (mask >> (i * ncols)) & ((1 << ncols) - 1)
}

/// A 0/1 matrix is blocky iff any two nonzero rows have equal or disjoint
/// supports.
pub fn mask_is_blocky(mask: u32, nrows: usize, ncols: usize) -> bool {
    let rows: Vec<u32> = (0..nrows)
        .map(|i| row_bits(mask, i, ncols))
        .filter(|&r| r != 0)
        .collect();
    rows.iter()
        .all(|&a| rows.iter().all(|&b| a == b || a & b == 0))
}

/// GF(2) spiky rank of every `nrows x ncols` matrix, by breadth-first search
/// from zero with nonzero blocky matrices as moves. Over GF(2) a spiky
/// matrix is itself blocky, so the distance is the spiky rank.
pub fn gf2_spr_bfs(nrows: usize, ncols: usize) -> Vec<u8> {
    let cells = nrows * ncols;
    let moves: Vec<u32> = (1u32..1 << cells)
        .filter(|&m| mask_is_blocky(m, nrows, ncols))
        .collect();
    let mut dist = vec![u8::MAX; 1 << cells];
    dist[0] = 0;
    let mut q = VecDeque::from([0u32]);
    while let Some(x) = q.pop_front() {
        for &m in &moves {
            let y = (x ^ m) as usize;
            if dist[y] == u8::MAX {
                dist[y] = dist[x as usize] + 1;
                q.push_back(y as u32);
            }
        }
    }
    dist
}

pub fn gf2_rank_mask(mask: u32, nrows: usize, ncols: usize) -> usize {
    let mut rows: Vec<u32> = (0..nrows).map(|i| row_bits(mask, i, ncols)).collect();
    let mut rank = 0;
    for bit in 0..ncols {
        if let Some(p) = (rank..nrows).find(|&i| rows[i] >> bit & 1 == 1) {
            rows.swap(rank, p);
            for i in 0..nrows {
                if i != rank && rows[i] >> bit & 1 == 1 {
                    rows[i] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Rigidity by enumerating every matrix of rank at most `r` and taking the
/// nearest one in Hamming distance.
pub fn rigidity_by_low_rank(mask: u32, nrows: usize, ncols: usize, r: usize) -> usize {
    (0u32..1 << (nrows * ncols))
        .filter(|&l| gf2_rank_mask(l, nrows, ncols) <= r)
        .map(|l| (mask ^ l).count_ones() as usize)
        .min()
        .unwrap()
}

/// Random blocky pattern with at most `max_blocks` blocks.
pub fn random_pattern(
    g: &mut impl Rng,
    nrows: usize,
    ncols: usize,
    max_blocks: usize,
) -> BlockyPattern {
    let mut rows: Vec<usize> = (0..nrows).collect();
    let mut cols: Vec<usize> = (0..ncols).collect();
    rows.shuffle(g);
    cols.shuffle(g);
    let count = g.gen_range(1..=max_blocks.min(nrows).min(ncols).max(1));
    let mut blocks = Vec::new();
    let (mut ri, mut ci) = (0, 0);
    for _ in 0..count {
        if ri == nrows || ci == ncols {
            break;
        }
        let a = g.gen_range(1..=(nrows - ri).min(4));
        let b = g.gen_range(1..=(ncols - ci).min(4));
        blocks.push(Block::new(
            rows[ri..ri + a].to_vec(),
            cols[ci..ci + b].to_vec(),
        ));
        ri += a;
        ci += b;
    }
    BlockyPattern::new(nrows, ncols, blocks).unwrap()
}

/// Random blocky pattern on `n x n` whose every block has disjoint row and
/// column sets, so the support misses the diagonal.
pub fn random_off_diagonal_pattern(g: &mut impl Rng, n: usize) -> BlockyPattern {
    let mut free_rows: Vec<usize> = (0..n).collect();
    let mut free_cols: Vec<usize> = (0..n).collect();
    free_rows.shuffle(g);
    free_cols.shuffle(g);
    let mut blocks = Vec::new();
    for _ in 0..g.gen_range(0..=6) {
        if free_rows.is_empty() {
            break;
        }
        let a = g.gen_range(1..=free_rows.len().min(n / 2 + 1));
        let rows: Vec<usize> = free_rows.drain(..a).collect();
        let avail: Vec<usize> = free_cols
            .iter()
            .copied()
            .filter(|c| !rows.contains(c))
            .collect();
        if avail.is_empty() {
            break;
        }
        let b = g.gen_range(1..=avail.len().min(n / 2 + 1));
        let cols: Vec<usize> = avail[..b].to_vec();
        free_cols.retain(|c| !cols.contains(c));
        blocks.push(Block::new(rows, cols));
    }
    BlockyPattern::new(n, n, blocks).unwrap()
}

pub fn random_gate(g: &mut impl Rng, n: usize) -> ReluGate {
    let w1 = (0..n)
        .map(|_| g.gen_range(-4i32..=4) as f64 / 2.0)
        .collect();
    let w2 = (0..n)
        .map(|_| g.gen_range(-4i32..=4) as f64 / 2.0)
        .collect();
    let alpha = g.gen_range(-6i32..=6) as f64 / 4.0;
    ReluGate::new(w1, w2, alpha).unwrap()
}

/// Boolean matrix with a known spiky decomposition of one or two terms.
///
/// The first term is a random blocky pattern carried as `u = 2`, `v = 1/2`.
/// The second reuses its row sets, switches rows on or off through `u`, and
/// through `v` subtracts a subset of each block's columns while adding fresh
/// columns outside the first pattern. Every entry of the sum is 0 or 1.
pub fn known_spiky_boolean(
    g: &mut impl Rng,
    n: usize,
    two_terms: bool,
) -> (Matrix, Vec<SpikyTerm>) {
    let p1 = random_pattern(g, n, n, 3);
    let mut u1 = vec![0.0; n];
    let mut v1 = vec![0.0; n];
    for b in p1.blocks() {
        b.rows.iter().for_each(|&i| u1[i] = 2.0);
        b.cols.iter().for_each(|&j| v1[j] = 0.5);
    }
    let mut terms = vec![SpikyTerm::new(p1.clone(), u1, v1).unwrap()];
    if two_terms {
        let mut pool: Vec<usize> = (0..n).filter(|&j| p1.block_of_col(j).is_none()).collect();
        pool.shuffle(g);
        let mut u2 = vec![0.0; n];
        let mut v2 = vec![0.0; n];
        let mut blocks = Vec::new();
        for b in p1.blocks() {
            for &i in &b.rows {
                u2[i] = g.gen_range(0..2) as f64;
            }
            let mut cols = b.cols.clone();
            for &j in &b.cols {
                v2[j] = if g.gen_bool(0.5) { -1.0 } else { 0.0 };
            }
            let extra = g.gen_range(0..=pool.len().min(2));
            for j in pool.drain(..extra) {
                v2[j] = 1.0;
                cols.push(j);
            }
            blocks.push(Block::new(b.rows.clone(), cols));
        }
        let p2 = BlockyPattern::new(n, n, blocks).unwrap();
        terms.push(SpikyTerm::new(p2, u2, v2).unwrap());
    }
    let m = Matrix::from_fn(Field::Real, n, n, |i, j| {
        terms.iter().map(|t| t.value(i, j)).sum()
    });
    (m, terms)
}

//! Exhaustive ground truth at tiny sizes.
//!
//! Cells of a matrix with at most 4 rows and 4 columns are packed into a
//! `u16` mask, bit `i * ncols + j` for cell `(i, j)`.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rayon::prelude::*;

use crate::decomposition::{is_spiky, verify_decomposition, BlockyTerm, Decomposition, SpikyTerm};
use crate::error::{Error, Result};
use crate::gen::rng;
use crate::matrix::{gf2_rank, Field, Matrix};
use crate::pattern::{Block, BlockyPattern};

pub const MAX_ORACLE_DIM: usize = 4;
pub const MAX_ORACLE_RANK: usize = 4;
pub const MAX_VC_ROWS: usize = 16;
pub const MAX_HEURISTIC_DIM: usize = 6;
pub const MAX_HEURISTIC_RANK: usize = 3;

/// Least-squares solves allowed in one real blocky rank search.
const REAL_SEARCH_BUDGET: usize = 50_000_000;
/// Pattern tuples tried by the spiky heuristic.
const HEURISTIC_TUPLE_BUDGET: usize = 20_000;
const ALS_SWEEPS: usize = 300;

fn check_dims(nrows: usize, ncols: usize, cap: usize) -> Result<()> {
    if nrows > cap || ncols > cap {
        return Err(Error::CapExceeded(format!(
            "{nrows}x{ncols} exceeds the {cap}x{cap} oracle limit"
        )));
    }
    Ok(())
}

fn patterns_rec(
    nrows: usize,
    ncols: usize,
    row: usize,
    used_rows: u8,
    used_cols: u8,
    blocks: &mut Vec<(u8, u8)>,
    out: &mut Vec<Vec<(u8, u8)>>,
) {
    let mut r = row;
    while r < nrows && used_rows >> r & 1 == 1 {
        r += 1;
    }
    if r == nrows {
        if !blocks.is_empty() {
            out.push(blocks.clone());
        }
        return;
    }
    patterns_rec(
        nrows,
        ncols,
        r + 1,
        used_rows | 1 << r,
        used_cols,
        blocks,
        out,
    );
    let free_rows = !used_rows & ((1u8 << nrows) - 1) & !((2u8 << r) - 1);
    let free_cols = !used_cols & ((1u8 << ncols) - 1);
    let mut extra = free_rows;
    loop {
        let rows = extra | 1 << r;
        let mut cols = free_cols;
        while cols != 0 {
            blocks.push((rows, cols));
            patterns_rec(
                nrows,
                ncols,
                r + 1,
                used_rows | rows,
                used_cols | cols,
                blocks,
                out,
            );
            blocks.pop();
            cols = (cols - 1) & free_cols;
        }
        if extra == 0 {
            break;
        }
        extra = (extra - 1) & free_rows;
    }
}

fn raw_patterns(nrows: usize, ncols: usize) -> Vec<Vec<(u8, u8)>> {
    let mut out = Vec::new();
    patterns_rec(nrows, ncols, 0, 0, 0, &mut Vec::new(), &mut out);
    out
}

fn bits_of(x: u8) -> Vec<usize> {
    (0..8).filter(|b| x >> b & 1 == 1).collect()
}

fn to_pattern(nrows: usize, ncols: usize, blocks: &[(u8, u8)]) -> BlockyPattern {
    let mut bs: Vec<Block> = blocks
        .iter()
        .map(|&(r, c)| Block::new(bits_of(r), bits_of(c)))
        .collect();
    bs.sort_by_key(|b| b.rows[0]);
    BlockyPattern::new(nrows, ncols, bs).expect("enumerated patterns are blocky")
}

fn cell_mask(ncols: usize, blocks: &[(u8, u8)]) -> u16 {
    let mut m = 0u16;
    for &(r, c) in blocks {
        for i in bits_of(r) {
            for j in bits_of(c) {
                m |= 1 << (i * ncols + j);
            }
        }
    }
    m
}

fn mask_to_pattern(nrows: usize, ncols: usize, mask: u16) -> BlockyPattern {
    let m = Matrix::from_fn(Field::Real, nrows, ncols, |i, j| {
        (mask >> (i * ncols + j) & 1) as f64
    });
    crate::pattern::is_blocky(&m).expect("mask comes from a blocky pattern")
}

/// Every nonzero blocky pattern on `nrows × ncols`, once each, with blocks
/// listed by least row index.
pub fn enumerate_blocky_patterns(nrows: usize, ncols: usize) -> Result<Vec<BlockyPattern>> {
    check_dims(nrows, ncols, MAX_ORACLE_DIM)?;
    Ok(raw_patterns(nrows, ncols)
        .iter()
        .map(|b| to_pattern(nrows, ncols, b))
        .collect())
}

/// Cell masks of all nonzero blocky patterns.
pub fn blocky_pattern_masks(nrows: usize, ncols: usize) -> Result<Vec<u16>> {
    check_dims(nrows, ncols, MAX_ORACLE_DIM)?;
    Ok(raw_patterns(nrows, ncols)
        .iter()
        .map(|b| cell_mask(ncols, b))
        .collect())
}

/// Solves the Gram system for coefficients of `masks` fitting `target`; `None`
/// if the patterns are linearly dependent.
fn fit(masks: &[u16], target: &[f64]) -> Option<Vec<f64>> {
    let r = masks.len();
    let mut a = vec![vec![0.0; r + 1]; r];
    for x in 0..r {
        for y in 0..r {
            a[x][y] = (masks[x] & masks[y]).count_ones() as f64;
        }
        a[x][r] = (0..16)
            .filter(|c| masks[x] >> c & 1 == 1)
            .map(|c| target[c])
            .sum();
    }
    for c in 0..r {
        let p = (c..r).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        for row in 0..r {
            if row != c {
                let f = a[row][c] / a[c][c];
                for col in c..=r {
                    a[row][col] -= f * a[c][col];
                }
            }
        }
    }
    Some((0..r).map(|x| a[x][r] / a[x][x]).collect())
}

fn residual(masks: &[u16], coeffs: &[f64], target: &[f64], cells: usize) -> f64 {
    (0..cells)
        .map(|c| {
            let v: f64 = masks
                .iter()
                .zip(coeffs)
                .filter(|(m, _)| *m >> c & 1 == 1)
                .map(|(_, a)| a)
                .sum();
            (v - target[c]).abs()
        })
        .fold(0.0, f64::max)
}

/// Smallest real blocky decomposition with at most `r_max` terms.
pub fn blocky_rank_real_witness(m: &Matrix, r_max: usize) -> Result<Option<Decomposition>> {
    let (nrows, ncols) = m.shape();
    check_dims(nrows, ncols, MAX_ORACLE_DIM)?;
    if r_max > MAX_ORACLE_RANK {
        return Err(Error::CapExceeded(format!(
            "r_max {r_max} exceeds {MAX_ORACLE_RANK}"
        )));
    }
    if m.field() != Field::Real {
        return Err(Error::FieldMismatch {
            expected: Field::Real,
            got: m.field(),
        });
    }
    let target: Vec<f64> = m.data().to_vec();
    let cells = nrows * ncols;
    let support: u16 = (0..cells)
        .filter(|&c| target[c] != 0.0)
        .fold(0, |s, c| s | 1 << c);
    let masks = blocky_pattern_masks(nrows, ncols)?;
    let build = |found: Vec<(u16, f64)>| {
        let terms = found
            .into_iter()
            .map(|(mask, a)| BlockyTerm::new(mask_to_pattern(nrows, ncols, mask), a))
            .collect();
        Decomposition::blocky_sum(Field::Real, nrows, ncols, terms)
            .expect("oracle terms match shape")
            .with_target(m)
    };
    if support == 0 {
        return Ok(Some(build(Vec::new())));
    }
    let spent = AtomicUsize::new(0);
    for r in 1..=r_max {
        let found = (0..masks.len()).into_par_iter().find_map_first(|first| {
            let mut chosen = vec![first];
            search_real(&masks, &target, support, cells, r, &mut chosen, &spent)
        });
        if let Some(found) = found {
            return Ok(Some(build(found)));
        }
        if spent.load(Ordering::Relaxed) > REAL_SEARCH_BUDGET {
            return Err(Error::BudgetExhausted(format!(
                "real blocky rank search passed {REAL_SEARCH_BUDGET} solves at r = {r}"
            )));
        }
    }
    Ok(None)
}

fn search_real(
    masks: &[u16],
    target: &[f64],
    support: u16,
    cells: usize,
    r: usize,
    chosen: &mut Vec<usize>,
    spent: &AtomicUsize,
) -> Option<Vec<(u16, f64)>> {
    if spent.load(Ordering::Relaxed) > REAL_SEARCH_BUDGET {
        return None;
    }
    let union = chosen.iter().fold(0u16, |u, &i| u | masks[i]);
    if chosen.len() == r {
        if union & support != support {
            return None;
        }
        spent.fetch_add(1, Ordering::Relaxed);
        let ms: Vec<u16> = chosen.iter().map(|&i| masks[i]).collect();
        let coeffs = fit(&ms, target)?;
        if coeffs.iter().any(|&a| a.abs() < 1e-12) {
            return None;
        }
        return (residual(&ms, &coeffs, target, cells) < 1e-9)
            .then(|| ms.into_iter().zip(coeffs).collect());
    }
    let last = *chosen.last().unwrap();
    let required = if chosen.len() + 1 == r {
        support & !union
    } else {
        0
    };
    for next in last + 1..masks.len() {
        if masks[next] & required != required {
            continue;
        }
        chosen.push(next);
        let found = search_real(masks, target, support, cells, r, chosen, spent);
        chosen.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Least `r ≤ r_max` with `M = Σ αᵢ Bᵢ` over `r` blocky matrices, by
/// exhaustive search over pattern tuples with least-squares coefficients.
pub fn exact_blocky_rank_real(m: &Matrix, r_max: usize) -> Result<Option<usize>> {
    Ok(blocky_rank_real_witness(m, r_max)?.map(|d| d.len()))
}

fn gf2_mask(m: &Matrix) -> Result<u16> {
    let (nrows, ncols) = m.shape();
    check_dims(nrows, ncols, MAX_ORACLE_DIM)?;
    if m.field() != Field::Gf2 {
        return Err(Error::FieldMismatch {
            expected: Field::Gf2,
            got: m.field(),
        });
    }
    Ok((0..nrows * ncols)
        .filter(|&c| m.data()[c] == 1.0)
        .fold(0, |s, c| s | 1 << c))
}

/// XOR decomposition of `m` into the fewest blocky patterns, up to `r_max`.
pub fn spiky_rank_gf2_witness(m: &Matrix, r_max: usize) -> Result<Option<Decomposition>> {
    let target = gf2_mask(m)?;
    if r_max > MAX_ORACLE_RANK {
        return Err(Error::CapExceeded(format!(
            "r_max {r_max} exceeds {MAX_ORACLE_RANK}"
        )));
    }
    let (nrows, ncols) = m.shape();
    let masks = blocky_pattern_masks(nrows, ncols)?;
    let set: HashSet<u16> = masks.iter().copied().collect();
    for r in 0..=r_max {
        let mut chosen = Vec::with_capacity(r);
        if xor_search(&masks, &set, target, r, &mut chosen) {
            let terms = chosen
                .into_iter()
                .map(|mask| BlockyTerm::new(mask_to_pattern(nrows, ncols, mask), 1.0))
                .collect();
            return Ok(Some(
                Decomposition::blocky_sum(Field::Gf2, nrows, ncols, terms)?.with_target(m),
            ));
        }
    }
    Ok(None)
}

/// Any XOR of `depth` patterns equal to `residual` contains a pattern covering
/// the lowest set cell, so only those patterns are branched on.
fn xor_search(
    masks: &[u16],
    set: &HashSet<u16>,
    residual: u16,
    depth: usize,
    chosen: &mut Vec<u16>,
) -> bool {
    if residual == 0 {
        return depth == 0;
    }
    match depth {
        0 => false,
        1 => {
            if set.contains(&residual) {
                chosen.push(residual);
                true
            } else {
                false
            }
        }
        _ => {
            let low = residual & residual.wrapping_neg();
            for &p in masks.iter().filter(|&&p| p & low != 0) {
                chosen.push(p);
                if xor_search(masks, set, residual ^ p, depth - 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
            false
        }
    }
}

/// Spiky rank over GF(2), where spiky and blocky coincide: the least number
/// of blocky patterns whose XOR is `m`.
pub fn exact_spiky_rank_gf2(m: &Matrix, r_max: usize) -> Result<Option<usize>> {
    Ok(spiky_rank_gf2_witness(m, r_max)?.map(|d| d.len()))
}

/// Least number of entries to flip so that the GF(2) rank drops to `r`.
pub fn exact_rigidity_gf2(m: &Matrix, r: usize) -> Result<usize> {
    let target = gf2_mask(m)?;
    let (nrows, ncols) = m.shape();
    let cells = nrows * ncols;
    let rank_of = |mask: u16| {
        let rows = (0..nrows)
            .map(|i| vec![((mask >> (i * ncols)) as u64) & ((1 << ncols) - 1)])
            .collect();
        gf2_rank(rows)
    };
    let best = (0u32..1 << cells)
        .filter(|&flip| rank_of(target ^ flip as u16) <= r)
        .map(|flip| flip.count_ones() as usize)
        .min()
        .expect("flipping every one reaches rank 0");
    Ok(best)
}

/// Largest number of rows shattered by the columns of a Boolean matrix.
pub fn exact_vc(m: &Matrix) -> Result<usize> {
    let (nrows, ncols) = m.shape();
    if nrows > MAX_VC_ROWS {
        return Err(Error::CapExceeded(format!(
            "{nrows} rows exceed {MAX_VC_ROWS}"
        )));
    }
    if !m.is_boolean() {
        return Err(Error::Precondition(
            "VC dimension needs a Boolean matrix".into(),
        ));
    }
    let cols: Vec<u32> = (0..ncols)
        .map(|j| {
            (0..nrows)
                .filter(|&i| m.get(i, j) == 1.0)
                .fold(0, |s, i| s | 1 << i)
        })
        .collect();
    let mut best = 0;
    let mut seen = HashSet::new();
    for subset in 1u32..1 << nrows {
        let k = subset.count_ones() as usize;
        if k <= best || (1usize << k) > ncols {
            continue;
        }
        seen.clear();
        seen.extend(cols.iter().map(|c| c & subset));
        if seen.len() == 1 << k {
            best = k;
        }
    }
    Ok(best)
}

fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, n, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Blocky patterns whose row and column sets both partition the index sets,
/// ordered by block count. Every spiky matrix is a spiky term on one of them
/// (extra rows and columns get zero factors).
pub fn maximal_patterns(nrows: usize, ncols: usize) -> Vec<BlockyPattern> {
    let rows = set_partitions(nrows);
    let cols = set_partitions(ncols);
    let mut out = Vec::new();
    for b in 1..=nrows.min(ncols) {
        let perms = permutations(b);
        for rp in rows.iter().filter(|p| p.len() == b) {
            for cp in cols.iter().filter(|p| p.len() == b) {
                for perm in &perms {
                    let blocks = (0..b)
                        .map(|x| Block::new(rp[x].clone(), cp[perm[x]].clone()))
                        .collect();
                    out.push(
                        BlockyPattern::new(nrows, ncols, blocks).expect("partitions are disjoint"),
                    );
                }
            }
        }
    }
    out
}

/// Small linear least-squares solve of `a x = b` (columns of `a` are the
/// unknowns), with a tiny ridge to keep rank-deficient systems solvable.
fn lstsq(a: &[Vec<f64>], b: &[f64], r: usize) -> Vec<f64> {
    let mut g = vec![vec![0.0; r + 1]; r];
    for x in 0..r {
        for y in 0..r {
            g[x][y] = a.iter().map(|row| row[x] * row[y]).sum();
        }
        g[x][x] += 1e-14;
        g[x][r] = a.iter().zip(b).map(|(row, &t)| row[x] * t).sum();
    }
    for c in 0..r {
        let p = (c..r)
            .max_by(|&x, &y| g[x][c].abs().total_cmp(&g[y][c].abs()))
            .unwrap();
        g.swap(c, p);
        if g[c][c].abs() < 1e-300 {
            continue;
        }
        for row in 0..r {
            if row != c {
                let f = g[row][c] / g[c][c];
                for col in c..=r {
                    g[row][col] -= f * g[c][col];
                }
            }
        }
    }
    (0..r)
        .map(|x| {
            if g[x][x].abs() < 1e-300 {
                0.0
            } else {
                g[x][r] / g[x][x]
            }
        })
        .collect()
}

fn als(m: &Matrix, pats: &[&BlockyPattern], seed: u64) -> Vec<SpikyTerm> {
    let (nrows, ncols) = m.shape();
    let r = pats.len();
    let mut rg = rng(seed);
    let mut u: Vec<Vec<f64>> = (0..r)
        .map(|_| (0..nrows).map(|_| rg.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..r)
        .map(|_| (0..ncols).map(|_| rg.gen_range(-1.0..1.0)).collect())
        .collect();
    for _ in 0..ALS_SWEEPS {
        for i in 0..nrows {
            let a: Vec<Vec<f64>> = (0..ncols)
                .map(|j| {
                    (0..r)
                        .map(|t| if pats[t].covers(i, j) { v[t][j] } else { 0.0 })
                        .collect()
                })
                .collect();
            let b: Vec<f64> = (0..ncols).map(|j| m.get(i, j)).collect();
            let x = lstsq(&a, &b, r);
            for t in 0..r {
                u[t][i] = x[t];
            }
        }
        for j in 0..ncols {
            let a: Vec<Vec<f64>> = (0..nrows)
                .map(|i| {
                    (0..r)
                        .map(|t| if pats[t].covers(i, j) { u[t][i] } else { 0.0 })
                        .collect()
                })
                .collect();
            let b: Vec<f64> = (0..nrows).map(|i| m.get(i, j)).collect();
            let x = lstsq(&a, &b, r);
            for t in 0..r {
                v[t][j] = x[t];
            }
        }
        let worst = (0..nrows)
            .flat_map(|i| (0..ncols).map(move |j| (i, j)))
            .map(|(i, j)| {
                let e: f64 = (0..r)
                    .filter(|&t| pats[t].covers(i, j))
                    .map(|t| u[t][i] * v[t][j])
                    .sum();
                (e - m.get(i, j)).abs()
            })
            .fold(0.0, f64::max);
        if worst < 1e-13 {
            break;
        }
    }
    (0..r)
        .map(|t| {
            SpikyTerm::new(pats[t].clone(), u[t].clone(), v[t].clone()).expect("lengths match")
        })
        .collect()
}

/// Searches for a spiky decomposition with `r` terms by alternating least
/// squares over tuples of maximal patterns, with seeded restarts.
///
/// One-sided: a returned decomposition is verified, but `None` proves
/// nothing about the spiky rank.
pub fn heuristic_spiky_upper_real(
    m: &Matrix,
    r: usize,
    restarts: usize,
    seed: u64,
) -> Result<Option<Decomposition>> {
    let (nrows, ncols) = m.shape();
    check_dims(nrows, ncols, MAX_HEURISTIC_DIM)?;
    if r > MAX_HEURISTIC_RANK {
        return Err(Error::CapExceeded(format!(
            "r {r} exceeds {MAX_HEURISTIC_RANK}"
        )));
    }
    if m.field() != Field::Real {
        return Err(Error::FieldMismatch {
            expected: Field::Real,
            got: m.field(),
        });
    }
    if m.is_zero() {
        return Ok(Some(Decomposition::spiky_sum(
            Field::Real,
            nrows,
            ncols,
            Vec::new(),
        )?));
    }
    if r == 0 {
        return Ok(None);
    }
    if let Some(t) = is_spiky(m) {
        return Ok(Some(
            Decomposition::spiky_sum(Field::Real, nrows, ncols, vec![t])?.with_target(m),
        ));
    }
    if r == 1 {
        return Ok(None);
    }
    let pats = maximal_patterns(nrows, ncols);
    let mut idx = vec![0usize; r];
    let mut tried = 0usize;
    loop {
        let tuple: Vec<&BlockyPattern> = idx.iter().map(|&i| &pats[i]).collect();
        for restart in 0..restarts.max(1) {
            let terms = als(
                m,
                &tuple,
                seed.wrapping_add(restart as u64)
                    .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    ^ tried as u64,
            );
            let d = Decomposition::spiky_sum(Field::Real, nrows, ncols, terms)?.with_target(m);
            if verify_decomposition(&d, m, 1e-9).ok {
                return Ok(Some(d.with_metadata("algo", "als-heuristic")));
            }
        }
        tried += 1;
        if tried >= HEURISTIC_TUPLE_BUDGET {
            return Ok(None);
        }
        let mut pos = r;
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            if idx[pos] + 1 < pats.len() {
                idx[pos] += 1;
                for q in pos + 1..r {
                    idx[q] = idx[pos];
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::pattern::is_blocky;

    fn brute_force_count(nrows: usize, ncols: usize) -> usize {
        (1u32..1 << (nrows * ncols))
            .filter(|mask| {
                let m = Matrix::from_fn(Field::Real, nrows, ncols, |i, j| {
                    (mask >> (i * ncols + j) & 1) as f64
                });
                is_blocky(&m).is_some()
            })
            .count()
    }

    #[test]
    fn pattern_counts_match_support_filter() {
        assert_eq!(enumerate_blocky_patterns(1, 1).unwrap().len(), 1);
        for (r, c) in [(2, 2), (3, 3), (2, 3), (3, 4)] {
            assert_eq!(
                enumerate_blocky_patterns(r, c).unwrap().len(),
                brute_force_count(r, c)
            );
        }
        let masks = blocky_pattern_masks(4, 4).unwrap();
        let distinct: HashSet<u16> = masks.iter().copied().collect();
        assert_eq!(distinct.len(), masks.len());
        assert!(enumerate_blocky_patterns(5, 1).is_err());
    }

    #[test]
    fn real_blocky_rank_fixed_points() {
        assert_eq!(
            exact_blocky_rank_real(&gen::identity(3).unwrap(), 4).unwrap(),
            Some(1)
        );
        assert_eq!(
            exact_blocky_rank_real(&Matrix::ones(Field::Real, 4, 4), 4).unwrap(),
            Some(1)
        );
        // Binary digits of the diagonal: 2*diag(0,1,1) + diag(1,0,1).
        let d3 = gen::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(exact_blocky_rank_real(&d3, 4).unwrap(), Some(2));
        assert_eq!(exact_blocky_rank_real(&d3, 1).unwrap(), None);
        let w = blocky_rank_real_witness(&d3, 4).unwrap().unwrap();
        assert!(verify_decomposition(&w, &d3, 1e-9).ok);
        let d4 = gen::diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(exact_blocky_rank_real(&d4, 4).unwrap(), Some(3));
    }

    #[test]
    fn gf2_rank_small_cases() {
        let i4 = gen::identity(4).unwrap().with_field(Field::Gf2).unwrap();
        assert_eq!(exact_spiky_rank_gf2(&i4, 4).unwrap(), Some(1));
        let l = Matrix::from_rows(Field::Gf2, &[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(exact_spiky_rank_gf2(&l, 4).unwrap(), Some(2));
        assert!(exact_spiky_rank_gf2(&gen::identity(2).unwrap(), 2).is_err());
    }

    #[test]
    fn rigidity_of_identity() {
        let i4 = gen::identity(4).unwrap().with_field(Field::Gf2).unwrap();
        assert_eq!(exact_rigidity_gf2(&i4, 0).unwrap(), 4);
        assert_eq!(exact_rigidity_gf2(&i4, 2).unwrap(), 2);
        assert_eq!(exact_rigidity_gf2(&i4, 4).unwrap(), 0);
    }

    #[test]
    fn vc_dimension() {
        assert_eq!(exact_vc(&Matrix::ones(Field::Real, 4, 4)).unwrap(), 0);
        assert_eq!(exact_vc(&gen::identity(4).unwrap()).unwrap(), 1);
        assert_eq!(exact_vc(&gen::ip(3).unwrap()).unwrap(), 3);
    }

    #[test]
    fn heuristic_cases() {
        let d3 = gen::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let found = heuristic_spiky_upper_real(&d3, 1, 1, 0).unwrap().unwrap();
        assert_eq!(found.len(), 1);
        let twisted = Matrix::from_rows(Field::Real, &[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(heuristic_spiky_upper_real(&twisted, 1, 3, 0)
            .unwrap()
            .is_none());
        let a = [1.0, -2.0, 0.5, 3.0];
        let b = [2.0, 1.0, -1.0, 0.25];
        let c = [0.5, 1.5, 2.0, -1.0];
        let e = [1.0, 0.0, 2.0, 1.0];
        let m = Matrix::from_fn(Field::Real, 4, 4, |i, j| a[i] * b[j] + c[i] * e[j]);
        let d = heuristic_spiky_upper_real(&m, 2, 3, 1).unwrap().unwrap();
        assert!(verify_decomposition(&d, &m, 1e-9).ok);
    }

    #[test]
    fn maximal_pattern_count() {
        // sum over b of S(3,b)^2 * b! = 1 + 9*2 + 1*6
        assert_eq!(maximal_patterns(3, 3).len(), 25);
    }
}

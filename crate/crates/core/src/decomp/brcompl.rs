use std::collections::BTreeMap;

use super::single_block;
use crate::decomposition::{verify_decomposition, BlockyTerm, Decomposition, Term};
use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix};
use crate::pattern::{Block, BlockyPattern};

pub const MAX_COMPLEMENT_RANK: usize = 4;
pub const MAX_COMPLEMENT_COVERS: usize = 4;
pub const MAX_SPIKY_TERMS: usize = 4;

const TOL: f64 = 1e-9;

/// `T_0 = 2^r`, `T_t = r·t·T_{t−1} + 2^r`.
pub fn brcompl_cap(r: usize, t: usize) -> u64 {
    let base = 1u64 << r;
    (1..=t as u64).fold(base, |acc, i| r as u64 * i * acc + base)
}

/// Largest blocky term count [`spiky_to_blocky`] can emit for `k` spiky terms:
/// the sum over nonzero type vectors `v` of `T_{k−|v|}(|v|)·2^(k−|v|)`.
pub fn spiky_to_blocky_cap(k: usize) -> u64 {
    (1u32..1 << k)
        .map(|v| {
            let r = v.count_ones() as usize;
            brcompl_cap(r, k - r) << (k - r)
        })
        .sum()
}

/// Column indices (from `cols`) forming a basis of the column space of
/// `l[rows × cols]`, by elimination in column order.
fn column_basis(l: &Matrix, rows: &[usize], cols: &[usize]) -> Vec<usize> {
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| l.get(i, j)).collect())
        .collect();
    let scale = a.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut used = vec![false; rows.len()];
    let mut basis = Vec::new();
    for c in 0..cols.len() {
        let pivot = (0..rows.len())
            .filter(|&r| !used[r])
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()));
        let Some(p) = pivot else { break };
        if a[p][c].abs() <= TOL * scale {
            continue;
        }
        used[p] = true;
        basis.push(cols[c]);
        for r in 0..rows.len() {
            if r != p && a[r][c] != 0.0 {
                let f = a[r][c] / a[p][c];
                for cc in c..cols.len() {
                    a[r][cc] -= f * a[p][cc];
                }
            }
        }
    }
    basis
}

fn is_bit(x: f64) -> bool {
    x.abs() <= TOL || (x - 1.0).abs() <= TOL
}

/// Blocky terms (all with coefficient 1) whose sum agrees with `l` on every
/// entry not covered by any of `covers`. Entries under the covers are
/// unconstrained.
///
/// Rows are split by a column basis: a row whose basis entries are all
/// uncovered is determined by its 0/1 basis pattern, so such rows group into
/// at most `2^r` identical-row classes, one term each. A row with a covered
/// basis entry is classed by the first cover block hitting its basis; inside
/// the class that block's columns are unconstrained and the cover no longer
/// touches the remaining columns, so the class recurses with one cover fewer.
pub fn brcompl(l: &Matrix, covers: &[BlockyPattern]) -> Result<Vec<BlockyTerm>> {
    if l.field() != Field::Real {
        return Err(Error::FieldMismatch {
            expected: Field::Real,
            got: l.field(),
        });
    }
    let (nrows, ncols) = l.shape();
    if covers.len() > MAX_COMPLEMENT_COVERS {
        return Err(Error::CapExceeded(format!(
            "{} covers exceed {MAX_COMPLEMENT_COVERS}",
            covers.len()
        )));
    }
    if covers
        .iter()
        .any(|c| (c.nrows(), c.ncols()) != (nrows, ncols))
    {
        return Err(Error::DimensionMismatch(
            "cover shape differs from the matrix".into(),
        ));
    }
    for i in 0..nrows {
        for j in 0..ncols {
            if !covers.iter().any(|c| c.covers(i, j)) && !is_bit(l.get(i, j)) {
                return Err(Error::Precondition(format!(
                    "entry ({i}, {j}) = {} outside the covers is not 0/1",
                    l.get(i, j)
                )));
            }
        }
    }
    let rows: Vec<usize> = (0..nrows).collect();
    let cols: Vec<usize> = (0..ncols).collect();
    let r = column_basis(l, &rows, &cols).len();
    if r > MAX_COMPLEMENT_RANK {
        return Err(Error::CapExceeded(format!(
            "rank {r} exceeds {MAX_COMPLEMENT_RANK}"
        )));
    }
    let active: Vec<usize> = (0..covers.len()).collect();
    let mut out = Vec::new();
    complement(l, covers, &rows, &cols, &active, &mut out);
    debug_assert!(out.len() as u64 <= brcompl_cap(r, covers.len()));
    Ok(out)
}

fn complement(
    l: &Matrix,
    covers: &[BlockyPattern],
    rows: &[usize],
    cols: &[usize],
    active: &[usize],
    out: &mut Vec<BlockyTerm>,
) {
    if rows.is_empty() || cols.is_empty() {
        return;
    }
    let (nrows, ncols) = l.shape();
    let basis = column_basis(l, rows, cols);
    let mut spoiled: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut types: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    'rows: for &i in rows {
        for &c in active {
            if let Some(bi) = covers[c].block_of_row(i) {
                if basis.iter().any(|&b| covers[c].covers(i, b)) {
                    spoiled.entry((c, bi)).or_default().push(i);
                    continue 'rows;
                }
            }
        }
        let key = basis
            .iter()
            .map(|&b| (l.get(i, b) - 1.0).abs() <= TOL)
            .collect();
        types.entry(key).or_default().push(i);
    }

    for (_, group) in types {
        let rep = group[0];
        let ones: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|&j| (l.get(rep, j) - 1.0).abs() <= TOL)
            .collect();
        if !ones.is_empty() {
            out.push(BlockyTerm::new(
                single_block(nrows, ncols, group, ones),
                1.0,
            ));
        }
    }
    for ((c, bi), class) in spoiled {
        let hit = &covers[c].blocks()[bi].cols;
        let rest: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|j| hit.binary_search(j).is_err())
            .collect();
        let fewer: Vec<usize> = active.iter().copied().filter(|&x| x != c).collect();
        complement(l, covers, &class, &rest, &fewer, out);
    }
}

/// Blocky decomposition of a Boolean matrix from a spiky one with `k ≤ 4`
/// terms.
///
/// Each entry gets a type vector recording which spiky terms are nonzero
/// there. For a type `v` with present set `P` and absent set `Z`, the entries
/// of that type inside one block of the intersection of the `P` supports are
/// where the rank-`|P|` sum of the `P` terms is 0/1 and no `Z` support reaches;
/// [`brcompl`] matches the sum there, and each of its terms is cut down to
/// those entries by inclusion–exclusion over the `Z` supports. Terms landing in
/// the same slot across different intersection blocks share a coefficient and
/// occupy disjoint rows and columns, so they are merged.
pub fn spiky_to_blocky(m: &Matrix, d: &Decomposition) -> Result<Decomposition> {
    if m.field() != Field::Real || d.field() != Field::Real {
        return Err(Error::FieldMismatch {
            expected: Field::Real,
            got: if m.field() != Field::Real {
                m.field()
            } else {
                d.field()
            },
        });
    }
    if !m.is_boolean() {
        return Err(Error::Precondition("target must be Boolean".into()));
    }
    let k = d.len();
    if k > MAX_SPIKY_TERMS {
        return Err(Error::CapExceeded(format!(
            "{k} spiky terms exceed {MAX_SPIKY_TERMS}"
        )));
    }
    let report = verify_decomposition(d, m, TOL);
    if !report.ok {
        return Err(Error::Certificate(format!(
            "spiky decomposition does not verify: {} failures, {} structural errors",
            report.failures.len(),
            report.structural_errors.len()
        )));
    }
    let (nrows, ncols) = m.shape();
    let supports: Vec<BlockyPattern> = d
        .terms()
        .iter()
        .map(|t| match t {
            Term::Blocky(b) if b.coeff == 0.0 => BlockyPattern::empty(nrows, ncols),
            Term::Blocky(b) => b.pattern.clone(),
            Term::Spiky(s) => s.support(),
        })
        .collect();
    let value = |t: usize, i: usize, j: usize| match &d.terms()[t] {
        Term::Blocky(b) => {
            if b.pattern.covers(i, j) {
                b.coeff
            } else {
                0.0
            }
        }
        Term::Spiky(s) => s.value(i, j),
    };

    let mut terms = Vec::new();
    for v in 1u32..1 << k {
        let present: Vec<usize> = (0..k).filter(|&i| v >> i & 1 == 1).collect();
        let absent: Vec<usize> = (0..k).filter(|&i| v >> i & 1 == 0).collect();
        let inter = present[1..]
            .iter()
            .fold(supports[present[0]].clone(), |acc, &i| {
                acc.intersect(&supports[i])
            });
        let mut slots: BTreeMap<(usize, u32), Vec<Block>> = BTreeMap::new();
        for block in inter.blocks() {
            let (br, bc) = (&block.rows, &block.cols);
            let local = Matrix::from_fn(Field::Real, br.len(), bc.len(), |a, b| {
                present.iter().map(|&t| value(t, br[a], bc[b])).sum()
            });
            let covers: Vec<BlockyPattern> = absent
                .iter()
                .map(|&z| supports[z].restrict(br, bc))
                .collect();
            for (s, term) in brcompl(&local, &covers)?.into_iter().enumerate() {
                for sub in 0u32..1 << absent.len() {
                    let mut p = term.pattern.clone();
                    for (bit, cover) in covers.iter().enumerate() {
                        if sub >> bit & 1 == 1 {
                            p = p.intersect(cover);
                        }
                    }
                    if !p.is_empty() {
                        let global = p.embed(br, bc, nrows, ncols);
                        slots
                            .entry((s, sub))
                            .or_default()
                            .extend(global.blocks().iter().cloned());
                    }
                }
            }
        }
        for ((_, sub), blocks) in slots {
            let sign = if sub.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let p = BlockyPattern::new(nrows, ncols, blocks)
                .expect("slot blocks live in disjoint intersection blocks");
            terms.push(BlockyTerm::new(p, sign));
        }
    }

    let cap = spiky_to_blocky_cap(k);
    let count = terms.len();
    Ok(Decomposition::blocky_sum(Field::Real, nrows, ncols, terms)?
        .with_metadata("algo", "spiky-blocky")
        .with_metadata("spikyTerms", k)
        .with_metadata("claimedBound", cap)
        .with_metadata("termCount", count)
        .with_target(m))
}

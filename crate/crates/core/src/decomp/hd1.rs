use crate::decomposition::{BlockyTerm, Decomposition, DecompositionKind, Term};
use crate::error::{Error, Result};
use crate::gen;
use crate::matrix::Field;
use crate::pattern::{Block, BlockyPattern};

/// Blocky sum of `n` permutation matrices; term `i` maps `x` to `x ^ (1 << i)`.
pub fn hd1_blocky(n: u32) -> Result<Decomposition> {
    let target = gen::hd1(n)?;
    let size = 1usize << n;
    let terms = (0..n)
        .map(|b| {
            let blocks = (0..size)
                .map(|x| Block::new(vec![x], vec![x ^ (1 << b)]))
                .collect();
            BlockyTerm::new(
                BlockyPattern::new(size, size, blocks).expect("a permutation is blocky"),
                1.0,
            )
        })
        .collect();
    Ok(Decomposition::blocky_sum(Field::Real, size, size, terms)?
        .with_metadata("algo", "hd1-blocky")
        .with_metadata("claimedBound", n)
        .with_metadata("termCount", n)
        .with_target(&target))
}

/// Pairs `(x, y)` over `bits`-bit integers that agree on every bit in `mask`.
pub(crate) fn equality_pattern(bits: u32, mask: usize) -> BlockyPattern {
    let size = 1usize << bits;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); size];
    for x in 0..size {
        groups[x & mask].push(x);
    }
    let blocks = groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| Block::new(g.clone(), g))
        .collect();
    BlockyPattern::new(size, size, blocks).expect("equivalence classes are blocky")
}

/// Mask of the coordinates `t < n` accepted by `keep`.
pub(crate) fn coordinate_mask(n: u32, keep: impl Fn(u32) -> bool) -> usize {
    (0..n).filter(|&t| keep(t)).fold(0, |m, t| m | 1 << t)
}

/// Sign representation of the `n`-cube adjacency with `2·log2(n) + 2` blocky
/// terms.
///
/// With `k = log2 n`, the value at `(x, y)` is the number of pairs `(i, j)`,
/// `i < k`, for which `x` and `y` agree on all coordinates `t` having bit `i`
/// equal to `j`, minus `(k + 1)` on the diagonal, plus `1/2 − k`. That is
/// `−1/2` on the diagonal, `+1/2` at distance one and at most `−1/2` beyond.
pub fn sign_hd1(n: u32) -> Result<Decomposition> {
    if !n.is_power_of_two() || n > 8 {
        return Err(Error::Precondition(format!(
            "sign_hd1 needs n a power of two, at most 8 (got {n})"
        )));
    }
    let k = n.trailing_zeros();
    let size = 1usize << n;
    let target = gen::hd1(n)?;
    let mut terms = Vec::with_capacity(2 * k as usize + 2);
    for i in 0..k {
        for j in 0..2 {
            let mask = coordinate_mask(n, |t| (t >> i) & 1 == j);
            terms.push(Term::Blocky(BlockyTerm::new(
                equality_pattern(n, mask),
                1.0,
            )));
        }
    }
    let identity = equality_pattern(n, size - 1);
    terms.push(Term::Blocky(BlockyTerm::new(identity, -(k as f64 + 1.0))));
    terms.push(Term::Blocky(BlockyTerm::new(
        BlockyPattern::full(size, size),
        0.5 - k as f64,
    )));
    let merged = terms.len();
    Ok(
        Decomposition::new(DecompositionKind::SignSum, Field::Real, size, size, terms)?
            .with_metadata("algo", "sign-hd1")
            .with_metadata("mergedTerms", merged)
            .with_metadata("expandedTerms", 4 * k as usize + 2)
            .with_metadata("termCount", merged)
            .with_target(&target),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify_decomposition;

    #[test]
    fn hd1_terms_are_permutations() {
        for n in 1..=5 {
            let d = hd1_blocky(n).unwrap();
            assert_eq!(d.len(), n as usize);
            for t in d.blocky_terms().unwrap() {
                assert_eq!(t.pattern.len(), 1 << n);
                assert!(t.pattern.blocks().iter().all(|b| b.size() == 1));
            }
            assert!(verify_decomposition(&d, &gen::hd1(n).unwrap(), 0.0).ok);
        }
    }

    #[test]
    fn sign_values_by_distance() {
        let d = sign_hd1(4).unwrap();
        assert_eq!(d.len(), 6);
        let e = d.eval();
        for x in 0..16usize {
            for y in 0..16usize {
                let v = e.get(x, y);
                match (x ^ y).count_ones() {
                    0 => assert_eq!(v, -0.5),
                    1 => assert_eq!(v, 0.5),
                    _ => assert!(v <= -0.5),
                }
            }
        }
        assert!(verify_decomposition(&d, &gen::hd1(4).unwrap(), 0.0).ok);
    }

    #[test]
    fn sign_rejects_non_powers() {
        assert!(sign_hd1(3).is_err());
        assert!(sign_hd1(16).is_err());
        assert!(sign_hd1(1).is_ok());
    }
}

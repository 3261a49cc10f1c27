use crate::decomposition::{BlockyTerm, Decomposition};
use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix};
use crate::pattern::BlockyPattern;

pub const MAX_COVER: usize = 20;

/// Signed blocky decomposition of the OR of a cover, by inclusion–exclusion:
/// every nonempty subset contributes the AND of its patterns with sign
/// `(-1)^(|S|+1)`. Subsets with an empty AND are skipped together with all
/// their supersets.
pub fn cover_to_blocky(cover: &[BlockyPattern]) -> Result<Decomposition> {
    let first = cover
        .first()
        .ok_or_else(|| Error::Precondition("cover must contain at least one pattern".into()))?;
    if cover.len() > MAX_COVER {
        return Err(Error::CapExceeded(format!(
            "cover of size {} exceeds {MAX_COVER}",
            cover.len()
        )));
    }
    let (nrows, ncols) = (first.nrows(), first.ncols());
    if cover
        .iter()
        .any(|p| (p.nrows(), p.ncols()) != (nrows, ncols))
    {
        return Err(Error::DimensionMismatch(
            "cover patterns differ in shape".into(),
        ));
    }

    let mut terms = Vec::new();
    let mut stack: Vec<(usize, BlockyPattern, usize)> = Vec::new();
    for (i, p) in cover.iter().enumerate() {
        if !p.is_empty() {
            stack.push((i, p.clone(), 1));
        }
    }
    stack.reverse();
    while let Some((last, and, size)) = stack.pop() {
        for (i, p) in cover.iter().enumerate().skip(last + 1).rev() {
            let next = and.intersect(p);
            if !next.is_empty() {
                stack.push((i, next, size + 1));
            }
        }
        let sign = if size % 2 == 1 { 1.0 } else { -1.0 };
        terms.push(BlockyTerm::new(and, sign));
    }

    let mut target = vec![0.0; nrows * ncols];
    for p in cover {
        for (i, j) in p.cells() {
            target[i * ncols + j] = 1.0;
        }
    }
    let target = Matrix::new(Field::Real, nrows, ncols, target)?;
    let count = terms.len();
    Ok(Decomposition::blocky_sum(Field::Real, nrows, ncols, terms)?
        .with_metadata("algo", "cover-blocky")
        .with_metadata("coverSize", cover.len())
        .with_metadata("claimedBound", (1u64 << cover.len()) - 1)
        .with_metadata("termCount", count)
        .with_target(&target))
}

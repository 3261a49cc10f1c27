use super::hd1::{coordinate_mask, equality_pattern};
use crate::decomposition::{BlockyTerm, Decomposition, DecompositionKind, Term};
use crate::error::{Error, Result};
use crate::gen;
use crate::matrix::{Field, Matrix};
use crate::pattern::BlockyPattern;

/// Binary code; bit `i` of `words[l]` is coordinate `i` of codeword `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Code {
    pub count: usize,
    pub length: u32,
    pub words: Vec<u64>,
    pub min_distance: u32,
}

impl Code {
    pub fn bit(&self, word: usize, i: u32) -> u8 {
        ((self.words[word] >> i) & 1) as u8
    }

    /// Smallest pairwise Hamming distance actually present.
    pub fn measured_distance(&self) -> Option<u32> {
        let mut best = None;
        for (a, &x) in self.words.iter().enumerate() {
            for &y in &self.words[a + 1..] {
                let d = (x ^ y).count_ones();
                best = Some(best.map_or(d, |b: u32| b.min(d)));
            }
        }
        best
    }
}

/// Longest search the greedy code construction will run.
const GREEDY_CANDIDATES: u64 = 1 << 24;

/// Lexicographic greedy code: scan words in increasing order and keep each one
/// at distance at least `distance` from all words kept so far.
///
/// Returns `None` when fewer than `count` words are found among the first
/// 2^24 candidates.
pub fn greedy_code(count: usize, length: u32, distance: u32) -> Option<Code> {
    if length > 63 {
        return None;
    }
    let mut words: Vec<u64> = Vec::with_capacity(count);
    let end = (1u64 << length).min(GREEDY_CANDIDATES);
    let mut w = 0u64;
    while words.len() < count && w < end {
        if words.iter().all(|&c| (c ^ w).count_ones() >= distance) {
            words.push(w);
        }
        w += 1;
    }
    (words.len() == count).then_some(Code {
        count,
        length,
        words,
        min_distance: distance,
    })
}

/// `A_k(x) = Σ_{i ≥ k/2} C(k, i) x^i (1 − x)^(k − i)`.
pub fn amplify_eval(x: f64, k: u32) -> Result<f64> {
    if k == 0 || k % 2 == 1 || k > 200 {
        return Err(Error::Precondition(format!(
            "amplification degree must be even in 2..=200, got {k}"
        )));
    }
    let mut binom = 1.0f64;
    for i in 0..k / 2 {
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    let mut sum = 0.0;
    for i in k / 2..=k {
        sum += binom * x.powi(i as i32) * (1.0 - x).powi((k - i) as i32);
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    Ok(sum)
}

#[derive(Clone, Debug)]
pub struct ApproxHd1 {
    pub matrix: Matrix,
    /// Measured `max |matrix − hd1(n)|`.
    pub epsilon: f64,
    /// Guaranteed bound `1/2 − 1/(10K)`.
    pub bound: f64,
    pub code: Code,
    pub decomposition: Decomposition,
}

impl ApproxHd1 {
    /// Entrywise `A_k` of the approximation, after clamping into [0, 1].
    pub fn amplified(&self, k: u32) -> Result<Matrix> {
        amplify_eval(0.5, k)?;
        let (r, c) = self.matrix.shape();
        Ok(Matrix::from_fn(Field::Real, r, c, |i, j| {
            amplify_eval(self.matrix.get(i, j).clamp(0.0, 1.0), k).expect("degree checked")
        }))
    }
}

/// Entrywise approximation of the `n`-cube adjacency by a blocky sum built
/// from a code of length `L = K·log2 n` and distance `d = ceil(L/5)`.
///
/// With `M'` counting the pairs `(i, j)` for which `x, y` disagree somewhere
/// on the coordinates whose codeword has bit `i` equal to `j`, the
/// approximation is `(c(J − I) − M') / L` with `c = (3L + d)/2`. Its error is
/// `1/2 − d/(2L)`, which is at most `1/2 − 1/(10K)`.
pub fn approx_hd1(n: u32, k_factor: u32) -> Result<ApproxHd1> {
    if !n.is_power_of_two() || !(2..=8).contains(&n) || k_factor == 0 {
        return Err(Error::Precondition(format!(
            "approx_hd1 needs n a power of two in 2..=8 and K >= 1 (got n={n}, K={k_factor})"
        )));
    }
    let len = k_factor * n.trailing_zeros();
    let dist = len.div_ceil(5);
    let code = greedy_code(n as usize, len, dist).ok_or_else(|| {
        Error::Construction(format!(
            "no code with {n} words, length {len}, distance {dist}; increase K"
        ))
    })?;
    let size = 1usize << n;
    let l = len as f64;
    let c = (3.0 * l + dist as f64) / 2.0;

    let mut terms = Vec::with_capacity(2 * len as usize + 2);
    for i in 0..len {
        for j in 0..2u8 {
            let mask = coordinate_mask(n, |t| code.bit(t as usize, i) == j);
            terms.push(Term::Blocky(BlockyTerm::new(
                equality_pattern(n, mask),
                1.0 / l,
            )));
        }
    }
    terms.push(Term::Blocky(BlockyTerm::new(
        BlockyPattern::full(size, size),
        (c - 2.0 * l) / l,
    )));
    terms.push(Term::Blocky(BlockyTerm::new(
        equality_pattern(n, size - 1),
        -c / l,
    )));

    let target = gen::hd1(n)?;
    let d = Decomposition::new(DecompositionKind::ApproxSum, Field::Real, size, size, terms)?;
    let matrix = d.eval();
    let epsilon = matrix.max_abs_diff(&target)?;
    let bound = 0.5 - 1.0 / (10.0 * k_factor as f64);
    let count = d.len();
    let decomposition = d
        .with_epsilon(epsilon)
        .with_metadata("algo", "approx-hd1")
        .with_metadata("K", k_factor)
        .with_metadata("codeLength", len)
        .with_metadata("codeDistance", dist)
        .with_metadata("errorBound", bound)
        .with_metadata("termCount", count)
        .with_target(&target);
    Ok(ApproxHd1 {
        matrix,
        epsilon,
        bound,
        code,
        decomposition,
    })
}

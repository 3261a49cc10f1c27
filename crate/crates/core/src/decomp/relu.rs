use crate::decomposition::{Decomposition, SpikyTerm};
use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix};
use crate::pattern::{Block, BlockyPattern};

pub const MAX_GATE_BITS: u32 = 10;

/// `L(x, y) = max(0, <w1, x> + <w2, y> + alpha)` over `x, y ∈ {0,1}^n`,
/// with bit `i` of the row (column) index giving coordinate `i` of `x` (`y`).
#[derive(Clone, Debug, PartialEq)]
pub struct ReluGate {
    n: u32,
    w1: Vec<f64>,
    w2: Vec<f64>,
    alpha: f64,
}

impl ReluGate {
    pub fn new(w1: Vec<f64>, w2: Vec<f64>, alpha: f64) -> Result<ReluGate> {
        if w1.len() != w2.len() {
            return Err(Error::DimensionMismatch(format!(
                "gate weights have lengths {} and {}",
                w1.len(),
                w2.len()
            )));
        }
        let n = w1.len() as u32;
        if n > MAX_GATE_BITS {
            return Err(Error::CapExceeded(format!(
                "gate on {n} bits exceeds {MAX_GATE_BITS}"
            )));
        }
        if w1.iter().chain(&w2).chain([&alpha]).any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix(
                "gate parameters must be finite".into(),
            ));
        }
        Ok(ReluGate { n, w1, w2, alpha })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn w2(&self) -> &[f64] {
        &self.w2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn size(&self) -> usize {
        1 << self.n
    }

    /// `<w1, x>`.
    pub fn row_value(&self, x: usize) -> f64 {
        dot_bits(&self.w1, x)
    }

    /// `<w2, y> + alpha`.
    pub fn col_value(&self, y: usize) -> f64 {
        dot_bits(&self.w2, y) + self.alpha
    }

    pub fn pre_activation(&self, x: usize, y: usize) -> f64 {
        self.row_value(x) + self.col_value(y)
    }

    pub fn matrix(&self) -> Matrix {
        let s = self.size();
        Matrix::from_fn(Field::Real, s, s, |x, y| self.pre_activation(x, y).max(0.0))
    }

    /// 0/1 matrix of the strictly positive pre-activations.
    pub fn threshold_matrix(&self) -> Matrix {
        let s = self.size();
        Matrix::from_fn(Field::Real, s, s, |x, y| {
            (self.pre_activation(x, y) > 0.0) as u8 as f64
        })
    }
}

fn dot_bits(w: &[f64], x: usize) -> f64 {
    w.iter()
        .enumerate()
        .filter(|(i, _)| (x >> i) & 1 == 1)
        .map(|(_, &c)| c)
        .sum()
}

/// Splits the positive support of a gate into at most `n + 1` disjoint
/// blocky patterns.
///
/// Row values `<w1, x>` and negated column values `−(<w2, y> + alpha)` are
/// merged into one sorted list (a row sorts before a column of equal value, so
/// ties are excluded). The support is exactly the set of pairs whose row rank
/// exceeds the column rank. Writing ranks with `n + 1` bits, pairs are grouped
/// by the first bit where the two ranks differ; for a fixed bit the groups
/// sharing a higher-order prefix form the blocks of one pattern.
pub fn threshold_to_blocky(g: &ReluGate) -> Vec<BlockyPattern> {
    let size = g.size();
    let mut items: Vec<(f64, u8, usize)> = (0..size)
        .map(|x| (g.row_value(x), 0, x))
        .chain((0..size).map(|y| (-g.col_value(y), 1, y)))
        .collect();
    // partial_cmp, not total_cmp: -0.0 and 0.0 must tie.
    items.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("gate values are finite")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut row_rank = vec![0usize; size];
    let mut col_rank = vec![0usize; size];
    for (rank, &(_, kind, idx)) in items.iter().enumerate() {
        if kind == 0 {
            row_rank[idx] = rank;
        } else {
            col_rank[idx] = rank;
        }
    }

    let bits = g.n + 1;
    let mut patterns = Vec::new();
    for b in (0..bits).rev() {
        let groups = 1usize << (bits - 1 - b);
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); groups];
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); groups];
        for x in 0..size {
            if (row_rank[x] >> b) & 1 == 1 {
                rows[row_rank[x] >> (b + 1)].push(x);
            }
        }
        for y in 0..size {
            if (col_rank[y] >> b) & 1 == 0 {
                cols[col_rank[y] >> (b + 1)].push(y);
            }
        }
        let blocks: Vec<Block> = rows
            .into_iter()
            .zip(cols)
            .filter(|(r, c)| !r.is_empty() && !c.is_empty())
            .map(|(r, c)| Block { rows: r, cols: c })
            .collect();
        if !blocks.is_empty() {
            patterns
                .push(BlockyPattern::new(size, size, blocks).expect("prefix groups are disjoint"));
        }
    }
    patterns
}

fn gate_terms(g: &ReluGate) -> Vec<SpikyTerm> {
    let size = g.size();
    let mut terms = Vec::new();
    for p in threshold_to_blocky(g) {
        let mut rows_u = vec![0.0; size];
        let mut cols_1 = vec![0.0; size];
        let mut rows_1 = vec![0.0; size];
        let mut cols_v = vec![0.0; size];
        for b in p.blocks() {
            for &x in &b.rows {
                rows_u[x] = g.row_value(x);
                rows_1[x] = 1.0;
            }
            for &y in &b.cols {
                cols_1[y] = 1.0;
                cols_v[y] = g.col_value(y);
            }
        }
        for (u, v) in [(rows_u, cols_1), (rows_1, cols_v)] {
            let t = SpikyTerm::new(p.clone(), u, v).expect("factor lengths match");
            let support = t.support();
            if !support.is_empty() {
                terms.push(SpikyTerm {
                    pattern: support,
                    ..t
                });
            }
        }
    }
    terms
}

/// Spiky decomposition of a ReLU gate with at most `3(n + 1)` terms.
///
/// On each threshold pattern the gate equals `<w1, x> + (<w2, y> + alpha)`,
/// a sum of two rank-one pieces; each becomes a spiky term on that pattern.
pub fn relu_to_spiky(g: &ReluGate) -> Decomposition {
    let size = g.size();
    let terms = gate_terms(g);
    let count = terms.len();
    Decomposition::spiky_sum(Field::Real, size, size, terms)
        .expect("terms match gate shape")
        .with_metadata("algo", "relu-spiky")
        .with_metadata("claimedBound", 3 * (g.n as usize + 1))
        .with_metadata("termCount", count)
        .with_target(&g.matrix())
}

/// Concatenated decompositions of a sum of gates on a shared input length.
pub fn circuit_to_spiky(gates: &[ReluGate]) -> Result<Decomposition> {
    let first = gates
        .first()
        .ok_or_else(|| Error::Precondition("circuit needs at least one gate".into()))?;
    if gates.iter().any(|g| g.n != first.n) {
        return Err(Error::DimensionMismatch(
            "gates differ in input length".into(),
        ));
    }
    let size = first.size();
    let terms: Vec<SpikyTerm> = gates.iter().flat_map(gate_terms).collect();
    let count = terms.len();
    Ok(Decomposition::spiky_sum(Field::Real, size, size, terms)?
        .with_metadata("algo", "circuit-spiky")
        .with_metadata("gates", gates.len())
        .with_metadata("claimedBound", gates.len() * 3 * (first.n as usize + 1))
        .with_metadata("termCount", count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify_decomposition;

    #[test]
    fn constant_gate() {
        let g = ReluGate::new(vec![0.0; 3], vec![0.0; 3], 1.0).unwrap();
        let pats = threshold_to_blocky(&g);
        assert_eq!(pats.len(), 1);
        assert_eq!(pats[0].support_size(), 64);
        let d = relu_to_spiky(&g);
        assert!(d.len() <= 3);
        assert!(verify_decomposition(&d, &Matrix::ones(Field::Real, 8, 8), 1e-9).ok);
    }

    #[test]
    fn single_bit_gate() {
        let g = ReluGate::new(vec![1.0], vec![-1.0], 0.0).unwrap();
        let pats = threshold_to_blocky(&g);
        assert_eq!(pats.len(), 1);
        assert_eq!(pats[0].cells().collect::<Vec<_>>(), vec![(1, 0)]);
        let d = relu_to_spiky(&g);
        assert_eq!(d.len(), 1);
        let want = Matrix::from_rows(Field::Real, &[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(verify_decomposition(&d, &want, 1e-9).ok);
    }

    #[test]
    fn negative_gate_is_empty() {
        let g = ReluGate::new(vec![1.0, 1.0], vec![1.0, 1.0], -10.0).unwrap();
        assert!(threshold_to_blocky(&g).is_empty());
        let d = relu_to_spiky(&g);
        assert!(d.is_empty());
        assert!(verify_decomposition(&d, &g.matrix(), 0.0).ok);
    }

    #[test]
    fn two_copies_double_the_gate() {
        let g = ReluGate::new(vec![2.0, -1.0], vec![1.0, 3.0], -1.5).unwrap();
        let d = circuit_to_spiky(&[g.clone(), g.clone()]).unwrap();
        assert!(verify_decomposition(&d, &g.matrix().scale(2.0), 1e-9).ok);
    }

    #[test]
    fn mismatched_gates_are_rejected() {
        let a = ReluGate::new(vec![1.0], vec![1.0], 0.0).unwrap();
        let b = ReluGate::new(vec![1.0, 1.0], vec![1.0, 1.0], 0.0).unwrap();
        assert!(circuit_to_spiky(&[a, b]).is_err());
        assert!(ReluGate::new(vec![1.0], vec![], 0.0).is_err());
        assert!(ReluGate::new(vec![0.0; 11], vec![0.0; 11], 0.0).is_err());
    }

    #[test]
    fn zero_column_value_is_a_tie() {
        // Column value 0 for y = 0 turns into -0.0 in the sort key.
        let g = ReluGate::new(vec![1.0], vec![1.0], 0.0).unwrap();
        let pats = threshold_to_blocky(&g);
        assert!(pats.iter().all(|p| !p.covers(0, 0)));
        let t = g.threshold_matrix();
        for x in 0..2 {
            for y in 0..2 {
                let hits = pats.iter().filter(|p| p.covers(x, y)).count();
                assert_eq!(hits as f64, t.get(x, y));
            }
        }
    }
}

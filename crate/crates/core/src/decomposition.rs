//! Terms, decompositions, evaluation and verification.
//!
//! A [`Decomposition`] claims to represent a target matrix as a sum (or, for
//! covers, an entrywise OR) of structured terms. [`verify_decomposition`] is
//! the single checker every constructive algorithm is validated against; it
//! never fails, it reports.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix};
use crate::pattern::{support_blocks, BlockyPattern};

/// A blocky matrix scaled by a coefficient (always 1 over GF(2)).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockyTerm {
    pub pattern: BlockyPattern,
    pub coeff: f64,
}

impl BlockyTerm {
    pub fn new(pattern: BlockyPattern, coeff: f64) -> Self {
        BlockyTerm { pattern, coeff }
    }

    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> BlockyTerm {
        BlockyTerm::new(self.pattern.restrict(rows, cols), self.coeff)
    }
}

/// Entrywise product of a blocky pattern with the rank-one matrix `u ⊗ v`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikyTerm {
    pub pattern: BlockyPattern,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl SpikyTerm {
    pub fn new(pattern: BlockyPattern, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != pattern.nrows() || v.len() != pattern.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "spiky factors have lengths {}/{} for a {}x{} pattern",
                u.len(),
                v.len(),
                pattern.nrows(),
                pattern.ncols()
            )));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("spiky factor is not finite".into()));
        }
        Ok(SpikyTerm { pattern, u, v })
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        if self.pattern.covers(i, j) {
            self.u[i] * self.v[j]
        } else {
            0.0
        }
    }

    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> SpikyTerm {
        SpikyTerm {
            pattern: self.pattern.restrict(rows, cols),
            u: rows.iter().map(|&i| self.u[i]).collect(),
            v: cols.iter().map(|&j| self.v[j]).collect(),
        }
    }

    /// Nonzero support of the term. It is blocky: each block shrinks to the
    /// rows with `u != 0` and columns with `v != 0`.
    pub fn support(&self) -> BlockyPattern {
        let blocks = self
            .pattern
            .blocks()
            .iter()
            .filter_map(|b| {
                let rows: Vec<usize> = b
                    .rows
                    .iter()
                    .copied()
                    .filter(|&i| self.u[i] != 0.0)
                    .collect();
                let cols: Vec<usize> = b
                    .cols
                    .iter()
                    .copied()
                    .filter(|&j| self.v[j] != 0.0)
                    .collect();
                (!rows.is_empty() && !cols.is_empty())
                    .then_some(crate::pattern::Block { rows, cols })
            })
            .collect();
        BlockyPattern::new(self.pattern.nrows(), self.pattern.ncols(), blocks)
            .expect("sub-blocks of a blocky pattern are blocky")
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Blocky(BlockyTerm),
    Spiky(SpikyTerm),
}

impl Term {
    pub fn pattern(&self) -> &BlockyPattern {
        match self {
            Term::Blocky(t) => &t.pattern,
            Term::Spiky(t) => &t.pattern,
        }
    }

    fn for_each_value(&self, mut f: impl FnMut(usize, usize, f64)) {
        match self {
            Term::Blocky(t) => {
                for (i, j) in t.pattern.cells() {
                    f(i, j, t.coeff);
                }
            }
            Term::Spiky(t) => {
                for (i, j) in t.pattern.cells() {
                    f(i, j, t.u[i] * t.v[j]);
                }
            }
        }
    }

    fn restrict(&self, rows: &[usize], cols: &[usize]) -> Term {
        match self {
            Term::Blocky(t) => Term::Blocky(t.restrict(rows, cols)),
            Term::Spiky(t) => Term::Spiky(t.restrict(rows, cols)),
        }
    }

    fn is_trivial(&self) -> bool {
        match self {
            Term::Blocky(t) => t.pattern.is_empty(),
            Term::Spiky(t) => t.is_zero(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecompositionKind {
    /// `M = Σ αᵢ Bᵢ` over blocky `Bᵢ`.
    BlockySum,
    /// `M = Σ Sᵢ` over spiky `Sᵢ`.
    SpikySum,
    /// `M = ⋁ Bᵢ` for Boolean `M`.
    BlockyCover,
    /// `sign(Σ αᵢ Bᵢ)` matches the ±1 version of a Boolean `M`.
    SignSum,
    /// `‖Σ αᵢ Bᵢ − M‖∞ ≤ ε`.
    ApproxSum,
}

impl DecompositionKind {
    pub fn name(self) -> &'static str {
        match self {
            DecompositionKind::BlockySum => "BlockySum",
            DecompositionKind::SpikySum => "SpikySum",
            DecompositionKind::BlockyCover => "BlockyCover",
            DecompositionKind::SignSum => "SignSum",
            DecompositionKind::ApproxSum => "ApproxSum",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Ok(match s {
            "BlockySum" => DecompositionKind::BlockySum,
            "SpikySum" => DecompositionKind::SpikySum,
            "BlockyCover" => DecompositionKind::BlockyCover,
            "SignSum" => DecompositionKind::SignSum,
            "ApproxSum" => DecompositionKind::ApproxSum,
            other => return Err(Error::Certificate(format!("unknown kind `{other}`"))),
        })
    }
}

impl fmt::Display for DecompositionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    kind: DecompositionKind,
    field: Field,
    nrows: usize,
    ncols: usize,
    terms: Vec<Term>,
    metadata: BTreeMap<String, Value>,
    epsilon: Option<f64>,
    target_hash: Option<String>,
}

impl Decomposition {
    pub fn new(
        kind: DecompositionKind,
        field: Field,
        nrows: usize,
        ncols: usize,
        terms: Vec<Term>,
    ) -> Result<Self> {
        for (k, term) in terms.iter().enumerate() {
            let p = term.pattern();
            if (p.nrows(), p.ncols()) != (nrows, ncols) {
                return Err(Error::DimensionMismatch(format!(
                    "term {k} is {}x{}, decomposition is {nrows}x{ncols}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            match (kind, term) {
                (DecompositionKind::SpikySum, _) => {}
                (_, Term::Spiky(_)) => {
                    return Err(Error::InvalidMatrix(format!(
                        "term {k}: spiky terms are only allowed in SpikySum"
                    )))
                }
                (_, Term::Blocky(t)) => {
                    if !t.coeff.is_finite() {
                        return Err(Error::InvalidMatrix(format!(
                            "term {k}: coefficient not finite"
                        )));
                    }
                    if field == Field::Gf2 && t.coeff != 1.0 {
                        return Err(Error::InvalidMatrix(format!(
                            "term {k}: gf2 blocky terms carry coefficient 1"
                        )));
                    }
                    if kind == DecompositionKind::BlockyCover && t.coeff != 1.0 {
                        return Err(Error::InvalidMatrix(format!(
                            "term {k}: cover terms carry coefficient 1"
                        )));
                    }
                }
            }
            if let Term::Spiky(t) = term {
                if field == Field::Gf2 && t.u.iter().chain(&t.v).any(|&x| x != 0.0 && x != 1.0) {
                    return Err(Error::InvalidMatrix(format!(
                        "term {k}: gf2 spiky factors must be bits"
                    )));
                }
            }
        }
        Ok(Decomposition {
            kind,
            field,
            nrows,
            ncols,
            terms,
            metadata: BTreeMap::new(),
            epsilon: None,
            target_hash: None,
        })
    }

    pub fn blocky_sum(
        field: Field,
        nrows: usize,
        ncols: usize,
        terms: Vec<BlockyTerm>,
    ) -> Result<Self> {
        Self::new(
            DecompositionKind::BlockySum,
            field,
            nrows,
            ncols,
            terms.into_iter().map(Term::Blocky).collect(),
        )
    }

    pub fn spiky_sum(
        field: Field,
        nrows: usize,
        ncols: usize,
        terms: Vec<SpikyTerm>,
    ) -> Result<Self> {
        Self::new(
            DecompositionKind::SpikySum,
            field,
            nrows,
            ncols,
            terms.into_iter().map(Term::Spiky).collect(),
        )
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = Some(eps);
        self
    }

    /// Records the content hash of the matrix this decomposition represents.
    pub fn with_target(mut self, target: &Matrix) -> Self {
        self.target_hash = Some(target.content_hash());
        self
    }

    pub(crate) fn set_target_hash(&mut self, hash: Option<String>) {
        self.target_hash = hash;
    }

    pub(crate) fn set_metadata(&mut self, metadata: BTreeMap<String, Value>) {
        self.metadata = metadata;
    }

    pub fn kind(&self) -> DecompositionKind {
        self.kind
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn metadata(&self) -> &BTreeMap<String, Value> {
        &self.metadata
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn target_hash(&self) -> Option<&str> {
        self.target_hash.as_deref()
    }

    /// Blocky terms, when every term is blocky.
    pub fn blocky_terms(&self) -> Option<Vec<&BlockyTerm>> {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Blocky(b) => Some(b),
                Term::Spiky(_) => None,
            })
            .collect()
    }

    pub fn spiky_terms(&self) -> Option<Vec<&SpikyTerm>> {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Spiky(s) => Some(s),
                Term::Blocky(_) => None,
            })
            .collect()
    }

    /// Entrywise sum of term values (OR for covers, XOR over GF(2)).
    pub fn eval(&self) -> Matrix {
        let mut acc = vec![0.0; self.nrows * self.ncols];
        let ncols = self.ncols;
        for term in &self.terms {
            match self.kind {
                DecompositionKind::BlockyCover => {
                    for (i, j) in term.pattern().cells() {
                        acc[i * ncols + j] = 1.0;
                    }
                }
                _ => term.for_each_value(|i, j, x| acc[i * ncols + j] += x),
            }
        }
        if self.field == Field::Gf2 {
            for x in &mut acc {
                *x = (x.round() as i64).rem_euclid(2) as f64;
            }
        }
        Matrix::new(self.field, self.nrows, self.ncols, acc)
            .expect("evaluation of finite terms is finite")
    }

    /// Restricts every term to `rows × cols`, dropping terms that vanish.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Decomposition {
        let terms = self
            .terms
            .iter()
            .map(|t| t.restrict(rows, cols))
            .filter(|t| !t.is_trivial())
            .collect();
        Decomposition {
            kind: self.kind,
            field: self.field,
            nrows: rows.len(),
            ncols: cols.len(),
            terms,
            metadata: BTreeMap::new(),
            epsilon: self.epsilon,
            target_hash: None,
        }
    }

    /// Term-wise concatenation; evaluates to the sum of both targets.
    pub fn concat(&self, other: &Decomposition) -> Result<Decomposition> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(
                "concatenating decompositions".into(),
            ));
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                expected: self.field,
                got: other.field,
            });
        }
        let kind = if self.kind == other.kind {
            self.kind
        } else {
            DecompositionKind::SpikySum
        };
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Decomposition::new(kind, self.field, self.nrows, self.ncols, terms)
    }

    /// Multiplies every term by `c` (real field only).
    pub fn scaled(&self, c: f64) -> Result<Decomposition> {
        if self.field != Field::Real {
            return Err(Error::FieldMismatch {
                expected: Field::Real,
                got: self.field,
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Blocky(b) => Term::Blocky(BlockyTerm::new(b.pattern.clone(), b.coeff * c)),
                Term::Spiky(s) => Term::Spiky(SpikyTerm {
                    pattern: s.pattern.clone(),
                    u: s.u.iter().map(|x| x * c).collect(),
                    v: s.v.clone(),
                }),
            })
            .collect();
        Decomposition::new(self.kind, self.field, self.nrows, self.ncols, terms)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub row: usize,
    pub col: usize,
    pub expected: f64,
    pub got: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub ok: bool,
    pub max_residual: f64,
    pub failures: Vec<Failure>,
    pub term_count: usize,
    pub structural_errors: Vec<String>,
}

impl VerificationReport {
    fn finish(mut self) -> Self {
        self.ok = self.failures.is_empty() && self.structural_errors.is_empty();
        self
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ok: {}", self.ok)?;
        writeln!(f, "terms: {}", self.term_count)?;
        writeln!(f, "max_residual: {:e}", self.max_residual)?;
        writeln!(f, "failures: {}", self.failures.len())?;
        for fl in self.failures.iter().take(10) {
            writeln!(
                f,
                "  ({}, {}): expected {} got {}",
                fl.row, fl.col, fl.expected, fl.got
            )?;
        }
        for e in &self.structural_errors {
            writeln!(f, "structural: {e}")?;
        }
        Ok(())
    }
}

/// Checks `d` against `m`.
///
/// Sums are compared entrywise within `tol` (exactly over GF(2)). A `SignSum`
/// must be strictly positive exactly where `m` is 1 and strictly negative where
/// it is 0. An `ApproxSum` is compared against its own epsilon. Covers must
/// reproduce a Boolean `m` exactly.
pub fn verify_decomposition(d: &Decomposition, m: &Matrix, tol: f64) -> VerificationReport {
    let mut report = VerificationReport {
        ok: false,
        max_residual: 0.0,
        failures: Vec::new(),
        term_count: d.len(),
        structural_errors: Vec::new(),
    };
    if d.shape() != m.shape() {
        report.structural_errors.push(format!(
            "decomposition is {}x{}, target is {}x{}",
            d.nrows,
            d.ncols,
            m.nrows(),
            m.ncols()
        ));
        return report.finish();
    }
    if d.field != m.field() {
        report.structural_errors.push(format!(
            "decomposition field {} vs target field {}",
            d.field,
            m.field()
        ));
        return report.finish();
    }
    if let Some(h) = &d.target_hash {
        if *h != m.content_hash() {
            report
                .structural_errors
                .push("target content hash does not match".into());
        }
    }
    if d.terms.is_empty() && !m.is_zero() && d.kind != DecompositionKind::SignSum {
        report
            .structural_errors
            .push("empty decomposition for a nonzero target".into());
    }
    for (k, term) in d.terms.iter().enumerate() {
        match term {
            Term::Blocky(t) => {
                if d.field == Field::Real && t.coeff == 0.0 {
                    report
                        .structural_errors
                        .push(format!("term {k}: zero coefficient"));
                }
            }
            Term::Spiky(t) => {
                if t.u.iter().chain(&t.v).any(|x| !x.is_finite()) {
                    report
                        .structural_errors
                        .push(format!("term {k}: non-finite factor"));
                }
            }
        }
    }

    let e = d.eval();
    let needs_boolean = matches!(
        d.kind,
        DecompositionKind::BlockyCover | DecompositionKind::SignSum
    );
    if needs_boolean && !m.is_boolean() {
        report
            .structural_errors
            .push(format!("{} requires a Boolean target", d.kind));
        return report.finish();
    }
    if d.kind == DecompositionKind::SignSum && d.field != Field::Real {
        report
            .structural_errors
            .push("SignSum requires the real field".into());
        return report.finish();
    }
    let eps = match (d.kind, d.epsilon) {
        (DecompositionKind::ApproxSum, Some(eps)) => Some(eps),
        (DecompositionKind::ApproxSum, None) => {
            report
                .structural_errors
                .push("ApproxSum without epsilon".into());
            return report.finish();
        }
        _ => None,
    };

    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let (want, got) = (m.get(i, j), e.get(i, j));
            let residual = (want - got).abs();
            report.max_residual = report.max_residual.max(residual);
            let good = match d.kind {
                DecompositionKind::SignSum => {
                    if want == 1.0 {
                        got > 0.0
                    } else {
                        got < 0.0
                    }
                }
                DecompositionKind::ApproxSum => residual <= eps.unwrap() + tol,
                DecompositionKind::BlockyCover => residual == 0.0,
                _ if d.field == Field::Gf2 => residual == 0.0,
                _ => residual <= tol,
            };
            if !good {
                report.failures.push(Failure {
                    row: i,
                    col: j,
                    expected: want,
                    got,
                });
            }
        }
    }
    report.finish()
}

/// Returns a single spiky term equal to `m` when its support is blocky and
/// every block has rank at most one.
pub fn is_spiky(m: &Matrix) -> Option<SpikyTerm> {
    let pattern = support_blocks(m)?;
    let (nrows, ncols) = m.shape();
    let mut u = vec![0.0; nrows];
    let mut v = vec![0.0; ncols];
    for block in pattern.blocks() {
        let (mut pr, mut pc, mut best) = (block.rows[0], block.cols[0], 0.0f64);
        for &i in &block.rows {
            for &j in &block.cols {
                if m.get(i, j).abs() > best {
                    (pr, pc, best) = (i, j, m.get(i, j).abs());
                }
            }
        }
        let pivot = m.get(pr, pc);
        for &i in &block.rows {
            u[i] = m.get(i, pc);
        }
        for &j in &block.cols {
            v[j] = m.get(pr, j) / pivot;
        }
        for &i in &block.rows {
            for &j in &block.cols {
                let x = m.get(i, j);
                if (u[i] * v[j] - x).abs() > 1e-12 * x.abs().max(1.0) {
                    return None;
                }
            }
        }
    }
    SpikyTerm::new(pattern, u, v).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Block;

    fn diag(vals: &[f64]) -> Matrix {
        let n = vals.len();
        Matrix::from_fn(Field::Real, n, n, |i, j| if i == j { vals[i] } else { 0.0 })
    }

    #[test]
    fn full_block_evaluates_to_ones() {
        let d = Decomposition::blocky_sum(
            Field::Real,
            3,
            4,
            vec![BlockyTerm::new(BlockyPattern::full(3, 4), 1.0)],
        )
        .unwrap();
        assert_eq!(d.eval(), Matrix::ones(Field::Real, 3, 4));
    }

    #[test]
    fn diagonal_is_spiky_but_not_blocky() {
        let d = diag(&[1.0, 2.0, 3.0]);
        let t = is_spiky(&d).unwrap();
        assert_eq!(t.pattern.len(), 3);
        let dec = Decomposition::spiky_sum(Field::Real, 3, 3, vec![t]).unwrap();
        assert!(verify_decomposition(&dec, &d, 1e-12).ok);
    }

    #[test]
    fn rank_two_full_block_is_not_spiky() {
        let m = Matrix::from_rows(Field::Real, &[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(is_spiky(&m).is_none());
    }

    #[test]
    fn rank_one_outer_product_is_one_block() {
        let u = [1.0, -2.0, 3.5];
        let v = [2.0, 0.25, -1.0, 4.0];
        let m = Matrix::from_fn(Field::Real, 3, 4, |i, j| u[i] * v[j]);
        let t = is_spiky(&m).unwrap();
        assert_eq!(t.pattern.len(), 1);
        assert_eq!(t.pattern.support_size(), 12);
    }

    #[test]
    fn perturbed_coefficient_fails_on_its_block() {
        let p = BlockyPattern::new(
            3,
            3,
            vec![
                Block::new(vec![0, 1], vec![0, 1]),
                Block::new(vec![2], vec![2]),
            ],
        )
        .unwrap();
        let m = p.to_matrix(Field::Real);
        let bad =
            Decomposition::blocky_sum(Field::Real, 3, 3, vec![BlockyTerm::new(p.clone(), 2.0)])
                .unwrap();
        let r = verify_decomposition(&bad, &m, 1e-9);
        assert!(!r.ok);
        assert_eq!(r.failures.len(), 5);
        assert_eq!(r.max_residual, 1.0);
    }

    #[test]
    fn sign_sum_rejects_zero_values() {
        let m = Matrix::from_rows(Field::Real, &[vec![1.0, 0.0]]).unwrap();
        let p = BlockyPattern::single(1, 2, vec![0], vec![0]).unwrap();
        let d = Decomposition::new(
            DecompositionKind::SignSum,
            Field::Real,
            1,
            2,
            vec![Term::Blocky(BlockyTerm::new(p, 1.0))],
        )
        .unwrap();
        let r = verify_decomposition(&d, &m, 1e-9);
        assert!(!r.ok);
        assert_eq!(r.failures.len(), 1);
        assert_eq!((r.failures[0].row, r.failures[0].col), (0, 1));
    }

    #[test]
    fn target_hash_detects_drift() {
        let m = Matrix::ones(Field::Real, 2, 2);
        let d = Decomposition::blocky_sum(
            Field::Real,
            2,
            2,
            vec![BlockyTerm::new(BlockyPattern::full(2, 2), 1.0)],
        )
        .unwrap()
        .with_target(&m);
        assert!(verify_decomposition(&d, &m, 1e-9).ok);
        let other = m.scale(1.0).with_field(Field::Gf2).unwrap();
        let d2 = Decomposition::blocky_sum(
            Field::Gf2,
            2,
            2,
            vec![BlockyTerm::new(BlockyPattern::full(2, 2), 1.0)],
        )
        .unwrap()
        .with_target(&m);
        assert!(!verify_decomposition(&d2, &other, 0.0).ok);
    }

    #[test]
    fn gf2_sum_is_xor() {
        let full = BlockyPattern::full(2, 2);
        let d = Decomposition::blocky_sum(
            Field::Gf2,
            2,
            2,
            vec![
                BlockyTerm::new(full.clone(), 1.0),
                BlockyTerm::new(full, 1.0),
            ],
        )
        .unwrap();
        assert!(d.eval().is_zero());
    }

    #[test]
    fn mismatched_term_dims_are_rejected() {
        let r = Decomposition::blocky_sum(
            Field::Real,
            2,
            2,
            vec![BlockyTerm::new(BlockyPattern::full(3, 2), 1.0)],
        );
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}

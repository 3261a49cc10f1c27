//! Dense field-tagged matrices.
//!
//! Entries are stored row-major as `f64` for both fields. A GF(2) matrix only
//! ever holds `0.0` or `1.0`; arithmetic on it is carried out modulo 2.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Real,
    Gf2,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Gf2 => "gf2",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "gf2" => Ok(Field::Gf2),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown field `{other}`"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    field: Field,
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, checking the field invariants.
    pub fn new(field: Field, nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {nrows}x{ncols} matrix, got {}",
                nrows * ncols,
                data.len()
            )));
        }
        for (idx, &x) in data.iter().enumerate() {
            let ok = match field {
                Field::Real => x.is_finite(),
                Field::Gf2 => x == 0.0 || x == 1.0,
            };
            if !ok {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({}, {}) = {x} is not a valid {field} value",
                    idx / ncols.max(1),
                    idx % ncols.max(1)
                )));
            }
        }
        let data = data
            .into_iter()
            .map(|x| if x == 0.0 { 0.0 } else { x })
            .collect();
        Ok(Matrix {
            field,
            nrows,
            ncols,
            data,
        })
    }

    pub fn zeros(field: Field, nrows: usize, ncols: usize) -> Self {
        Matrix {
            field,
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn ones(field: Field, nrows: usize, ncols: usize) -> Self {
        Matrix {
            field,
            nrows,
            ncols,
            data: vec![1.0; nrows * ncols],
        }
    }

    /// Builds a matrix entry by entry. GF(2) values are reduced to their
    /// parity, so callers may pass any integer-valued closure.
    pub fn from_fn(
        field: Field,
        nrows: usize,
        ncols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                let x = f(i, j);
                data.push(normalize(field, x));
            }
        }
        Matrix {
            field,
            nrows,
            ncols,
            data,
        }
    }

    pub fn from_rows(field: Field, rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        Matrix::new(field, nrows, ncols, rows.concat())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Number of nonzero entries (exact comparison with zero).
    pub fn sparsity(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0.0).count()
    }

    /// True when every entry is 0 or 1.
    pub fn is_boolean(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0 || x == 1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    /// Reinterprets a 0/1 matrix in another field.
    pub fn with_field(&self, field: Field) -> Result<Matrix> {
        if field == Field::Gf2 && !self.is_boolean() {
            return Err(Error::InvalidMatrix(
                "only 0/1 matrices can be reinterpreted over gf2".into(),
            ));
        }
        Ok(Matrix {
            field,
            ..self.clone()
        })
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.ncols, self.nrows, |i, j| self.get(j, i))
    }

    /// Submatrix on the given row and column indices, in the given order.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Result<Matrix> {
        if let Some(&i) = rows.iter().find(|&&i| i >= self.nrows) {
            return Err(Error::IndexOutOfRange {
                index: i,
                bound: self.nrows,
            });
        }
        if let Some(&j) = cols.iter().find(|&&j| j >= self.ncols) {
            return Err(Error::IndexOutOfRange {
                index: j,
                bound: self.ncols,
            });
        }
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self.get(i, j));
            }
        }
        Ok(Matrix {
            field: self.field,
            nrows: rows.len(),
            ncols: cols.len(),
            data,
        })
    }

    /// Entrywise sum in the matrix field.
    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_compatible(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| normalize(self.field, a + b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix> {
        self.check_compatible(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| normalize(self.field, a * b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix::from_fn(self.field, self.nrows, self.ncols, |i, j| {
            c * self.get(i, j)
        })
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_compatible(&self, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                expected: self.field,
                got: other.field,
            });
        }
        Ok(())
    }

    /// Rank by Gaussian elimination. Over the reals a column is only used as a
    /// pivot when its largest remaining magnitude exceeds `tol`; over GF(2)
    /// elimination is exact and `tol` is ignored.
    pub fn rank(&self, tol: f64) -> usize {
        match self.field {
            Field::Real => real_rank(self.nrows, self.ncols, &self.data, tol),
            Field::Gf2 => {
                let rows: Vec<Vec<u64>> = (0..self.nrows).map(|i| self.packed_row(i)).collect();
                gf2_rank(rows)
            }
        }
    }

    /// Row `i` as a packed bit vector (bit j set iff entry nonzero).
    pub fn packed_row(&self, i: usize) -> Vec<u64> {
        let words = self.ncols.div_ceil(64);
        let mut out = vec![0u64; words];
        for (j, &x) in self.row(i).iter().enumerate() {
            if x != 0.0 {
                out[j / 64] |= 1 << (j % 64);
            }
        }
        out
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("matrix {} {} {}\n", self.nrows, self.ncols, self.field);
        for i in 0..self.nrows {
            let line: Vec<String> = self.row(i).iter().map(|x| format_entry(*x)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Matrix> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "matrix" {
            return Err(Error::Parse {
                line: hline + 1,
                msg: "expected `matrix <nrows> <ncols> <real|gf2>`".into(),
            });
        }
        let parse_dim = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: hline + 1,
                msg: format!("bad dimension `{s}`: {e}"),
            })
        };
        let nrows = parse_dim(parts[1])?;
        let ncols = parse_dim(parts[2])?;
        let field: Field = parts[3].parse().map_err(|_| Error::Parse {
            line: hline + 1,
            msg: format!("unknown field `{}`", parts[3]),
        })?;
        let mut data = Vec::with_capacity(nrows * ncols);
        for _ in 0..nrows {
            let (ln, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("expected {nrows} rows"),
            })?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|e| Error::Parse {
                        line: ln + 1,
                        msg: format!("bad entry `{tok}`: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != ncols {
                return Err(Error::Parse {
                    line: ln + 1,
                    msg: format!("expected {ncols} entries, got {}", row.len()),
                });
            }
            data.extend(row);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln + 1,
                msg: "trailing data after last row".into(),
            });
        }
        Matrix::new(field, nrows, ncols, data)
    }

    /// Hex SHA-256 of the text serialization.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Matrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Matrix::from_text(s)
    }
}

fn normalize(field: Field, x: f64) -> f64 {
    match field {
        Field::Real => {
            if x == 0.0 {
                0.0
            } else {
                x
            }
        }
        Field::Gf2 => (x.round() as i64).rem_euclid(2) as f64,
    }
}

fn format_entry(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

fn real_rank(nrows: usize, ncols: usize, data: &[f64], tol: f64) -> usize {
    let mut a = data.to_vec();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let (piv, best) = (rank..nrows)
            .map(|r| (r, a[r * ncols + col].abs()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        if piv != rank {
            for j in 0..ncols {
                a.swap(piv * ncols + j, rank * ncols + j);
            }
        }
        let p = a[rank * ncols + col];
        for r in rank + 1..nrows {
            let factor = a[r * ncols + col] / p;
            if factor != 0.0 {
                for j in col..ncols {
                    a[r * ncols + j] -= factor * a[rank * ncols + j];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over GF(2) of packed rows.
pub fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let words = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for bit in 0..words * 64 {
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & m != 0) else {
            continue;
        };
        rows.swap(p, rank);
        let pivot = rows[rank].clone();
        for r in 0..rows.len() {
            if r != rank && rows[r][w] & m != 0 {
                for (x, y) in rows[r].iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> Matrix {
        Matrix::from_fn(Field::Real, n, n, |i, j| (i == j) as u8 as f64)
    }

    #[test]
    fn rank_of_identity_and_zero() {
        assert_eq!(identity(4).rank(1e-9), 4);
        assert_eq!(Matrix::zeros(Field::Real, 3, 5).rank(1e-9), 0);
        assert_eq!(Matrix::ones(Field::Gf2, 3, 3).rank(0.0), 1);
    }

    #[test]
    fn gf2_rank_differs_from_real() {
        // J - I on 3x3: real rank 3, gf2 rank 2 (rows sum to zero mod 2)
        let m = Matrix::from_fn(Field::Real, 3, 3, |i, j| (i != j) as u8 as f64);
        assert_eq!(m.rank(1e-9), 3);
        assert_eq!(m.with_field(Field::Gf2).unwrap().rank(0.0), 2);
    }

    #[test]
    fn sparsity_counts_nonzeros() {
        assert_eq!(identity(7).sparsity(), 7);
        assert_eq!(Matrix::ones(Field::Real, 4, 4).sparsity(), 16);
    }

    #[test]
    fn restrict_orders_and_bounds() {
        let m = Matrix::from_fn(Field::Real, 3, 3, |i, j| (3 * i + j) as f64);
        let r = m.restrict(&[2, 0], &[1]).unwrap();
        assert_eq!(r.data(), &[7.0, 1.0]);
        assert_eq!(m.restrict(&[0, 1, 2], &[0, 1, 2]).unwrap(), m);
        let e = m.restrict(&[], &[0, 1, 2]).unwrap();
        assert_eq!(e.shape(), (0, 3));
        assert!(matches!(
            m.restrict(&[3], &[0]),
            Err(Error::IndexOutOfRange { index: 3, bound: 3 })
        ));
    }

    #[test]
    fn text_format_is_exact() {
        let m = Matrix::from_rows(Field::Real, &[vec![0.5, -1.0], vec![0.1, 123456.789]]).unwrap();
        let text = m.to_text();
        assert_eq!(text, "matrix 2 2 real\n0.5 -1\n0.1 123456.789\n");
        assert_eq!(Matrix::from_text(&text).unwrap(), m);
    }

    #[test]
    fn text_rejects_bad_gf2_entries() {
        assert!(Matrix::from_text("matrix 1 2 gf2\n0 2\n").is_err());
        assert!(Matrix::from_text("matrix 2 2 real\n0 1\n").is_err());
        assert!(Matrix::from_text("matrix 1 1 real\nnan\n").is_err());
    }

    #[test]
    fn gf2_addition_is_xor() {
        let a = Matrix::ones(Field::Gf2, 2, 2);
        assert!(a.add(&a).unwrap().is_zero());
    }
}

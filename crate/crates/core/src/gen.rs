//! Deterministic matrix and graph generators.
//!
//! Every generator is a pure function of its arguments; randomized ones take
//! an explicit seed and use ChaCha8, so output is reproducible across
//! platforms. Matrices come back over the real field with 0/1 (or integer)
//! entries; call [`Matrix::with_field`] for GF(2).

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix};

pub const MAX_HD1_BITS: u32 = 14;
pub const MAX_FAMILY_BITS: u32 = 13;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn identity(n: usize) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::Precondition("identity needs n >= 1".into()));
    }
    Ok(Matrix::from_fn(Field::Real, n, n, |i, j| {
        (i == j) as u8 as f64
    }))
}

pub fn diagonal(values: &[f64]) -> Result<Matrix> {
    if values.is_empty() {
        return Err(Error::Precondition(
            "diagonal needs at least one value".into(),
        ));
    }
    let n = values.len();
    let mut data = vec![0.0; n * n];
    for (i, &x) in values.iter().enumerate() {
        data[i * n + i] = x;
    }
    Matrix::new(Field::Real, n, n, data)
}

fn family(n: u32, cap: u32, name: &str, f: impl Fn(usize, usize) -> bool) -> Result<Matrix> {
    if n == 0 || n > cap {
        return Err(Error::CapExceeded(format!(
            "{name} needs 1 <= n <= {cap}, got {n}"
        )));
    }
    let size = 1usize << n;
    Ok(Matrix::from_fn(Field::Real, size, size, |x, y| {
        f(x, y) as u8 as f64
    }))
}

/// Adjacency matrix of the `n`-dimensional Hamming cube.
pub fn hd1(n: u32) -> Result<Matrix> {
    family(n, MAX_HD1_BITS, "hd1", |x, y| (x ^ y).count_ones() == 1)
}

/// Inner product mod 2 of the binary expansions.
pub fn ip(n: u32) -> Result<Matrix> {
    family(n, MAX_FAMILY_BITS, "ip", |x, y| {
        (x & y).count_ones() % 2 == 1
    })
}

/// 1 iff the binary expansions have disjoint supports.
pub fn disj(n: u32) -> Result<Matrix> {
    family(n, MAX_FAMILY_BITS, "disj", |x, y| x & y == 0)
}

/// 1 iff `x > y` as integers.
pub fn gt(n: u32) -> Result<Matrix> {
    family(n, MAX_FAMILY_BITS, "gt", |x, y| x > y)
}

pub fn random_boolean_rect(nrows: usize, ncols: usize, density: f64, seed: u64) -> Result<Matrix> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Precondition(format!(
            "density {density} outside [0, 1]"
        )));
    }
    let mut r = rng(seed);
    let data = (0..nrows * ncols)
        .map(|_| r.gen_bool(density) as u8 as f64)
        .collect();
    Matrix::new(Field::Real, nrows, ncols, data)
}

pub fn random_boolean(n: usize, density: f64, seed: u64) -> Result<Matrix> {
    random_boolean_rect(n, n, density, seed)
}

/// Uniform entries in [0, 1] on the 1e-6 grid.
pub fn random_real(n: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    let data = (0..n * n)
        .map(|_| r.gen_range(0..=1_000_000u32) as f64 / 1e6)
        .collect();
    Matrix::new(Field::Real, n, n, data).expect("grid values are finite")
}

/// Simple undirected graph stored as a symmetric 0/1 adjacency matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    adj: Matrix,
    degrees: Vec<usize>,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut data = vec![0.0; n * n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange {
                    index: u.max(v),
                    bound: n,
                });
            }
            if u == v {
                return Err(Error::InvalidMatrix(format!("self-loop at {u}")));
            }
            data[u * n + v] = 1.0;
            data[v * n + u] = 1.0;
        }
        Graph::from_adjacency(Matrix::new(Field::Real, n, n, data)?)
    }

    pub fn from_adjacency(adj: Matrix) -> Result<Graph> {
        let (n, c) = adj.shape();
        if n != c || !adj.is_boolean() {
            return Err(Error::InvalidMatrix(
                "adjacency must be square and 0/1".into(),
            ));
        }
        for i in 0..n {
            if adj.get(i, i) != 0.0 {
                return Err(Error::InvalidMatrix(format!("self-loop at {i}")));
            }
            for j in 0..i {
                if adj.get(i, j) != adj.get(j, i) {
                    return Err(Error::InvalidMatrix("adjacency is not symmetric".into()));
                }
            }
        }
        let adj = adj.with_field(Field::Real)?;
        let degrees = (0..n)
            .map(|i| adj.row(i).iter().filter(|&&x| x != 0.0).count())
            .collect();
        Ok(Graph { n, adj, degrees })
    }

    pub fn complete(n: usize) -> Graph {
        let adj = Matrix::from_fn(Field::Real, n, n, |i, j| (i != j) as u8 as f64);
        Graph::from_adjacency(adj).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Result<Graph> {
        if n < 3 {
            return Err(Error::Precondition(
                "a cycle needs at least 3 vertices".into(),
            ));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Common degree, if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = *self.degrees.first()?;
        self.degrees.iter().all(|&x| x == d).then_some(d)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u, v) != 0.0
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj
            .row(v)
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(j, _)| j)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| {
                self.neighbors(u)
                    .filter(move |&v| u < v)
                    .map(move |v| (u, v))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("graph {}\n", self.n);
        for (u, v) in self.edges() {
            writeln!(s, "{u} {v}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let mut h = header.split_whitespace();
        let n = match (h.next(), h.next().map(str::parse::<usize>), h.next()) {
            (Some("graph"), Some(Ok(n)), None) => n,
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "expected `graph <n>`".into(),
                })
            }
        };
        let mut edges = Vec::new();
        for (ln, line) in lines {
            let nums: Vec<_> = line.split_whitespace().map(str::parse::<usize>).collect();
            match nums.as_slice() {
                [Ok(u), Ok(v)] => edges.push((*u, *v)),
                _ => {
                    return Err(Error::Parse {
                        line: ln + 1,
                        msg: format!("expected `u v`, got `{line}`"),
                    })
                }
            }
        }
        Graph::from_edges(n, &edges)
    }
}

/// Uniform-ish random `d`-regular simple graph on `n` vertices.
///
/// Pairing model where each step only joins two points whose vertices are
/// distinct and not yet adjacent; a dead end restarts the whole pairing.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n || (n * d) % 2 == 1 {
        return Err(Error::Precondition(format!(
            "random_regular needs d < n and n*d even (n={n}, d={d})"
        )));
    }
    let mut r = rng(seed);
    const RESTARTS: usize = 200;
    'attempt: for _ in 0..RESTARTS {
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut adj = vec![false; n * n];
        let mut edges = Vec::with_capacity(n * d / 2);
        while !points.is_empty() {
            let len = points.len();
            let mut chosen = None;
            for _ in 0..64 {
                let (a, b) = (r.gen_range(0..len), r.gen_range(0..len));
                let (u, v) = (points[a], points[b]);
                if a != b && u != v && !adj[u * n + v] {
                    chosen = Some((a, b));
                    break;
                }
            }
            if chosen.is_none() {
                let mut pairs = Vec::new();
                for a in 0..len {
                    for b in a + 1..len {
                        let (u, v) = (points[a], points[b]);
                        if u != v && !adj[u * n + v] {
                            pairs.push((a, b));
                        }
                    }
                }
                chosen = pairs.choose(&mut r).copied();
            }
            let Some((a, b)) = chosen else {
                continue 'attempt;
            };
            let (u, v) = (points[a], points[b]);
            adj[u * n + v] = true;
            adj[v * n + u] = true;
            edges.push((u, v));
            let (hi, lo) = (a.max(b), a.min(b));
            points.swap_remove(hi);
            points.swap_remove(lo);
        }
        return Graph::from_edges(n, &edges);
    }
    Err(Error::Construction(format!(
        "no simple {d}-regular graph on {n} vertices after {RESTARTS} restarts"
    )))
}

/// Largest absolute adjacency eigenvalue after removing the top one.
pub fn spectral_lambda(g: &Graph) -> f64 {
    let n = g.n();
    if n < 2 {
        return 0.0;
    }
    let a = DMatrix::from_row_slice(n, n, g.adjacency().data());
    let mut eig: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig[1..].iter().fold(0.0, |m, x| m.max(x.abs()))
}

//! Lower-bound calculators and the combinatorial checks they rest on.
//!
//! The restriction framework: if every `S x T` window with `|S|, |T| <= s`
//! of `M` holds at most `k(|S| + |T|)` nonzeros (P1), and every submatrix
//! keeping a `gamma` fraction of the nonzeros still contains a permutation
//! submatrix of size `D` (P2), then
//! `spr(M) > min(gamma * spar / (2kN), log2(D s / (2N)) / 4)` whenever
//! `D s > 2N`. The calculators here evaluate such formulas; the checks test
//! P1 and P2 directly on explicit matrices.

use std::fmt;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gen::{rng, Graph};
use crate::matrix::Matrix;
use crate::oracle::{exact_vc, MAX_VC_ROWS};
use crate::pattern::BlockyPattern;

/// Largest side length for exhaustive P1 checks.
pub const MAX_P1_EXHAUSTIVE_DIM: usize = 12;
/// Largest window size for exhaustive P1 checks.
pub const MAX_P1_EXHAUSTIVE_WINDOW: usize = 4;

const SHRINK_RANDOM_TRIES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameworkParams {
    /// Window size bounding `|S|` and `|T|`.
    pub s: usize,
    /// Density constant in `spar(M|S×T) <= k(|S| + |T|)`.
    pub k: f64,
    /// Guaranteed permutation submatrix size.
    pub d: usize,
    /// Fraction of nonzeros that must survive.
    pub gamma: f64,
}

/// Outcome of a bound computation or check.
///
/// `value` is the reported number; `raw` keeps an unrounded value when the
/// reported one was rounded. `valid` is false when a precondition of the
/// bound fails or a check finds a violation.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub inputs: Vec<(String, f64)>,
    pub value: f64,
    pub raw: Option<f64>,
    pub valid: bool,
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(name: &str, inputs: &[(&str, f64)], value: f64, valid: bool) -> Self {
        BoundReport {
            name: name.to_string(),
            inputs: inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            value,
            raw: None,
            valid,
            notes: Vec::new(),
        }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn input(&self, key: &str) -> Option<f64> {
        self.inputs.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bound: {}", self.name)?;
        for (k, v) in &self.inputs {
            writeln!(f, "input {k}: {v}")?;
        }
        writeln!(f, "value: {}", self.value)?;
        if let Some(raw) = self.raw {
            writeln!(f, "raw: {raw}")?;
        }
        writeln!(f, "valid: {}", self.valid)?;
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Rigidity lower bound `(spr - r)^2 / 4` from a spiky rank lower bound.
pub fn rigidity_lower_from_spr(spr_lb: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= spr_lb) {
        return Err(Error::Precondition(format!(
            "rank target {r} must lie in (0, {spr_lb}]"
        )));
    }
    Ok((spr_lb - r).powi(2) / 4.0)
}

/// Evaluates the restriction framework for a matrix with `spar` nonzeros on
/// an `n x n` grid. The value is conditional on P1 and P2 holding.
pub fn framework_bound(p: &FrameworkParams, spar: usize, n: usize) -> BoundReport {
    let density = p.gamma * spar as f64 / (2.0 * p.k * n as f64);
    let ds = p.d as f64 * p.s as f64;
    let growth = (ds / (2.0 * n as f64)).log2() / 4.0;
    let raw = density.min(growth);
    let valid = ds > 2.0 * n as f64 && p.k > 0.0;
    let mut r = BoundReport::new(
        "framework",
        &[
            ("s", p.s as f64),
            ("k", p.k),
            ("D", p.d as f64),
            ("gamma", p.gamma),
            ("spar", spar as f64),
            ("N", n as f64),
        ],
        raw.floor() + 1.0,
        valid,
    );
    r.raw = Some(raw);
    r = r.note("conditional on P1 (window density) and P2 (surviving permutation submatrix)");
    if !valid {
        r = r.note(format!(
            "D*s = {ds} does not exceed 2N = {}; no contradiction available",
            2 * n
        ));
    }
    r
}

/// Parameters for `d`-regular spectral expanders on `n` vertices.
pub fn expander_framework_params(n: usize, d: usize, lambda: f64) -> FrameworkParams {
    FrameworkParams {
        s: (n as f64 * lambda / (10.0 * d as f64)).floor() as usize,
        k: lambda,
        d: n / (4 * d),
        gamma: 0.5,
    }
}

/// Parameters for the Hamming-distance-one matrix on `n` bits.
pub fn hd1_framework_params(n: u32) -> FrameworkParams {
    let root = (n as f64).sqrt();
    FrameworkParams {
        s: root.exp2().floor() as usize,
        k: 2.0 * root,
        d: (1usize << n) / 4,
        gamma: 0.5,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum P1Mode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

fn subsets_up_to(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == s {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, s, &mut Vec::new(), &mut out);
    out
}

fn window_spar(m: &Matrix, rows: &[usize], cols: &[usize]) -> usize {
    rows.iter()
        .map(|&i| cols.iter().filter(|&&j| m.get(i, j) != 0.0).count())
        .sum()
}

/// Checks `spar(M|S×T) <= k(|S| + |T|)` over windows with `|S|, |T| <= s`.
/// The value is the worst ratio `spar / (|S| + |T|)` seen.
pub fn check_p1(m: &Matrix, s: usize, k: f64, mode: P1Mode) -> Result<BoundReport> {
    let (nrows, ncols) = m.shape();
    let s = s.min(nrows.max(ncols)).max(1);
    let mut worst = 0.0f64;
    let mut worst_at = (0, 0);
    let mut checked = 0usize;
    let mut consider = |rows: &[usize], cols: &[usize]| {
        let ratio = window_spar(m, rows, cols) as f64 / (rows.len() + cols.len()) as f64;
        checked += 1;
        if ratio > worst {
            worst = ratio;
            worst_at = (rows.len(), cols.len());
        }
    };
    let exhaustive = mode == P1Mode::Exhaustive;
    match mode {
        P1Mode::Exhaustive => {
            if nrows.max(ncols) > MAX_P1_EXHAUSTIVE_DIM || s > MAX_P1_EXHAUSTIVE_WINDOW {
                return Err(Error::CapExceeded(format!(
                    "exhaustive P1 needs N <= {MAX_P1_EXHAUSTIVE_DIM} and s <= {MAX_P1_EXHAUSTIVE_WINDOW}"
                )));
            }
            let row_sets = subsets_up_to(nrows, s);
            let col_sets = subsets_up_to(ncols, s);
            for r in &row_sets {
                for c in &col_sets {
                    consider(r, c);
                }
            }
        }
        P1Mode::Sampled { count, seed } => {
            let mut g = rng(seed);
            for _ in 0..count {
                let a = g.gen_range(1..=s.min(nrows));
                let b = g.gen_range(1..=s.min(ncols));
                let rows = sample(&mut g, nrows, a).into_vec();
                let cols = sample(&mut g, ncols, b).into_vec();
                consider(&rows, &cols);
            }
        }
    }
    let valid = worst <= k + 1e-12;
    let mut r = BoundReport::new(
        "p1",
        &[("s", s as f64), ("k", k), ("windows", checked as f64)],
        worst,
        valid,
    )
    .note(if exhaustive {
        "exhaustive"
    } else {
        "sampled; not exhaustive"
    });
    if !valid {
        r = r.note(format!(
            "worst window has |S| = {}, |T| = {}",
            worst_at.0, worst_at.1
        ));
    }
    Ok(r)
}

/// True when `M` restricted to `rows x cols` is a permutation matrix.
pub fn is_permutation_submatrix(m: &Matrix, rows: &[usize], cols: &[usize]) -> bool {
    if rows.len() != cols.len() {
        return false;
    }
    let sub = match m.restrict(rows, cols) {
        Ok(s) => s,
        Err(_) => return false,
    };
    let n = rows.len();
    let mut col_hits = vec![0; n];
    for i in 0..n {
        let mut hits = 0;
        for (j, hit) in col_hits.iter_mut().enumerate() {
            match sub.get(i, j) {
                0.0 => {}
                1.0 => {
                    hits += 1;
                    *hit += 1;
                }
                _ => return false,
            }
        }
        if hits != 1 {
            return false;
        }
    }
    col_hits.iter().all(|&h| h == 1)
}

/// Greedy permutation submatrix: take the first available one, then discard
/// every row and column that touches it.
pub fn find_permutation_submatrix_greedy(m: &Matrix) -> (Vec<usize>, Vec<usize>) {
    let (nrows, ncols) = m.shape();
    let mut row_alive = vec![true; nrows];
    let mut col_alive = vec![true; ncols];
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for i in 0..nrows {
        if !row_alive[i] {
            continue;
        }
        let Some(j) = (0..ncols).find(|&j| col_alive[j] && m.get(i, j) != 0.0) else {
            continue;
        };
        rows.push(i);
        cols.push(j);
        for (i2, alive) in row_alive.iter_mut().enumerate() {
            if m.get(i2, j) != 0.0 {
                *alive = false;
            }
        }
        for (j2, alive) in col_alive.iter_mut().enumerate() {
            if m.get(i, j2) != 0.0 {
                *alive = false;
            }
        }
        row_alive[i] = false;
        col_alive[j] = false;
    }
    (rows, cols)
}

/// Permutation submatrix of a subgraph `mp` of the `n`-bit Hamming cube that
/// keeps at least half the edges. Edges are grouped by flipped coordinate and
/// direction; each group is a matching, so the fullest group gives a
/// permutation submatrix of size at least `2^(n-2)`.
pub fn hd1_permutation_submatrix(mp: &Matrix, n: u32) -> Result<(Vec<usize>, Vec<usize>)> {
    let size = 1usize << n;
    if mp.shape() != (size, size) {
        return Err(Error::DimensionMismatch(format!(
            "expected {size}x{size}, got {}x{}",
            mp.nrows(),
            mp.ncols()
        )));
    }
    let mut surviving = 0usize;
    for x in 0..size {
        for y in 0..size {
            let v = mp.get(x, y);
            let edge = (x ^ y).count_ones() == 1;
            if v != 0.0 && !(edge && v == 1.0) {
                return Err(Error::Precondition(format!(
                    "entry ({x}, {y}) = {v} is not below the Hamming cube"
                )));
            }
            surviving += (v != 0.0) as usize;
        }
    }
    let total = n as usize * size;
    if surviving == 0 || 2 * surviving < total {
        return Err(Error::Precondition(format!(
            "only {surviving} of {total} edges survive; need at least half"
        )));
    }
    let mut best: Option<(usize, Vec<usize>)> = None;
    for bit in 0..n {
        for side in 0..2 {
            let xs: Vec<usize> = (0..size)
                .filter(|&x| (x >> bit) & 1 == side && mp.get(x, x ^ (1 << bit)) == 1.0)
                .collect();
            if best.as_ref().is_none_or(|(_, b)| xs.len() > b.len()) {
                best = Some((bit as usize, xs));
            }
        }
    }
    let (bit, rows) = best.expect("at least one coordinate");
    let cols: Vec<usize> = rows.iter().map(|&x| x ^ (1 << bit)).collect();
    if !is_permutation_submatrix(mp, &rows, &cols) || 4 * rows.len() < size {
        return Err(Error::Construction(
            "matching group failed its check".into(),
        ));
    }
    Ok((rows, cols))
}

/// Finds `V` with `|V| >= N/4` and `B|V×V = 0`, for a blocky pattern whose
/// support avoids the diagonal. Each block drops either its rows or its
/// columns from `V` on a fair coin; random rounds are tried first, then the
/// coins are fixed one by one by conditional expectation.
pub fn shrink_avoiding_blocky(b: &BlockyPattern, n: usize, seed: u64) -> Result<Vec<usize>> {
    if b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "pattern is {}x{}, expected {n}x{n}",
            b.nrows(),
            b.ncols()
        )));
    }
    if let Some(i) = (0..n).find(|&i| b.covers(i, i)) {
        return Err(Error::Precondition(format!(
            "pattern covers diagonal cell ({i}, {i})"
        )));
    }
    let blocks = b.blocks();
    let survivors = |coins: &[bool]| -> Vec<usize> {
        let mut keep = vec![true; n];
        for (blk, &heads) in blocks.iter().zip(coins) {
            let drop = if heads { &blk.cols } else { &blk.rows };
            for &x in drop {
                keep[x] = false;
            }
        }
        (0..n).filter(|&x| keep[x]).collect()
    };
    let mut g = rng(seed);
    let mut v = None;
    for _ in 0..SHRINK_RANDOM_TRIES {
        let coins: Vec<bool> = (0..blocks.len()).map(|_| g.gen()).collect();
        let cand = survivors(&coins);
        if 4 * cand.len() >= n {
            v = Some(cand);
            break;
        }
    }
    let v = match v {
        Some(v) => v,
        None => survivors(&derandomized_coins(b)),
    };
    let clean = v.iter().all(|&i| v.iter().all(|&j| !b.covers(i, j)));
    if !clean || 4 * v.len() < n {
        return Err(Error::Construction(format!(
            "surviving set of size {} fails its postconditions",
            v.len()
        )));
    }
    Ok(v)
}

fn derandomized_coins(b: &BlockyPattern) -> Vec<bool> {
    let n = b.nrows();
    let mut coins: Vec<Option<bool>> = vec![None; b.len()];
    // Vertex x survives when its row block (if any) shows heads and its column
    // block (if any) shows tails.
    let expected = |coins: &[Option<bool>]| -> f64 {
        (0..n)
            .map(|x| {
                let row = b.block_of_row(x).map_or(1.0, |a| match coins[a] {
                    Some(true) => 1.0,
                    Some(false) => 0.0,
                    None => 0.5,
                });
                let col = b.block_of_col(x).map_or(1.0, |a| match coins[a] {
                    Some(true) => 0.0,
                    Some(false) => 1.0,
                    None => 0.5,
                });
                row * col
            })
            .sum()
    };
    for a in 0..coins.len() {
        coins[a] = Some(true);
        let heads = expected(&coins);
        coins[a] = Some(false);
        let tails = expected(&coins);
        coins[a] = Some(heads >= tails);
    }
    coins.into_iter().map(|c| c.unwrap()).collect()
}

/// Samples vertex-set pairs and checks
/// `e(S,T) <= d|S||T|/N + lambda * sqrt(|S||T|)`. Half the samples are
/// uniform random sets; the other half pair a few vertices with their
/// neighbourhood, where the edge count is concentrated. The value is the
/// largest excess `e(S,T) - bound` observed.
pub fn expander_mixing_check(
    g: &Graph,
    lambda: f64,
    samples: usize,
    seed: u64,
) -> Result<BoundReport> {
    let d = g
        .regular_degree()
        .ok_or_else(|| Error::Precondition("mixing check needs a regular graph".into()))?;
    let n = g.n();
    let adj = g.adjacency();
    let mut r = rng(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0usize;
    let mut check = |s: &[usize], t: &[usize]| {
        let e = window_spar(adj, s, t) as f64;
        let st = (s.len() * t.len()) as f64;
        let bound = d as f64 * st / n as f64 + lambda * st.sqrt();
        let excess = e - bound;
        if excess > 1e-9 {
            violations += 1;
        }
        worst = worst.max(excess);
    };
    let all: Vec<usize> = (0..n).collect();
    check(&all, &all);
    for k in 0..samples {
        if k % 2 == 0 {
            let a = r.gen_range(1..=n);
            let b = r.gen_range(1..=n);
            let s = sample(&mut r, n, a).into_vec();
            let t = sample(&mut r, n, b).into_vec();
            check(&s, &t);
        } else {
            let a = r.gen_range(1..=n.min(3));
            let s = sample(&mut r, n, a).into_vec();
            let mut hood = vec![false; n];
            for &v in &s {
                for u in g.neighbors(v) {
                    hood[u] = true;
                }
            }
            let t: Vec<usize> = (0..n).filter(|&u| hood[u]).collect();
            if !t.is_empty() {
                check(&s, &t);
            }
        }
    }
    Ok(BoundReport::new(
        "mixing",
        &[
            ("N", n as f64),
            ("d", d as f64),
            ("lambda", lambda),
            ("samples", samples as f64 + 1.0),
            ("violations", violations as f64),
        ],
        worst,
        violations == 0,
    ))
}

/// Sign spiky rank lower bound `k / (12 log2 k)` for VC dimension `k`.
/// Vacuous (zero) when `k <= 1`.
pub fn sign_spr_lower_from_vc(k: usize) -> BoundReport {
    let value = if k <= 1 {
        0.0
    } else {
        k as f64 / (12.0 * (k as f64).log2())
    };
    let mut r = BoundReport::new("vc", &[("vc", k as f64)], value, true)
        .note("relies on sign spiky rank not increasing under restriction");
    if k <= 1 {
        r = r.note("VC dimension at most 1 gives no bound");
    }
    r
}

/// [`sign_spr_lower_from_vc`] with the VC dimension computed exactly.
pub fn vc_sign_spr_lower(m: &Matrix) -> Result<BoundReport> {
    if m.nrows() > MAX_VC_ROWS {
        return Err(Error::CapExceeded(format!(
            "exact VC dimension needs at most {MAX_VC_ROWS} rows; supply it via sign_spr_lower_from_vc"
        )));
    }
    Ok(sign_spr_lower_from_vc(exact_vc(m)?))
}

/// Bits needed to name every `N x N` sign pattern of spiky rank at most `r`:
/// `6rN log2 N`.
pub fn warren_count_log(n: usize, r: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("N must be at least 2".into()));
    }
    Ok(6.0 * r as f64 * n as f64 * (n as f64).log2())
}

/// Spiky rank that almost every random `N x N` sign matrix exceeds:
/// `N / (12 log2 N)`.
pub fn random_lb_threshold(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("N must be at least 2".into()));
    }
    Ok(n as f64 / (12.0 * (n as f64).log2()))
}

/// Upper bound on the γ2 norm from the factorizations `M = M·I` and
/// `M = I·M`: the smaller of the largest row and column ℓ2 norms.
pub fn gamma2_trivial_upper(m: &Matrix) -> f64 {
    let (nrows, ncols) = m.shape();
    let row = (0..nrows)
        .map(|i| m.row(i).iter().map(|x| x * x).sum::<f64>())
        .fold(0.0, f64::max);
    let col = (0..ncols)
        .map(|j| (0..nrows).map(|i| m.get(i, j).powi(2)).sum::<f64>())
        .fold(0.0, f64::max);
    row.min(col).sqrt()
}

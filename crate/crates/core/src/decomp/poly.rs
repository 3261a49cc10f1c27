use crate::decomposition::{BlockyTerm, Decomposition, DecompositionKind};
use crate::error::{Error, Result};
use crate::matrix::Field;
use crate::pattern::BlockyPattern;

const MAX_EXPANSION: f64 = 1e5;

/// Blocky decomposition of `p(M)` (applied entrywise) from one of `M`.
///
/// `p[d]` is the coefficient of `x^d`. The `d`-th Hadamard power of
/// `Σ αᵢ Bᵢ` expands over multisets of term indices, each contributing the
/// AND of its patterns with a multinomial weight.
pub fn poly_compose_blocky(d: &Decomposition, p: &[f64]) -> Result<Decomposition> {
    if d.kind() != DecompositionKind::BlockySum || d.field() != Field::Real {
        return Err(Error::Precondition(
            "composition needs a real BlockySum".into(),
        ));
    }
    let base = d.blocky_terms().expect("BlockySum holds blocky terms");
    let deg = p.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    let br = base.len().max(1) as f64;
    if deg as f64 * br.powi(deg as i32) > MAX_EXPANSION {
        return Err(Error::CapExceeded(format!(
            "degree {deg} over {} terms exceeds the expansion cap",
            base.len()
        )));
    }
    let (nrows, ncols) = d.shape();
    let mut terms = Vec::new();
    if p.first().is_some_and(|&c| c != 0.0) {
        terms.push(BlockyTerm::new(BlockyPattern::full(nrows, ncols), p[0]));
    }
    for (power, &coeff) in p.iter().enumerate().skip(1) {
        if coeff != 0.0 {
            let mut counts = vec![0u32; base.len()];
            expand(&base, power, 0, None, &mut counts, coeff, &mut terms);
        }
    }

    let count = terms.len();
    Ok(Decomposition::blocky_sum(Field::Real, nrows, ncols, terms)?
        .with_metadata("algo", "poly-compose")
        .with_metadata("degree", deg)
        .with_metadata("termCount", count))
}

fn expand(
    base: &[&BlockyTerm],
    remaining: usize,
    from: usize,
    acc: Option<(BlockyPattern, f64)>,
    counts: &mut [u32],
    coeff: f64,
    out: &mut Vec<BlockyTerm>,
) {
    if remaining == 0 {
        let (pattern, prod) = acc.expect("power is at least one");
        let total: u32 = counts.iter().sum();
        let mut weight = (1..=total).map(f64::from).product::<f64>();
        for &c in counts.iter() {
            weight /= (1..=c).map(f64::from).product::<f64>();
        }
        let value = coeff * weight * prod;
        if value != 0.0 {
            out.push(BlockyTerm::new(pattern, value));
        }
        return;
    }
    for i in from..base.len() {
        let t = base[i];
        let next = match &acc {
            None => (t.pattern.clone(), t.coeff),
            Some((p, c)) => (p.intersect(&t.pattern), c * t.coeff),
        };
        if next.0.is_empty() {
            continue;
        }
        counts[i] += 1;
        expand(base, remaining - 1, i, Some(next), counts, coeff, out);
        counts[i] -= 1;
    }
}

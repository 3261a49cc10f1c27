//! JSON certificates for decompositions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::decomposition::{BlockyTerm, Decomposition, DecompositionKind, SpikyTerm, Term};
use crate::error::{Error, Result};
use crate::matrix::Field;
use crate::pattern::{Block, BlockyPattern};

#[derive(Serialize, Deserialize)]
struct CertBlock {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CertTerm {
    blocks: Vec<CertBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Certificate {
    kind: String,
    field: String,
    nrows: usize,
    ncols: usize,
    terms: Vec<CertTerm>,
    #[serde(default)]
    metadata: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_hash: Option<String>,
}

fn blocks_of(p: &BlockyPattern) -> Vec<CertBlock> {
    p.blocks()
        .iter()
        .map(|b| CertBlock {
            rows: b.rows.clone(),
            cols: b.cols.clone(),
        })
        .collect()
}

impl Decomposition {
    pub fn to_json(&self) -> String {
        let terms = self
            .terms()
            .iter()
            .map(|t| match t {
                Term::Blocky(b) => CertTerm {
                    blocks: blocks_of(&b.pattern),
                    coeff: Some(b.coeff),
                    u: None,
                    v: None,
                },
                Term::Spiky(s) => CertTerm {
                    blocks: blocks_of(&s.pattern),
                    coeff: None,
                    u: Some(s.u.clone()),
                    v: Some(s.v.clone()),
                },
            })
            .collect();
        let (nrows, ncols) = self.shape();
        let cert = Certificate {
            kind: self.kind().name().to_string(),
            field: self.field().name().to_string(),
            nrows,
            ncols,
            terms,
            metadata: self.metadata().clone(),
            epsilon: self.epsilon(),
            target_hash: self.target_hash().map(str::to_string),
        };
        let mut s = serde_json::to_string_pretty(&cert).expect("certificate serializes");
        s.push('\n');
        s
    }

    /// Parses a certificate. Structural invariants of patterns and terms are
    /// re-validated; agreement with a target is left to the verifier.
    pub fn from_json(text: &str) -> Result<Decomposition> {
        let cert: Certificate = serde_json::from_str(text)?;
        let kind = DecompositionKind::from_name(&cert.kind)?;
        let field: Field = cert
            .field
            .parse()
            .map_err(|_| Error::Certificate(format!("unknown field `{}`", cert.field)))?;
        let mut terms = Vec::with_capacity(cert.terms.len());
        for (k, t) in cert.terms.into_iter().enumerate() {
            let blocks = t
                .blocks
                .into_iter()
                .map(|b| Block::new(b.rows, b.cols))
                .collect();
            let pattern = BlockyPattern::new(cert.nrows, cert.ncols, blocks)?;
            let term = match (t.coeff, t.u, t.v) {
                (Some(c), None, None) => Term::Blocky(BlockyTerm::new(pattern, c)),
                (None, Some(u), Some(v)) => Term::Spiky(SpikyTerm::new(pattern, u, v)?),
                _ => {
                    return Err(Error::Certificate(format!(
                        "term {k} must carry either `coeff` or both `u` and `v`"
                    )))
                }
            };
            terms.push(term);
        }
        let mut d = Decomposition::new(kind, field, cert.nrows, cert.ncols, terms)?;
        if let Some(eps) = cert.epsilon {
            d = d.with_epsilon(eps);
        }
        d.set_metadata(cert.metadata);
        d.set_target_hash(cert.target_hash);
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn json_round_trip_is_exact() {
        let p = BlockyPattern::new(
            3,
            3,
            vec![
                Block::new(vec![0, 2], vec![1]),
                Block::new(vec![1], vec![0, 2]),
            ],
        )
        .unwrap();
        let m = Matrix::from_fn(Field::Real, 3, 3, |i, j| (i * 3 + j) as f64 * 0.1);
        let d = Decomposition::new(
            DecompositionKind::SpikySum,
            Field::Real,
            3,
            3,
            vec![
                Term::Blocky(BlockyTerm::new(p.clone(), -0.3)),
                Term::Spiky(
                    SpikyTerm::new(p, vec![0.1, 0.2, 1e-7], vec![3.0, 1.0 / 3.0, 7.5]).unwrap(),
                ),
            ],
        )
        .unwrap()
        .with_metadata("algo", "test")
        .with_target(&m);
        let back = Decomposition::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_json(), d.to_json());
    }

    #[test]
    fn rejects_overlapping_blocks() {
        let text = r#"{"kind":"BlockySum","field":"real","nrows":2,"ncols":2,
            "terms":[{"blocks":[{"rows":[0],"cols":[0]},{"rows":[0],"cols":[1]}],"coeff":1}]}"#;
        assert!(Decomposition::from_json(text).is_err());
    }

    #[test]
    fn rejects_term_without_values() {
        let text = r#"{"kind":"BlockySum","field":"real","nrows":1,"ncols":1,
            "terms":[{"blocks":[{"rows":[0],"cols":[0]}]}]}"#;
        assert!(matches!(
            Decomposition::from_json(text),
            Err(Error::Certificate(_))
        ));
    }
}

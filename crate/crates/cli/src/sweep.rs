//! TOML-configured sweeps over matrix families, emitted as CSV.
//!
//! ```toml
//! seed = 7                  # needed only by random families
//!
//! [[family]]
//! kind = "gf2-all"          # every n x n matrix over GF(2), n <= 4
//! sizes = [3]
//! measures = ["spr-gf2"]
//! histogram = true          # count instances per measure tuple
//!
//! [[family]]
//! kind = "hd1"
//! sizes = [1, 2, 3]
//! measures = ["hd1-blocky-terms", "framework-lower", "framework-valid"]
//! ```
//!
//! Each family emits its own CSV table; tables are separated by a blank line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use serde::Deserialize;

use blocky_core::bounds::{
    framework_bound, gamma2_trivial_upper, hd1_framework_params, random_lb_threshold,
    warren_count_log,
};
use blocky_core::decomp::{hd1_blocky, sparse_boolean_to_blocky, sparse_to_spiky};
use blocky_core::gen;
use blocky_core::oracle::{exact_blocky_rank_real, exact_spiky_rank_gf2, exact_vc, MAX_ORACLE_DIM};
use blocky_core::{gf2_rank, Field, Matrix};

use crate::commands::{emit, read_text};
use crate::{usage, Global};

const KINDS: &[&str] = &[
    "gf2-all", "identity", "diagonal", "hd1", "ip", "disj", "gt", "random",
];
const MEASURES: &[&str] = &[
    "sparsity",
    "rank",
    "rank-gf2",
    "spr-gf2",
    "br",
    "vc",
    "gamma2-upper",
    "sparse-spiky-terms",
    "sparse-boolean-terms",
    "hd1-blocky-terms",
    "framework-lower",
    "framework-valid",
    "random-threshold",
    "warren-bits-r1",
];
const HD1_ONLY: &[&str] = &["hd1-blocky-terms", "framework-lower", "framework-valid"];

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// TOML configuration; --in is accepted as well.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct Config {
    seed: Option<u64>,
    family: Vec<Family>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct Family {
    kind: String,
    sizes: Vec<usize>,
    measures: Vec<String>,
    #[serde(default)]
    histogram: bool,
    /// Instances per size for `random`.
    count: Option<usize>,
    /// Density of ones for `random`.
    density: Option<f64>,
}

fn validate(cfg: &Config, seed: Option<u64>) -> Result<()> {
    for f in &cfg.family {
        if !KINDS.contains(&f.kind.as_str()) {
            return Err(usage(format!("unknown family `{}`", f.kind)));
        }
        if f.measures.is_empty() {
            return Err(usage(format!("family `{}` lists no measures", f.kind)));
        }
        for m in &f.measures {
            if !MEASURES.contains(&m.as_str()) {
                return Err(usage(format!("unknown measure `{m}`")));
            }
            if HD1_ONLY.contains(&m.as_str()) && f.kind != "hd1" {
                return Err(usage(format!(
                    "measure `{m}` applies only to the hd1 family"
                )));
            }
        }
        if f.kind == "gf2-all" && f.sizes.iter().any(|&n| n > MAX_ORACLE_DIM) {
            return Err(usage(format!(
                "gf2-all sizes are limited to {MAX_ORACLE_DIM}"
            )));
        }
        if f.kind == "random" {
            if seed.is_none() {
                return Err(usage(
                    "random families require a seed (config `seed` or --seed)",
                ));
            }
            if f.density.is_some_and(|d| !(0.0..=1.0).contains(&d)) {
                return Err(usage("density must lie in [0, 1]"));
            }
        }
    }
    Ok(())
}

fn instances(f: &Family, n: usize, seed: u64) -> Result<Vec<(u64, Matrix)>> {
    let bits = || u32::try_from(n).map_err(|_| usage("size too large"));
    Ok(match f.kind.as_str() {
        "gf2-all" => {
            let cells = n * n;
            (0u64..1 << cells)
                .map(|mask| {
                    let m =
                        Matrix::from_fn(Field::Gf2, n, n, |i, j| (mask >> (i * n + j) & 1) as f64);
                    (mask, m)
                })
                .collect()
        }
        "identity" => vec![(0, gen::identity(n)?)],
        "diagonal" => vec![(
            0,
            gen::diagonal(&(1..=n).map(|x| x as f64).collect::<Vec<_>>())?,
        )],
        "hd1" => vec![(0, gen::hd1(bits()?)?)],
        "ip" => vec![(0, gen::ip(bits()?)?)],
        "disj" => vec![(0, gen::disj(bits()?)?)],
        "gt" => vec![(0, gen::gt(bits()?)?)],
        "random" => {
            let density = f.density.unwrap_or(0.5);
            (0..f.count.unwrap_or(1) as u64)
                .map(|k| {
                    let s = seed.wrapping_add(k).wrapping_add((n as u64) << 32);
                    Ok((k, gen::random_boolean(n, density, s)?))
                })
                .collect::<Result<_>>()?
        }
        other => unreachable!("kind `{other}` passed validation"),
    })
}

fn measure(name: &str, n: usize, m: &Matrix, tol: f64) -> Result<String> {
    let bounded = |r: Option<usize>, limit: usize| match r {
        Some(v) => v.to_string(),
        None => format!(">{limit}"),
    };
    Ok(match name {
        "sparsity" => m.sparsity().to_string(),
        "rank" => m.with_field(Field::Real)?.rank(tol).to_string(),
        "rank-gf2" => gf2_rank((0..m.nrows()).map(|i| m.packed_row(i)).collect()).to_string(),
        "spr-gf2" => bounded(exact_spiky_rank_gf2(&m.with_field(Field::Gf2)?, 4)?, 4),
        "br" => bounded(exact_blocky_rank_real(&m.with_field(Field::Real)?, 4)?, 4),
        "vc" => exact_vc(m)?.to_string(),
        "gamma2-upper" => gamma2_trivial_upper(m).to_string(),
        "sparse-spiky-terms" => sparse_to_spiky(&m.with_field(Field::Real)?)
            .len()
            .to_string(),
        "sparse-boolean-terms" => sparse_boolean_to_blocky(&m.with_field(Field::Real)?)?
            .len()
            .to_string(),
        "hd1-blocky-terms" => hd1_blocky(n as u32)?.len().to_string(),
        "framework-lower" | "framework-valid" => {
            let size = 1usize << n;
            let r = framework_bound(&hd1_framework_params(n as u32), n * size, size);
            if name == "framework-lower" {
                r.value.to_string()
            } else {
                r.valid.to_string()
            }
        }
        "random-threshold" => random_lb_threshold(m.nrows().max(2))?.to_string(),
        "warren-bits-r1" => warren_count_log(m.nrows().max(2), 1)?.to_string(),
        other => unreachable!("measure `{other}` passed validation"),
    })
}

pub fn run(g: &Global, a: SweepArgs) -> Result<ExitCode> {
    let path = a
        .config
        .as_deref()
        .or(g.input.as_deref())
        .ok_or_else(|| usage("sweep needs --config <PATH>"))?;
    let text = read_text(path)?;
    let cfg: Config =
        toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let seed = g.seed.or(cfg.seed);
    validate(&cfg, seed)?;

    let mut out = String::new();
    for (idx, f) in cfg.family.iter().enumerate() {
        if idx > 0 {
            out.push('\n');
        }
        let cols = f.measures.join(",");
        if f.histogram {
            writeln!(out, "family,size,{cols},count").unwrap();
        } else {
            writeln!(out, "family,size,instance,{cols}").unwrap();
        }
        for &n in &f.sizes {
            let mut hist: BTreeMap<Vec<String>, usize> = BTreeMap::new();
            for (id, m) in instances(f, n, seed.unwrap_or(0))? {
                let values = f
                    .measures
                    .iter()
                    .map(|name| measure(name, n, &m, g.tol))
                    .collect::<Result<Vec<_>>>()
                    .with_context(|| format!("{} size {n} instance {id}", f.kind))?;
                if f.histogram {
                    *hist.entry(values).or_default() += 1;
                } else {
                    writeln!(out, "{},{n},{id},{}", f.kind, values.join(",")).unwrap();
                }
            }
            for (values, count) in hist {
                writeln!(out, "{},{n},{},{count}", f.kind, values.join(",")).unwrap();
            }
        }
    }
    emit(g, &out)?;
    Ok(ExitCode::SUCCESS)
}

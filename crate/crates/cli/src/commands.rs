use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;

use blocky_core::bounds::{
    check_p1, expander_framework_params, expander_mixing_check, framework_bound,
    gamma2_trivial_upper, random_lb_threshold, rigidity_lower_from_spr, sign_spr_lower_from_vc,
    vc_sign_spr_lower, warren_count_log, BoundReport, FrameworkParams, P1Mode,
};
use blocky_core::decomp::{
    approx_hd1, cover_to_blocky, hd1_blocky, relu_to_spiky, sign_hd1, sparse_boolean_to_blocky,
    sparse_to_spiky, spiky_to_blocky, ReluGate,
};
use blocky_core::gen::{self, Graph};
use blocky_core::oracle::{
    blocky_rank_real_witness, exact_rigidity_gf2, exact_vc, spiky_rank_gf2_witness, MAX_ORACLE_RANK,
};
use blocky_core::{
    verify_decomposition, Block, BlockyPattern, Decomposition, Error as CoreError, Field, Matrix,
};

use crate::{usage, Global};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn input_path(g: &Global) -> Result<&Path> {
    g.input
        .as_deref()
        .ok_or_else(|| usage("this command needs --in <PATH>"))
}

pub fn read_matrix(g: &Global) -> Result<Matrix> {
    let path = input_path(g)?;
    Matrix::from_text(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| usage(format!("missing --{flag}")))
}

fn need_seed(g: &Global) -> Result<u64> {
    g.seed
        .ok_or_else(|| usage("randomized command requires --seed"))
}

fn parse_list(s: &str, flag: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("--{flag}: `{t}`: {e}")))
        })
        .collect()
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// identity, diagonal, hd1, ip, disj, gt, random, random-real or regular.
    pub family: String,
    /// Size parameter: bits for hd1/ip/disj/gt, side length otherwise.
    #[arg(long)]
    pub n: Option<usize>,
    /// Density of ones for `random`.
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
    /// Degree for `regular`.
    #[arg(long)]
    pub degree: Option<usize>,
}

pub fn gen(g: &Global, a: GenArgs) -> Result<ExitCode> {
    let n = need(a.n, "n")?;
    let bits = || u32::try_from(n).map_err(|_| usage("--n too large"));
    let m = match a.family.as_str() {
        "identity" => gen::identity(n)?,
        "diagonal" => gen::diagonal(&(1..=n).map(|x| x as f64).collect::<Vec<_>>())?,
        "hd1" => gen::hd1(bits()?)?,
        "ip" => gen::ip(bits()?)?,
        "disj" => gen::disj(bits()?)?,
        "gt" => gen::gt(bits()?)?,
        "random" => {
            if !(0.0..=1.0).contains(&a.density) {
                return Err(usage("--density must lie in [0, 1]"));
            }
            gen::random_boolean(n, a.density, need_seed(g)?)?
        }
        "random-real" => gen::random_real(n, need_seed(g)?),
        "regular" => {
            let d = need(a.degree, "degree")?;
            let graph = gen::random_regular(n, d, need_seed(g)?)?;
            emit(g, &graph.to_text())?;
            return Ok(ExitCode::SUCCESS);
        }
        other => return Err(usage(format!("unknown family `{other}`"))),
    };
    let m = match g.field.as_deref() {
        Some(f) => m.with_field(f.parse()?)?,
        None => m,
    };
    emit(g, &m.to_text())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// sparse-spiky, sparse-boolean, cover, hd1, sign-hd1, approx-hd1, relu or spiky-blocky.
    #[arg(long)]
    pub algo: String,
    /// Bits for the hd1 constructions.
    #[arg(long)]
    pub n: Option<u32>,
    /// Code length factor for approx-hd1.
    #[arg(long)]
    pub k: Option<u32>,
    /// Comma-separated row weights of a ReLU gate.
    #[arg(long)]
    pub w1: Option<String>,
    /// Comma-separated column weights of a ReLU gate.
    #[arg(long)]
    pub w2: Option<String>,
    /// Bias of a ReLU gate.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Spiky certificate to convert, for spiky-blocky.
    #[arg(long)]
    pub spiky: Option<std::path::PathBuf>,
}

/// Cover of a Boolean matrix: rows with equal support form one block, and
/// blocks are packed first-fit into patterns with disjoint column sets.
pub fn row_class_cover(m: &Matrix) -> Result<Vec<BlockyPattern>> {
    let (nrows, ncols) = m.shape();
    let mut classes: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for i in 0..nrows {
        let cols: Vec<usize> = (0..ncols).filter(|&j| m.get(i, j) != 0.0).collect();
        if cols.is_empty() {
            continue;
        }
        match classes.iter_mut().find(|(_, c)| *c == cols) {
            Some((rows, _)) => rows.push(i),
            None => classes.push((vec![i], cols)),
        }
    }
    let mut bins: Vec<(Vec<Block>, Vec<bool>)> = Vec::new();
    for (rows, cols) in classes {
        let slot = bins
            .iter()
            .position(|(_, used)| cols.iter().all(|&j| !used[j]));
        let idx = slot.unwrap_or_else(|| {
            bins.push((Vec::new(), vec![false; ncols]));
            bins.len() - 1
        });
        let (blocks, used) = &mut bins[idx];
        cols.iter().for_each(|&j| used[j] = true);
        blocks.push(Block::new(rows, cols));
    }
    bins.into_iter()
        .map(|(blocks, _)| BlockyPattern::new(nrows, ncols, blocks).map_err(Into::into))
        .collect()
}

pub fn decompose(g: &Global, a: DecomposeArgs) -> Result<ExitCode> {
    let boolean_input = || -> Result<Matrix> {
        let m = read_matrix(g)?;
        if !m.is_boolean() {
            return Err(usage(format!("--algo {} needs a Boolean matrix", a.algo)));
        }
        Ok(m)
    };
    let (d, target) = match a.algo.as_str() {
        "sparse-spiky" => {
            let m = read_matrix(g)?;
            (sparse_to_spiky(&m), Some(m))
        }
        "sparse-boolean" => {
            let m = boolean_input()?;
            (sparse_boolean_to_blocky(&m)?, Some(m))
        }
        "cover" => {
            let m = boolean_input()?;
            if m.is_zero() {
                return Err(usage("cover needs at least one nonzero entry"));
            }
            (cover_to_blocky(&row_class_cover(&m)?)?, Some(m))
        }
        "hd1" => (hd1_blocky(need(a.n, "n")?)?, None),
        "sign-hd1" => (sign_hd1(need(a.n, "n")?)?, None),
        "approx-hd1" => (
            approx_hd1(need(a.n, "n")?, need(a.k, "k")?)?.decomposition,
            None,
        ),
        "relu" => {
            let w1 = parse_list(&need(a.w1, "w1")?, "w1")?;
            let w2 = parse_list(&need(a.w2, "w2")?, "w2")?;
            let gate = ReluGate::new(w1, w2, a.alpha).map_err(|e| usage(e.to_string()))?;
            (relu_to_spiky(&gate), Some(gate.matrix()))
        }
        "spiky-blocky" => {
            let m = boolean_input()?;
            let path = need(a.spiky, "spiky")?;
            let spiky = Decomposition::from_json(&read_text(&path)?)
                .with_context(|| format!("parsing {}", path.display()))?;
            (spiky_to_blocky(&m, &spiky)?, Some(m))
        }
        other => return Err(usage(format!("unknown algorithm `{other}`"))),
    };
    let d = match (&target, d.target_hash()) {
        (Some(m), None) => d.with_target(m),
        _ => d,
    };
    emit(g, &d.to_json())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Certificate to check against the matrix given by --in.
    #[arg(long)]
    pub cert: std::path::PathBuf,
}

pub fn verify(g: &Global, a: VerifyArgs) -> Result<ExitCode> {
    let m = read_matrix(g)?;
    let text = read_text(&a.cert)?;
    let d = match Decomposition::from_json(&text) {
        Ok(d) => d,
        Err(
            e @ (CoreError::Json(_)
            | CoreError::Certificate(_)
            | CoreError::InvalidPattern(_)
            | CoreError::InvalidMatrix(_)
            | CoreError::DimensionMismatch(_)
            | CoreError::IndexOutOfRange { .. }),
        ) => {
            emit(
                g,
                &format!("verification FAILED\ncertificate rejected: {e}\n"),
            )?;
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };
    let report = verify_decomposition(&d, &m, g.tol);
    emit(g, &report.to_string())?;
    Ok(if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// br, spr-gf2, rigidity or vc.
    #[arg(long)]
    pub measure: String,
    /// Target rank for rigidity; search limit for br and spr-gf2.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Write the witness decomposition here, when the measure has one.
    #[arg(long)]
    pub witness: Option<std::path::PathBuf>,
}

pub fn oracle(g: &Global, a: OracleArgs) -> Result<ExitCode> {
    let m = read_matrix(g)?;
    let limit = a.rank.unwrap_or(MAX_ORACLE_RANK);
    let mut out = format!("measure: {}\n", a.measure);
    let witness = match a.measure.as_str() {
        "br" => blocky_rank_real_witness(&m.with_field(Field::Real)?, limit)?,
        "spr-gf2" => spiky_rank_gf2_witness(&m.with_field(Field::Gf2)?, limit)?,
        "rigidity" => {
            let r = need(a.rank, "rank")?;
            let v = exact_rigidity_gf2(&m.with_field(Field::Gf2)?, r)?;
            out += &format!("rank: {r}\nvalue: {v}\n");
            emit(g, &out)?;
            return Ok(ExitCode::SUCCESS);
        }
        "vc" => {
            out += &format!("value: {}\n", exact_vc(&m)?);
            emit(g, &out)?;
            return Ok(ExitCode::SUCCESS);
        }
        other => return Err(usage(format!("unknown measure `{other}`"))),
    };
    match &witness {
        Some(d) => out += &format!("value: {}\n", d.len()),
        None => out += &format!("value: >{limit}\n"),
    }
    if let (Some(path), Some(d)) = (&a.witness, &witness) {
        fs::write(path, d.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(g, &out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// rigidity, framework, p1, mixing, vc, warren, threshold or gamma2.
    #[arg(long)]
    pub name: String,
    /// Spiky rank lower bound (rigidity).
    #[arg(long)]
    pub spr: Option<f64>,
    /// Target rank (rigidity, warren).
    #[arg(long)]
    pub r: Option<f64>,
    /// Window size (framework, p1).
    #[arg(long)]
    pub s: Option<usize>,
    /// Density constant (framework, p1).
    #[arg(long)]
    pub k: Option<f64>,
    /// Permutation submatrix size D (framework).
    #[arg(long = "perm")]
    pub perm: Option<usize>,
    /// Surviving fraction (framework).
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Number of nonzeros (framework).
    #[arg(long)]
    pub spar: Option<usize>,
    /// Matrix side N.
    #[arg(long = "size")]
    pub size: Option<usize>,
    /// Degree d; with --lambda derives expander parameters (framework).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Spectral bound lambda (framework, mixing).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Sample count; p1 is exhaustive without it.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Known VC dimension, instead of computing it from --in.
    #[arg(long)]
    pub vc: Option<usize>,
}

pub fn bounds(g: &Global, a: BoundsArgs) -> Result<ExitCode> {
    let report: BoundReport = match a.name.as_str() {
        "rigidity" => {
            let spr = need(a.spr, "spr")?;
            let r = need(a.r, "r")?;
            let v = rigidity_lower_from_spr(spr, r).map_err(|e| usage(e.to_string()))?;
            simple("rigidity", &[("spr", spr), ("r", r)], v)
        }
        "framework" => {
            let n = need(a.size, "size")?;
            let p = match (a.degree, a.lambda) {
                (Some(d), Some(l)) => expander_framework_params(n, d, l),
                _ => FrameworkParams {
                    s: need(a.s, "s")?,
                    k: need(a.k, "k")?,
                    d: need(a.perm, "perm")?,
                    gamma: a.gamma,
                },
            };
            let spar = match (a.spar, a.degree) {
                (Some(s), _) => s,
                (None, Some(d)) => n * d,
                (None, None) => return Err(usage("missing --spar")),
            };
            framework_bound(&p, spar, n)
        }
        "p1" => {
            let m = read_matrix(g)?;
            let mode = match a.samples {
                Some(count) => P1Mode::Sampled {
                    count,
                    seed: need_seed(g)?,
                },
                None => P1Mode::Exhaustive,
            };
            check_p1(&m, need(a.s, "s")?, need(a.k, "k")?, mode)?
        }
        "mixing" => {
            let path = input_path(g)?;
            let graph = Graph::from_text(&read_text(path)?)
                .with_context(|| format!("parsing {}", path.display()))?;
            let lambda = match a.lambda {
                Some(l) => l,
                None => gen::spectral_lambda(&graph),
            };
            expander_mixing_check(&graph, lambda, need(a.samples, "samples")?, need_seed(g)?)?
        }
        "vc" => match a.vc {
            Some(k) => sign_spr_lower_from_vc(k),
            None => vc_sign_spr_lower(&read_matrix(g)?)?,
        },
        "warren" => {
            let n = need(a.size, "size")?;
            let r = need(a.r, "r")?;
            if r < 0.0 || r.fract() != 0.0 {
                return Err(usage("--r must be a nonnegative integer"));
            }
            let v = warren_count_log(n, r as usize).map_err(|e| usage(e.to_string()))?;
            simple("warren", &[("N", n as f64), ("r", r)], v)
        }
        "threshold" => {
            let n = need(a.size, "size")?;
            let v = random_lb_threshold(n).map_err(|e| usage(e.to_string()))?;
            simple("threshold", &[("N", n as f64)], v)
        }
        "gamma2" => {
            let m = read_matrix(g)?;
            simple("gamma2", &[], gamma2_trivial_upper(&m))
        }
        other => return Err(usage(format!("unknown bound `{other}`"))),
    };
    emit(g, &report.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn simple(name: &str, inputs: &[(&str, f64)], value: f64) -> BoundReport {
    BoundReport {
        name: name.to_string(),
        inputs: inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        value,
        raw: None,
        valid: true,
        notes: Vec::new(),
    }
}

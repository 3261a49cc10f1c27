use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn blocky(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blocky"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ones(path: &Path) -> usize {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .flat_map(|l| l.split_whitespace())
        .filter(|t| *t == "1")
        .count()
}

#[test]
fn gen_hd1_has_expected_shape() {
    let dir = TempDir::new().unwrap();
    let m = p(&dir, "h.txt");
    let o = blocky(&["gen", "hd1", "--n", "3", "--out", &m]);
    assert!(o.status.success());
    let text = fs::read_to_string(&m).unwrap();
    assert!(text.starts_with("matrix 8 8 real\n"));
    assert_eq!(ones(Path::new(&m)), 24);
}

#[test]
fn decompose_then_verify_round_trips() {
    let dir = TempDir::new().unwrap();
    let m = p(&dir, "m.txt");
    assert!(blocky(&[
        "gen",
        "random",
        "--n",
        "12",
        "--density",
        "0.3",
        "--seed",
        "4",
        "--out",
        &m
    ])
    .status
    .success());
    for algo in ["sparse-spiky", "sparse-boolean", "cover"] {
        let c = p(&dir, &format!("{algo}.json"));
        let o = blocky(&["decompose", "--algo", algo, "--in", &m, "--out", &c]);
        assert!(
            o.status.success(),
            "{algo}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let v = blocky(&["verify", "--in", &m, "--cert", &c]);
        assert_eq!(v.status.code(), Some(0), "{algo}: {}", stdout(&v));
        assert!(stdout(&v).starts_with("ok: true"));
    }
}

#[test]
fn constructions_verify_against_generated_targets() {
    let dir = TempDir::new().unwrap();
    let h = p(&dir, "h.txt");
    blocky(&["gen", "hd1", "--n", "4", "--out", &h]);
    for (algo, extra) in [
        ("hd1", vec![]),
        ("sign-hd1", vec![]),
        ("approx-hd1", vec!["--k", "2"]),
    ] {
        let c = p(&dir, &format!("{algo}.json"));
        let mut args = vec!["decompose", "--algo", algo, "--n", "4", "--out", &c];
        args.extend(extra);
        assert!(blocky(&args).status.success(), "{algo}");
        assert_eq!(
            blocky(&["verify", "--in", &h, "--cert", &c]).status.code(),
            Some(0),
            "{algo}"
        );
    }
}

#[test]
fn tampered_certificate_exits_one() {
    let dir = TempDir::new().unwrap();
    let m = p(&dir, "h.txt");
    let c = p(&dir, "c.json");
    blocky(&["gen", "hd1", "--n", "3", "--out", &m]);
    blocky(&["decompose", "--algo", "hd1", "--n", "3", "--out", &c]);
    let text = fs::read_to_string(&c).unwrap();
    fs::write(&c, text.replacen("\"coeff\": 1.0", "\"coeff\": 2.0", 1)).unwrap();
    let v = blocky(&["verify", "--in", &m, "--cert", &c]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).starts_with("ok: false"));

    // Structurally broken certificates are rejected as failed verification too.
    fs::write(&c, "{\"kind\": \"BlockySum\"}").unwrap();
    assert_eq!(
        blocky(&["verify", "--in", &m, "--cert", &c]).status.code(),
        Some(1)
    );
}

#[test]
fn target_drift_is_detected() {
    let dir = TempDir::new().unwrap();
    let a = p(&dir, "a.txt");
    let b = p(&dir, "b.txt");
    let c = p(&dir, "c.json");
    blocky(&["gen", "identity", "--n", "5", "--out", &a]);
    blocky(&["gen", "diagonal", "--n", "5", "--out", &b]);
    blocky(&[
        "decompose",
        "--algo",
        "sparse-spiky",
        "--in",
        &a,
        "--out",
        &c,
    ]);
    assert_eq!(
        blocky(&["verify", "--in", &b, "--cert", &c]).status.code(),
        Some(1)
    );
}

#[test]
fn usage_and_runtime_errors_are_not_verification_failures() {
    assert_eq!(
        blocky(&["gen", "random", "--n", "4"]).status.code(),
        Some(2)
    );
    assert_eq!(
        blocky(&["gen", "nonsense", "--n", "4"]).status.code(),
        Some(2)
    );
    assert_eq!(blocky(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        blocky(&["decompose", "--algo", "nope", "--n", "2"])
            .status
            .code(),
        Some(2)
    );
    let missing = blocky(&[
        "verify",
        "--in",
        "/nonexistent/m.txt",
        "--cert",
        "/nonexistent/c.json",
    ]);
    assert_eq!(missing.status.code(), Some(3));
    let dir = TempDir::new().unwrap();
    let big = p(&dir, "big.txt");
    blocky(&["gen", "identity", "--n", "6", "--out", &big]);
    assert_eq!(
        blocky(&["oracle", "--measure", "br", "--in", &big])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn oracle_reports_and_writes_witness() {
    let dir = TempDir::new().unwrap();
    let m = p(&dir, "d.txt");
    let w = p(&dir, "w.json");
    blocky(&["gen", "diagonal", "--n", "3", "--out", &m]);
    let o = blocky(&["oracle", "--measure", "br", "--in", &m, "--witness", &w]);
    assert_eq!(stdout(&o), "measure: br\nvalue: 2\n");
    assert_eq!(
        blocky(&["verify", "--in", &m, "--cert", &w]).status.code(),
        Some(0)
    );
    let i = p(&dir, "i.txt");
    blocky(&["gen", "identity", "--n", "3", "--field", "gf2", "--out", &i]);
    let o = blocky(&["oracle", "--measure", "rigidity", "--rank", "1", "--in", &i]);
    assert_eq!(stdout(&o), "measure: rigidity\nrank: 1\nvalue: 2\n");
}

#[test]
fn bounds_print_reports() {
    let o = blocky(&["bounds", "--name", "rigidity", "--spr", "10", "--r", "2"]);
    assert!(stdout(&o).contains("value: 16\n"));
    let o = blocky(&["bounds", "--name", "warren", "--size", "4", "--r", "1"]);
    assert!(stdout(&o).contains("value: 48\n"));
    let o = blocky(&["bounds", "--name", "vc", "--vc", "2"]);
    assert!(stdout(&o).contains("valid: true"));
    let o = blocky(&[
        "bounds",
        "--name",
        "framework",
        "--size",
        "1000",
        "--degree",
        "10",
        "--lambda",
        "5",
    ]);
    let out = stdout(&o);
    assert!(out.contains("input s: 50\n") && out.contains("input D: 25\n"));
    assert!(out.contains("valid: false"));
    assert_eq!(
        blocky(&["bounds", "--name", "rigidity", "--spr", "1", "--r", "3"])
            .status
            .code(),
        Some(2)
    );

    let dir = TempDir::new().unwrap();
    let g = p(&dir, "g.txt");
    assert!(
        blocky(&["gen", "regular", "--n", "40", "--degree", "4", "--seed", "2", "--out", &g])
            .status
            .success()
    );
    let o = blocky(&[
        "bounds",
        "--name",
        "mixing",
        "--in",
        &g,
        "--samples",
        "200",
        "--seed",
        "1",
    ]);
    assert!(stdout(&o).contains("valid: true"), "{}", stdout(&o));
}

#[test]
fn sweep_is_deterministic_and_matches_histogram() {
    let dir = TempDir::new().unwrap();
    let cfg = p(&dir, "s.toml");
    fs::write(
        &cfg,
        "seed = 3\n\
         [[family]]\nkind = \"gf2-all\"\nsizes = [3]\nmeasures = [\"spr-gf2\"]\nhistogram = true\n\
         [[family]]\nkind = \"hd1\"\nsizes = [1, 2, 3]\nmeasures = [\"hd1-blocky-terms\", \"framework-valid\"]\n\
         [[family]]\nkind = \"random\"\nsizes = [6]\ncount = 3\ndensity = 0.4\nmeasures = [\"sparsity\", \"sparse-spiky-terms\"]\n",
    )
    .unwrap();
    let a = p(&dir, "a.csv");
    let b = p(&dir, "b.csv");
    assert!(blocky(&["sweep", "--config", &cfg, "--out", &a])
        .status
        .success());
    assert!(blocky(&["sweep", "--config", &cfg, "--out", &b])
        .status
        .success());
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with(
        "family,size,spr-gf2,count\ngf2-all,3,0,1\ngf2-all,3,1,127\ngf2-all,3,2,384\n"
    ));
    assert!(text.contains("hd1,3,0,3,false\n"));
    assert_eq!(
        text.lines().filter(|l| l.starts_with("random,6,")).count(),
        3
    );
}

#[test]
fn sweep_rejects_bad_configs() {
    let dir = TempDir::new().unwrap();
    let cfg = p(&dir, "s.toml");
    fs::write(
        &cfg,
        "[[family]]\nkind = \"nope\"\nsizes = [3]\nmeasures = [\"sparsity\"]\n",
    )
    .unwrap();
    assert_eq!(blocky(&["sweep", "--config", &cfg]).status.code(), Some(2));
    fs::write(
        &cfg,
        "[[family]]\nkind = \"random\"\nsizes = [3]\nmeasures = [\"sparsity\"]\n",
    )
    .unwrap();
    assert_eq!(blocky(&["sweep", "--config", &cfg]).status.code(), Some(2));
}

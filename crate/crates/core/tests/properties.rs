mod common;

use blocky_core::decomp::{
    circuit_to_spiky, cover_to_blocky, poly_compose_blocky, relu_to_spiky,
    sparse_boolean_to_blocky, sparse_to_spiky, spiky_to_blocky, spiky_to_blocky_cap,
    threshold_to_blocky,
};
use blocky_core::oracle::{
    exact_blocky_rank_real, exact_spiky_rank_gf2, heuristic_spiky_upper_real,
};
use blocky_core::{is_spiky, verify_decomposition, BlockyTerm, Decomposition, Field, Matrix};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn boolean(max: usize) -> impl Strategy<Value = Matrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::bool::weighted(0.3), r * c).prop_map(move |bits| {
            Matrix::new(
                Field::Real,
                r,
                c,
                bits.into_iter().map(|b| b as u8 as f64).collect(),
            )
            .unwrap()
        })
    })
}

fn subset(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(any::<bool>(), n).prop_map(|keep| {
        keep.iter()
            .enumerate()
            .filter(|(_, &k)| k)
            .map(|(i, _)| i)
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn sparse_to_spiky_verifies_and_respects_cap(m in boolean(24)) {
        let d = sparse_to_spiky(&m);
        prop_assert!(verify_decomposition(&d, &m, TOL).ok);
        prop_assert!(d.len() <= 2 * (m.sparsity() as f64).sqrt().ceil() as usize);
    }

    #[test]
    fn sparse_to_spiky_handles_real_entries(seed in any::<u64>(), n in 1usize..16) {
        let m = blocky_core::gen::random_real(n, seed);
        prop_assert!(verify_decomposition(&sparse_to_spiky(&m), &m, TOL).ok);
    }

    #[test]
    fn sparse_boolean_verifies(m in boolean(20)) {
        let d = sparse_boolean_to_blocky(&m).unwrap();
        prop_assert!(verify_decomposition(&d, &m, TOL).ok);
    }

    #[test]
    fn restriction_preserves_verification(m in boolean(12), seed in any::<u64>()) {
        let d = sparse_to_spiky(&m);
        let mut g = common::rng(seed);
        use rand::Rng;
        let rows: Vec<usize> = (0..m.nrows()).filter(|_| g.gen_bool(0.6)).collect();
        let cols: Vec<usize> = (0..m.ncols()).filter(|_| g.gen_bool(0.6)).collect();
        let sub = m.restrict(&rows, &cols).unwrap();
        let dr = d.restrict(&rows, &cols);
        prop_assert!(dr.len() <= d.len());
        prop_assert!(verify_decomposition(&dr, &sub, TOL).ok);
    }

    #[test]
    fn concat_is_subadditive(a in boolean(8), seed in any::<u64>()) {
        let b = blocky_core::gen::random_boolean_rect(a.nrows(), a.ncols(), 0.4, seed).unwrap();
        let da = sparse_to_spiky(&a);
        let db = sparse_to_spiky(&b);
        let sum = a.add(&b).unwrap();
        let d = da.concat(&db).unwrap();
        prop_assert_eq!(d.len(), da.len() + db.len());
        prop_assert!(verify_decomposition(&d, &sum, TOL).ok);
    }

    #[test]
    fn cover_inclusion_exclusion(seed in any::<u64>(), n in 1usize..14) {
        use rand::Rng;
        let mut g = common::rng(seed);
        let t = g.gen_range(1..=7);
        let cover: Vec<_> = (0..t).map(|_| common::random_pattern(&mut g, n, n, 4)).collect();
        let d = cover_to_blocky(&cover).unwrap();
        let target = Matrix::from_fn(Field::Real, n, n, |i, j| {
            cover.iter().any(|p| p.covers(i, j)) as u8 as f64
        });
        prop_assert!(verify_decomposition(&d, &target, TOL).ok);
        prop_assert!(d.len() < 1 << t);
    }

    #[test]
    fn relu_gates_verify_and_thresholds_are_disjoint(seed in any::<u64>(), n in 1usize..=6) {
        let gate = common::random_gate(&mut common::rng(seed), n);
        let d = relu_to_spiky(&gate);
        prop_assert!(verify_decomposition(&d, &gate.matrix(), TOL).ok);
        prop_assert!(d.len() <= 3 * (n + 1));
        let pats = threshold_to_blocky(&gate);
        prop_assert!(pats.len() <= n + 1);
        let t = gate.threshold_matrix();
        for x in 0..gate.size() {
            for y in 0..gate.size() {
                let hits = pats.iter().filter(|p| p.covers(x, y)).count();
                prop_assert!(hits <= 1);
                prop_assert_eq!(hits as f64, t.get(x, y));
            }
        }
    }

    #[test]
    fn circuits_verify(seed in any::<u64>(), n in 1usize..=4, gates in 1usize..=3) {
        let mut g = common::rng(seed);
        let gs: Vec<_> = (0..gates).map(|_| common::random_gate(&mut g, n)).collect();
        let d = circuit_to_spiky(&gs).unwrap();
        let sum = gs.iter().skip(1).fold(gs[0].matrix(), |acc, x| acc.add(&x.matrix()).unwrap());
        prop_assert!(verify_decomposition(&d, &sum, TOL).ok);
    }

    #[test]
    fn spiky_to_blocky_respects_cap(seed in any::<u64>(), n in 3usize..=9, two in any::<bool>()) {
        let (m, terms) = common::known_spiky_boolean(&mut common::rng(seed), n, two);
        let k = terms.len();
        let spiky = Decomposition::spiky_sum(Field::Real, n, n, terms).unwrap();
        let d = spiky_to_blocky(&m, &spiky).unwrap();
        prop_assert!(verify_decomposition(&d, &m, TOL).ok);
        prop_assert!(d.len() as u64 <= spiky_to_blocky_cap(k));
    }

    #[test]
    fn json_round_trip(m in boolean(10)) {
        let d = sparse_to_spiky(&m);
        let back = Decomposition::from_json(&d.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), d.to_json());
        prop_assert!(verify_decomposition(&back, &m, TOL).ok);
    }

    #[test]
    fn polynomial_composition_applies_entrywise(seed in any::<u64>(), c0 in -2i32..=2, c1 in -2i32..=2, c2 in -2i32..=2) {
        use rand::Rng;
        let mut g = common::rng(seed);
        let n = g.gen_range(1..=6);
        let terms: Vec<BlockyTerm> = (0..g.gen_range(1..=3))
            .map(|_| BlockyTerm::new(common::random_pattern(&mut g, n, n, 3), g.gen_range(-3i32..=3) as f64))
            .collect();
        let d = Decomposition::blocky_sum(Field::Real, n, n, terms).unwrap();
        let p = [c0 as f64, c1 as f64, c2 as f64];
        let composed = poly_compose_blocky(&d, &p).unwrap();
        let base = d.eval();
        let want = Matrix::from_fn(Field::Real, n, n, |i, j| {
            let x = base.get(i, j);
            p[0] + p[1] * x + p[2] * x * x
        });
        prop_assert!(composed.eval().max_abs_diff(&want).unwrap() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 60, ..ProptestConfig::default() })]

    #[test]
    fn spiky_matrices_are_recognised(seed in any::<u64>(), n in 1usize..8) {
        use rand::Rng;
        let mut g = common::rng(seed);
        let p = common::random_pattern(&mut g, n, n, 3);
        let u: Vec<f64> = (0..n).map(|_| g.gen_range(-3i32..=3) as f64 / 2.0).collect();
        let v: Vec<f64> = (0..n).map(|_| g.gen_range(-3i32..=3) as f64 / 3.0).collect();
        let m = Matrix::from_fn(Field::Real, n, n, |i, j| if p.covers(i, j) { u[i] * v[j] } else { 0.0 });
        let t = is_spiky(&m).expect("constructed spiky matrix");
        let d = Decomposition::spiky_sum(Field::Real, n, n, vec![t]).unwrap();
        prop_assert!(verify_decomposition(&d, &m, TOL).ok);
    }

    /// Exact ranks sit below every constructive upper bound, and GF(2) spiky
    /// rank only drops under restriction.
    #[test]
    fn oracle_sandwich(m in boolean(3), rows in subset(3), cols in subset(3)) {
        let br = exact_blocky_rank_real(&m, 4).unwrap().expect("3x3 blocky rank <= 3");
        prop_assert!(br <= sparse_boolean_to_blocky(&m).unwrap().len());
        prop_assert!(br <= m.nrows().min(m.ncols()));
        if m.is_zero() {
            prop_assert_eq!(br, 0);
        } else {
            prop_assert!(br >= 1);
            let h = heuristic_spiky_upper_real(&m, br.min(3), 4, 1).unwrap();
            if let Some(d) = h {
                prop_assert!(verify_decomposition(&d, &m, 1e-6).ok);
            }
        }
        let mg = m.with_field(Field::Gf2).unwrap();
        let spr = exact_spiky_rank_gf2(&mg, 4).unwrap().unwrap();
        prop_assert!(spr <= m.nrows().min(m.ncols()));
        prop_assert_eq!(spr == 0, m.is_zero());
        let rows = if rows.is_empty() { vec![0] } else { rows.into_iter().filter(|&i| i < m.nrows()).collect() };
        let cols = if cols.is_empty() { vec![0] } else { cols.into_iter().filter(|&j| j < m.ncols()).collect() };
        if !rows.is_empty() && !cols.is_empty() {
            let sub = mg.restrict(&rows, &cols).unwrap();
            prop_assert!(exact_spiky_rank_gf2(&sub, 4).unwrap().unwrap() <= spr);
            let sub_real = m.restrict(&rows, &cols).unwrap();
            prop_assert!(exact_blocky_rank_real(&sub_real, 4).unwrap().unwrap() <= br);
        }
    }
}

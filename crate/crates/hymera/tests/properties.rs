//! Property tests for the spec-level invariants.

use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;

use hymera::schema::{compose, ContractionSchema, SchemaNode};
use hymera::tensor::{contract, eigendecompose, matricize, Tensor};
use hymera::tiling::{deflate, inflate, BoundaryWord};

type C64 = Complex64;

fn complex_entry() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn tensor_dim2(rank: usize, leg_prefix: &'static str) -> impl Strategy<Value = Tensor> {
    proptest::collection::vec(complex_entry(), 1 << rank).prop_map(move |data| {
        let legs: Vec<String> = (0..rank).map(|i| format!("{leg_prefix}{i}")).collect();
        Tensor::new(legs, vec![2; rank], data).unwrap()
    })
}

/// Independent nested-loop contraction oracle over one shared leg.
fn loop_contract(x: &Tensor, y: &Tensor, lx: &str, ly: &str) -> Vec<C64> {
    let ix = x.legs().iter().position(|l| l == lx).unwrap();
    let iy = y.legs().iter().position(|l| l == ly).unwrap();
    let xf: Vec<usize> = (0..x.rank()).filter(|&i| i != ix).collect();
    let yf: Vec<usize> = (0..y.rank()).filter(|&i| i != iy).collect();
    let out_rank = xf.len() + yf.len();
    let total = 1usize << out_rank;
    let mut out = vec![C64::new(0.0, 0.0); total];
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut idx = vec![0usize; out_rank];
        let mut rem = flat;
        for i in (0..out_rank).rev() {
            idx[i] = rem & 1;
            rem >>= 1;
        }
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..2 {
            let mut xi = vec![0usize; x.rank()];
            for (pos, &i) in xf.iter().enumerate() {
                xi[i] = idx[pos];
            }
            xi[ix] = k;
            let mut yi = vec![0usize; y.rank()];
            for (pos, &i) in yf.iter().enumerate() {
                yi[i] = idx[xf.len() + pos];
            }
            yi[iy] = k;
            acc += x.get(&xi) * y.get(&yi);
        }
        *slot = acc;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Contraction agrees with the naive nested-loop oracle for dim-2
    /// tensors up to 6 total legs.
    #[test]
    fn contract_matches_nested_loop_oracle(
        x in tensor_dim2(3, "x"),
        y in tensor_dim2(3, "y"),
        ix in 0usize..3,
        iy in 0usize..3,
    ) {
        let lx = x.legs()[ix].clone();
        let ly = y.legs()[iy].clone();
        let fast = contract(&x, &y, &[(&lx, &ly)]).unwrap();
        let slow = loop_contract(&x, &y, &lx, &ly);
        for (f, s) in fast.data().iter().zip(&slow) {
            prop_assert!((f - s).norm() <= 1e-12);
        }
    }

    /// Contraction is bilinear in its first argument.
    #[test]
    fn contraction_bilinearity(
        x1 in tensor_dim2(2, "x"),
        x2 in tensor_dim2(2, "x"),
        y in tensor_dim2(2, "y"),
        are in -2.0f64..2.0,
        bre in -2.0f64..2.0,
    ) {
        let alpha = C64::new(are, 0.3);
        let beta = C64::new(bre, -0.7);
        let mixed = Tensor::linear_combination(alpha, &x1, beta, &x2).unwrap();
        let lhs = contract(&mixed, &y, &[("x1", "y0")]).unwrap();
        let t1 = contract(&x1, &y, &[("x1", "y0")]).unwrap();
        let t2 = contract(&x2, &y, &[("x1", "y0")]).unwrap();
        let rhs = Tensor::linear_combination(alpha, &t1, beta, &t2).unwrap();
        for (l, r) in lhs.data().iter().zip(rhs.data()) {
            prop_assert!((l - r).norm() <= 1e-12);
        }
    }

    /// Matricize/de-matricize round-trips bit-exactly for any leg split.
    #[test]
    fn matricize_round_trip_bit_exact(
        t in tensor_dim2(4, "l"),
        perm_seed in 0usize..24,
    ) {
        let mut order: Vec<usize> = (0..4).collect();
        // fixed enumeration of the 24 permutations
        let mut k = perm_seed;
        for i in (1..4).rev() {
            order.swap(i, k % (i + 1));
            k /= i + 1;
        }
        let legs: Vec<String> = order.iter().map(|&i| t.legs()[i].clone()).collect();
        let rows: Vec<&str> = legs[..2].iter().map(String::as_str).collect();
        let cols: Vec<&str> = legs[2..].iter().map(String::as_str).collect();
        let m = matricize(&t, &rows, &cols).unwrap();
        let back = m.into_tensor();
        let original_order: Vec<&str> = t.legs().iter().map(String::as_str).collect();
        let restored = back.permuted(&original_order).unwrap();
        prop_assert_eq!(restored.data(), t.data());
    }

    /// Every eigenpair returned satisfies the residual bound.
    #[test]
    fn eigendecompose_residual_bound(t in tensor_dim2(4, "m")) {
        let m = matricize(&t, &["m0", "m1"], &["m2", "m3"]).unwrap();
        let e = eigendecompose(&m, 1e-8).unwrap();
        prop_assert!(e.residual <= 1e-8);
        for k in 0..4 {
            let v = e.eigenvectors.column(k);
            let mv = m.data.dot(&v);
            for i in 0..4 {
                prop_assert!((mv[i] - e.eigenvalues[k] * v[i]).norm() <= 1e-8);
            }
        }
    }

    /// deflate ∘ inflate = identity over random seeds and layer counts.
    #[test]
    fn deflate_inverts_inflate(
        seed in proptest::collection::vec(prop_oneof![Just('a'), Just('b')], 1..50),
        layers in 1u32..=3,
        use_73 in any::<bool>(),
    ) {
        let g = if use_73 {
            hymera::tiling::grammar_73()
        } else {
            hymera::tiling::grammar_54()
        };
        let word: String = seed.into_iter().collect();
        let mut w = BoundaryWord::seed(&word);
        for _ in 0..layers {
            w = inflate(&w, &g);
        }
        prop_assert_eq!(w.counts(), g.count_power(layers, BoundaryWord::seed(&word).counts()));
        let mut back = w;
        for _ in 0..layers {
            back = deflate(&back, &g).unwrap();
        }
        prop_assert_eq!(back.letters, word);
    }

    /// compose is invariant under bond-order permutations within 1e-10.
    #[test]
    fn compose_order_invariance(
        a in tensor_dim2(3, "p"),
        b in tensor_dim2(3, "q"),
        rotation in 0usize..3,
    ) {
        let node = |id: &str, legs: &[&str]| SchemaNode {
            id: id.into(),
            role: id.to_uppercase(),
            legs: legs.iter().map(|s| s.to_string()).collect(),
        };
        let leg = |n: &str, l: &str| (n.to_string(), l.to_string());
        let mut schema = ContractionSchema {
            nodes: vec![node("a", &["p0", "p1", "p2"]), node("b", &["q0", "q1", "q2"])],
            bonds: vec![
                (leg("a", "p0"), leg("b", "q0")),
                (leg("a", "p1"), leg("b", "q1")),
                (leg("a", "p2"), leg("b", "q2")),
            ],
            outputs: vec![],
        };
        let mut bindings = BTreeMap::new();
        bindings.insert("A".to_string(), a);
        bindings.insert("B".to_string(), b);
        let reference = compose(&schema, &bindings).unwrap();
        schema.bonds.rotate_left(rotation);
        schema.outputs = vec![];
        let rotated = compose(&schema, &bindings).unwrap();
        for (x, y) in reference.data().iter().zip(rotated.data()) {
            prop_assert!((x - y).norm() <= 1e-10);
        }
    }
}

/// Full-contraction schemas produce a scalar slot; check it against a direct
/// sum so the empty-output path stays honest.
#[test]
fn full_contraction_matches_direct_sum() {
    let data: Vec<C64> = (0..4).map(|i| C64::new(i as f64, -(i as f64))).collect();
    let x = Tensor::new(vec!["u", "v"], vec![2, 2], data.clone()).unwrap();
    let y = Tensor::new(vec!["s", "t"], vec![2, 2], data).unwrap();
    let out = contract(&x, &y, &[("u", "s"), ("v", "t")]).unwrap();
    let mut want = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            want += x.get(&[i, j]) * y.get(&[i, j]);
        }
    }
    assert_eq!(out.data().len(), 1);
    assert!((out.get(&[0]) - want).norm() < 1e-14);
}

/// Summaries are independent of record order (bit-identical JSON).
#[test]
fn envelope_summary_order_independent() {
    use hymera::trials::{run_trials, summarize, TrialConfig};
    let config = TrialConfig::new("YQR", 16, 5);
    let mut records = run_trials(&config).unwrap();
    let before = serde_json::to_string(&summarize(&records, &config.targets).unwrap()).unwrap();
    records.reverse();
    records.rotate_left(3);
    let after = serde_json::to_string(&summarize(&records, &config.targets).unwrap()).unwrap();
    assert_eq!(before, after);
}

use super::*;
use crate::ir::{infer_shape, kernels, AccessPatternShape, ShapeEnv};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn t(shape: &[usize], data: &[i64]) -> Tensor<i64> {
    Tensor::from_vec(shape, data.to_vec()).unwrap()
}

fn bind(pairs: &[(&str, Tensor<i64>)]) -> Bindings<i64> {
    pairs.iter().map(|(n, v)| (n.to_string(), v.clone())).collect()
}

#[test]
fn matmul_term_small_case() {
    let e = kernels::matmul("P", "Q", 2, 2, 2);
    let b = bind(&[("P", t(&[2, 2], &[1, 2, 3, 4])), ("Q", t(&[2, 2], &[5, 6, 7, 8]))]);
    assert_eq!(eval(&e, &b).unwrap(), t(&[2, 2], &[19, 22, 43, 50]));
}

#[test]
fn maxpool_term_small_case() {
    let e = kernels::maxpool("act", [1, 1, 2, 2], (2, 2), (1, 1));
    let b = bind(&[("act", t(&[1, 1, 2, 2], &[1, 2, 3, 4]))]);
    assert_eq!(eval(&e, &b).unwrap(), t(&[1, 1, 1, 1], &[4]));
}

#[test]
fn oracle_examples() {
    let q = t(&[2, 2], &[5, 6, 7, 8]);
    assert_eq!(oracle_matmul(&t(&[2, 2], &[1, 0, 0, 1]), &q).unwrap(), q);
    assert_eq!(oracle_matmul(&t(&[1, 1], &[3]), &t(&[1, 1], &[-4])).unwrap(), t(&[1, 1], &[-12]));
    let ones = Tensor::<i64>::from_fn(&[1, 1, 3, 3], |_| 1);
    assert_eq!(oracle_conv2d(&ones, &ones, (1, 1)).unwrap(), t(&[1, 1, 1, 1], &[9]));
    // A 1x1 kernel with one channel scales each pixel.
    let act = t(&[1, 1, 2, 2], &[1, 2, 3, 4]);
    assert_eq!(
        oracle_conv2d(&act, &t(&[1, 1, 1, 1], &[3]), (1, 1)).unwrap(),
        t(&[1, 1, 2, 2], &[3, 6, 9, 12])
    );
    assert_eq!(oracle_maxpool(&act, (1, 1), (1, 1)).unwrap(), act);
    let flat = Tensor::<i64>::from_fn(&[1, 2, 4, 3], |_| 7);
    assert_eq!(
        oracle_maxpool(&flat, (2, 2), (1, 1)).unwrap(),
        Tensor::from_fn(&[1, 2, 3, 2], |_| 7)
    );
    assert!(matches!(
        oracle_conv2d(&ones, &Tensor::zeros(&[1, 1, 4, 4]), (1, 1)),
        Err(ShapeError::WindowTooLarge { .. })
    ));
    assert!(matches!(
        oracle_matmul(&t(&[1, 2], &[1, 2]), &t(&[1, 2], &[1, 2])),
        Err(ShapeError::ShapeMismatch(_))
    ));
}

#[test]
fn frobenius_examples() {
    let a = Tensor::<f64>::from_vec(&[2], vec![3.0, 4.0]).unwrap();
    let z = Tensor::<f64>::zeros(&[2]);
    assert_eq!(frobenius_relative_error(&a, &a).unwrap(), 0.0);
    assert!((frobenius_relative_error(&a, &z).unwrap() - 1.0).abs() < 1e-12);
    let r = Tensor::<f64>::from_vec(&[2], vec![1.0, 0.0]).unwrap();
    let o = Tensor::<f64>::from_vec(&[2], vec![1.0, 1.0]).unwrap();
    assert!((frobenius_relative_error(&r, &o).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(frobenius_relative_error(&z, &a), Err(MetricError::DivisionByZero));
    assert!(matches!(
        frobenius_relative_error(&a, &Tensor::zeros(&[1, 2])),
        Err(MetricError::ShapeMismatch { .. })
    ));
}

#[test]
fn cart_prod_layout() {
    // left ((2),(1)) and right ((3),(1)) give ((2,3),(2,1)).
    let e = Expr::cart_prod(
        Expr::access(Expr::var("l", [2, 1]), 1),
        Expr::access(Expr::var("r", [3, 1]), 1),
    );
    let b = bind(&[("l", t(&[2, 1], &[1, 2])), ("r", t(&[3, 1], &[10, 20, 30]))]);
    let out = eval(&e, &b).unwrap();
    assert_eq!(out.shape(), &[2, 3, 2, 1]);
    assert_eq!(out.data(), vec![1, 10, 1, 20, 1, 30, 2, 10, 2, 20, 2, 30]);
}

#[test]
fn dot_prod_over_three_tuples() {
    let x = Expr::access(Expr::var("x", [3, 2]), 0);
    let e = Expr::compute(ComputeOp::DotProd, x);
    let b = bind(&[("x", t(&[3, 2], &[1, 2, 3, 4, 5, 6]))]);
    assert_eq!(eval(&e, &b).unwrap().data(), vec![3 * 5 + 2 * 4 * 6]);
}

#[test]
fn windows_and_slice_semantics() {
    let x = Expr::access(Expr::var("x", [5]), 0);
    let e = Expr::windows(x.clone(), [3], [2]);
    let b = bind(&[("x", t(&[5], &[0, 1, 2, 3, 4]))]);
    assert_eq!(eval(&e, &b).unwrap(), t(&[2, 3], &[0, 1, 2, 2, 3, 4]));
    assert_eq!(eval(&Expr::slice(x, 0, 1, 4), &b).unwrap(), t(&[3], &[1, 2, 3]));
}

#[test]
fn named_ops() {
    let b = bind(&[
        ("a", t(&[2, 3], &[1, 2, 3, 4, 5, 6])),
        ("w", t(&[2, 3], &[1, 0, 0, 0, 1, 1])),
        ("c", t(&[2], &[100, 200])),
    ]);
    let a = Expr::var("a", [2, 3]);
    let w = Expr::var("w", [2, 3]);
    let c = Expr::var("c", [2]);
    let d = Expr::dense(a.clone(), w.clone());
    assert_eq!(eval(&d, &b).unwrap(), t(&[2, 2], &[1, 5, 4, 11]));
    let lin = Expr::bias_add(d.clone(), c.clone());
    assert_eq!(eval(&lin, &b).unwrap(), t(&[2, 2], &[101, 205, 104, 211]));
    let alt = Expr::add(Expr::reshape_op(d, [2, 2]), c.clone());
    assert_eq!(eval(&alt, &b).unwrap(), eval(&lin, &b).unwrap());
    assert_eq!(eval(&Expr::vta_dense(a.clone(), w, c), &b).unwrap(), eval(&lin, &b).unwrap());
    assert_eq!(eval(&Expr::flatten_op(a), &b).unwrap(), t(&[6], &[1, 2, 3, 4, 5, 6]));
}

#[test]
fn binding_errors() {
    let e = Expr::var("x", [2]);
    assert_eq!(
        eval::<i64>(&e, &Bindings::new()),
        Err(EvalError::UnboundVariable("x".into()))
    );
    assert!(matches!(
        eval(&e, &bind(&[("x", t(&[3], &[1, 2, 3]))])),
        Err(EvalError::BindingMismatch { .. })
    ));
}

#[test]
fn accel_calls_match_their_reference_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (batch, rows, cols) = (rng.gen_range(1..5), rng.gen_range(1..5), rng.gen_range(1..5));
        let b = bind(&[
            ("x", Tensor::random_int(&[batch, rows], &mut rng, -9, 9)),
            ("y", Tensor::random_int(&[cols, rows], &mut rng, -9, 9)),
        ]);
        let a0 = Expr::access(Expr::var("x", [batch, rows]), 1);
        let a1 = Expr::access(Expr::var("y", [cols, rows]), 1);
        let lhs = Expr::compute(ComputeOp::DotProd, Expr::cart_prod(a0.clone(), a1.clone()));
        let rhs = Expr::systolic_array(rows, cols, a0, Expr::access(Expr::transpose(a1, [1, 0]), 0));
        assert_eq!(eval(&lhs, &b).unwrap(), eval(&rhs, &b).unwrap());

        let (n, c, o) = (rng.gen_range(1..3), rng.gen_range(1..3), rng.gen_range(1..3));
        let (k, hw) = (rng.gen_range(1..3), rng.gen_range(3..6));
        let (act_d, wgt_d) = ([n, c, hw, hw], [o, c, k, k]);
        let b = bind(&[
            ("act", Tensor::random_int(&act_d, &mut rng, -9, 9)),
            ("wgt", Tensor::random_int(&wgt_d, &mut rng, -9, 9)),
        ]);
        let (act, wgt) = (Expr::var("act", act_d), Expr::var("wgt", wgt_d));
        let reference = eval(&kernels::conv2d_term(act.clone(), wgt.clone(), wgt_d, (1, 2)), &b).unwrap();
        let named = eval(&Expr::conv2d(act.clone(), wgt.clone(), (1, 2), 1), &b).unwrap();
        let accel = eval(&Expr::hlscnn_conv2d(act, wgt, (1, 2), 1), &b).unwrap();
        assert_eq!(named, reference);
        assert_eq!(accel, reference);
    }
}

fn random_bindings(e: &Expr, rng: &mut ChaCha8Rng) -> Bindings<i64> {
    e.free_vars()
        .into_iter()
        .map(|(n, s)| (n, Tensor::random_int(&s, rng, -5, 5)))
        .collect()
}

fn env_of(e: &Expr) -> ShapeEnv {
    e.free_vars().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn conv2d_term_matches_oracle(
        n in 1usize..=6, c in 1usize..=6, o in 1usize..=6,
        h in 1usize..=6, w in 1usize..=6,
        kh_frac in 0.0f64..1.0, kw_frac in 0.0f64..1.0,
        sh in 1usize..=6, sw in 1usize..=6, seed: u64,
    ) {
        let kh = 1 + ((h as f64) * kh_frac) as usize % h;
        let kw = 1 + ((w as f64) * kw_frac) as usize % w;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = kernels::conv2d("act", [n, c, h, w], "wgt", [o, c, kh, kw], (sh, sw));
        let b = random_bindings(&e, &mut rng);
        let got = eval(&e, &b).unwrap();
        prop_assert_eq!(got, oracle_conv2d(&b["act"], &b["wgt"], (sh, sw)).unwrap());
    }

    #[test]
    fn matmul_term_matches_oracle(m in 1usize..=6, n in 1usize..=6, o in 1usize..=6, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = kernels::matmul("P", "Q", m, n, o);
        let b = random_bindings(&e, &mut rng);
        prop_assert_eq!(eval(&e, &b).unwrap(), oracle_matmul(&b["P"], &b["Q"]).unwrap());
    }

    #[test]
    fn maxpool_term_matches_oracle(
        n in 1usize..=6, c in 1usize..=6, h in 1usize..=6, w in 1usize..=6,
        kh in 1usize..=6, kw in 1usize..=6, sh in 1usize..=6, sw in 1usize..=6, seed: u64,
    ) {
        let (kh, kw) = (kh.min(h), kw.min(w));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = kernels::maxpool("act", [n, c, h, w], (kh, kw), (sh, sw));
        let b = random_bindings(&e, &mut rng);
        prop_assert_eq!(eval(&e, &b).unwrap(), oracle_maxpool(&b["act"], (kh, kw), (sh, sw)).unwrap());
    }

    #[test]
    fn flatten_reshape_is_identity(dims in prop::collection::vec(1usize..=4, 1..=4), split in 0usize..=4, seed: u64) {
        let split = split.min(dims.len());
        let x = Expr::access(Expr::var("x", dims.clone()), split);
        let target = AccessPatternShape::split(&dims, split);
        let e = Expr::reshape(Expr::flatten(x.clone()), target);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_bindings(&e, &mut rng);
        prop_assert_eq!(eval(&e, &b).unwrap(), eval(&x, &b).unwrap());
    }

    #[test]
    fn eval_shape_agrees_with_inference(m in 1usize..=5, n in 1usize..=5, o in 1usize..=5, split in 0usize..=2, seed: u64) {
        let e = Expr::compute(
            ComputeOp::ReduceSum,
            Expr::access(kernels::matmul("P", "Q", m, n, o), split),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_bindings(&e, &mut rng);
        let s = infer_shape(&e, &env_of(&e)).unwrap();
        let out = eval(&e, &b).unwrap();
        let dims = s.dims();
        prop_assert_eq!(out.shape(), dims.as_slice());
        prop_assert_eq!(eval(&e, &b).unwrap(), out);
    }

    #[test]
    fn frobenius_is_zero_on_identical(data in prop::collection::vec(-100.0f64..100.0, 1..20)) {
        prop_assume!(data.iter().any(|&v| v != 0.0));
        let a = Tensor::from_vec(&[data.len()], data).unwrap();
        prop_assert_eq!(frobenius_relative_error(&a, &a).unwrap(), 0.0);
    }
}

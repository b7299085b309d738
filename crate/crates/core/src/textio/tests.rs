use super::*;
use crate::ir::{kernels, random::random_expr, AccessPatternShape, ComputeOp, Expr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MATMUL: &str = "
(var P (shape 2 3)) ; rows
(var Q (shape 3 2))
(compute dotProd (cartProd (access P 1) (transpose (access Q 1) (list 1 0))))
";

#[test]
fn parses_matmul_listing() {
    let p = parse(MATMUL).unwrap();
    assert_eq!(p.expr, kernels::matmul("P", "Q", 2, 3, 2));
    assert_eq!(p.vars, vec![("P".into(), vec![2, 3]), ("Q".into(), vec![3, 2])]);
}

#[test]
fn accepts_hyphenated_spellings() {
    let env = [("a".to_string(), vec![2, 3]), ("b".to_string(), vec![4, 3])].into_iter().collect();
    let e = parse_expr("(compute dot-product (cartesian-product (access a 1) (access b 1)))", &env).unwrap();
    let expected = Expr::compute(
        ComputeOp::DotProd,
        Expr::cart_prod(Expr::access(Expr::var("a", [2, 3]), 1), Expr::access(Expr::var("b", [4, 3]), 1)),
    );
    assert_eq!(e, expected);
    assert_eq!(
        print(&e),
        "(compute dotProd\n  (cartProd (access a 1) (access b 1)))"
    );
}

#[test]
fn conv2d_listing_round_trips() {
    let e = kernels::conv2d("activations", [1, 2, 8, 8], "weights", [2, 2, 3, 3], (1, 1));
    let text = print_program(&e);
    let back = parse(&text).unwrap();
    assert_eq!(back.expr, e);
    assert_eq!(print_program(&back.expr), text);
}

#[test]
fn printer_layout() {
    assert_eq!(print(&Expr::var("x", [3])), "x");
    let e = kernels::matmul("P", "Q", 2, 3, 2);
    assert_eq!(
        print(&e),
        "(compute dotProd\n  (cartProd\n    (access P 1)\n    (transpose (access Q 1) (list 1 0))))"
    );
    let r = Expr::reshape(Expr::var("x", [4]), AccessPatternShape::new(vec![], vec![2, 2]));
    assert_eq!(print(&r), "(reshape x (shape-pair (shape) (shape 2 2)))");
}

#[test]
fn shape_of_is_resolved() {
    let env = [("x".to_string(), vec![4, 4])].into_iter().collect();
    let e = parse_expr("(reshape (flatten (access x 1)) (shape-of (access x 1)))", &env).unwrap();
    assert_eq!(e.args[1], Expr::shape_pair(AccessPatternShape::new(vec![4], vec![4])));
}

#[test]
fn errors_carry_spans() {
    let e = parse("(flatten").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::Syntax);
    assert!(e.message.contains("unclosed"));
    assert_eq!((e.span.line, e.span.col), (1, 1));

    let e = parse("(var x (shape 2))\n(frobnicate x)").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::UnknownForm);
    assert_eq!((e.span.line, e.span.col), (2, 2));
    assert_eq!(e.diagnostic("f.gls"), "f.gls:2:2: error: unknown form `frobnicate`");

    let e = parse("(var x (shape 2))\n(access x)").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::Arity);

    let e = parse("(access y 0)").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::UndeclaredVariable);
    assert_eq!(&"(access y 0)"[e.span.start..e.span.end], "y");

    let e = parse("(var x (shape 2)) x )").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::Syntax);
    assert_eq!(e.span.start, 20);
}

#[test]
fn patterns_allow_holes_in_any_slot() {
    let p = parse_pattern("(systolicArray ?rows ?cols ?a0 (access (transpose ?a1 (list 1 0)) 0))").unwrap();
    assert_eq!(p.holes(), vec!["rows", "cols", "a0", "a1"]);
    assert!(p.to_expr().is_none());
    assert_eq!(parse_pattern(&p.to_string()).unwrap(), p);
    assert!(parse("(var x (shape 2)) (access ?x 0)").is_err());
}

#[test]
fn round_trip_generated_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let e = random_expr(&mut rng, 6);
        let text = print_program(&e);
        let back = parse(&text).unwrap_or_else(|err| panic!("{err}\n{text}"));
        assert_eq!(back.expr, e, "{text}");
        assert_eq!(print_program(&back.expr), text);
    }
}

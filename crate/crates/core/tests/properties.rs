use proptest::prelude::*;

use stagediff::baselines::dual_eval;
use stagediff::codegen::{bitwise_agrees, stage_compile_many};
use stagediff::corpus::{self, PointGen};
use stagediff::simplify::{is_normal_form, iteration_cap};
use stagediff::verify::{check_simplifier_laws, in_domain_points, scaled_error, verify_expr};
use stagediff::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        4 => (0usize..4).prop_map(Expr::var),
        2 => (0i64..6).prop_map(Expr::int),
        1 => prop::sample::select(vec![0.5, 1.5, 2.3, 0.25, 1e-3, 12.75]).prop_map(Expr::real),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            4 => (prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            1 => inner.clone().prop_map(Expr::neg),
            2 => (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, c)| Expr::func(f, c)),
        ]
    })
}

fn point4() -> impl Strategy<Value = Point> {
    prop::collection::vec(0.1f64..1.5, 4).prop_map(Point::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn format_then_parse_is_identity(e in expr()) {
        let text = format_expr(&e);
        prop_assert_eq!(parse_expr(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn evaluation_is_pure(e in expr(), p in point4()) {
        let a = eval_tree(&e, &p).unwrap();
        let b = eval_tree(&e, &p).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn node_count_grows_under_embedding(e in expr(), f in prop::sample::select(Func::ALL.to_vec()), other in expr()) {
        prop_assert!(node_count(&e) >= 1);
        prop_assert!(node_count(&Expr::func(f, e.clone())) > node_count(&e));
        prop_assert!(node_count(&(e.clone() + other.clone())) > node_count(&e).max(node_count(&other)));
    }

    #[test]
    fn simplify_is_idempotent_and_never_grows(e in expr()) {
        let mut diag = Diagnostics::default();
        let s = simplify_with(&e, &mut diag);
        prop_assert_eq!(simplify(&s), s.clone());
        prop_assert!(s.node_count() <= e.node_count());
        prop_assert!(is_normal_form(&s));
        prop_assert_eq!(diag.cap_hits, 0);
        prop_assert!(diag.passes <= iteration_cap(&e));
    }

    #[test]
    fn simplify_preserves_values(e in expr(), seed in any::<u64>()) {
        let mut gen = PointGen::new(seed);
        let points: Vec<Point> = (0..20).map(|_| gen.point(4)).collect();
        let report = check_simplifier_laws(&e, &points);
        prop_assert!(report.passes(), "{:?}", report);
    }

    #[test]
    fn derivatives_are_normal_forms(e in expr(), v in 0usize..4) {
        let d = differentiate(&e, VarId(v));
        prop_assert!(is_normal_form(&d), "{}", d);
        prop_assert_eq!(simplify(&d), d);
    }

    #[test]
    fn dual_value_matches_tree_bitwise(e in expr(), p in point4(), v in 0usize..4) {
        let (value, _) = dual_eval(&e, &p, VarId(v)).unwrap();
        let tree = eval_tree(&e, &p).unwrap();
        prop_assert!(value.to_bits() == tree.to_bits() || (value.is_nan() && tree.is_nan()));
    }

    #[test]
    fn symbolic_agrees_with_oracles(e in expr(), seed in any::<u64>()) {
        let points = in_domain_points(&e, &mut PointGen::new(seed), 10);
        let report = verify_expr(&e, &points);
        prop_assert!(report.passes(), "{}: {:?}", e, report);
        prop_assert!(report.max_raw_vs_symbolic <= 1e-12, "{}: {:?}", e, report);
    }

    #[test]
    fn differentiation_is_linear(
        f in expr(),
        g in expr(),
        a in 1i64..5,
        b in prop::sample::select(vec![0.5, 2.5, 3.0]),
        p in point4(),
        v in 0usize..4,
    ) {
        let v = VarId(v);
        let combined = differentiate(&(Expr::int(a) * f.clone() + Expr::real(b) * g.clone()), v);
        let lhs = combined.eval(&p).unwrap();
        let rhs = a as f64 * differentiate(&f, v).eval(&p).unwrap() + b * differentiate(&g, v).eval(&p).unwrap();
        if lhs.is_finite() && rhs.is_finite() {
            let scale = (a as f64 * differentiate(&f, v).eval(&p).unwrap()).abs()
                + (b * differentiate(&g, v).eval(&p).unwrap()).abs();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0), "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn gradient_components_are_partials(e in expr()) {
        let grad = gradient(&e, 4);
        prop_assert_eq!(grad.len(), 4);
        for (i, d) in grad.iter().enumerate() {
            prop_assert_eq!(d, &differentiate(&e, VarId(i)));
        }
    }

    #[test]
    fn derivative_n_composes(e in expr(), n in 0u32..3) {
        let expected = if n == 0 { simplify(&e) } else { derivative_n(&differentiate(&e, VarId(0)), VarId(0), n - 1) };
        prop_assert_eq!(derivative_n(&e, VarId(0), n), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // each case runs the C compiler once for a batch of expressions
    #[test]
    fn staged_code_is_bitwise_equal(exprs in prop::collection::vec(expr(), 8), p in point4()) {
        let simplified: Vec<Expr> = exprs.iter().map(simplify).collect();
        let fns = stage_compile_many(&simplified).expect("C toolchain");
        for (f, e) in fns.iter().zip(&simplified) {
            prop_assert!(bitwise_agrees(f, e, &p), "{}", e);
            prop_assert_eq!(f.flop_count(), e.operation_count());
        }
    }
}

#[test]
fn corpus_functions_pass_every_law() {
    let mut gen = PointGen::new(11);
    for (name, e) in corpus::named() {
        let points = in_domain_points(&e, &mut gen, 100);
        assert_eq!(points.len(), 100, "{name}");
        let laws = check_simplifier_laws(&e, &points);
        assert!(laws.passes(), "{name}: {laws:?}");
        let oracles = verify_expr(&e, &points);
        assert!(oracles.passes(), "{name}: {oracles:?}");
        assert!(oracles.pairs_checked > 0, "{name}");
    }
}

#[test]
fn thousand_deep_random_trees_obey_simplifier_laws() {
    let mut gen = PointGen::new(2024);
    for e in corpus::random_trees(17, 1000, 8) {
        let points: Vec<Point> = (0..100).map(|_| gen.point(4)).collect();
        let laws = check_simplifier_laws(&e, &points);
        assert!(laws.passes(), "{e}: {laws:?}");
    }
}

#[test]
fn scaled_error_is_relative_above_one() {
    assert_eq!(scaled_error(2.0, 4.0), 0.5);
    assert_eq!(scaled_error(0.25, 0.5), 0.25);
}

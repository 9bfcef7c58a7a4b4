//! Property tests for the invariants of every module.

use std::sync::Arc;

use proptest::prelude::*;

use opkernel::convolution::{check_conv_poly, convolve, young_bound};
use opkernel::covariance::{check_covariance, check_monomial, CheckContext};
use opkernel::domain_sets::{ae_zero, AeTolerance, Interval, LebesgueSet, OrderedPartition};
use opkernel::func_expr::{parse_expr, FuncExpr, SimpleFunction, Var};
use opkernel::kernels::{compose, kernel_norm_bound, Kernel, Polynomial};
use opkernel::operators::{apply_poly, common_grid, IntegralOperator};
use opkernel::quadrature::{build_grid, integrate, lp_norm, lp_norm_values, GridFunction, QuadratureRule};
use opkernel::report::Verdict;
use opkernel::volterra::{check_both_zero, check_qplane, check_simple_necessary, QplaneDecomposition};

fn coarse() -> QuadratureRule {
    QuadratureRule::new(8, Some(0.25)).unwrap()
}

fn unit() -> LebesgueSet {
    LebesgueSet::interval(0.0, 1.0).unwrap()
}

fn fast_ctx() -> CheckContext {
    CheckContext { rule: coarse(), ..CheckContext::default() }
}

fn arb_set() -> impl Strategy<Value = LebesgueSet> {
    prop::collection::vec((-5.0f64..5.0, 0.0f64..3.0), 0..4).prop_map(|v| {
        let pairs: Vec<(f64, f64)> = v.into_iter().map(|(lo, len)| (lo, lo + len)).collect();
        LebesgueSet::from_pairs(&pairs).unwrap()
    })
}

fn arb_expr() -> impl Strategy<Value = FuncExpr> {
    let leaf = prop_oneof![
        (-3.0f64..3.0).prop_map(FuncExpr::constant),
        Just(FuncExpr::t()),
        (0.0f64..0.5, 0.5f64..1.0).prop_map(|(lo, hi)| FuncExpr::indicator(Var::T, lo, hi).unwrap()),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(FuncExpr::sin),
            inner.clone().prop_map(FuncExpr::cos),
            (inner.clone(), 0u32..3).prop_map(|(e, n)| FuncExpr::pow(e, n)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FuncExpr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FuncExpr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FuncExpr::mul(a, b)),
            (-2.0f64..2.0, inner).prop_map(|(c, e)| FuncExpr::scale(c, e)),
        ]
    })
}

/// `sum c_jk cos(j t + k s)`-type smooth kernel with small integer frequencies.
fn arb_trig_kernel() -> impl Strategy<Value = Kernel> {
    prop::collection::vec((-1.0f64..1.0, 0i32..3, -2i32..3), 1..4).prop_map(|terms| {
        let src: Vec<String> = terms.iter().map(|(c, j, k)| format!("{c}*cos({j}*t+{k}*s)")).collect();
        Kernel::General(parse_expr(&src.join("+")).unwrap())
    })
}

fn arb_coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// Piecewise constant factor on quarters of `[0, 1]`, many cells zero.
fn arb_step() -> impl Strategy<Value = FuncExpr> {
    prop::collection::vec(prop_oneof![Just(0.0), Just(0.0), Just(1.0), Just(-2.0)], 4).prop_map(|v| {
        let part = OrderedPartition::from_cuts(0.0, 1.0, &[0.25, 0.5, 0.75]).unwrap();
        SimpleFunction::new(part, v).unwrap().to_expr(Var::T)
    })
}

fn sample_points() -> Vec<f64> {
    vec![0.05, 0.2, 0.37, 0.61, 0.8, 0.93]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn measure_is_additive(a in arb_set(), b in arb_set()) {
        let lhs = a.union(&b).measure() + a.intersect(&b).measure();
        prop_assert!((lhs - a.measure() - b.measure()).abs() < 1e-12);
        let split = a.difference(&b).measure() + a.intersect(&b).measure();
        prop_assert!((split - a.measure()).abs() < 1e-12);
    }

    #[test]
    fn membership_follows_set_algebra(a in arb_set(), b in arb_set(), x in -6.0f64..9.0) {
        let ends: Vec<f64> = a.endpoints().into_iter().chain(b.endpoints()).collect();
        prop_assume!(ends.iter().all(|e| (e - x).abs() > 1e-9));
        prop_assert_eq!(a.intersect(&b).contains(x), a.contains(x) && b.contains(x));
        prop_assert_eq!(a.union(&b).contains(x), a.contains(x) || b.contains(x));
        prop_assert_eq!(a.difference(&b).contains(x), a.contains(x) && !b.contains(x));
    }

    #[test]
    fn printed_expressions_parse_back(e in arb_expr()) {
        let back = parse_expr(&e.to_string()).unwrap();
        for t in sample_points() {
            let (u, v) = (e.eval(t), back.eval(t));
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()), "{} at {}: {} vs {}", e, t, u, v);
        }
    }

    #[test]
    fn expressions_are_continuous_off_breakpoints(e in arb_expr(), t in 0.01f64..0.99) {
        let bps = e.breakpoints(0.0, 1.0);
        prop_assume!(bps.iter().all(|b| (b - t).abs() > 1e-3));
        let (u, v) = (e.eval(t), e.eval(t + 1e-9));
        prop_assert!((u - v).abs() < 1e-5 * (1.0 + u.abs()));
    }

    #[test]
    fn simple_function_matches_expression(vals in arb_coeffs(4), t in 0.0f64..1.0) {
        let part = OrderedPartition::from_cuts(0.0, 1.0, &[0.2, 0.45, 0.8]).unwrap();
        let sf = SimpleFunction::new(part, vals).unwrap();
        prop_assert_eq!(sf.eval(t), sf.to_expr(Var::T).eval(t));
    }

    #[test]
    fn ae_zero_is_monotone(vals in prop::collection::vec(-1.0f64..1.0, 24), c in 0.0f64..1.0, eps in 1e-6f64..0.5) {
        let grid = build_grid(&unit(), &[], &QuadratureRule::new(6, Some(0.25)).unwrap()).unwrap();
        let w = grid.weights();
        let tol = AeTolerance::new(eps, 1e-12, 1e-9).unwrap();
        let looser = AeTolerance::new(eps * 2.0, 1e-12, 1e-9).unwrap();
        let base = ae_zero(&vals, w, &tol).unwrap();
        let shrunk: Vec<f64> = vals.iter().map(|v| c * v).collect();
        prop_assert!(ae_zero(&shrunk, w, &tol).unwrap().violation_measure <= base.violation_measure);
        prop_assert!(ae_zero(&vals, w, &looser).unwrap().violation_measure <= base.violation_measure);
        if base.is_ae_zero {
            prop_assert!(ae_zero(&shrunk, w, &tol).unwrap().is_ae_zero);
        }
    }

    #[test]
    fn integration_is_linear(f in arb_expr(), g in arb_expr(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let rule = QuadratureRule::default();
        let lhs = integrate(&FuncExpr::add(FuncExpr::scale(a, f.clone()), FuncExpr::scale(b, g.clone())), &unit(), &rule).unwrap();
        let rhs = a * integrate(&f, &unit(), &rule).unwrap() + b * integrate(&g, &unit(), &rule).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn holder_inequality(f in arb_expr(), g in arb_expr(), p in 1.0f64..6.0) {
        let rule = QuadratureRule::default();
        let q = p / (p - 1.0);
        let q = if q.is_finite() { q } else { f64::INFINITY };
        let fg = integrate(&FuncExpr::mul(f.clone(), g.clone()), &unit(), &rule).unwrap().abs();
        let bound = lp_norm(&f, &unit(), p, &rule).unwrap() * lp_norm(&g, &unit(), q, &rule).unwrap();
        prop_assert!(fg <= bound * (1.0 + 1e-10) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn composition_matches_sequential_application(ka in arb_trig_kernel(), kb in arb_trig_kernel(), xs in arb_coeffs(3)) {
        let a = IntegralOperator::new(ka, unit(), unit()).unwrap();
        let b = IntegralOperator::new(kb, unit(), unit()).unwrap();
        let grid = common_grid(&[&a, &b], &[], &coarse(), None).unwrap();
        let x = GridFunction::from_fn(grid.clone(), |t| xs[0] + xs[1] * t + xs[2] * (3.0 * t).sin());
        let seq = a.apply(&b.apply(&x).unwrap()).unwrap();
        let ab = opkernel::operators::compose_ops(&a, &b, &grid).unwrap();
        let once = ab.apply(&x).unwrap();
        for (u, v) in seq.values().iter().zip(once.values()) {
            prop_assert!((u - v).abs() < 1e-12 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn composition_is_associative(ka in arb_trig_kernel(), kb in arb_trig_kernel(), kc in arb_trig_kernel()) {
        let grid = Arc::new(build_grid(&unit(), &[], &coarse()).unwrap());
        let all = vec![true; grid.len()];
        let (a, b, c) = (ka.sample(&grid).unwrap(), kb.sample(&grid).unwrap(), kc.sample(&grid).unwrap());
        let left = compose(&compose(&a, &all, &b).unwrap(), &all, &c).unwrap().dense();
        let right = compose(&a, &all, &compose(&b, &all, &c).unwrap()).unwrap().dense();
        for (u, v) in left.iter().zip(right.iter()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_action_matches_repeated_application(k in arb_trig_kernel(), coeffs in arb_coeffs(4), volterra in any::<bool>()) {
        let kernel = if volterra { Kernel::volterra(k, 0.0) } else { k };
        let op = IntegralOperator::new(kernel, unit(), unit()).unwrap();
        let grid = common_grid(&[&op], &[], &coarse(), None).unwrap();
        let x = GridFunction::from_fn(grid.clone(), |t| 1.0 + t * t);
        let f = Polynomial::new(coeffs.clone()).unwrap();
        let got = apply_poly(&op, &f, &x).unwrap();
        let mut y = x.clone();
        let mut acc: Vec<f64> = x.values().iter().map(|v| coeffs[0] * v).collect();
        for c in &coeffs[1..] {
            y = op.apply(&y).unwrap();
            for (a, v) in acc.iter_mut().zip(y.values()) {
                *a += c * v;
            }
        }
        // triangular kernels: both routes are exact only to quadrature order
        let rel = if volterra { 1e-10 } else { 1e-13 };
        let scale = acc.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (u, v) in got.values().iter().zip(&acc) {
            prop_assert!((u - v).abs() < rel * scale, "{} vs {} (scale {})", u, v, scale);
        }
    }

    #[test]
    fn norm_bound_dominates_action(k in arb_trig_kernel(), xs in arb_coeffs(4), pi in 0usize..3) {
        let p = [1.0, 2.0, f64::INFINITY][pi];
        let op = IntegralOperator::new(k, unit(), unit()).unwrap();
        let grid = common_grid(&[&op], &[], &coarse(), None).unwrap();
        let d = op.discretize(&grid).unwrap();
        let bound = kernel_norm_bound(d.kernel(), d.g_mask(), d.x_mask(), p).unwrap();
        let x = GridFunction::from_fn(grid.clone(), |t| xs[0] + xs[1] * (5.0 * t).cos() + xs[2] * t + xs[3] * (9.0 * t).sin());
        let y = d.apply(&x).unwrap();
        let w = grid.weights();
        let ny = lp_norm_values(y.values(), w, p).unwrap();
        let nx = lp_norm_values(x.values(), w, p).unwrap();
        prop_assert!(ny <= bound * nx * (1.0 + 1e-10) + 1e-14);
    }

    #[test]
    fn verdict_is_invariant_under_scaling_b(ka in arb_trig_kernel(), kb in arb_trig_kernel(), c in prop_oneof![0.001f64..0.01, 10.0f64..1000.0]) {
        let a = IntegralOperator::new(ka, unit(), unit()).unwrap();
        let b = IntegralOperator::new(kb.clone(), unit(), unit()).unwrap();
        let kcb = match kb { Kernel::General(e) => Kernel::General(FuncExpr::scale(c, e)), other => other };
        let cb = IntegralOperator::new(kcb, unit(), unit()).unwrap();
        let f = Polynomial::monomial(1.0, 2).unwrap();
        let r1 = check_covariance(&a, &b, &f, &fast_ctx()).unwrap();
        let r2 = check_covariance(&a, &cb, &f, &fast_ctx()).unwrap();
        prop_assert_eq!(r1.verdict, r2.verdict);
        for (x, y) in r1.conditions.iter().zip(&r2.conditions) {
            prop_assert_eq!(x.pass, y.pass);
        }
    }

    #[test]
    fn monomial_check_matches_general_check(ka in arb_trig_kernel(), kb in arb_trig_kernel(), delta in prop_oneof![-2.0f64..-0.1, 0.1f64..2.0], d in 1usize..4) {
        let a = IntegralOperator::new(ka, unit(), unit()).unwrap();
        let b = IntegralOperator::new(kb, unit(), unit()).unwrap();
        let m = check_monomial(&a, &b, delta, d, &fast_ctx()).unwrap();
        let g = check_covariance(&a, &b, &Polynomial::monomial(delta, d).unwrap(), &fast_ctx()).unwrap();
        prop_assert_eq!(m.verdict, g.verdict);
        prop_assert_eq!(&m.conditions, &g.conditions);
    }

    #[test]
    fn regions_cover_and_skip_null_sets(ga_hi in prop_oneof![Just(1.0f64), 0.3f64..1.0], gb_lo in prop_oneof![Just(0.0f64), 0.0f64..0.7]) {
        let x = unit();
        let ga = LebesgueSet::interval(0.0, ga_hi).unwrap();
        let gb = LebesgueSet::interval(gb_lo, 1.0).unwrap();
        let a = IntegralOperator::new(Kernel::General(parse_expr("t+s").unwrap()), ga.clone(), x.clone()).unwrap();
        let b = IntegralOperator::new(Kernel::General(parse_expr("t*s").unwrap()), gb.clone(), x).unwrap();
        let r = check_covariance(&a, &b, &Polynomial::monomial(1.0, 2).unwrap(), &fast_ctx()).unwrap();
        prop_assert_eq!(r.conditions.len(), 3);
        let g = ga.intersect(&gb);
        prop_assert_eq!(r.conditions[0].skipped, g.measure() == 0.0);
        prop_assert_eq!(r.conditions[1].skipped, gb.difference(&g).measure() == 0.0);
        prop_assert_eq!(r.conditions[2].skipped, ga.difference(&g).measure() == 0.0);
    }

    #[test]
    fn qplane_split_reassembles(ka in arb_trig_kernel(), kb in arb_trig_kernel(), gb in 0.0f64..0.75, xs in arb_coeffs(2)) {
        let dec = QplaneDecomposition::new(&ka, &kb, 0.0, gb, 1.0, &fast_ctx()).unwrap();
        let x: Vec<f64> = dec.grid.points().iter().map(|t| xs[0] + xs[1] * t).collect();
        let all = vec![true; dec.grid.len()];
        for k in [&dec.k_ab, &dec.k_ba] {
            let whole = k.apply_matrix(&all).dot(&ndarray::ArrayView1::from(&x[..]));
            let split = dec.apply_split(k, &x);
            for (u, v) in whole.iter().zip(&split) {
                prop_assert!((u - v).abs() < 1e-13 * (1.0 + u.abs()));
            }
        }
    }

    #[test]
    fn convolution_commutes_and_obeys_young(c1 in 0.5f64..3.0, c2 in 0.5f64..3.0, m in -1.0f64..1.0, pi in 0usize..3) {
        let rule = QuadratureRule::default();
        let w = Interval::new(-12.0, 12.0).unwrap();
        let f = parse_expr(&format!("exp(-{c1}*t^2)")).unwrap();
        let g = parse_expr(&format!("exp(-{c2}*(t-{m})^2)")).unwrap();
        let fg = convolve(&f, &g, w, &rule).unwrap();
        let gf = convolve(&g, &f, w, &rule).unwrap();
        for (u, v) in fg.values().iter().zip(gf.values()) {
            prop_assert!((u - v).abs() < 1e-10);
        }
        let p = [1.0, 2.0, f64::INFINITY][pi];
        let (lhs, rhs) = young_bound(&f, &g, w, p, &rule).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn volterra_checks_never_contradict_the_oracle(a in arb_step(), b in arb_step(), c in arb_step(), e in arb_step()) {
        let ctx = fast_ctx();
        let r = check_simple_necessary(&a, &b, &c, &e, &Polynomial::monomial(1.0, 2).unwrap(), 0.0, 1.0, &ctx).unwrap();
        prop_assert!(r.conditions[0].pass, "necessary condition contradicted");
        let ka = Kernel::separable(a.clone(), c.clone());
        let kb = Kernel::separable(b.clone(), e.clone());
        let bz = check_both_zero(&ka, &kb, 0.0, 1.0, &ctx).unwrap();
        prop_assert_ne!(bz.verdict, Verdict::Inconclusive);
        let qp = check_qplane(&ka, &kb, 0.0, 0.0, 1.0, 1.0, &ctx).unwrap();
        prop_assert_ne!(qp.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn reports_are_deterministic(ka in arb_trig_kernel(), kb in arb_trig_kernel(), seed in 0u64..1000) {
        let a = IntegralOperator::new(ka, unit(), unit()).unwrap();
        let b = IntegralOperator::new(kb, unit(), unit()).unwrap();
        let ctx = CheckContext { seed, ..fast_ctx() };
        let f = Polynomial::monomial(1.0, 2).unwrap();
        let r1 = check_covariance(&a, &b, &f, &ctx).unwrap().to_json_untimed().unwrap();
        let r2 = check_covariance(&a, &b, &f, &ctx).unwrap().to_json_untimed().unwrap();
        prop_assert_eq!(r1, r2);
        let c1 = check_conv_poly(&parse_expr("exp(-t^2)").unwrap(), &parse_expr("exp(-(t-1)^2)").unwrap(), &f, false, &ctx).unwrap();
        let c2 = check_conv_poly(&parse_expr("exp(-t^2)").unwrap(), &parse_expr("exp(-(t-1)^2)").unwrap(), &f, false, &ctx).unwrap();
        prop_assert_eq!(c1.to_json_untimed().unwrap(), c2.to_json_untimed().unwrap());
    }
}

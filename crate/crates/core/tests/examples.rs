//! Worked examples for every module, each against a hand-derived value.

use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use opkernel::convolution::{check_conv_monomial, check_conv_poly, check_one_sided_monomial, convolve, laplace_transform};
use opkernel::covariance::{check_affine, check_covariance, check_monomial, check_nonvanishing, CheckContext};
use opkernel::domain_sets::Interval;
use opkernel::domain_sets::{ae_zero, AeTolerance, LebesgueSet, OrderedPartition};
use opkernel::fixtures::{example1_operators, separable_factors};
use opkernel::func_expr::{parse_expr, FuncExpr, SimpleFunction, Var};
use opkernel::kernels::{analytic_norm_bound, compose, iterated_kernel, polynomial_kernel, Kernel, Polynomial};
use opkernel::operators::{apply_poly, common_grid, compose_ops, default_battery, direct_residual, IntegralOperator};
use opkernel::quadrature::{build_grid, inner_product, integrate, lp_norm, GridFunction, QuadratureRule};
use opkernel::report::Verdict;
use opkernel::volterra::{
    check_both_zero, check_commut_sufficient, check_delta_commut_necessary, check_qplane, check_simple_necessary, check_simple_sufficient,
    SeparableVolterra,
};
use opkernel::Error;

fn p(s: &str) -> FuncExpr {
    parse_expr(s).unwrap()
}

fn set(pairs: &[(f64, f64)]) -> LebesgueSet {
    LebesgueSet::from_pairs(pairs).unwrap()
}

fn unit() -> LebesgueSet {
    set(&[(0.0, 1.0)])
}

fn ctx() -> CheckContext {
    CheckContext::default()
}

#[test]
fn set_algebra_examples() {
    let pi = set(&[(0.0, PI)]);
    assert_eq!(pi.intersect(&pi), pi);
    assert!(unit().intersect(&set(&[(2.0, 3.0)])).is_empty());
    assert_eq!(set(&[(0.0, 2.0)]).intersect(&set(&[(1.0, 3.0)])), set(&[(1.0, 2.0)]));
    assert!(pi.difference(&pi).is_empty());
    assert_eq!(set(&[(0.0, 3.0)]).difference(&set(&[(1.0, 2.0)])), set(&[(0.0, 1.0), (2.0, 3.0)]));
    assert_eq!(unit().difference(&set(&[(2.0, 3.0)])), unit());
    assert_eq!(LebesgueSet::empty().measure(), 0.0);
    assert_eq!(pi.measure(), PI);
    assert_eq!(set(&[(0.0, 1.0), (2.0, 3.0)]).measure(), 2.0);
}

#[test]
fn ae_zero_examples() {
    let rule = QuadratureRule::default();
    let grid = build_grid(&unit(), &[0.5], &rule).unwrap();
    let tol = AeTolerance::default_for(1.0);
    let zero = ae_zero(&vec![0.0; grid.len()], grid.weights(), &tol).unwrap();
    assert!(zero.is_ae_zero);
    assert_eq!(zero.violation_measure, 0.0);
    let one = ae_zero(&vec![1.0; grid.len()], grid.weights(), &tol).unwrap();
    assert!(!one.is_ae_zero);
    assert_abs_diff_eq!(one.violation_measure, 1.0, epsilon = 1e-12);
    let f = p("ind(0,0.5)*ind(0.5,1)");
    let vals: Vec<f64> = grid.points().iter().map(|&t| f.eval(t)).collect();
    assert!(ae_zero(&vals, grid.weights(), &tol).unwrap().is_ae_zero);
}

#[test]
#[allow(clippy::approx_constant)]
fn expression_examples() {
    let e = p("2/3.14159*(cos(t))");
    assert_abs_diff_eq!(e.eval(0.3), 2.0 / 3.14159 * 0.3f64.cos(), epsilon = 1e-15);
    assert!(matches!(e, FuncExpr::Scale(..)));
    assert_eq!(p("ind(0,0.5)"), FuncExpr::indicator(Var::T, 0.0, 0.5).unwrap());
    let a = p("ind(0,0.25)*(t^4+1)-ind(0.5,0.75)");
    assert_abs_diff_eq!(a.eval(0.1), 1.0001, epsilon = 1e-15);
    assert_eq!(a.eval(0.6), -1.0);
    assert_eq!(p("ind(0,1)").eval(0.5), 1.0);
    assert_eq!(p("ind(0,1)").eval(2.0), 0.0);
    assert_eq!(p("ind(0,0.5)").breakpoints(0.0, 1.0), vec![0.0, 0.5, 1.0]);
    assert_eq!(p("sin(t)").breakpoints(0.0, PI), vec![0.0, PI]);
    assert_eq!(p("ind(0.25,0.5)*(t^2+1)+ind(0.75,1)").breakpoints(0.0, 1.0), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn simple_function_matches_expansion_and_rejects_disorder() {
    let part = OrderedPartition::from_cuts(0.0, 1.0, &[0.25, 0.5]).unwrap();
    let sf = SimpleFunction::new(part, vec![1.0, -2.0, 3.0]).unwrap();
    let e = sf.to_expr(Var::T);
    for t in [0.1, 0.3, 0.7, 0.99] {
        assert_eq!(sf.eval(t), e.eval(t));
    }
    let cells = vec![set(&[(0.5, 1.0)]), set(&[(0.0, 0.5)])];
    assert!(matches!(OrderedPartition::new(0.0, 1.0, cells), Err(Error::InvalidPartition(_))));
}

#[test]
fn quadrature_examples() {
    let one_panel = QuadratureRule::new(4, Some(1.0)).unwrap();
    let g = build_grid(&unit(), &[0.5], &one_panel).unwrap();
    assert_eq!(g.panels().len(), 2);
    assert_eq!(g.len(), 8);
    let rule = QuadratureRule::default();
    let gp = build_grid(&set(&[(0.0, PI)]), &[], &rule).unwrap();
    assert_abs_diff_eq!(gp.weights().iter().sum::<f64>(), PI, epsilon = 1e-12);
    let two = QuadratureRule::new(2, Some(1.0)).unwrap();
    assert_abs_diff_eq!(integrate(&p("t^3"), &unit(), &two).unwrap(), 0.25, epsilon = 1e-15);
    let pi = set(&[(0.0, PI)]);
    assert_abs_diff_eq!(integrate(&p("sin(t)^2"), &pi, &rule).unwrap(), PI / 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(integrate(&p("sin(t)*cos(t)"), &pi, &rule).unwrap(), 0.0, epsilon = 1e-12);
    assert_eq!(integrate(&p("1"), &LebesgueSet::empty(), &rule).unwrap(), 0.0);
    assert_abs_diff_eq!(inner_product(&p("1"), &p("1"), &pi, &rule).unwrap(), PI, epsilon = 1e-12);
    assert_abs_diff_eq!(inner_product(&p("sin(t)"), &p("sin(t)"), &pi, &rule).unwrap(), PI / 2.0, epsilon = 1e-12);
    assert_eq!(inner_product(&p("ind(0,0.5)"), &p("ind(0.5,1)"), &unit(), &rule).unwrap(), 0.0);
    assert_abs_diff_eq!(lp_norm(&p("1"), &unit(), 2.0, &rule).unwrap(), 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(lp_norm(&p("sin(t)"), &pi, 2.0, &rule).unwrap(), (PI / 2.0).sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(lp_norm(&p("ind(0,0.5)"), &unit(), 1.0, &rule).unwrap(), 0.5, epsilon = 1e-13);
    assert!(matches!(lp_norm(&p("1"), &unit(), 0.5, &rule), Err(Error::InvalidP(_))));
}

fn example1_kernels() -> (Kernel, Kernel) {
    (Kernel::General(p("(2/pi)*(cos(t)*cos(s)+sin(t)*sin(s)+cos(t)*sin(s))")), Kernel::General(p("(2/pi)*(cos(t)*cos(s)+2*sin(t)*sin(s))")))
}

#[test]
fn kernel_evaluation_examples() {
    assert_abs_diff_eq!(Kernel::separable(p("sin(t)"), p("cos(t)")).eval(PI / 2.0, 0.0), 1.0, epsilon = 1e-15);
    assert_eq!(Kernel::volterra(Kernel::General(p("1")), 0.0).eval(0.3, 0.7), 0.0);
    assert_abs_diff_eq!(example1_kernels().0.eval(0.0, 0.0), 2.0 / PI, epsilon = 1e-15);
}

#[test]
fn composition_examples() {
    let rule = QuadratureRule::default();
    let one = Kernel::General(p("1"));
    let grid = Arc::new(build_grid(&unit(), &[], &rule).unwrap());
    let all = vec![true; grid.len()];
    let k1 = one.sample(&grid).unwrap();
    let c = compose(&k1, &all, &k1).unwrap();
    assert!(c.dense().iter().all(|v| (v - 1.0).abs() < 1e-13));

    let (ka, kb) = example1_kernels();
    let gpi = Arc::new(build_grid(&set(&[(0.0, PI)]), &[], &rule).unwrap());
    let allp = vec![true; gpi.len()];
    let ab = compose(&ka.sample(&gpi).unwrap(), &allp, &kb.sample(&gpi).unwrap()).unwrap().dense();
    let pts = gpi.points();
    for (i, &t) in pts.iter().enumerate() {
        for (j, &tau) in pts.iter().enumerate() {
            let exact = 2.0 / PI * (t.cos() * tau.cos() + 2.0 * t.sin() * tau.sin() + 2.0 * t.cos() * tau.sin());
            assert!((ab[[i, j]] - exact).abs() < 1e-10);
        }
    }

    let v = Kernel::volterra(one.clone(), 0.0).sample(&grid).unwrap();
    let vv = compose(&v, &all, &v).unwrap().dense();
    let it2 = iterated_kernel(&v, &all, 2).unwrap().dense();
    let it1 = iterated_kernel(&v, &all, 1).unwrap().dense();
    let it0 = iterated_kernel(&v, &all, 0).unwrap();
    assert_eq!(it0.dense(), v.dense());
    let sq = polynomial_kernel(&v, &all, &Polynomial::monomial(1.0, 2).unwrap()).unwrap().dense();
    let lin = polynomial_kernel(&v, &all, &Polynomial::monomial(1.0, 1).unwrap()).unwrap().dense();
    assert_eq!(lin, v.dense());
    let konst = polynomial_kernel(&v, &all, &Polynomial::new(vec![3.0]).unwrap()).unwrap();
    assert_eq!(konst.sup_norm(), 0.0);
    let pts = grid.points();
    for (i, &t) in pts.iter().enumerate() {
        for (j, &s) in pts.iter().enumerate() {
            let lower = s <= t;
            let d1 = if lower { t - s } else { 0.0 };
            let d2 = if lower { (t - s).powi(2) / 2.0 } else { 0.0 };
            assert!((vv[[i, j]] - d1).abs() < 1e-12);
            assert!((it1[[i, j]] - vv[[i, j]]).abs() < 1e-13);
            assert!((it2[[i, j]] - d2).abs() < 1e-12);
            assert!((sq[[i, j]] - d1).abs() < 1e-12);
        }
    }
}

#[test]
fn norm_bound_examples() {
    let rule = QuadratureRule::default();
    assert_abs_diff_eq!(analytic_norm_bound(&Kernel::General(p("1")), &unit(), f64::INFINITY, &rule).unwrap(), 1.0, epsilon = 1e-13);
    for q in [1.0, 2.0, f64::INFINITY] {
        assert_eq!(analytic_norm_bound(&Kernel::zero(), &unit(), q, &rule).unwrap(), 0.0);
    }
    let (a, _) = example1_operators().unwrap();
    let bound = a.norm_bound().unwrap();
    assert!(bound.is_finite() && bound <= 6.0 * PI);
}

#[test]
fn operator_examples() {
    let rule = QuadratureRule::default();
    let v = IntegralOperator::new(Kernel::volterra(Kernel::General(p("1")), 0.0), unit(), unit()).unwrap();
    let grid = common_grid(&[&v], &[], &rule, None).unwrap();
    let one = GridFunction::from_fn(grid.clone(), |_| 1.0);
    let y = v.apply(&one).unwrap();
    let y2 = apply_poly(&v, &Polynomial::monomial(1.0, 2).unwrap(), &one).unwrap();
    let id = apply_poly(&v, &Polynomial::new(vec![1.0]).unwrap(), &one).unwrap();
    let lin = apply_poly(&v, &Polynomial::monomial(1.0, 1).unwrap(), &one).unwrap();
    for (k, &t) in grid.points().iter().enumerate() {
        assert!((y.values()[k] - t).abs() < 1e-13);
        assert!((y2.values()[k] - t * t / 2.0).abs() < 1e-13);
        assert_eq!(id.values()[k], 1.0);
        assert!((lin.values()[k] - y.values()[k]).abs() < 1e-15);
    }
    let z = IntegralOperator::new(Kernel::zero(), unit(), unit()).unwrap();
    assert!(z.apply(&one).unwrap().values().iter().all(|v| *v == 0.0));
    let zc = compose_ops(&z, &v, &grid).unwrap();
    assert!(!check_nonvanishing(&zc, &rule, None, None).unwrap());

    let (a, b) = example1_operators().unwrap();
    let gpi = common_grid(&[&a, &b], &[], &rule, None).unwrap();
    let sin = GridFunction::from_fn(gpi.clone(), f64::sin);
    let bs = b.apply(&sin).unwrap();
    for (k, &t) in gpi.points().iter().enumerate() {
        assert!((bs.values()[k] - 2.0 * t.sin()).abs() < 1e-12);
    }
    let ab = compose_ops(&a, &b, &gpi).unwrap();
    let kab = ab.sample(&gpi).unwrap().dense();
    let (t, tau) = (gpi.points()[5], gpi.points()[100]);
    let exact = 2.0 / PI * (t.cos() * tau.cos() + 2.0 * t.sin() * tau.sin() + 2.0 * t.cos() * tau.sin());
    assert_abs_diff_eq!(kab[[5, 100]], exact, epsilon = 1e-10);
}

#[test]
fn direct_residual_examples() {
    let rule = QuadratureRule::default();
    let (a, b) = example1_operators().unwrap();
    let grid = common_grid(&[&a, &b], &[], &rule, None).unwrap();
    let (da, db) = (a.discretize(&grid).unwrap(), b.discretize(&grid).unwrap());
    let battery = default_battery(&grid, a.x(), 0, 10);
    let dr = direct_residual(&da, &db, &Polynomial::monomial(1.0, 2).unwrap(), &battery, None).unwrap();
    assert!(dr.max_residual < 1e-8);
    // F = 0: the residual is ||A B x|| / (1 + ||x||)
    let dz = direct_residual(&da, &db, &Polynomial::new(vec![]).unwrap(), &battery, None).unwrap();
    let w = grid.weights();
    let norm = |v: &[f64]| v.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
    let expect =
        battery.iter().map(|x| norm(&da.apply_values(&db.apply_values(x.values()))) / (1.0 + norm(x.values()))).fold(0.0f64, f64::max);
    assert_abs_diff_eq!(dz.max_residual, expect, epsilon = 1e-14);
    let zero = IntegralOperator::new(Kernel::zero(), a.g().clone(), a.x().clone()).unwrap().discretize(&grid).unwrap();
    let d0 = direct_residual(&da, &zero, &Polynomial::monomial(1.0, 2).unwrap(), &battery, None).unwrap();
    assert_eq!(d0.max_residual, 0.0);
}

#[test]
fn covariance_examples() {
    let (a, b) = example1_operators().unwrap();
    let r = check_covariance(&a, &b, &Polynomial::monomial(1.0, 2).unwrap(), &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(!r.conditions[0].skipped && r.conditions[1].skipped && r.conditions[2].skipped);
    let r3 = check_covariance(&a, &b, &Polynomial::monomial(1.0, 3).unwrap(), &ctx()).unwrap();
    assert_eq!(r3.verdict, Verdict::Fail);
    assert!(r3.conditions[0].violation_measure > 0.1 * PI * PI);
    let zero = IntegralOperator::new(Kernel::zero(), a.g().clone(), a.x().clone()).unwrap();
    assert_eq!(check_covariance(&zero, &b, &Polynomial::monomial(1.0, 2).unwrap(), &ctx()).unwrap().verdict, Verdict::Pass);

    assert_eq!(check_affine(&a, &a, 0.0, 1.0, &ctx()).unwrap().verdict, Verdict::Pass);
    // k_A = k_B = 1 would satisfy AB = B exactly, so k_A = 2 gives AB = 2B
    let one = IntegralOperator::new(Kernel::General(p("1")), unit(), unit()).unwrap();
    let two = IntegralOperator::new(Kernel::General(p("2")), unit(), unit()).unwrap();
    assert_eq!(check_affine(&one, &one, 1.0, 0.0, &ctx()).unwrap().verdict, Verdict::Pass);
    assert_eq!(check_affine(&two, &one, 1.0, 0.0, &ctx()).unwrap().verdict, Verdict::Fail);
    let line = LebesgueSet::real_line();
    let ga = IntegralOperator::new(Kernel::Convolution { profile: p("exp(-t^2)"), one_sided: false }, line.clone(), line.clone()).unwrap();
    let gb = IntegralOperator::new(Kernel::Convolution { profile: p("exp(-2*(t-0.5)^2)"), one_sided: false }, line.clone(), line).unwrap();
    let wctx = CheckContext { window: Some((-12.0, 12.0)), ..ctx() };
    assert_eq!(check_affine(&ga, &gb, 0.0, 1.0, &wctx).unwrap().verdict, Verdict::Pass);

    assert_eq!(check_monomial(&a, &b, 1.0, 2, &ctx()).unwrap().verdict, Verdict::Pass);
    assert_eq!(check_monomial(&a, &a, 1.0, 1, &ctx()).unwrap().verdict, Verdict::Pass);
    assert_eq!(check_monomial(&a, &b, 2.0, 2, &ctx()).unwrap().verdict, Verdict::Fail);
}

#[test]
fn nonvanishing_examples() {
    let rule = QuadratureRule::default();
    let ba2 = opkernel::fixtures::example1_ba2(&ctx()).unwrap();
    assert!(check_nonvanishing(&ba2, &rule, None, None).unwrap());
    let [a, b, c, e] = separable_factors("volterra_ab0").unwrap();
    let oa = SeparableVolterra::new(a, c, 0.0, 1.0).unwrap().operator().unwrap();
    let ob = SeparableVolterra::new(b, e, 0.0, 1.0).unwrap().operator().unwrap();
    let grid = common_grid(&[&oa, &ob], &[], &rule, None).unwrap();
    let ab = compose_ops(&oa, &ob, &grid).unwrap();
    assert!(!check_nonvanishing(&ab, &rule, None, None).unwrap());
}

#[test]
fn separable_volterra_examples() {
    let sq = Polynomial::monomial(1.0, 2).unwrap();
    let [a, b, c, e] = separable_factors("volterra_counterexample").unwrap();
    let r = check_simple_necessary(&a, &b, &c, &e, &sq, 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.diag_bool("support_ok"), Some(true));
    assert_eq!(r.diag_bool("relation_holds"), Some(false));
    assert!(r.direct_residual.unwrap() > 1e-3);
    let one = p("1");
    let r = check_simple_necessary(&one, &one, &one, &one, &sq, 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.diag_bool("support_ok"), Some(false));
    assert_eq!(r.diag_bool("relation_holds"), Some(false));
    assert_eq!(r.verdict, Verdict::Pass);

    let [a, b, c, e] = separable_factors("volterra_sufficient").unwrap();
    for n in [2, 3] {
        let r = check_simple_sufficient(&a, &b, &c, &e, &Polynomial::monomial(1.0, n).unwrap(), 0.0, 1.0, &ctx()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }
    let zero = p("0");
    let r = check_simple_sufficient(&zero, &one, &zero, &one, &sq, 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.direct_residual, Some(0.0));
    // a = 0 alone leaves bc = 1, so the hypothesis is not met although A = 0
    let r = check_simple_sufficient(&zero, &one, &one, &one, &sq, 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.diag_bool("hypothesis"), Some(false));
    assert_eq!(r.direct_residual, Some(0.0));
    let r = check_simple_sufficient(&one, &one, &one, &one, &sq, 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.notes.iter().any(|n| n.contains("no conclusion")));
}

#[test]
fn delta_commutation_examples() {
    let [a, b, c, e] = separable_factors("volterra_counterexample").unwrap();
    let r = check_delta_commut_necessary(&a, &b, &c, &e, 1.0, 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.diag_bool("support_ok"), Some(true));
    assert_eq!(r.verdict, Verdict::Pass);
    let one = p("1");
    let r = check_delta_commut_necessary(&one, &one, &one, &one, 2.0, 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.diag_bool("relation_holds"), Some(false));
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_delta_commut_necessary(&one, &p("t"), &one, &one, 3.0, 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.diag_bool("support_ok"), Some(false));
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn qplane_examples() {
    let k = |s: &str| Kernel::General(p(s));
    let r = check_qplane(&k("t+s^2"), &k("t+s^2"), 0.0, 0.0, 1.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.conditions[1].skipped);
    let ac = Kernel::separable(p("cos(t)"), p("exp(t)"));
    let lac = Kernel::separable(p("3*cos(t)"), p("exp(t)"));
    assert_eq!(check_qplane(&ac, &lac, 0.0, 0.0, 1.0, 1.0, &ctx()).unwrap().verdict, Verdict::Pass);
    let r = check_qplane(&k("1"), &k("t*s"), 0.0, 0.0, 1.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    // pointwise probe at (t, s, tau) = (1, 0.5, 0.25): 1 * 0.5 * 0.25 vs 1 * 0.5 * 1
    assert_abs_diff_eq!(1.0 * 0.5 * 0.25, 0.125);
    assert!(matches!(check_qplane(&k("1"), &k("1"), 0.5, 0.25, 1.0, 1.0, &ctx()), Err(Error::InvalidArgument(_))));
}

#[test]
fn commutation_sufficiency_examples() {
    let kb = Kernel::separable(p("cos(t)+2"), p("t+1"));
    let ka = Kernel::separable(p("2*(cos(t)+2)"), p("t+1"));
    let r = check_commut_sufficient(&ka, &kb, 0.0, 1.0, Some(2.0), &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_commut_sufficient(&ka, &kb, 0.0, 1.0, None, &ctx()).unwrap();
    assert_abs_diff_eq!(r.diag_f64("lambda").unwrap(), 2.0, epsilon = 1e-12);
    let r = check_commut_sufficient(&Kernel::General(p("sin(t+2*s)")), &Kernel::General(p("cos(3*t-s)")), 0.0, 1.0, None, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.notes.iter().any(|n| n.contains("no conclusion")));
    let [a, b, c, e] = separable_factors("volterra_bothzero").unwrap();
    let r = check_commut_sufficient(&Kernel::separable(a, c), &Kernel::separable(b, e), 0.0, 1.0, None, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn both_zero_examples() {
    let [a, b, c, e] = separable_factors("volterra_bothzero").unwrap();
    let r = check_both_zero(&Kernel::separable(a, c), &Kernel::separable(b, e), 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let one = Kernel::General(p("1"));
    assert_eq!(check_both_zero(&one, &one, 0.0, 1.0, &ctx()).unwrap().verdict, Verdict::Fail);
    let r = check_both_zero(&Kernel::General(p("ind(0,0.5)")), &Kernel::General(p("ind(0.5,1)")), 0.0, 1.0, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.notes.iter().any(|n| n.contains("AB = 0 but BA != 0")));
}

#[test]
fn convolution_examples() {
    let z = Polynomial::monomial(1.0, 1).unwrap();
    let g = p("exp(-t^2)");
    assert_eq!(check_conv_poly(&g, &p("exp(-3*t^2)"), &z, false, &ctx()).unwrap().verdict, Verdict::Pass);
    let r = check_conv_poly(&g, &p("exp(-3*t^2)"), &Polynomial::monomial(1.0, 2).unwrap(), false, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.direct_residual.unwrap() > 1e-3);
    assert_eq!(check_conv_poly(&g, &p("0"), &Polynomial::monomial(1.0, 2).unwrap(), false, &ctx()).unwrap().verdict, Verdict::Pass);
    assert!(check_conv_poly(&g, &g, &Polynomial::new(vec![1.0, 1.0]).unwrap(), false, &ctx()).is_err());
    let r = check_conv_monomial(&g, &p("exp(-(t-1)^2)"), 1.0, 2, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.direct_residual.unwrap() > 1e-3);
    assert_eq!(check_conv_monomial(&p("ind(0,1)"), &p("ind(2,3)"), 1.0, 2, &ctx()).unwrap().verdict, Verdict::Fail);
    assert_eq!(check_conv_monomial(&p("0"), &g, 1.0, 2, &ctx()).unwrap().verdict, Verdict::Pass);

    let ind = p("ind(0,1)");
    let r = check_one_sided_monomial(&ind, &ind, 1.0, 2, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.direct_residual.unwrap() > 1e-3);
    let r = check_one_sided_monomial(&ind, &p("0"), 1.0, 2, &ctx()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let small = CheckContext { window: Some((0.0, 20.0)), ..ctx() };
    let r = check_one_sided_monomial(&p("ind(0,inf)*exp(-t)"), &ind, 1.0, 2, &small).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn convolution_primitives() {
    let rule = QuadratureRule::default();
    let w = Interval::new(-5.0, 5.0).unwrap();
    let ind = p("ind(0,1)");
    let hat = convolve(&ind, &ind, w, &rule).unwrap();
    for (&t, &v) in hat.points().iter().zip(hat.values()) {
        let exact = if (0.0..=2.0).contains(&t) { 1.0 - (t - 1.0).abs() } else { 0.0 };
        assert!((v - exact).abs() < 1e-12, "t = {t}: {v} vs {exact}");
    }
    assert!(convolve(&ind, &p("0"), w, &rule).unwrap().values().iter().all(|v| *v == 0.0));
    let s = [-2.0, -0.5, 0.0, 0.5, 2.0];
    let lt = laplace_transform(&ind, &s, w, &rule).unwrap();
    for (k, &sv) in s.iter().enumerate() {
        let exact = if sv == 0.0 { 1.0 } else { (1.0 - (-sv).exp()) / sv };
        assert_abs_diff_eq!(lt.values[k], exact, epsilon = 1e-12);
    }
    assert!(laplace_transform(&p("0"), &s, w, &rule).unwrap().values.iter().all(|v| *v == 0.0));
    let wide = Interval::new(-20.0, 20.0).unwrap();
    let gl = laplace_transform(&p("exp(-t^2)"), &s, wide, &rule).unwrap();
    for (k, &sv) in s.iter().enumerate() {
        assert_abs_diff_eq!(gl.values[k], PI.sqrt() * (sv * sv / 4.0).exp(), epsilon = 1e-10);
    }
}

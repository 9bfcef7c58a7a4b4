//! Volterra operators `(Ax)(t) = int_gamma^t k(t, s) x(s) ds`.
//!
//! Separable operators `(Ax)(t) = a(t) int_alpha^t c(s) x(s) ds` reduce the
//! covariance relation to support conditions on products of the factors.
//! General kernels are checked pointwise on the tetrahedron
//! `gamma_b <= tau <= s <= t <= beta`, which is the only part of the cube the
//! operators see. Three-dimensional scans use the tensor grid of the 1-D
//! quadrature nodes with product weights.

use std::sync::Arc;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use crate::covariance::CheckContext;
use crate::domain_sets::{ae_zero, AeTolerance, AeVerdict, LebesgueSet};
use crate::func_expr::FuncExpr;
use crate::kernels::{compose, GridKernel, Kernel, Polynomial};
use crate::operators::{action_ratio, common_grid, default_battery, direct_residual, DiscreteOperator, IntegralOperator, ORACLE_THRESHOLD};
use crate::quadrature::{Grid, GridFunction};
use crate::report::{CheckReport, ConditionReport, Verdict};
use crate::{Error, Result};

/// `(Ax)(t) = outer(t) int_alpha^t inner(s) x(s) ds` on `L_p[alpha, beta]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableVolterra {
    pub outer: FuncExpr,
    pub inner: FuncExpr,
    pub alpha: f64,
    pub beta: f64,
}

impl SeparableVolterra {
    pub fn new(outer: FuncExpr, inner: FuncExpr, alpha: f64, beta: f64) -> Result<Self> {
        check_interval(alpha, beta)?;
        Ok(SeparableVolterra { outer, inner, alpha, beta })
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::volterra(Kernel::separable(self.outer.clone(), self.inner.clone()), self.alpha)
    }

    pub fn operator(&self) -> Result<IntegralOperator> {
        let dom = LebesgueSet::interval(self.alpha, self.beta)?;
        IntegralOperator::new(self.kernel(), dom.clone(), dom)
    }
}

fn check_interval(alpha: f64, beta: f64) -> Result<()> {
    if alpha.is_finite() && beta.is_finite() && alpha < beta {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("invalid interval [{alpha}, {beta}]")))
    }
}

/// Regions of the quarter-plane decomposition of `[alpha, beta]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TriangularRegion {
    /// `gamma_b <= t <= beta`, `gamma_b <= s <= t`, `gamma_b <= tau <= t`.
    Gamma { gamma_b: f64, beta: f64 },
    /// `[gamma_b, beta] x [gamma_a, gamma_b]` in `(t, tau)`.
    Delta { gamma_a: f64, gamma_b: f64, beta: f64 },
}

impl TriangularRegion {
    /// Membership; `s` is ignored for `Delta`.
    pub fn contains(&self, t: f64, s: f64, tau: f64) -> bool {
        match *self {
            TriangularRegion::Gamma { gamma_b, beta } => gamma_b <= t && t <= beta && gamma_b <= s && s <= t && gamma_b <= tau && tau <= t,
            TriangularRegion::Delta { gamma_a, gamma_b, beta } => gamma_b <= t && t <= beta && gamma_a <= tau && tau <= gamma_b,
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            TriangularRegion::Gamma { gamma_b, beta } => (beta - gamma_b).powi(3) / 3.0,
            TriangularRegion::Delta { gamma_a, gamma_b, beta } => (beta - gamma_b) * (gamma_b - gamma_a),
        }
    }
}

struct Setup {
    grid: Arc<Grid>,
    da: DiscreteOperator,
    db: DiscreteOperator,
    battery: Vec<GridFunction>,
}

fn setup(a: &IntegralOperator, b: &IntegralOperator, extra: &[f64], ctx: &CheckContext) -> Result<Setup> {
    let grid = common_grid(&[a, b], extra, &ctx.rule, None)?;
    let da = a.discretize(&grid)?;
    let db = b.discretize(&grid)?;
    let support = a.x().union(b.x());
    let battery = default_battery(&grid, &support, ctx.seed, ctx.battery_size);
    Ok(Setup { grid, da, db, battery })
}

fn product_samples(grid: &Grid, factors: &[&FuncExpr], c: f64) -> Vec<f64> {
    grid.points().iter().map(|&t| c * factors.iter().map(|f| f.eval(t)).product::<f64>()).collect()
}

/// `||T x|| / (scale ||x||)` over the battery for a product of discrete
/// operators applied right to left.
fn product_action(s: &Setup, ops: &[&DiscreteOperator]) -> Result<f64> {
    let mut scale = 1.0;
    for o in ops {
        scale *= o.norm_bound(2.0)?;
    }
    let (rel, _) = action_ratio(&s.grid, &s.battery, scale, |x| {
        let mut y = x.to_vec();
        for o in ops.iter().rev() {
            y = o.apply_values(&y);
        }
        y
    });
    Ok(rel)
}

fn line_tol(ctx: &CheckContext, alpha: f64, beta: f64) -> AeTolerance {
    ctx.tolerance(beta - alpha)
}

fn support_verdict(grid: &Grid, values: &[f64], tol: &AeTolerance) -> Result<AeVerdict> {
    ae_zero(values, grid.weights(), tol)
}

fn separable_ops(
    a: &FuncExpr,
    b: &FuncExpr,
    c: &FuncExpr,
    e: &FuncExpr,
    alpha: f64,
    beta: f64,
) -> Result<(IntegralOperator, IntegralOperator)> {
    let oa = SeparableVolterra::new(a.clone(), c.clone(), alpha, beta)?.operator()?;
    let ob = SeparableVolterra::new(b.clone(), e.clone(), alpha, beta)?.operator()?;
    Ok((oa, ob))
}

/// If `AB = B F(A)` with `deg F >= 2`, then `abce = 0` a.e. The report
/// passes when this implication is not contradicted.
#[allow(clippy::too_many_arguments)]
pub fn check_simple_necessary(
    a: &FuncExpr,
    b: &FuncExpr,
    c: &FuncExpr,
    e: &FuncExpr,
    f: &Polynomial,
    alpha: f64,
    beta: f64,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    let started = Instant::now();
    if f.degree() < 2 {
        return Err(Error::InvalidArgument(format!("polynomial {f} must have degree at least 2")));
    }
    let (oa, ob) = separable_ops(a, b, c, e, alpha, beta)?;
    let s = setup(&oa, &ob, &[], ctx)?;
    let tol = line_tol(ctx, alpha, beta);
    let mut report = CheckReport::new("volterra_necessary", &tol, &ctx.rule, s.grid.max_panel_width());
    let dr = direct_residual(&s.da, &s.db, f, &s.battery, None)?;
    let relation_holds = dr.holds();
    let support = support_verdict(&s.grid, &product_samples(&s.grid, &[a, b, c, e], 1.0), &tol)?;
    let consistent = !relation_holds || support.is_ae_zero;
    report.conditions.push(ConditionReport::flag(
        "AB = BF(A) implies abce = 0 a.e. on [alpha, beta]",
        consistent,
        dr.max_residual,
        support.violation_measure,
    ));
    report.direct_residual = Some(dr.max_residual);
    report.diag("relation_holds", relation_holds);
    report.diag("support_ok", support.is_ae_zero);
    report.diag("support_violation_measure", support.violation_measure);
    report.diag("direct_relative", dr.relative);
    report.diag("ab_action_relative", product_action(&s, &[&s.da, &s.db])?);
    report.diag("polynomial", f.to_string());
    if !consistent {
        report.notes.push("CONTRADICTS: relation holds while abce is not a.e. zero".into());
    }
    report.finish(None, started);
    Ok(report)
}

/// If `ae = 0` and `bc = 0` a.e. and `F(0) = 0`, then `AB = B F(A) = 0`.
#[allow(clippy::too_many_arguments)]
pub fn check_simple_sufficient(
    a: &FuncExpr,
    b: &FuncExpr,
    c: &FuncExpr,
    e: &FuncExpr,
    f: &Polynomial,
    alpha: f64,
    beta: f64,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    let started = Instant::now();
    if f.coeff(0) != 0.0 {
        return Err(Error::InvalidArgument(format!("polynomial {f} must satisfy F(0) = 0")));
    }
    let (oa, ob) = separable_ops(a, b, c, e, alpha, beta)?;
    let s = setup(&oa, &ob, &[], ctx)?;
    let tol = line_tol(ctx, alpha, beta);
    let mut report = CheckReport::new("volterra_sufficient", &tol, &ctx.rule, s.grid.max_panel_width());
    let ae = support_verdict(&s.grid, &product_samples(&s.grid, &[a, e], 1.0), &tol)?;
    let bc = support_verdict(&s.grid, &product_samples(&s.grid, &[b, c], 1.0), &tol)?;
    let ab_rel = product_action(&s, &[&s.da, &s.db])?;
    // B F(A) as the polynomial action with B applied last
    let zero = DirectResidualZero::new(&s, f)?;
    report.conditions.push(ConditionReport::flag("a e = 0 a.e.", ae.is_ae_zero, ae.max_abs, ae.violation_measure));
    report.conditions.push(ConditionReport::flag("b c = 0 a.e.", bc.is_ae_zero, bc.max_abs, bc.violation_measure));
    report.conditions.push(ConditionReport::flag("A B = 0 on the battery", ab_rel <= ORACLE_THRESHOLD, ab_rel, 0.0));
    report.conditions.push(ConditionReport::flag("B F(A) = 0 on the battery", zero.rel <= ORACLE_THRESHOLD, zero.rel, 0.0));
    report.direct_residual = Some(zero.sup.max(ab_rel));
    report.diag("hypothesis", ae.is_ae_zero && bc.is_ae_zero);
    report.diag("ab_action_relative", ab_rel);
    report.diag("bf_action_relative", zero.rel);
    report.diag("polynomial", f.to_string());
    let hypothesis = ae.is_ae_zero && bc.is_ae_zero;
    let conclusion = ab_rel <= ORACLE_THRESHOLD && zero.rel <= ORACLE_THRESHOLD;
    report.finish(None, started);
    report.verdict = match (hypothesis, conclusion) {
        (true, true) => Verdict::Pass,
        (true, false) => {
            report.notes.push("CONTRADICTS: hypothesis holds but the operators do not vanish".into());
            Verdict::Inconclusive
        }
        (false, _) => {
            report.notes.push("hypothesis not met; no conclusion drawn".into());
            Verdict::Fail
        }
    };
    Ok(report)
}

struct DirectResidualZero {
    rel: f64,
    sup: f64,
}

impl DirectResidualZero {
    /// Relative size of `B F(A) x` over the battery.
    fn new(s: &Setup, f: &Polynomial) -> Result<Self> {
        let na = s.da.norm_bound(2.0)?;
        let nb = s.db.norm_bound(2.0)?;
        let fa: f64 = f.coeffs().iter().enumerate().map(|(j, c)| c.abs() * na.powi(j as i32)).sum();
        let (rel, sup) = action_ratio(&s.grid, &s.battery, nb * fa, |x| {
            let mut y = x.to_vec();
            let mut acc: Vec<f64> = y.iter().map(|v| f.coeff(0) * v).collect();
            for j in 1..=f.degree() {
                y = s.da.apply_values(&y);
                for (a, v) in acc.iter_mut().zip(&y) {
                    *a += f.coeff(j) * v;
                }
            }
            s.db.apply_values(&acc)
        });
        Ok(DirectResidualZero { rel, sup })
    }
}

/// If `AB = delta BA != 0`, then `(delta - 1) abce = 0` a.e. The report
/// passes when this implication is not contradicted.
#[allow(clippy::too_many_arguments)]
pub fn check_delta_commut_necessary(
    a: &FuncExpr,
    b: &FuncExpr,
    c: &FuncExpr,
    e: &FuncExpr,
    delta: f64,
    alpha: f64,
    beta: f64,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    let started = Instant::now();
    let (oa, ob) = separable_ops(a, b, c, e, alpha, beta)?;
    let s = setup(&oa, &ob, &[], ctx)?;
    let tol = line_tol(ctx, alpha, beta);
    let mut report = CheckReport::new("delta_commut_necessary", &tol, &ctx.rule, s.grid.max_panel_width());
    let f = Polynomial::monomial(delta, 1)?;
    let dr = direct_residual(&s.da, &s.db, &f, &s.battery, None)?;
    let ab_rel = product_action(&s, &[&s.da, &s.db])?;
    let antecedent = dr.holds() && ab_rel > ORACLE_THRESHOLD;
    let support = support_verdict(&s.grid, &product_samples(&s.grid, &[a, b, c, e], delta - 1.0), &tol)?;
    let consistent = !antecedent || support.is_ae_zero;
    report.conditions.push(ConditionReport::flag(
        "AB = delta BA != 0 implies (delta - 1) abce = 0 a.e.",
        consistent,
        dr.max_residual,
        support.violation_measure,
    ));
    report.direct_residual = Some(dr.max_residual);
    report.diag("relation_holds", dr.holds());
    report.diag("ab_nonzero", ab_rel > ORACLE_THRESHOLD);
    report.diag("support_ok", support.is_ae_zero);
    if !consistent {
        report.notes.push("CONTRADICTS: relation holds with AB != 0 while (delta - 1) abce is not a.e. zero".into());
    }
    report.finish(None, started);
    Ok(report)
}

/// Per-row accumulation over the tetrahedron `j <= k <= i` of node indices.
fn tetra_rows<T: Send>(idx: &[usize], f: impl Fn(usize, &[usize]) -> T + Sync) -> Vec<T> {
    (0..idx.len()).into_par_iter().map(|p| f(idx[p], &idx[..=p])).collect()
}

struct Scan {
    sup: f64,
    l2sq: f64,
    violation: f64,
}

/// Streams a residual over the tetrahedron on `idx` and applies the a.e.
/// test to `residual / scale`.
fn scan_tetra(idx: &[usize], w: &[f64], scale: f64, tol: &AeTolerance, r: impl Fn(usize, usize, usize) -> f64 + Sync) -> Scan {
    let norm = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let first = tetra_rows(idx, |i, below| {
        let (mut m, mut l2) = (0.0f64, 0.0);
        for (q, &k) in below.iter().enumerate() {
            for &j in &below[..=q] {
                let v = r(i, k, j);
                m = m.max(v.abs());
                l2 += w[i] * w[k] * w[j] * v * v;
            }
        }
        (m, l2)
    });
    let sup = first.iter().fold(0.0f64, |m, x| m.max(x.0));
    let l2sq: f64 = first.iter().map(|x| x.1).sum();
    let threshold = tol.eps_value + tol.eps_rel * sup / norm;
    let viol: Vec<f64> = tetra_rows(idx, |i, below| {
        let mut acc = 0.0;
        for (q, &k) in below.iter().enumerate() {
            for &j in &below[..=q] {
                let v = r(i, k, j) / norm;
                if !v.is_finite() || v.abs() > threshold {
                    acc += w[i] * w[k] * w[j];
                }
            }
        }
        acc
    });
    Scan { sup, l2sq, violation: viol.iter().sum() }
}

/// Measure of the tetrahedron points satisfying a predicate.
fn tetra_measure(idx: &[usize], w: &[f64], pred: impl Fn(usize, usize, usize) -> bool + Sync) -> f64 {
    tetra_rows(idx, |i, below| {
        let mut acc = 0.0;
        for (q, &k) in below.iter().enumerate() {
            for &j in &below[..=q] {
                if pred(i, k, j) {
                    acc += w[i] * w[k] * w[j];
                }
            }
        }
        acc
    })
    .iter()
    .sum()
}

fn inner_kernel(k: &Kernel) -> Kernel {
    k.split_triangular().0.clone()
}

fn sup_on(m: &Array2<f64>, idx: &[usize]) -> f64 {
    let mut s = 0.0f64;
    for (p, &i) in idx.iter().enumerate() {
        for &j in &idx[..=p] {
            s = s.max(m[[i, j]].abs());
        }
    }
    s
}

/// Checks `AB = delta BA` for `(Ax)(t) = int_{gamma_a}^t k_A x`,
/// `(Bx)(t) = int_{gamma_b}^t k_B x` on `[gamma_a, beta]`:
/// pointwise `k_A(t,s) k_B(s,tau) = delta k_B(t,s) k_A(s,tau)` on the
/// tetrahedron above `gamma_b`, and `int_{gamma_b}^t k_B(t,s) k_A(s,tau) ds = 0`
/// on `[gamma_b, beta] x [gamma_a, gamma_b]`.
#[allow(clippy::too_many_arguments)]
pub fn check_qplane(
    ka: &Kernel,
    kb: &Kernel,
    gamma_a: f64,
    gamma_b: f64,
    beta: f64,
    delta: f64,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    let started = Instant::now();
    if !(gamma_a <= gamma_b && gamma_b < beta) || !gamma_a.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("need gamma_a <= gamma_b < beta, got {gamma_a}, {gamma_b}, {beta}")));
    }
    let dom = LebesgueSet::interval(gamma_a, beta)?;
    let oa = IntegralOperator::new(Kernel::volterra(inner_kernel(ka), gamma_a), dom.clone(), dom.clone())?;
    let ob = IntegralOperator::new(Kernel::volterra(inner_kernel(kb), gamma_b), dom.clone(), dom)?;
    let s = setup(&oa, &ob, &[gamma_b], ctx)?;
    let tol = ctx.tolerance((beta - gamma_a).powi(3));
    let mut report = CheckReport::new("qplane", &tol, &ctx.rule, s.grid.max_panel_width());
    let ea = s.da.kernel().raw_values();
    let eb = s.db.kernel().raw_values();
    let pts = s.grid.points();
    let w = s.grid.weights();
    let above: Vec<usize> = (0..s.grid.len()).filter(|&i| pts[i] >= gamma_b).collect();
    let scale = sup_on(ea, &above) * sup_on(eb, &above) * delta.abs().max(1.0);
    let gamma = TriangularRegion::Gamma { gamma_b, beta };
    if gamma.measure() > 0.0 {
        let scan = scan_tetra(&above, w, scale, &tol, |i, k, j| ea[[i, k]] * eb[[k, j]] - delta * eb[[i, k]] * ea[[k, j]]);
        report.conditions.push(ConditionReport {
            region: "Gamma: gamma_b <= tau <= s <= t <= beta".into(),
            sup_residual: scan.sup,
            l2_residual: scan.l2sq.sqrt(),
            violation_measure: scan.violation,
            pass: scan.violation <= tol.eps_measure,
            skipped: false,
        });
    }
    let delta_region = TriangularRegion::Delta { gamma_a, gamma_b, beta };
    if delta_region.measure() > 0.0 {
        let all = vec![true; s.grid.len()];
        let k_ba = compose(s.db.kernel(), &all, s.da.kernel())?;
        let raw_ba = k_ba.raw_values();
        let (mut raw, mut ws) = (Vec::new(), Vec::new());
        for &i in &above {
            for j in (0..s.grid.len()).filter(|&j| pts[j] >= gamma_a && pts[j] < gamma_b) {
                raw.push(raw_ba[[i, j]]);
                ws.push(w[i] * w[j]);
            }
        }
        let tol2 = tol.rescaled_measure((beta - gamma_a).powi(2));
        let cond = ConditionReport::evaluate("Delta: [gamma_b, beta] x [gamma_a, gamma_b]", &raw, &ws, scale * (beta - gamma_b), &tol2)?;
        report.conditions.push(cond);
    } else {
        report.conditions.push(ConditionReport::skipped("Delta: [gamma_b, beta] x [gamma_a, gamma_b]"));
    }
    let f = Polynomial::monomial(delta, 1)?;
    let dr = direct_residual(&s.da, &s.db, &f, &s.battery, None)?;
    report.direct_residual = Some(dr.max_residual);
    report.diag("direct_relative", dr.relative);
    report.diag("delta", delta);
    report.finish(Some(dr.holds()), started);
    Ok(report)
}

/// Kernels of `AB` and `BA` split at `gamma_b`.
#[derive(Debug, Clone)]
pub struct QplaneDecomposition {
    pub grid: Arc<Grid>,
    pub gamma_b: f64,
    /// `k_AB`, zero for `tau < gamma_b`.
    pub k_ab: GridKernel,
    /// `k_BA`; for `tau < gamma_b` it is `int_{gamma_b}^t k_B k_A`.
    pub k_ba: GridKernel,
}

impl QplaneDecomposition {
    pub fn new(ka: &Kernel, kb: &Kernel, gamma_a: f64, gamma_b: f64, beta: f64, ctx: &CheckContext) -> Result<Self> {
        let dom = LebesgueSet::interval(gamma_a, beta)?;
        let oa = IntegralOperator::new(Kernel::volterra(inner_kernel(ka), gamma_a), dom.clone(), dom.clone())?;
        let ob = IntegralOperator::new(Kernel::volterra(inner_kernel(kb), gamma_b), dom.clone(), dom)?;
        let grid = common_grid(&[&oa, &ob], &[gamma_b], &ctx.rule, None)?;
        let a = oa.sample(&grid)?;
        let b = ob.sample(&grid)?;
        let all = vec![true; grid.len()];
        Ok(QplaneDecomposition { k_ab: compose(&a, &all, &b)?, k_ba: compose(&b, &all, &a)?, grid, gamma_b })
    }

    /// `int_{gamma_a}^{gamma_b} k_1 x + int_{gamma_b}^t k_2 x` for either kernel.
    pub fn apply_split(&self, k: &GridKernel, x: &[f64]) -> Vec<f64> {
        let pts = self.grid.points();
        let low: Vec<bool> = pts.iter().map(|&p| p < self.gamma_b).collect();
        let high: Vec<bool> = low.iter().map(|b| !b).collect();
        let m1 = k.apply_matrix(&low);
        let m2 = k.apply_matrix(&high);
        let xv = ndarray::ArrayView1::from(x);
        (m1.dot(&xv) + m2.dot(&xv)).to_vec()
    }
}

fn nz(v: f64, eps: f64) -> bool {
    v.abs() > eps
}

/// Sufficient conditions for `AB = BA` between Volterra operators on
/// `[alpha, beta]` with lower limit `alpha`: where both `k_B(t,s)` and
/// `k_B(s,tau)` are nonzero, `k_A` vanishes in both slots or equals
/// `lambda k_B` in both; off that set the supports of `k_A(t,s) k_B(s,tau)`
/// and of `k_A(s,tau) k_B(t,s)` are null. `lambda` is fitted by least
/// squares when not supplied.
pub fn check_commut_sufficient(
    ka: &Kernel,
    kb: &Kernel,
    alpha: f64,
    beta: f64,
    lambda: Option<f64>,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    let started = Instant::now();
    check_interval(alpha, beta)?;
    let dom = LebesgueSet::interval(alpha, beta)?;
    let oa = IntegralOperator::new(Kernel::volterra(inner_kernel(ka), alpha), dom.clone(), dom.clone())?;
    let ob = IntegralOperator::new(Kernel::volterra(inner_kernel(kb), alpha), dom.clone(), dom)?;
    let s = setup(&oa, &ob, &[], ctx)?;
    let tol = ctx.tolerance((beta - alpha).powi(3));
    let mut report = CheckReport::new("commut_sufficient", &tol, &ctx.rule, s.grid.max_panel_width());
    let ea = s.da.kernel().raw_values();
    let eb = s.db.kernel().raw_values();
    let w = s.grid.weights();
    let idx: Vec<usize> = (0..s.grid.len()).collect();
    let (sa, sb) = (sup_on(ea, &idx), sup_on(eb, &idx));
    let (epa, epb) = (tol.eps_value * sa.max(f64::MIN_POSITIVE), tol.eps_value * sb.max(f64::MIN_POSITIVE));
    let in_omega = |i: usize, k: usize, j: usize| nz(eb[[i, k]], epb) && nz(eb[[k, j]], epb);
    let lambda = match lambda {
        Some(l) => l,
        None => {
            let parts = tetra_rows(&idx, |i, below| {
                let (mut num, mut den) = (0.0, 0.0);
                for (q, &k) in below.iter().enumerate() {
                    for &j in &below[..=q] {
                        if in_omega(i, k, j) && (nz(ea[[i, k]], epa) || nz(ea[[k, j]], epa)) {
                            let wt = w[i] * w[k] * w[j];
                            num += wt * (ea[[i, k]] * eb[[i, k]] + ea[[k, j]] * eb[[k, j]]);
                            den += wt * (eb[[i, k]].powi(2) + eb[[k, j]].powi(2));
                        }
                    }
                }
                (num, den)
            });
            let num: f64 = parts.iter().map(|p| p.0).sum();
            let den: f64 = parts.iter().map(|p| p.1).sum();
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        }
    };
    let eps_fit = tol.eps_value * (sa + lambda.abs() * sb).max(f64::MIN_POSITIVE);
    let omega_viol = tetra_measure(&idx, w, |i, k, j| {
        if !in_omega(i, k, j) {
            return false;
        }
        let vanish = !nz(ea[[i, k]], epa) && !nz(ea[[k, j]], epa);
        let prop = (ea[[i, k]] - lambda * eb[[i, k]]).abs() <= eps_fit && (ea[[k, j]] - lambda * eb[[k, j]]).abs() <= eps_fit;
        !(vanish || prop)
    });
    let g_overlap = tetra_measure(&idx, w, |i, k, j| !in_omega(i, k, j) && nz(ea[[i, k]], epa) && nz(eb[[k, j]], epb));
    let h_overlap = tetra_measure(&idx, w, |i, k, j| !in_omega(i, k, j) && nz(ea[[k, j]], epa) && nz(eb[[i, k]], epb));
    for (label, m) in [
        ("Omega_kB: k_A = 0 or k_A = lambda k_B in both slots", omega_viol),
        ("off Omega_kB: supp k_A(t,s) k_B(s,tau) null", g_overlap),
        ("off Omega_kB: supp k_A(s,tau) k_B(t,s) null", h_overlap),
    ] {
        report.conditions.push(ConditionReport::flag(label, m <= tol.eps_measure, m, m));
    }
    let f = Polynomial::monomial(1.0, 1)?;
    let dr = direct_residual(&s.da, &s.db, &f, &s.battery, None)?;
    report.direct_residual = Some(dr.max_residual);
    report.diag("lambda", lambda);
    report.diag("direct_relative", dr.relative);
    report.diag("commute", dr.holds());
    report.finish(None, started);
    report.verdict = match (report.overall_pass, dr.holds()) {
        (true, true) => Verdict::Pass,
        (true, false) => {
            report.notes.push("CONTRADICTS: sufficient conditions hold but AB != BA".into());
            Verdict::Inconclusive
        }
        (false, _) => {
            report.notes.push("sufficient conditions not met; no conclusion drawn".into());
            Verdict::Fail
        }
    };
    Ok(report)
}

/// `AB = BA = 0` exactly when the supports of `k_A(t,s) k_B(s,tau)` and of
/// `k_A(s,tau) k_B(t,s)` over `tau <= s <= t` are null.
pub fn check_both_zero(ka: &Kernel, kb: &Kernel, alpha: f64, beta: f64, ctx: &CheckContext) -> Result<CheckReport> {
    let started = Instant::now();
    check_interval(alpha, beta)?;
    let dom = LebesgueSet::interval(alpha, beta)?;
    let oa = IntegralOperator::new(Kernel::volterra(inner_kernel(ka), alpha), dom.clone(), dom.clone())?;
    let ob = IntegralOperator::new(Kernel::volterra(inner_kernel(kb), alpha), dom.clone(), dom)?;
    let s = setup(&oa, &ob, &[], ctx)?;
    let tol = ctx.tolerance((beta - alpha).powi(3));
    let mut report = CheckReport::new("both_zero", &tol, &ctx.rule, s.grid.max_panel_width());
    let ea = s.da.kernel().raw_values();
    let eb = s.db.kernel().raw_values();
    let w = s.grid.weights();
    let idx: Vec<usize> = (0..s.grid.len()).collect();
    let (epa, epb) = (tol.eps_value * sup_on(ea, &idx).max(f64::MIN_POSITIVE), tol.eps_value * sup_on(eb, &idx).max(f64::MIN_POSITIVE));
    let g = tetra_measure(&idx, w, |i, k, j| nz(ea[[i, k]], epa) && nz(eb[[k, j]], epb));
    let h = tetra_measure(&idx, w, |i, k, j| nz(ea[[k, j]], epa) && nz(eb[[i, k]], epb));
    report.conditions.push(ConditionReport::flag("supp k_A(t,s) k_B(s,tau) null (AB = 0)", g <= tol.eps_measure, g, g));
    report.conditions.push(ConditionReport::flag("supp k_A(s,tau) k_B(t,s) null (BA = 0)", h <= tol.eps_measure, h, h));
    let ab = product_action(&s, &[&s.da, &s.db])?;
    let ba = product_action(&s, &[&s.db, &s.da])?;
    let (ab_zero, ba_zero) = (ab <= ORACLE_THRESHOLD, ba <= ORACLE_THRESHOLD);
    report.direct_residual = Some(ab.max(ba));
    report.diag("ab_action_relative", ab);
    report.diag("ba_action_relative", ba);
    report.diag("ab_zero", ab_zero);
    report.diag("ba_zero", ba_zero);
    if ab_zero != ba_zero {
        let which = if ab_zero { "AB = 0 but BA != 0" } else { "BA = 0 but AB != 0" };
        report.notes.push(format!("one-sided: {which}"));
    }
    report.finish(Some(ab_zero && ba_zero), started);
    Ok(report)
}

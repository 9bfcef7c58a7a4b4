//! Kernel conditions for `AB = B F(A)` between integral operators.
//!
//! With `G = G_A ∩ G_B` and `F_n(k_A) = sum_{j>=1} delta_j k_{j-1,A}`, the
//! relation holds exactly when, almost everywhere,
//!
//! * on `X x G`: `k_AB - delta_0 k_B - int_{G_B} k_B F_n(k_A) = 0`,
//! * on `X x (G_B \ G)`: `k_AB - delta_0 k_B = 0`,
//! * on `X x (G_A \ G)`: `int_{G_B} k_B F_n(k_A) = 0`.
//!
//! Residuals are divided by a reference magnitude that is linear in `k_B`
//! before the a.e. test, so scaling `B` never changes a verdict. Every check
//! also computes the direct action residual over a fixed battery; when the
//! two routes disagree the verdict is inconclusive.

use std::time::Instant;

use crate::domain_sets::{ae_zero, AeTolerance, Interval, LebesgueSet};
use crate::kernels::{compose, polynomial_kernel, GridKernel, Polynomial};
use crate::operators::{common_grid, default_battery, direct_residual, IntegralOperator};
use crate::quadrature::{lp_norm_values, Grid, QuadratureRule};
use crate::report::{CheckReport, ConditionReport, ResidualPoint};
use crate::{Error, Result};

/// Settings shared by all checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckContext {
    /// `None` selects [`AeTolerance::default_for`] the check's base measure.
    pub tol: Option<AeTolerance>,
    pub rule: QuadratureRule,
    pub seed: u64,
    pub battery_size: usize,
    /// Truncation window for unbounded sets.
    pub window: Option<(f64, f64)>,
    /// Keep every residual sample for CSV output.
    pub record_points: bool,
}

impl Default for CheckContext {
    fn default() -> Self {
        CheckContext { tol: None, rule: QuadratureRule::default(), seed: 0, battery_size: 10, window: None, record_points: false }
    }
}

impl CheckContext {
    pub fn tolerance(&self, base_measure: f64) -> AeTolerance {
        self.tol.unwrap_or_else(|| AeTolerance::default_for(base_measure))
    }
}

/// Checks `AB = B F(A)` for any real polynomial `F`.
pub fn check_covariance(a: &IntegralOperator, b: &IntegralOperator, f: &Polynomial, ctx: &CheckContext) -> Result<CheckReport> {
    run("general", a, b, f, ctx)
}

/// Checks `AB = delta_0 B + delta_1 BA`.
pub fn check_affine(a: &IntegralOperator, b: &IntegralOperator, delta0: f64, delta1: f64, ctx: &CheckContext) -> Result<CheckReport> {
    run("affine", a, b, &Polynomial::affine(delta0, delta1)?, ctx)
}

/// Checks `AB = delta B A^d` with `delta != 0`, `d >= 1`.
pub fn check_monomial(a: &IntegralOperator, b: &IntegralOperator, delta: f64, d: usize, ctx: &CheckContext) -> Result<CheckReport> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("monomial coefficient must be nonzero, got {delta}")));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("monomial degree must be at least 1".into()));
    }
    run("monomial", a, b, &Polynomial::monomial(delta, d)?, ctx)
}

fn unbounded(op: &IntegralOperator) -> bool {
    !op.x().is_bounded() || !op.g().is_bounded()
}

fn run(name: &str, a: &IntegralOperator, b: &IntegralOperator, f: &Polynomial, ctx: &CheckContext) -> Result<CheckReport> {
    let started = Instant::now();
    let mut warnings = Vec::new();
    let truncated = unbounded(a) || unbounded(b);
    // Unbounded sets: t and tau range over the window, the middle variable
    // over the window doubled about its centre.
    let (a, b, eval_window) = if truncated {
        let (lo, hi) = ctx.window.ok_or_else(|| Error::Unbounded(format!("{} / {}", a.x(), b.x())))?;
        warnings.push(format!("unbounded sets truncated to the window [{lo}, {hi}]"));
        let pad = (hi - lo) / 2.0;
        (a.truncated(lo - pad, hi + pad)?, b.truncated(lo - pad, hi + pad)?, Some((lo, hi)))
    } else {
        (a.clone(), b.clone(), None)
    };
    let clip = |s: &LebesgueSet| eval_window.map_or_else(|| s.clone(), |(lo, hi)| s.truncate(lo, hi));
    let extra: Vec<f64> = eval_window.map_or_else(Vec::new, |(lo, hi)| vec![lo, hi]);
    let grid = common_grid(&[&a, &b], &extra, &ctx.rule, None)?;
    let da = a.discretize(&grid)?;
    let db = b.discretize(&grid)?;
    let ga = da.g_mask();
    let gb = db.g_mask();
    let ka = da.kernel();
    let kb = db.kernel();
    let k_ab = compose(ka, ga, kb)?;
    let fn_k = polynomial_kernel(ka, ga, f)?;
    let k_bf = compose(kb, gb, &fn_k)?;

    let x_set = clip(&a.x().union(b.x()));
    let union_g = clip(&a.g().union(b.g()));
    let tol = ctx.tolerance(x_set.measure() * union_g.measure());
    let panel_width = grid.max_panel_width();
    let mut report = CheckReport::new(name, &tol, &ctx.rule, panel_width);
    report.warnings = warnings;

    let delta0 = f.coeff(0);
    let reference = kb.sup_norm() * (ka.sup_norm() * a.g().measure() + delta0.abs() + fn_k.sup_norm() * b.g().measure());
    report.diag("polynomial", f.to_string());
    report.diag("reference_scale", reference);

    let g = a.g().intersect(b.g());
    let regions: [(&str, LebesgueSet, u8); 3] = [
        ("X x (G_A ∩ G_B)", clip(&g), 1),
        ("X x (G_B \\ G_A)", clip(&b.g().difference(&g)), 2),
        ("X x (G_A \\ G_B)", clip(&a.g().difference(&g)), 3),
    ];
    let ab = k_ab.dense();
    let bk = kb.dense();
    let bf = k_bf.dense();
    let x_mask = grid.mask(&x_set);
    let w = grid.weights();
    let pts = grid.points();
    for (label, set, kind) in regions {
        if x_set.measure() * set.measure() == 0.0 {
            report.conditions.push(ConditionReport::skipped(label));
            continue;
        }
        let tau_mask = grid.mask(&set);
        let (mut raw, mut weights) = (Vec::new(), Vec::new());
        for i in (0..grid.len()).filter(|&i| x_mask[i]) {
            for j in (0..grid.len()).filter(|&j| tau_mask[j]) {
                let r = match kind {
                    1 => ab[[i, j]] - delta0 * bk[[i, j]] - bf[[i, j]],
                    2 => ab[[i, j]] - delta0 * bk[[i, j]],
                    _ => bf[[i, j]],
                };
                raw.push(r);
                weights.push(w[i] * w[j]);
                if ctx.record_points {
                    report.residual_points.push(ResidualPoint { condition: kind.to_string(), t: pts[i], s: None, tau: pts[j], value: r });
                }
            }
        }
        report.conditions.push(ConditionReport::evaluate(label, &raw, &weights, reference, &tol)?);
    }

    if truncated {
        let q = if a.p() == 1.0 {
            f64::INFINITY
        } else if a.p().is_infinite() {
            1.0
        } else {
            a.p() / (a.p() - 1.0)
        };
        let ok = integrability_probe(&grid, &x_mask, &[(&k_ab, gb), (kb, gb), (&k_bf, ga)], q);
        report.diag("integrability_probe_ok", ok);
        if !ok {
            report.warnings.push("kernel rows are not q-integrable on the truncation window".into());
        }
    }

    let battery = default_battery(&grid, &x_set, ctx.seed, ctx.battery_size);
    let dr = direct_residual(&da, &db, f, &battery, eval_window.map(|_| x_mask.as_slice()))?;
    report.direct_residual = Some(dr.max_residual);
    report.diag("direct_relative", dr.relative);
    report.diag("direct_scale", dr.scale);
    report.diag("grid_nodes", grid.len());
    report.finish(Some(dr.holds()), started);
    Ok(report)
}

fn integrability_probe(grid: &Grid, x_mask: &[bool], parts: &[(&GridKernel, &[bool])], q: f64) -> bool {
    let w = grid.weights();
    parts.iter().all(|(k, mask)| {
        let d = k.dense();
        (0..grid.len()).filter(|&i| x_mask[i]).all(|i| {
            let row: Vec<f64> = (0..grid.len()).map(|j| if mask[j] { d[[i, j]] } else { 0.0 }).collect();
            lp_norm_values(&row, w, q).is_ok_and(|v| v.is_finite())
        })
    })
}

/// True when the operator's kernel is not a.e. zero on `X x G`.
pub fn check_nonvanishing(
    op: &IntegralOperator,
    rule: &QuadratureRule,
    tol: Option<AeTolerance>,
    window: Option<Interval>,
) -> Result<bool> {
    let grid = match op.kernel() {
        crate::operators::OperatorKernel::Sampled(k) => k.grid().clone(),
        crate::operators::OperatorKernel::Analytic(_) => common_grid(&[op], &[], rule, window)?,
    };
    let k = op.sample(&grid)?;
    let xm = grid.mask(op.x());
    let gm = grid.mask(op.g());
    let w = grid.weights();
    let (mut vals, mut ws) = (Vec::new(), Vec::new());
    for i in (0..grid.len()).filter(|&i| xm[i]) {
        for j in (0..grid.len()).filter(|&j| gm[j]) {
            vals.push(k.value(i, j));
            ws.push(w[i] * w[j]);
        }
    }
    let tol = tol.unwrap_or_else(|| AeTolerance::default_for(op.x().measure() * op.g().measure()));
    Ok(!ae_zero(&vals, &ws, &tol)?.is_ae_zero)
}

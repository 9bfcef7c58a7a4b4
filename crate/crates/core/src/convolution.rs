//! Convolution operators `(Ax)(t) = int k(t - s) x(s) ds` on the line and on
//! the half-line.
//!
//! All improper integrals are truncated to a finite window; a truncation is
//! accepted when doubling the window changes the relevant `L_1` mass by at
//! most a fixed relative amount. Convolutions are evaluated per output point
//! by Gauss–Legendre quadrature on panels aligned with every jump of both
//! factors, so indicator profiles are integrated exactly.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::covariance::CheckContext;
use crate::domain_sets::{ae_zero, Interval, LebesgueSet};
use crate::func_expr::{FuncExpr, Var};
use crate::kernels::{Kernel, Polynomial};
use crate::operators::{common_grid, default_battery, direct_residual, DirectResidual, IntegralOperator};
use crate::quadrature::{build_grid, gauss_legendre, lp_norm, lp_norm_values, Grid, GridFunction, QuadratureRule};
use crate::report::{CheckReport, ConditionReport};
use crate::{Error, Result};

/// Two-sided default truncation window.
pub const DEFAULT_WINDOW: (f64, f64) = (-20.0, 20.0);
/// One-sided default truncation window.
pub const DEFAULT_ONE_SIDED_WINDOW: (f64, f64) = (0.0, 40.0);
/// Relative `L_1` growth under window doubling that counts as divergence.
pub const DIVERGENCE_TOL: f64 = 1e-6;
/// Relative stability required of a Laplace integrand under doubling.
pub const LAPLACE_TOL: f64 = 1e-8;

pub fn default_window(one_sided: bool) -> Interval {
    let (lo, hi) = if one_sided { DEFAULT_ONE_SIDED_WINDOW } else { DEFAULT_WINDOW };
    Interval { lo, hi }
}

/// 101 equispaced points on `[-3, 3]`.
pub fn default_s_grid() -> Vec<f64> {
    (0..=100).map(|k| -3.0 + 0.06 * k as f64).collect()
}

fn check_window(w: Interval) -> Result<()> {
    if w.lo.is_finite() && w.hi.is_finite() && w.lo < w.hi {
        Ok(())
    } else {
        Err(Error::Unbounded(format!("window [{}, {}]", w.lo, w.hi)))
    }
}

/// Window with the same centre and twice the length.
pub fn doubled(w: Interval) -> Interval {
    let half = w.length();
    let c = 0.5 * (w.lo + w.hi);
    Interval { lo: c - half, hi: c + half }
}

/// `profile * 1_[0, inf)` when one-sided.
pub fn effective_profile(profile: &FuncExpr, one_sided: bool) -> FuncExpr {
    if one_sided {
        let ind = FuncExpr::indicator(Var::T, 0.0, f64::INFINITY).expect("valid half-line");
        FuncExpr::mul(ind, profile.clone())
    } else {
        profile.clone()
    }
}

/// Errors when the `L_1` mass of `f` grows under window doubling.
pub fn check_integrable(f: &FuncExpr, window: Interval, rule: &QuadratureRule) -> Result<f64> {
    check_window(window)?;
    let small = lp_norm(f, &LebesgueSet::interval(window.lo, window.hi)?, 1.0, rule)?;
    let d = doubled(window);
    let big = lp_norm(f, &LebesgueSet::interval(d.lo, d.hi)?, 1.0, rule)?;
    if !small.is_finite() || !big.is_finite() || big - small > DIVERGENCE_TOL * small.max(1.0) {
        return Err(Error::DivergentTruncation { small, doubled: big });
    }
    Ok(small)
}

struct Factors<'a> {
    f: &'a FuncExpr,
    g: &'a FuncExpr,
    bf: Vec<f64>,
    bg: Vec<f64>,
    window: Interval,
    width: f64,
    rx: Vec<f64>,
    rw: Vec<f64>,
}

impl<'a> Factors<'a> {
    fn new(f: &'a FuncExpr, g: &'a FuncExpr, window: Interval, rule: &QuadratureRule) -> Self {
        let (rx, rw) = gauss_legendre(rule.nodes_per_panel);
        Factors {
            f,
            g,
            bf: f.breakpoints_of(Var::T, window.lo, window.hi),
            bg: g.breakpoints_of(Var::T, window.lo, window.hi),
            window,
            width: rule.width_for(window.length()),
            rx,
            rw,
        }
    }

    /// `int f(t - tau) g(tau) dtau` over `tau` and `t - tau` in the window.
    fn at(&self, t: f64) -> f64 {
        let a = self.window.lo.max(t - self.window.hi);
        let b = self.window.hi.min(t - self.window.lo);
        if a >= b {
            return 0.0;
        }
        let mut cuts = vec![a, b];
        cuts.extend(self.bg.iter().copied().filter(|&x| x > a && x < b));
        cuts.extend(self.bf.iter().map(|&y| t - y).filter(|&x| x > a && x < b));
        cuts.sort_by(f64::total_cmp);
        let mut acc = 0.0;
        for seg in cuts.windows(2) {
            let len = seg[1] - seg[0];
            if len <= 0.0 {
                continue;
            }
            let count = ((len / self.width) - 1e-9).ceil().max(1.0) as usize;
            let h = len / count as f64;
            for p in 0..count {
                let mid = seg[0] + h * (p as f64 + 0.5);
                for (x, w) in self.rx.iter().zip(&self.rw) {
                    let tau = mid + 0.5 * h * x;
                    let gv = self.g.eval(tau);
                    if gv != 0.0 {
                        acc += 0.5 * h * w * self.f.eval(t - tau) * gv;
                    }
                }
            }
        }
        acc
    }
}

/// Panel-aligned grid on the window with breakpoints at all sums of
/// breakpoints of the two factors and the window ends.
pub fn convolution_grid(f: &FuncExpr, g: &FuncExpr, window: Interval, rule: &QuadratureRule) -> Result<Arc<Grid>> {
    check_window(window)?;
    let mut bf = f.breakpoints_of(Var::T, window.lo, window.hi);
    let mut bg = g.breakpoints_of(Var::T, window.lo, window.hi);
    bf.extend([window.lo, window.hi]);
    bg.extend([window.lo, window.hi]);
    let sums: Vec<f64> = bf.iter().flat_map(|a| bg.iter().map(move |b| a + b)).collect();
    Ok(Arc::new(build_grid(&LebesgueSet::interval(window.lo, window.hi)?, &sums, rule)?))
}

/// Samples of `f * g` on [`convolution_grid`], both factors truncated to the
/// window.
pub fn convolve(f: &FuncExpr, g: &FuncExpr, window: Interval, rule: &QuadratureRule) -> Result<GridFunction> {
    check_integrable(f, window, rule)?;
    check_integrable(g, window, rule)?;
    let grid = convolution_grid(f, g, window, rule)?;
    let fac = Factors::new(f, g, window, rule);
    let values: Vec<f64> = grid.points().par_iter().map(|&t| fac.at(t)).collect();
    GridFunction::new(grid, values)
}

/// `(f * g)(t)` by the same quadrature as [`convolve`], without the
/// integrability check.
pub fn convolve_at(f: &FuncExpr, g: &FuncExpr, t: f64, window: Interval, rule: &QuadratureRule) -> f64 {
    Factors::new(f, g, window, rule).at(t)
}

/// Convolution on a uniform grid by FFT with the rectangle rule.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformConvolution {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

/// Fast path for indicator-free profiles: `n` uniform samples of each factor
/// on the window, zero-padded linear convolution, output restricted to the
/// window.
pub fn convolve_fft(f: &FuncExpr, g: &FuncExpr, window: Interval, n: usize) -> Result<UniformConvolution> {
    check_window(window)?;
    if f.has_indicator() || g.has_indicator() {
        return Err(Error::InvalidArgument("fast convolution requires indicator-free profiles".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("fast convolution needs at least two samples".into()));
    }
    let h = window.length() / n as f64;
    let len = (2 * n).next_power_of_two();
    let sample = |e: &FuncExpr| -> Vec<Complex<f64>> {
        let mut v: Vec<Complex<f64>> = (0..n).map(|k| Complex::new(e.eval(window.lo + k as f64 * h), 0.0)).collect();
        v.resize(len, Complex::new(0.0, 0.0));
        v
    };
    let (mut fs, mut gs) = (sample(f), sample(g));
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut fs);
    fwd.process(&mut gs);
    let mut prod: Vec<Complex<f64>> = fs.iter().zip(&gs).map(|(a, b)| a * b).collect();
    inv.process(&mut prod);
    let norm = h / len as f64;
    let (mut points, mut values) = (Vec::new(), Vec::new());
    for (m, c) in prod.iter().enumerate().take(2 * n - 1) {
        let t = 2.0 * window.lo + m as f64 * h;
        if t >= window.lo && t <= window.hi {
            points.push(t);
            values.push(c.re * norm);
        }
    }
    Ok(UniformConvolution { points, values })
}

/// Bilateral Laplace transform sampled on a real `s` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceGrid {
    pub s_points: Vec<f64>,
    pub values: Vec<f64>,
    /// Per point: the integrand's `L_1` mass is stable under doubling.
    pub converged: Vec<bool>,
    /// Smallest and largest converged `s`.
    pub domain_window: Option<(f64, f64)>,
}

/// `int_window exp(-s t) f(t) dt` for each `s`.
pub fn laplace_transform(f: &FuncExpr, s_grid: &[f64], t_window: Interval, rule: &QuadratureRule) -> Result<LaplaceGrid> {
    check_window(t_window)?;
    let d = doubled(t_window);
    let small = build_grid(&LebesgueSet::interval(t_window.lo, t_window.hi)?, &f.breakpoints_of(Var::T, t_window.lo, t_window.hi), rule)?;
    let big = build_grid(&LebesgueSet::interval(d.lo, d.hi)?, &f.breakpoints_of(Var::T, d.lo, d.hi), rule)?;
    let fs: Vec<f64> = small.points().iter().map(|&t| f.eval(t)).collect();
    let fb: Vec<f64> = big.points().iter().map(|&t| f.eval(t)).collect();
    let rows: Vec<(f64, bool)> = s_grid
        .par_iter()
        .map(|&s| {
            let (mut v, mut l1) = (0.0, 0.0);
            for ((&t, w), fv) in small.points().iter().zip(small.weights()).zip(&fs) {
                let x = (-s * t).exp() * fv;
                v += w * x;
                l1 += w * x.abs();
            }
            let l1b: f64 = big.points().iter().zip(big.weights()).zip(&fb).map(|((&t, w), fv)| w * ((-s * t).exp() * fv).abs()).sum();
            let ok = v.is_finite() && l1b.is_finite() && (l1b - l1).abs() <= LAPLACE_TOL * l1.max(f64::MIN_POSITIVE);
            (v, ok || (l1 == 0.0 && l1b == 0.0))
        })
        .collect();
    let converged: Vec<bool> = rows.iter().map(|r| r.1).collect();
    let conv_s: Vec<f64> = s_grid.iter().zip(&converged).filter(|(_, c)| **c).map(|(s, _)| *s).collect();
    let domain_window = match (conv_s.iter().copied().reduce(f64::min), conv_s.iter().copied().reduce(f64::max)) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    Ok(LaplaceGrid { s_points: s_grid.to_vec(), values: rows.iter().map(|r| r.0).collect(), converged, domain_window })
}

/// Trapezoid weights of an ordered grid.
fn trapezoid_weights(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { s[i] - s[i - 1] } else { 0.0 };
            let right = if i + 1 < n { s[i + 1] - s[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Hull of the nonzero nodes, widened to whole panels.
pub fn numeric_support(f: &GridFunction) -> Option<(f64, f64)> {
    let grid = f.grid();
    let vals = f.values();
    let first = vals.iter().position(|v| *v != 0.0)?;
    let last = vals.iter().rposition(|v| *v != 0.0)?;
    Some((grid.panels()[grid.panel_of(first)].lo, grid.panels()[grid.panel_of(last)].hi))
}

fn profile_on(f: &FuncExpr, window: Interval, rule: &QuadratureRule) -> Result<GridFunction> {
    let grid = Arc::new(build_grid(&LebesgueSet::interval(window.lo, window.hi)?, &f.breakpoints_of(Var::T, window.lo, window.hi), rule)?);
    Ok(GridFunction::from_fn(grid, |t| f.eval(t)))
}

/// Support additivity of a convolution of compactly supported profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TitchmarshCheck {
    /// `(inf supp f + inf supp g, sup supp f + sup supp g)`.
    pub expected: (f64, f64),
    pub observed: Option<(f64, f64)>,
    /// One panel width of the convolution grid.
    pub tolerance: f64,
    pub agrees: bool,
}

/// `None` when either profile is zero on the window or its support reaches
/// the window edge.
pub fn titchmarsh_check(f: &FuncExpr, g: &FuncExpr, window: Interval, rule: &QuadratureRule) -> Result<Option<TitchmarshCheck>> {
    let sf = numeric_support(&profile_on(f, window, rule)?);
    let sg = numeric_support(&profile_on(g, window, rule)?);
    let (Some(sf), Some(sg)) = (sf, sg) else {
        return Ok(None);
    };
    let inside = |s: (f64, f64)| s.0 > window.lo && s.1 < window.hi;
    let expected = (sf.0 + sg.0, sf.1 + sg.1);
    if !inside(sf) || !inside(sg) || !inside(expected) {
        return Ok(None);
    }
    let conv = convolve(f, g, window, rule)?;
    let observed = numeric_support(&conv);
    let tolerance = conv.grid().max_panel_width();
    let agrees = observed.is_some_and(|o| (o.0 - expected.0).abs() <= tolerance && (o.1 - expected.1).abs() <= tolerance);
    Ok(Some(TitchmarshCheck { expected, observed, tolerance, agrees }))
}

/// `(||f * g||_p, ||f||_1 ||g||_p)` with all norms on the window.
pub fn young_bound(f: &FuncExpr, g: &FuncExpr, window: Interval, p: f64, rule: &QuadratureRule) -> Result<(f64, f64)> {
    let conv = convolve(f, g, window, rule)?;
    let lhs = conv.lp_norm(p)?;
    let dom = LebesgueSet::interval(window.lo, window.hi)?;
    let rhs = lp_norm(f, &dom, 1.0, rule)? * lp_norm(g, &dom, p, rule)?;
    Ok((lhs, rhs))
}

/// Direct residual of `AB = B F(A)` for truncated convolution operators.
/// The battery lives on the middle half of the window (the first quarter
/// for one-sided kernels, where truncation at the left end is exact).
pub fn convolution_direct_residual(
    ka: &FuncExpr,
    kb: &FuncExpr,
    f: &Polynomial,
    one_sided: bool,
    window: Interval,
    ctx: &CheckContext,
) -> Result<DirectResidual> {
    let dom = LebesgueSet::interval(window.lo, window.hi)?;
    let op = |k: &FuncExpr| IntegralOperator::new(Kernel::Convolution { profile: k.clone(), one_sided }, dom.clone(), dom.clone());
    let (a, b) = (op(ka)?, op(kb)?);
    let len = window.length();
    let (blo, bhi) = if one_sided {
        (window.lo, window.lo + 0.25 * len)
    } else {
        let c = 0.5 * (window.lo + window.hi);
        (c - 0.25 * len, c + 0.25 * len)
    };
    let grid = common_grid(&[&a, &b], &[blo, bhi], &ctx.rule, None)?;
    let da = a.discretize(&grid)?;
    let db = b.discretize(&grid)?;
    let battery = default_battery(&grid, &LebesgueSet::interval(blo, bhi)?, ctx.seed, ctx.battery_size);
    direct_residual(&da, &db, f, &battery, None)
}

fn window_of(ctx: &CheckContext, one_sided: bool) -> Interval {
    ctx.window.map_or_else(|| default_window(one_sided), |(lo, hi)| Interval { lo, hi })
}

/// The operator oracle is binding only for profiles without jumps; jumps
/// along diagonals are not panel-aligned and carry first-order error.
fn oracle_binding(ka: &FuncExpr, kb: &FuncExpr, one_sided: bool) -> bool {
    !one_sided && !ka.has_indicator() && !kb.has_indicator()
}

fn attach_direct(report: &mut CheckReport, dr: &DirectResidual, binding: bool) -> Option<bool> {
    report.direct_residual = Some(dr.max_residual);
    report.diag("direct_relative", dr.relative);
    report.diag("direct_binding", binding);
    if !binding {
        report.notes.push("direct residual is corroboration only: profiles with jumps".into());
    }
    binding.then(|| dr.holds())
}

/// `AB = B F(A)` with `F(0) = 0` for convolution operators: the set where
/// both `K_B` and `K_A - sum delta_j K_A^j` are nonzero must be null.
pub fn check_conv_poly(ka: &FuncExpr, kb: &FuncExpr, f: &Polynomial, one_sided: bool, ctx: &CheckContext) -> Result<CheckReport> {
    let started = Instant::now();
    if f.coeff(0) != 0.0 {
        return Err(Error::InvalidArgument(format!("polynomial {f} must satisfy F(0) = 0")));
    }
    let window = window_of(ctx, one_sided);
    let (pa, pb) = (effective_profile(ka, one_sided), effective_profile(kb, one_sided));
    let s_grid = default_s_grid();
    let la = laplace_transform(&pa, &s_grid, window, &ctx.rule)?;
    let lb = laplace_transform(&pb, &s_grid, window, &ctx.rule)?;
    let common: Vec<usize> = (0..s_grid.len()).filter(|&i| la.converged[i] && lb.converged[i]).collect();
    if common.is_empty() {
        return Err(Error::EmptyConvergenceWindow);
    }
    let s_pts: Vec<f64> = common.iter().map(|&i| s_grid[i]).collect();
    let ws = trapezoid_weights(&s_pts);
    let tol = ctx.tolerance(s_pts[s_pts.len() - 1] - s_pts[0]);
    let mut report = CheckReport::new("conv_poly", &tol, &ctx.rule, ctx.rule.width_for(window.length()));
    let sup = |v: &[f64]| common.iter().fold(0.0f64, |m, &i| m.max(v[i].abs()));
    let (sa, sb) = (sup(&la.values), sup(&lb.values));
    let d: Vec<f64> = common
        .iter()
        .map(|&i| {
            let k = la.values[i];
            k - (1..=f.degree()).map(|j| f.coeff(j) * k.powi(j as i32)).sum::<f64>()
        })
        .collect();
    let d_scale = sa + f.coeffs().iter().enumerate().map(|(j, c)| c.abs() * sa.powi(j as i32)).sum::<f64>();
    let overlap: Vec<f64> = common
        .iter()
        .zip(&d)
        .map(|(&i, dv)| if lb.values[i].abs() > tol.eps_value * sb && dv.abs() > tol.eps_value * d_scale { 1.0 } else { 0.0 })
        .collect();
    let verdict = ae_zero(&overlap, &ws, &tol)?;
    report.conditions.push(ConditionReport::flag(
        "supp K_B ∩ supp (K_A - sum delta_j K_A^j) null",
        verdict.violation_measure <= tol.eps_measure,
        d.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        verdict.violation_measure,
    ));
    report.diag("s_window", vec![s_pts[0], s_pts[s_pts.len() - 1]]);
    report.diag("s_points_used", s_pts.len());
    report.diag("polynomial", f.to_string());
    report.notes.push("transforms sampled on a real s grid; support overlap only".into());
    let dr = convolution_direct_residual(ka, kb, f, one_sided, window, ctx)?;
    let oracle = attach_direct(&mut report, &dr, oracle_binding(ka, kb, one_sided));
    report.finish(oracle, started);
    Ok(report)
}

fn check_monomial_args(delta: f64, n: usize) -> Result<()> {
    if delta == 0.0 || n < 2 {
        return Err(Error::InvalidArgument(format!("need delta != 0 and n >= 2, got delta = {delta}, n = {n}")));
    }
    Ok(())
}

/// `AB = delta B A^n` (`n >= 2`) for two-sided convolution operators holds
/// exactly when `k_A * k_B = 0` a.e.
pub fn check_conv_monomial(ka: &FuncExpr, kb: &FuncExpr, delta: f64, n: usize, ctx: &CheckContext) -> Result<CheckReport> {
    let started = Instant::now();
    check_monomial_args(delta, n)?;
    let window = window_of(ctx, false);
    let conv = convolve(ka, kb, window, &ctx.rule)?;
    let tol = ctx.tolerance(window.length());
    let mut report = CheckReport::new("conv_monomial", &tol, &ctx.rule, conv.grid().max_panel_width());
    let pa = profile_on(ka, window, &ctx.rule)?;
    let pb = profile_on(kb, window, &ctx.rule)?;
    let scale = pa.lp_norm(1.0)? * pb.sup_norm();
    report.conditions.push(ConditionReport::evaluate("k_A * k_B = 0 a.e.", conv.values(), conv.weights(), scale, &tol)?);
    match titchmarsh_check(ka, kb, window, &ctx.rule)? {
        Some(tc) => {
            report.diag("titchmarsh_expected", vec![tc.expected.0, tc.expected.1]);
            report.diag("titchmarsh_observed", tc.observed.map(|o| vec![o.0, o.1]));
            report.diag("titchmarsh_agrees", tc.agrees);
            report.notes.push("compactly supported nonzero profiles: the convolution cannot vanish a.e.".into());
        }
        None => report.diag("titchmarsh_applicable", false),
    }
    let f = Polynomial::monomial(delta, n)?;
    let dr = convolution_direct_residual(ka, kb, &f, false, window, ctx)?;
    let oracle = attach_direct(&mut report, &dr, oracle_binding(ka, kb, false));
    report.finish(oracle, started);
    Ok(report)
}

/// One-sided convolution operators admit no nonzero pair with
/// `AB = delta B A^n`, `n >= 2`: the report passes only when a profile is
/// a.e. zero.
pub fn check_one_sided_monomial(ka: &FuncExpr, kb: &FuncExpr, delta: f64, n: usize, ctx: &CheckContext) -> Result<CheckReport> {
    let started = Instant::now();
    check_monomial_args(delta, n)?;
    let window = window_of(ctx, true);
    for k in [ka, kb] {
        let neg = Interval { lo: window.lo - window.length(), hi: window.lo.min(0.0) };
        if neg.lo < neg.hi {
            let probe = profile_on(k, neg, &ctx.rule)?;
            if let Some((t, v)) = probe.points().iter().zip(probe.values()).find(|(&t, v)| t < 0.0 && **v != 0.0) {
                return Err(Error::NegativeSupport { at: *t, value: *v });
            }
        }
        check_integrable(k, window, &ctx.rule)?;
    }
    let tol = ctx.tolerance(window.length());
    let mut report = CheckReport::new("conv_one_sided", &tol, &ctx.rule, ctx.rule.width_for(window.length()));
    let pa = profile_on(ka, window, &ctx.rule)?;
    let pb = profile_on(kb, window, &ctx.rule)?;
    let za = ae_zero(pa.values(), pa.weights(), &tol)?;
    let zb = ae_zero(pb.values(), pb.weights(), &tol)?;
    let degenerate = za.is_ae_zero || zb.is_ae_zero;
    report.conditions.push(ConditionReport::flag(
        "k_A = 0 or k_B = 0 a.e.",
        degenerate,
        za.max_abs.min(zb.max_abs),
        za.violation_measure.min(zb.violation_measure),
    ));
    let f = Polynomial::monomial(delta, n)?;
    let dr = convolution_direct_residual(ka, kb, &f, true, window, ctx)?;
    attach_direct(&mut report, &dr, false);
    report.notes.push(if degenerate {
        "degenerate: a profile vanishes".to_string()
    } else {
        "impossible: no nonzero one-sided pair satisfies the relation".to_string()
    });
    report.finish(None, started);
    Ok(report)
}

/// `L_p` norms of nodal values on a convolution grid, for `p` in `{1, 2, inf}`.
pub fn norms(f: &GridFunction) -> Result<[f64; 3]> {
    Ok([
        lp_norm_values(f.values(), f.weights(), 1.0)?,
        lp_norm_values(f.values(), f.weights(), 2.0)?,
        lp_norm_values(f.values(), f.weights(), f64::INFINITY)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func_expr::parse_expr;
    use crate::report::Verdict;

    fn p(s: &str) -> FuncExpr {
        parse_expr(s).unwrap()
    }

    fn w() -> Interval {
        default_window(false)
    }

    #[test]
    fn indicator_hat() {
        let rule = QuadratureRule::default();
        let h = convolve(&p("ind(0,1)"), &p("ind(0,1)"), w(), &rule).unwrap();
        for (&t, &v) in h.points().iter().zip(h.values()) {
            let exact = if (0.0..=1.0).contains(&t) {
                t
            } else if (1.0..=2.0).contains(&t) {
                2.0 - t
            } else {
                0.0
            };
            assert!((v - exact).abs() < 1e-13, "t = {t}: {v} vs {exact}");
        }
        assert!((convolve_at(&p("ind(0,1)"), &p("ind(0,1)"), 1.0, w(), &rule) - 1.0).abs() < 1e-13);
        let z = convolve(&p("exp(-t^2)"), &p("0"), w(), &rule).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn divergence_detected() {
        let err = convolve(&p("1"), &p("ind(0,1)"), w(), &QuadratureRule::default()).unwrap_err();
        assert!(matches!(err, Error::DivergentTruncation { .. }));
    }

    #[test]
    fn fft_matches_direct() {
        let (f, g) = (p("exp(-t^2)"), p("exp(-(t-1)^2/2)"));
        let fast = convolve_fft(&f, &g, w(), 4096).unwrap();
        let rule = QuadratureRule::default();
        let mut worst = 0.0f64;
        for (&t, &v) in fast.points.iter().zip(&fast.values).step_by(97) {
            worst = worst.max((v - convolve_at(&f, &g, t, w(), &rule)).abs());
        }
        assert!(worst < 1e-8, "{worst}");
        assert!(convolve_fft(&p("ind(0,1)"), &g, w(), 64).is_err());
    }

    #[test]
    fn laplace_examples() {
        let rule = QuadratureRule::default();
        let s = default_s_grid();
        let l = laplace_transform(&p("ind(0,1)"), &s, w(), &rule).unwrap();
        for (&si, &v) in l.s_points.iter().zip(&l.values) {
            let exact = if si.abs() < 1e-12 { 1.0 } else { (1.0 - (-si).exp()) / si };
            assert!((v - exact).abs() < 1e-12);
        }
        assert!(l.converged.iter().all(|c| *c));
        let g = laplace_transform(&p("exp(-t^2)"), &s, w(), &rule).unwrap();
        for (&si, &v) in g.s_points.iter().zip(&g.values) {
            assert!((v - std::f64::consts::PI.sqrt() * (si * si / 4.0).exp()).abs() < 1e-10);
        }
        let e = laplace_transform(&p("ind(0,inf)*exp(-t)"), &s, Interval { lo: 0.0, hi: 40.0 }, &rule).unwrap();
        assert!(!e.converged[0]);
        assert!(e.converged[100]);
        let z = laplace_transform(&p("0"), &s, w(), &rule).unwrap();
        assert!(z.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn conv_checks() {
        let ctx = CheckContext::default();
        let g = p("exp(-t^2)");
        let r = check_conv_poly(&g, &p("exp(-2*t^2)"), &Polynomial::monomial(1.0, 1).unwrap(), false, &ctx).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let r = check_conv_monomial(&p("ind(0,1)"), &p("ind(2,3)"), 1.0, 2, &ctx).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.diag_bool("titchmarsh_agrees"), Some(true));
        let r = check_conv_monomial(&p("0"), &g, 1.0, 2, &ctx).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(check_conv_monomial(&g, &g, 1.0, 1, &ctx).is_err());
        let err = check_one_sided_monomial(&p("ind(-1,1)"), &p("ind(0,1)"), 1.0, 2, &ctx).unwrap_err();
        assert!(matches!(err, Error::NegativeSupport { .. }));
    }
}

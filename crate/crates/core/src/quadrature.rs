//! Composite Gauss–Legendre quadrature on panel grids.
//!
//! Every breakpoint supplied to [`build_grid`] is a panel boundary, so
//! integrands that are smooth between breakpoints are integrated with the
//! full order of the rule. A grid also carries integrated Lagrange weights
//! for partial panels, which lets Volterra integrals `int_a^{t_i}` be
//! evaluated with the same accuracy when the upper limit is a node.

use std::sync::Arc;

use crate::domain_sets::{Interval, LebesgueSet};
use crate::func_expr::FuncExpr;
use crate::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Quadrature parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub nodes_per_panel: usize,
    /// `None` means one thirty-second of the hull length.
    pub max_panel_width: Option<f64>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule { nodes_per_panel: 12, max_panel_width: None }
    }
}

impl QuadratureRule {
    pub fn new(nodes_per_panel: usize, max_panel_width: Option<f64>) -> Result<Self> {
        if nodes_per_panel == 0 || nodes_per_panel > 64 {
            return Err(Error::InvalidArgument(format!("nodes per panel must be in 1..=64, got {nodes_per_panel}")));
        }
        if let Some(w) = max_panel_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidArgument(format!("panel width must be positive, got {w}")));
            }
        }
        Ok(QuadratureRule { nodes_per_panel, max_panel_width })
    }

    /// Panel width used on a hull of the given length.
    pub fn width_for(&self, hull_len: f64) -> f64 {
        self.max_panel_width.unwrap_or(hull_len / 32.0)
    }
}

/// Panel-aligned tensor grid on a bounded [`LebesgueSet`].
#[derive(Debug, Clone)]
pub struct Grid {
    domain: LebesgueSet,
    panels: Vec<Interval>,
    points: Vec<f64>,
    weights: Vec<f64>,
    n: usize,
    /// `ref_cum[l * n + k] = int_{-1}^{x_l} L_k`, reference Lagrange basis.
    ref_cum: Vec<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.points == other.points && self.weights == other.weights
    }
}

fn reference_cumulative(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let (gx, gw) = gauss_legendre(n);
    let mut out = vec![0.0; n * n];
    for l in 0..n {
        let (a, b) = (-1.0, x[l]);
        let half = 0.5 * (b - a);
        for q in 0..n {
            let y = a + half * (gx[q] + 1.0);
            for k in 0..n {
                let mut lk = 1.0;
                for m in 0..n {
                    if m != k {
                        lk *= (y - x[m]) / (x[k] - x[m]);
                    }
                }
                out[l * n + k] += half * gw[q] * lk;
            }
        }
    }
    out
}

/// Builds a grid on a bounded domain; every breakpoint inside the domain and
/// every interval endpoint is a panel boundary.
pub fn build_grid(domain: &LebesgueSet, breakpts: &[f64], rule: &QuadratureRule) -> Result<Grid> {
    if !domain.is_bounded() {
        return Err(Error::Unbounded(domain.to_string()));
    }
    let n = rule.nodes_per_panel;
    if n == 0 {
        return Err(Error::InvalidArgument("nodes per panel must be positive".into()));
    }
    let hull_len = domain.hull().map_or(0.0, |h| h.length());
    let width = rule.width_for(hull_len);
    let (rx, rw) = gauss_legendre(n);
    let mut panels = Vec::new();
    for iv in domain.intervals() {
        let mut cuts = vec![iv.lo];
        let tol = 1e-12 * iv.length().max(1.0);
        let mut inner: Vec<f64> = breakpts.iter().copied().filter(|&b| b.is_finite() && b > iv.lo + tol && b < iv.hi - tol).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|a, b| (*a - *b).abs() <= tol);
        cuts.extend(inner);
        cuts.push(iv.hi);
        for seg in cuts.windows(2) {
            let len = seg[1] - seg[0];
            let count = ((len / width) - 1e-9).ceil().max(1.0) as usize;
            for k in 0..count {
                let lo = if k == 0 { seg[0] } else { seg[0] + len * k as f64 / count as f64 };
                let hi = if k + 1 == count { seg[1] } else { seg[0] + len * (k + 1) as f64 / count as f64 };
                panels.push(Interval { lo, hi });
            }
        }
    }
    let mut points = Vec::with_capacity(panels.len() * n);
    let mut weights = Vec::with_capacity(panels.len() * n);
    for p in &panels {
        let half = 0.5 * p.length();
        let mid = 0.5 * (p.lo + p.hi);
        for k in 0..n {
            points.push(mid + half * rx[k]);
            weights.push(half * rw[k]);
        }
    }
    Ok(Grid { domain: domain.clone(), panels, points, weights, n, ref_cum: reference_cumulative(&rx) })
}

impl Grid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn domain(&self) -> &LebesgueSet {
        &self.domain
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panels(&self) -> &[Interval] {
        &self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.n
    }

    pub fn panel_of(&self, i: usize) -> usize {
        i / self.n
    }

    /// Largest panel width.
    pub fn max_panel_width(&self) -> f64 {
        self.panels.iter().map(Interval::length).fold(0.0, f64::max)
    }

    /// True when `x` is not interior to any panel.
    pub fn is_aligned(&self, x: f64) -> bool {
        let scale = self.domain.hull().map_or(1.0, |h| h.length().max(1.0));
        let tol = 1e-10 * scale;
        !self.panels.iter().any(|p| x > p.lo + tol && x < p.hi - tol)
    }

    /// Errors unless every breakpoint is aligned with a panel boundary.
    pub fn check_aligned(&self, breakpts: &[f64]) -> Result<()> {
        match breakpts.iter().find(|&&b| !self.is_aligned(b)) {
            Some(b) => Err(Error::GridMismatch(format!("breakpoint {b} falls inside a panel"))),
            None => Ok(()),
        }
    }

    /// Node mask of a set; a node belongs when its panel midpoint does.
    pub fn mask(&self, set: &LebesgueSet) -> Vec<bool> {
        let pm: Vec<bool> = self.panels.iter().map(|p| set.contains(0.5 * (p.lo + p.hi))).collect();
        (0..self.len()).map(|i| pm[self.panel_of(i)]).collect()
    }

    /// Quadrature weights restricted to a node mask.
    pub fn masked_weights(&self, mask: &[bool]) -> Vec<f64> {
        self.weights.iter().zip(mask).map(|(w, &m)| if m { *w } else { 0.0 }).collect()
    }

    /// Weights `W` with `sum_k W[k] f(x_k) = int_{lo}^{x_i} f` over masked
    /// panels, where `lo` is the panel boundary `lower` (or the grid start).
    /// The vector is zero when `x_i < lower`.
    pub fn partial_weights(&self, i: usize, lower: f64, mask: &[bool]) -> Vec<f64> {
        let mut w = vec![0.0; self.len()];
        self.partial_weights_into(i, lower, mask, &mut w);
        w
    }

    fn partial_weights_into(&self, i: usize, lower: f64, mask: &[bool], w: &mut [f64]) {
        let n = self.n;
        let pi = self.panel_of(i);
        if self.panels[pi].lo < lower - 1e-12 * (1.0 + lower.abs()) {
            return;
        }
        for p in 0..pi {
            if self.panels[p].lo < lower - 1e-12 * (1.0 + lower.abs()) {
                continue;
            }
            for k in p * n..(p + 1) * n {
                if mask[k] {
                    w[k] = self.weights[k];
                }
            }
        }
        let half = 0.5 * self.panels[pi].length();
        let l = i % n;
        for k in 0..n {
            let g = pi * n + k;
            if mask[g] {
                w[g] = half * self.ref_cum[l * n + k];
            }
        }
    }

    /// Weights of `int_{x_j}^{end}` over masked panels.
    pub fn upper_weights(&self, j: usize, mask: &[bool]) -> Vec<f64> {
        let n = self.n;
        let pj = self.panel_of(j);
        let mut w = vec![0.0; self.len()];
        let half = 0.5 * self.panels[pj].length();
        let l = j % n;
        for k in 0..n {
            let g = pj * n + k;
            if mask[g] {
                w[g] = self.weights[g] - half * self.ref_cum[l * n + k];
            }
        }
        for k in (pj + 1) * n..self.len() {
            if mask[k] {
                w[k] = self.weights[k];
            }
        }
        w
    }

    /// Row `i` holds [`Grid::partial_weights`] for node `i`.
    pub fn lower_weight_matrix(&self, lower: f64, mask: &[bool]) -> ndarray::Array2<f64> {
        let n = self.len();
        let mut m = ndarray::Array2::zeros((n, n));
        for i in 0..n {
            let row = m.row_mut(i);
            self.partial_weights_into(i, lower, mask, row.into_slice().expect("standard layout"));
        }
        m
    }

    /// Row `j` holds [`Grid::upper_weights`] for node `j`.
    pub fn upper_weight_matrix(&self, mask: &[bool]) -> ndarray::Array2<f64> {
        let n = self.len();
        let mut m = ndarray::Array2::zeros((n, n));
        for j in 0..n {
            let w = self.upper_weights(j, mask);
            m.row_mut(j).assign(&ndarray::ArrayView1::from(&w));
        }
        m
    }

    /// Value at `x` of the panelwise interpolant of nodal `values`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let Some(pi) = self.panels.iter().position(|p| x >= p.lo && x <= p.hi) else {
            return 0.0;
        };
        let n = self.n;
        let xs = &self.points[pi * n..(pi + 1) * n];
        let mut acc = 0.0;
        for k in 0..n {
            let mut lk = 1.0;
            for m in 0..n {
                if m != k {
                    lk *= (x - xs[m]) / (xs[k] - xs[m]);
                }
            }
            acc += lk * values[pi * n + k];
        }
        acc
    }
}

/// Nodal values of a function on a shared grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values on a grid of {} nodes", values.len(), grid.len())));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        GridFunction { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        GridFunction { grid, values }
    }

    /// Samples an expression; errors when its breakpoints are not aligned.
    pub fn from_expr(grid: Arc<Grid>, f: &FuncExpr) -> Result<Self> {
        grid.check_aligned(&f.all_breakpoints())?;
        Ok(Self::from_fn(grid, |t| f.eval(t)))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn points(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn weights(&self) -> &[f64] {
        self.grid.weights()
    }

    pub fn domain(&self) -> &LebesgueSet {
        self.grid.domain()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn check_same(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("grid functions live on different grids".into()))
        }
    }

    pub fn integrate(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v * w).sum()
    }

    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.values.iter().zip(&other.values).zip(self.grid.weights()).map(|((a, b), w)| a * b * w).sum())
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_values(&self.values, self.grid.weights(), p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Zeroes the values outside a node mask.
    pub fn masked(&self, mask: &[bool]) -> GridFunction {
        let values = self.values.iter().zip(mask).map(|(v, &m)| if m { *v } else { 0.0 }).collect();
        GridFunction { grid: self.grid.clone(), values }
    }
}

/// Weighted `L_p` norm of nodal values; `p = inf` gives the nodal maximum.
pub fn lp_norm_values(values: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP(p));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

fn grid_for_expr(f: &FuncExpr, domain: &LebesgueSet, rule: &QuadratureRule) -> Result<Grid> {
    let (lo, hi) = domain.hull().map_or((0.0, 0.0), |h| (h.lo, h.hi));
    build_grid(domain, &f.breakpoints_of(crate::func_expr::Var::T, lo, hi), rule)
}

/// `int_domain f`; zero on the empty set.
pub fn integrate(f: &FuncExpr, domain: &LebesgueSet, rule: &QuadratureRule) -> Result<f64> {
    let g = grid_for_expr(f, domain, rule)?;
    Ok(g.points().iter().zip(g.weights()).map(|(&t, w)| w * f.eval(t)).sum())
}

/// `int_domain u v`.
pub fn inner_product(u: &FuncExpr, v: &FuncExpr, domain: &LebesgueSet, rule: &QuadratureRule) -> Result<f64> {
    let prod = FuncExpr::mul(u.clone(), v.clone());
    integrate(&prod, domain, rule)
}

/// `L_p` norm of `f` over `domain`; the `inf` norm is the nodal maximum.
pub fn lp_norm(f: &FuncExpr, domain: &LebesgueSet, p: f64, rule: &QuadratureRule) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP(p));
    }
    let g = grid_for_expr(f, domain, rule)?;
    let vals: Vec<f64> = g.points().iter().map(|&t| f.eval(t)).collect();
    lp_norm_values(&vals, g.weights(), p)
}

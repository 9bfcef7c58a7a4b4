//! Analytic kernels, sampled grid kernels and the kernel algebra:
//! composition, iterated kernels, polynomial kernels and norm bounds.
//!
//! A [`GridKernel`] holds nodal values on a square tensor grid. A
//! lower-triangular kernel (Volterra type) stores a smooth extension of its
//! values over the whole square together with the cut `gamma <= s <= t`;
//! integrals whose limits are nodes then use integrated Lagrange weights on
//! the partial panel, which keeps the full order of the rule.

use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain_sets::LebesgueSet;
use crate::func_expr::FuncExpr;
use crate::quadrature::{build_grid, Grid, QuadratureRule};
use crate::{Error, Result};

/// Analytic kernel `k(t, s)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// Arbitrary expression in `t` and `s`.
    General(FuncExpr),
    /// `left(t) * right(s)`; both factors are written in the variable `t`.
    Separable { left: FuncExpr, right: FuncExpr },
    /// `profile(t - s)`, cut to `t >= s` when one-sided.
    Convolution { profile: FuncExpr, one_sided: bool },
    /// `inner(t, s)` on `lower_limit <= s <= t`, zero elsewhere.
    Volterra { inner: Box<Kernel>, lower_limit: f64 },
}

impl Kernel {
    pub fn zero() -> Self {
        Kernel::General(FuncExpr::Const(0.0))
    }

    pub fn separable(left: FuncExpr, right: FuncExpr) -> Self {
        Kernel::Separable { left, right }
    }

    pub fn volterra(inner: Kernel, lower_limit: f64) -> Self {
        Kernel::Volterra { inner: Box::new(inner), lower_limit }
    }

    /// Innermost non-Volterra kernel and the effective lower limit.
    pub fn split_triangular(&self) -> (&Kernel, Option<f64>) {
        match self {
            Kernel::Volterra { inner, lower_limit } => {
                let (k, g) = inner.split_triangular();
                (k, Some(g.map_or(*lower_limit, |g| g.max(*lower_limit))))
            }
            other => (other, None),
        }
    }

    /// Value of the kernel ignoring any triangular cut.
    pub fn eval_extension(&self, t: f64, s: f64) -> f64 {
        match self {
            Kernel::General(e) => e.eval2(t, s),
            Kernel::Separable { left, right } => {
                let a = left.eval(t);
                if a == 0.0 {
                    0.0
                } else {
                    a * right.eval(s)
                }
            }
            Kernel::Convolution { profile, one_sided } => {
                if *one_sided && t < s {
                    0.0
                } else {
                    profile.eval(t - s)
                }
            }
            Kernel::Volterra { inner, .. } => inner.eval_extension(t, s),
        }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        match self.split_triangular() {
            (k, Some(g)) => {
                if g <= s && s <= t {
                    k.eval_extension(t, s)
                } else {
                    0.0
                }
            }
            (k, None) => k.eval_extension(t, s),
        }
    }

    /// Lines `t = b` or `s = b` across which the kernel may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = match self {
            Kernel::General(e) => e.all_breakpoints(),
            Kernel::Separable { left, right } => {
                let mut v = left.all_breakpoints();
                v.extend(right.all_breakpoints());
                v
            }
            Kernel::Convolution { .. } => Vec::new(),
            Kernel::Volterra { inner, lower_limit } => {
                let mut v = inner.breakpoints();
                v.push(*lower_limit);
                v
            }
        };
        v.retain(|x| x.is_finite());
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Nodal values on a grid. Errors when a breakpoint falls inside a panel.
    pub fn sample(&self, grid: &Arc<Grid>) -> Result<GridKernel> {
        grid.check_aligned(&self.breakpoints())?;
        let (inner, gamma) = self.split_triangular();
        let pts = grid.points();
        let n = pts.len();
        let rows: Vec<Vec<f64>> = pts.par_iter().map(|&t| pts.iter().map(|&s| inner.eval_extension(t, s)).collect()).collect();
        let values = Array2::from_shape_vec((n, n), rows.into_iter().flatten().collect()).expect("square sample matrix");
        let shape = match gamma {
            Some(g) => KernelShape::Lower { gamma: g },
            None => KernelShape::Full,
        };
        GridKernel::new(grid.clone(), values, shape)
    }
}

/// Support pattern of a [`GridKernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelShape {
    Full,
    /// Values live on `gamma <= s <= t`; stored values elsewhere are a
    /// smooth extension used only for interpolation.
    Lower {
        gamma: f64,
    },
}

/// Kernel sampled on a square tensor grid.
#[derive(Debug, Clone)]
pub struct GridKernel {
    grid: Arc<Grid>,
    values: Array2<f64>,
    shape: KernelShape,
}

impl GridKernel {
    pub fn new(grid: Arc<Grid>, values: Array2<f64>, shape: KernelShape) -> Result<Self> {
        let n = grid.len();
        if values.dim() != (n, n) {
            return Err(Error::GridMismatch(format!("{:?} values on a grid of {n} nodes", values.dim())));
        }
        if let KernelShape::Lower { gamma } = shape {
            if !grid.is_aligned(gamma) {
                return Err(Error::GridMismatch(format!("lower limit {gamma} falls inside a panel")));
            }
        }
        Ok(GridKernel { grid, values, shape })
    }

    pub fn zeros(grid: Arc<Grid>, shape: KernelShape) -> Self {
        let n = grid.len();
        GridKernel { grid, values: Array2::zeros((n, n)), shape }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    /// Stored values, including the extension of a triangular kernel.
    pub fn raw_values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn in_support(&self, i: usize, j: usize) -> bool {
        match self.shape {
            KernelShape::Full => true,
            KernelShape::Lower { gamma } => j <= i && self.grid.points()[j] >= gamma,
        }
    }

    /// Kernel value at nodes `(t_i, s_j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        if self.in_support(i, j) {
            self.values[[i, j]]
        } else {
            0.0
        }
    }

    /// Kernel values with the triangular cut applied.
    pub fn dense(&self) -> Array2<f64> {
        match self.shape {
            KernelShape::Full => self.values.clone(),
            KernelShape::Lower { .. } => Array2::from_shape_fn(self.values.dim(), |(i, j)| self.value(i, j)),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        let n = self.grid.len();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                m = m.max(self.value(i, j).abs());
            }
        }
        m
    }

    pub fn same_grid(&self, other: &GridKernel) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn check_same(&self, other: &GridKernel) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("kernels live on different grids".into()))
        }
    }

    pub fn scaled(&self, c: f64) -> GridKernel {
        GridKernel { grid: self.grid.clone(), values: &self.values * c, shape: self.shape }
    }

    /// Pointwise sum. Mixed shapes fall back to the cut values.
    pub fn add(&self, other: &GridKernel) -> Result<GridKernel> {
        self.check_same(other)?;
        if self.shape == other.shape {
            return Ok(GridKernel { grid: self.grid.clone(), values: &self.values + &other.values, shape: self.shape });
        }
        Ok(GridKernel { grid: self.grid.clone(), values: self.dense() + other.dense(), shape: KernelShape::Full })
    }

    /// Zeroes the rows `t_i` outside a node mask.
    pub fn mask_rows(&self, mask: &[bool]) -> GridKernel {
        let mut values = self.values.clone();
        for (i, mut row) in values.axis_iter_mut(Axis(0)).enumerate() {
            if !mask[i] {
                row.fill(0.0);
            }
        }
        GridKernel { grid: self.grid.clone(), values, shape: self.shape }
    }

    /// Matrix `M` with `(K x)(t_i) = sum_k M[i][k] x(t_k)`, integrating over
    /// the masked nodes.
    pub fn apply_matrix(&self, g_mask: &[bool]) -> Array2<f64> {
        match self.shape {
            KernelShape::Full => {
                let w = Array1::from(self.grid.masked_weights(g_mask));
                &self.values * &w.insert_axis(Axis(0))
            }
            KernelShape::Lower { gamma } => self.grid.lower_weight_matrix(gamma, g_mask) * &self.values,
        }
    }
}

/// Kernel of `L R` where `L` integrates over the masked nodes:
/// `(L R)(t, tau) = int_{G} l(t, sigma) r(sigma, tau) d sigma`.
pub fn compose(left: &GridKernel, g_mid: &[bool], right: &GridKernel) -> Result<GridKernel> {
    left.check_same(right)?;
    let grid = left.grid.clone();
    if g_mid.len() != grid.len() {
        return Err(Error::GridMismatch("mask length differs from grid size".into()));
    }
    let (values, shape) = match (left.shape, right.shape) {
        (KernelShape::Full, KernelShape::Full) => {
            let w = Array1::from(grid.masked_weights(g_mid));
            ((&left.values * &w.insert_axis(Axis(0))).dot(&right.values), KernelShape::Full)
        }
        (KernelShape::Lower { gamma }, KernelShape::Full) => {
            let t = grid.lower_weight_matrix(gamma, g_mid);
            ((t * &left.values).dot(&right.values), KernelShape::Full)
        }
        (KernelShape::Full, KernelShape::Lower { gamma }) => {
            let u = grid.upper_weight_matrix(g_mid);
            let z = &u.t() * &right.values;
            let mut v = left.values.dot(&z);
            for (j, &s) in grid.points().iter().enumerate() {
                if s < gamma {
                    v.column_mut(j).fill(0.0);
                }
            }
            (v, KernelShape::Full)
        }
        (KernelShape::Lower { gamma: gl }, KernelShape::Lower { gamma: gr }) => {
            // int_{max(tau, gl)}^{max(t, gl)} as a difference of cumulative weights
            let t = grid.lower_weight_matrix(gl, g_mid);
            let a = (&t * &left.values).dot(&right.values);
            let z = &t.t() * &right.values;
            let b = left.values.dot(&z);
            (a - b, KernelShape::Lower { gamma: gr })
        }
    };
    GridKernel::new(grid, values, shape)
}

/// `k_m` with `k_0 = k` and `k_m(t, s) = int_G k(t, tau) k_{m-1}(tau, s)`.
pub fn iterated_kernel(k: &GridKernel, g_mask: &[bool], m: usize) -> Result<GridKernel> {
    let mut cur = k.clone();
    for _ in 0..m {
        cur = compose(k, g_mask, &cur)?;
    }
    Ok(cur)
}

/// Real polynomial `F(z) = sum_j delta_j z^j` with trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Polynomial::new(v)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Vec<f64> {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("polynomial coefficients must be finite".into()));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Ok(Polynomial { coeffs })
    }

    /// `delta z^d`.
    pub fn monomial(delta: f64, d: usize) -> Result<Self> {
        let mut c = vec![0.0; d + 1];
        c[d] = delta;
        Self::new(c)
    }

    pub fn affine(delta0: f64, delta1: f64) -> Result<Self> {
        Self::new(vec![delta0, delta1])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }

    /// Degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    /// `(delta, d)` when the polynomial is `delta z^d` with `d >= 1`.
    pub fn as_monomial(&self) -> Option<(f64, usize)> {
        let d = self.degree();
        if d >= 1 && self.coeffs[..d].iter().all(|c| *c == 0.0) {
            Some((self.coeffs[d], d))
        } else {
            None
        }
    }
}

impl std::fmt::Display for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*z")?,
                _ => write!(f, "{c}*z^{j}")?,
            }
        }
        Ok(())
    }
}

/// `F_n(k) = sum_{j=1}^{n} delta_j k_{j-1}`; the constant term is excluded.
pub fn polynomial_kernel(k: &GridKernel, g_mask: &[bool], f: &Polynomial) -> Result<GridKernel> {
    let mut acc = GridKernel::zeros(k.grid.clone(), k.shape);
    let mut iterate = k.clone();
    for j in 1..=f.degree() {
        if j > 1 {
            iterate = compose(k, g_mask, &iterate)?;
        }
        let c = f.coeff(j);
        if c != 0.0 {
            acc = acc.add(&iterate.scaled(c))?;
        }
    }
    Ok(acc)
}

/// Bound on the `L_p` operator norm of the kernel acting from the masked
/// `s`-nodes to the masked `t`-nodes:
/// `p = 1`: `sup_s int |k| dt`; `p = inf`: `sup_t int |k| ds`; otherwise
/// `(int (int |k|^q ds)^{p/q} dt)^{1/p}` with `1/p + 1/q = 1`.
///
/// The bound is taken for the effective Nyström kernel `M[i][k] / w_k`, so it
/// dominates the discrete operator exactly.
pub fn kernel_norm_bound(k: &GridKernel, g_mask: &[bool], x_mask: &[bool], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP(p));
    }
    let grid = &k.grid;
    let w = grid.weights();
    let m = k.apply_matrix(g_mask);
    let n = grid.len();
    let eff = |i: usize, j: usize| if g_mask[j] && w[j] > 0.0 { m[[i, j]] / w[j] } else { 0.0 };
    let rows: Vec<usize> = (0..n).filter(|&i| x_mask[i]).collect();
    let bound = if p == 1.0 {
        (0..n).map(|j| rows.iter().map(|&i| w[i] * eff(i, j).abs()).sum::<f64>()).fold(0.0, f64::max)
    } else if p.is_infinite() {
        rows.iter().map(|&i| (0..n).map(|j| w[j] * eff(i, j).abs()).sum::<f64>()).fold(0.0, f64::max)
    } else {
        let q = p / (p - 1.0);
        let s: f64 = rows
            .iter()
            .map(|&i| {
                let inner: f64 = (0..n).map(|j| w[j] * eff(i, j).abs().powf(q)).sum();
                w[i] * inner.powf(p / q)
            })
            .sum();
        s.powf(1.0 / p)
    };
    if bound.is_finite() {
        Ok(bound)
    } else {
        Err(Error::NonFiniteNorm)
    }
}

/// Grid over a bounded window aligned with the breakpoints of the kernels.
pub fn kernel_grid(window: &LebesgueSet, kernels: &[&Kernel], rule: &QuadratureRule) -> Result<Arc<Grid>> {
    let mut bps: Vec<f64> = kernels.iter().flat_map(|k| k.breakpoints()).collect();
    bps.extend(window.endpoints());
    Ok(Arc::new(build_grid(window, &bps, rule)?))
}

/// Norm bound of an analytic kernel on `window x window`.
pub fn analytic_norm_bound(k: &Kernel, window: &LebesgueSet, p: f64, rule: &QuadratureRule) -> Result<f64> {
    let grid = kernel_grid(window, &[k], rule)?;
    let gk = k.sample(&grid)?;
    let all = vec![true; grid.len()];
    kernel_norm_bound(&gk, &all, &all, p)
}

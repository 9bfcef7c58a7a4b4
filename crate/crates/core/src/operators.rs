//! Integral operators `(Ax)(t) = int_G k(t, s) x(s) ds` on `L_p(X)`, their
//! discretisation on a shared grid, sequential application and the
//! deterministic test battery.

use std::sync::Arc;

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain_sets::{Interval, LebesgueSet};
use crate::kernels::{compose, kernel_norm_bound, polynomial_kernel, GridKernel, Kernel, Polynomial};
use crate::quadrature::{build_grid, Grid, GridFunction, QuadratureRule};
use crate::{Error, Result};

/// Kernel of an operator: analytic, or already sampled on a grid.
#[derive(Debug, Clone)]
pub enum OperatorKernel {
    Analytic(Kernel),
    Sampled(GridKernel),
}

/// Integral operator with kernel `k`, integration set `G` and underlying
/// space `L_p(X)`, `G` contained in `X`.
#[derive(Debug, Clone)]
pub struct IntegralOperator {
    kernel: OperatorKernel,
    g: LebesgueSet,
    x: LebesgueSet,
    p: f64,
    norm_bound: Option<f64>,
}

impl IntegralOperator {
    /// Operator on `L_2(X)`. The Hutson–Pym bound is recorded when `X` is
    /// bounded.
    pub fn new(kernel: Kernel, g: LebesgueSet, x: LebesgueSet) -> Result<Self> {
        Self::build(OperatorKernel::Analytic(kernel), g, x, 2.0)
    }

    pub fn from_grid_kernel(kernel: GridKernel, g: LebesgueSet, x: LebesgueSet) -> Result<Self> {
        Self::build(OperatorKernel::Sampled(kernel), g, x, 2.0)
    }

    /// Same operator on `L_p(X)`.
    pub fn with_p(self, p: f64) -> Result<Self> {
        Self::build(self.kernel, self.g, self.x, p)
    }

    fn build(kernel: OperatorKernel, g: LebesgueSet, x: LebesgueSet, p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidP(p));
        }
        if g.is_empty() {
            return Err(Error::EmptyDomain);
        }
        if !g.is_subset_ae(&x) {
            return Err(Error::InvalidArgument(format!("integration set {g} is not contained in {x}")));
        }
        let mut op = IntegralOperator { kernel, g, x, p, norm_bound: None };
        let grid = match &op.kernel {
            OperatorKernel::Sampled(k) => Some(k.grid().clone()),
            OperatorKernel::Analytic(_) if op.x.is_bounded() => Some(common_grid(&[&op], &[], &QuadratureRule::default(), None)?),
            OperatorKernel::Analytic(_) => None,
        };
        if let Some(grid) = grid {
            let k = op.sample(&grid)?;
            op.norm_bound = Some(kernel_norm_bound(&k, &grid.mask(&op.g), &grid.mask(&op.x), p)?);
        }
        Ok(op)
    }

    pub fn kernel(&self) -> &OperatorKernel {
        &self.kernel
    }

    pub fn g(&self) -> &LebesgueSet {
        &self.g
    }

    pub fn x(&self) -> &LebesgueSet {
        &self.x
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn norm_bound(&self) -> Option<f64> {
        self.norm_bound
    }

    /// Lower limit when the kernel is of Volterra type.
    pub fn lower_limit(&self) -> Option<f64> {
        match &self.kernel {
            OperatorKernel::Analytic(k) => k.split_triangular().1,
            OperatorKernel::Sampled(k) => match k.shape() {
                crate::kernels::KernelShape::Lower { gamma } => Some(gamma),
                crate::kernels::KernelShape::Full => None,
            },
        }
    }

    /// Points at which the operator's data may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = match &self.kernel {
            OperatorKernel::Analytic(k) => k.breakpoints(),
            OperatorKernel::Sampled(k) => k.grid().panels().iter().flat_map(|p| [p.lo, p.hi]).collect(),
        };
        v.extend(self.g.endpoints());
        v.extend(self.x.endpoints());
        v
    }

    /// Same operator with every set truncated to a window.
    pub fn truncated(&self, lo: f64, hi: f64) -> Result<Self> {
        let mut op = self.clone();
        op.g = self.g.truncate(lo, hi);
        op.x = self.x.truncate(lo, hi);
        if op.g.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(op)
    }

    /// Kernel values on a grid.
    pub fn sample(&self, grid: &Arc<Grid>) -> Result<GridKernel> {
        match &self.kernel {
            OperatorKernel::Analytic(k) => k.sample(grid),
            OperatorKernel::Sampled(k) => {
                if Arc::ptr_eq(k.grid(), grid) || **k.grid() == **grid {
                    Ok(k.clone())
                } else {
                    Err(Error::GridMismatch("sampled kernel used on a different grid".into()))
                }
            }
        }
    }

    /// Nyström matrix of the operator on a grid.
    pub fn discretize(&self, grid: &Arc<Grid>) -> Result<DiscreteOperator> {
        grid.check_aligned(&self.g.endpoints())?;
        grid.check_aligned(&self.x.endpoints())?;
        let kernel = self.sample(grid)?;
        let g_mask = grid.mask(&self.g);
        let x_mask = grid.mask(&self.x);
        let mut matrix = kernel.apply_matrix(&g_mask);
        for (i, &inside) in x_mask.iter().enumerate() {
            if !inside {
                matrix.row_mut(i).fill(0.0);
            }
        }
        Ok(DiscreteOperator { kernel, g_mask, x_mask, matrix })
    }

    /// `A x` on the grid of `x`.
    pub fn apply(&self, x: &GridFunction) -> Result<GridFunction> {
        self.discretize(x.grid())?.apply(x)
    }
}

/// An operator sampled on a grid, with its Nyström matrix.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    kernel: GridKernel,
    g_mask: Vec<bool>,
    x_mask: Vec<bool>,
    matrix: Array2<f64>,
}

impl DiscreteOperator {
    pub fn kernel(&self) -> &GridKernel {
        &self.kernel
    }

    pub fn g_mask(&self) -> &[bool] {
        &self.g_mask
    }

    pub fn x_mask(&self) -> &[bool] {
        &self.x_mask
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.kernel.grid()
    }

    pub fn apply_values(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.dot(&ArrayView1::from(x)).to_vec()
    }

    pub fn apply(&self, x: &GridFunction) -> Result<GridFunction> {
        if !(Arc::ptr_eq(x.grid(), self.grid()) || **x.grid() == **self.grid()) {
            return Err(Error::GridMismatch("function and operator live on different grids".into()));
        }
        GridFunction::new(x.grid().clone(), self.apply_values(x.values()))
    }

    /// Hutson–Pym bound of the discrete operator on `L_p`.
    pub fn norm_bound(&self, p: f64) -> Result<f64> {
        kernel_norm_bound(&self.kernel, &self.g_mask, &self.x_mask, p)
    }
}

/// Grid on the hull of all sets of the operators, aligned with every
/// breakpoint. Unbounded hulls need a window.
pub fn common_grid(ops: &[&IntegralOperator], extra_breaks: &[f64], rule: &QuadratureRule, window: Option<Interval>) -> Result<Arc<Grid>> {
    let mut base = LebesgueSet::empty();
    for op in ops {
        base = base.union(op.x()).union(op.g());
    }
    let hull = base.hull().ok_or(Error::EmptyDomain)?;
    let domain = match window {
        Some(w) => LebesgueSet::from_intervals(vec![Interval { lo: hull.lo.max(w.lo), hi: hull.hi.min(w.hi) }]),
        None if hull.is_bounded() => LebesgueSet::from_intervals(vec![hull]),
        None => return Err(Error::Unbounded(base.to_string())),
    };
    if domain.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let mut bps: Vec<f64> = ops.iter().flat_map(|op| op.breakpoints()).collect();
    bps.extend_from_slice(extra_breaks);
    Ok(Arc::new(build_grid(&domain, &bps, rule)?))
}

/// `A x`.
pub fn apply(op: &IntegralOperator, x: &GridFunction) -> Result<GridFunction> {
    op.apply(x)
}

/// `F(A) x = delta_0 x + F_n(k) x`.
pub fn apply_poly(op: &IntegralOperator, f: &Polynomial, x: &GridFunction) -> Result<GridFunction> {
    let d = op.discretize(x.grid())?;
    let fk = polynomial_kernel(d.kernel(), d.g_mask(), f)?;
    let fop = IntegralOperator::from_grid_kernel(fk, op.g().clone(), op.x().clone())?;
    let mut y = fop.apply(x)?;
    let d0 = f.coeff(0);
    for (v, xv) in y.values_mut().iter_mut().zip(x.values()) {
        *v += d0 * xv;
    }
    Ok(y)
}

/// Operator `L R` with the composed kernel sampled on `grid`.
pub fn compose_ops(left: &IntegralOperator, right: &IntegralOperator, grid: &Arc<Grid>) -> Result<IntegralOperator> {
    let kl = left.sample(grid)?;
    let kr = right.sample(grid)?.mask_rows(&grid.mask(right.x()));
    let k = compose(&kl, &grid.mask(left.g()), &kr)?;
    IntegralOperator::from_grid_kernel(k, right.g().clone(), left.x().clone())
}

/// Deterministic test functions supported on a set.
///
/// Each function mixes one to three atoms drawn from `1`, a linear ramp,
/// `sin` and `cos` of low frequency relative to the support, and indicators
/// of intervals between panel boundaries. The first function is the
/// indicator of the support.
pub fn default_battery(grid: &Arc<Grid>, support: &LebesgueSet, seed: u64, count: usize) -> Vec<GridFunction> {
    let Some(hull) = support.hull() else {
        return Vec::new();
    };
    let (lo, len) = (hull.lo, hull.length().max(f64::MIN_POSITIVE));
    let mask = grid.mask(support);
    let mut bounds: Vec<f64> = grid.panels().iter().flat_map(|p| [p.lo, p.hi]).filter(|b| *b >= hull.lo && *b <= hull.hi).collect();
    bounds.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_pi = 2.0 * std::f64::consts::PI;
    (0..count)
        .map(|n| {
            let mut atoms: Vec<Box<dyn Fn(f64) -> f64>> = Vec::new();
            if n == 0 {
                atoms.push(Box::new(|_| 1.0));
            } else {
                for _ in 0..rng.gen_range(1..=3) {
                    let c: f64 = rng.gen_range(-1.0..1.0);
                    let k = rng.gen_range(1..=3) as f64;
                    let atom: Box<dyn Fn(f64) -> f64> = match rng.gen_range(0..5) {
                        0 => Box::new(move |_| c),
                        1 => Box::new(move |t| c * (t - lo) / len),
                        2 => Box::new(move |t| c * (two_pi * k * (t - lo) / len).sin()),
                        3 => Box::new(move |t| c * (two_pi * k * (t - lo) / len).cos()),
                        _ if bounds.len() >= 2 => {
                            let i = rng.gen_range(0..bounds.len() - 1);
                            let j = rng.gen_range(i + 1..bounds.len());
                            let (ba, bb) = (bounds[i], bounds[j]);
                            Box::new(move |t| if t >= ba && t <= bb { c } else { 0.0 })
                        }
                        _ => Box::new(move |_| c),
                    };
                    atoms.push(atom);
                }
            }
            let values = grid.points().iter().zip(&mask).map(|(&t, &m)| if m { atoms.iter().map(|f| f(t)).sum() } else { 0.0 }).collect();
            GridFunction::new(grid.clone(), values).expect("battery matches grid")
        })
        .collect()
}

/// Action residual of `AB = B F(A)` over a battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectResidual {
    /// `max_x ||A(Bx) - B(F(A)x)||_2 / (1 + ||x||_2)`.
    pub max_residual: f64,
    /// `max_x ||A(Bx) - B(F(A)x)||_2 / (scale ||x||_2)`, where `scale`
    /// bounds both sides and is linear in `B`.
    pub relative: f64,
    pub scale: f64,
    pub per_function: Vec<f64>,
}

/// Relative residual threshold below which an action relation holds.
pub const ORACLE_THRESHOLD: f64 = 1e-7;

impl DirectResidual {
    pub fn holds(&self) -> bool {
        self.relative <= ORACLE_THRESHOLD
    }
}

fn l2(values: &[f64], weights: &[f64], mask: Option<&[bool]>) -> f64 {
    values.iter().zip(weights).enumerate().filter(|(i, _)| mask.is_none_or(|m| m[*i])).map(|(_, (v, w))| w * v * v).sum::<f64>().sqrt()
}

/// Sequentially applies `A(Bx)` and `B(F(A)x)` without composed kernels.
/// Norms are measured on `measure_on` when given.
pub fn direct_residual(
    a: &DiscreteOperator,
    b: &DiscreteOperator,
    f: &Polynomial,
    battery: &[GridFunction],
    measure_on: Option<&[bool]>,
) -> Result<DirectResidual> {
    let w = a.grid().weights().to_vec();
    let na = a.norm_bound(2.0)?;
    let nb = b.norm_bound(2.0)?;
    let fa: f64 = f.coeffs().iter().enumerate().map(|(j, c)| c.abs() * na.powi(j as i32)).sum();
    let scale = nb * (na + fa);
    let mut per = Vec::with_capacity(battery.len());
    let (mut max_res, mut rel) = (0.0f64, 0.0f64);
    for x in battery {
        let ab = a.apply_values(&b.apply_values(x.values()));
        let mut y = x.values().to_vec();
        let mut fx: Vec<f64> = y.iter().map(|v| f.coeff(0) * v).collect();
        for j in 1..=f.degree() {
            y = a.apply_values(&y);
            let c = f.coeff(j);
            for (acc, v) in fx.iter_mut().zip(&y) {
                *acc += c * v;
            }
        }
        let bf = b.apply_values(&fx);
        let diff: Vec<f64> = ab.iter().zip(&bf).map(|(p, q)| p - q).collect();
        let d = l2(&diff, &w, measure_on);
        let nx = l2(x.values(), &w, None);
        per.push(d);
        max_res = max_res.max(d / (1.0 + nx));
        let r = if d == 0.0 {
            0.0
        } else if scale > 0.0 && nx > 0.0 {
            d / (scale * nx)
        } else {
            f64::INFINITY
        };
        rel = rel.max(r);
    }
    Ok(DirectResidual { max_residual: max_res, relative: rel, scale, per_function: per })
}

/// Largest `||T x||_2 / (scale ||x||_2)` over a battery, `T` given by a
/// closure on nodal values. Used to test that an operator vanishes.
pub fn action_ratio(grid: &Grid, battery: &[GridFunction], scale: f64, op: impl Fn(&[f64]) -> Vec<f64>) -> (f64, f64) {
    let w = grid.weights();
    let (mut rel, mut sup) = (0.0f64, 0.0f64);
    for x in battery {
        let y = op(x.values());
        let d = l2(&y, w, None);
        let nx = l2(x.values(), w, None);
        sup = sup.max(y.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let r = if d == 0.0 {
            0.0
        } else if scale > 0.0 && nx > 0.0 {
            d / (scale * nx)
        } else {
            f64::INFINITY
        };
        rel = rel.max(r);
    }
    (rel, sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func_expr::{parse_expr, FuncExpr};

    fn unit() -> LebesgueSet {
        LebesgueSet::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn volterra_action_on_constant() {
        let v = IntegralOperator::new(Kernel::volterra(Kernel::General(FuncExpr::Const(1.0)), 0.0), unit(), unit()).unwrap();
        let grid = common_grid(&[&v], &[], &QuadratureRule::default(), None).unwrap();
        let one = GridFunction::from_fn(grid.clone(), |_| 1.0);
        let y = v.apply(&one).unwrap();
        for (t, yv) in grid.points().iter().zip(y.values()) {
            assert!((yv - t).abs() < 1e-14);
        }
        let f = Polynomial::new(vec![1.0, 0.0, 2.0]).unwrap();
        let z = apply_poly(&v, &f, &one).unwrap();
        for (t, zv) in grid.points().iter().zip(z.values()) {
            assert!((zv - (1.0 + t * t)).abs() < 1e-13);
        }
    }

    #[test]
    fn battery_is_deterministic_and_supported() {
        let k = Kernel::General(parse_expr("t*s").unwrap());
        let op = IntegralOperator::new(k, unit(), LebesgueSet::interval(-1.0, 2.0).unwrap()).unwrap();
        let grid = common_grid(&[&op], &[], &QuadratureRule::default(), None).unwrap();
        let a = default_battery(&grid, &unit(), 7, 10);
        let b = default_battery(&grid, &unit(), 7, 10);
        assert_eq!(a.len(), 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.values(), y.values());
            for (t, v) in grid.points().iter().zip(x.values()) {
                if !(0.0..=1.0).contains(t) {
                    assert_eq!(*v, 0.0);
                }
            }
        }
        let c = default_battery(&grid, &unit(), 8, 10);
        assert_ne!(a[3].values(), c[3].values());
    }

    #[test]
    fn construction_errors() {
        let k = Kernel::General(FuncExpr::Const(1.0));
        assert!(IntegralOperator::new(k.clone(), LebesgueSet::interval(0.0, 2.0).unwrap(), unit()).is_err());
        assert!(IntegralOperator::new(k.clone(), LebesgueSet::empty(), unit()).is_err());
        let op = IntegralOperator::new(k.clone(), unit(), unit()).unwrap();
        assert!(op.clone().with_p(0.5).is_err());
        assert!((op.norm_bound().unwrap() - 1.0).abs() < 1e-13);
        let line = IntegralOperator::new(k, unit(), LebesgueSet::real_line()).unwrap();
        assert_eq!(line.norm_bound(), None);
        assert!(common_grid(&[&line], &[], &QuadratureRule::default(), None).is_err());
    }
}

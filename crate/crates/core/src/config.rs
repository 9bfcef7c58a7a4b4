//! JSON experiment specs for the command-line tool.
//!
//! A verify spec names a checker, two kernels `A` and `B`, and the data the
//! checker needs. Kernel specs are tagged by `"type"`; every expression is
//! parsed with the grammar of [`crate::func_expr`], and parse errors keep
//! their character position prefixed by the field path.

use serde::{Deserialize, Serialize};

use crate::convolution;
use crate::covariance::{self, CheckContext};
use crate::domain_sets::{AeTolerance, LebesgueSet};
use crate::func_expr::{parse_expr, FuncExpr};
use crate::kernels::{compose, iterated_kernel, kernel_norm_bound, polynomial_kernel, GridKernel, Kernel, Polynomial};
use crate::operators::{common_grid, IntegralOperator};
use crate::quadrature::QuadratureRule;
use crate::report::CheckReport;
use crate::volterra;
use crate::{Error, Result};

/// Kernel description as it appears in a spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Separable {
        a: String,
        c: String,
        #[serde(rename = "G", default)]
        g: Option<LebesgueSet>,
    },
    General {
        expr: String,
        #[serde(rename = "G", default)]
        g: Option<LebesgueSet>,
    },
    Convolution {
        profile: String,
        #[serde(default)]
        one_sided: bool,
        #[serde(rename = "G", default)]
        g: Option<LebesgueSet>,
    },
    Volterra {
        gamma: f64,
        inner: Box<KernelSpec>,
        #[serde(rename = "G", default)]
        g: Option<LebesgueSet>,
    },
    VolterraSeparable {
        outer: String,
        inner: String,
        alpha: f64,
        beta: f64,
    },
}

fn expr(field: &str, src: &str) -> Result<FuncExpr> {
    parse_expr(src).map_err(|e| Error::Config(format!("{field}: {e}")))
}

impl KernelSpec {
    /// Analytic kernel; `field` prefixes error messages.
    pub fn kernel(&self, field: &str) -> Result<Kernel> {
        Ok(match self {
            KernelSpec::Separable { a, c, .. } => Kernel::separable(expr(&format!("{field}.a"), a)?, expr(&format!("{field}.c"), c)?),
            KernelSpec::General { expr: e, .. } => Kernel::General(expr(&format!("{field}.expr"), e)?),
            KernelSpec::Convolution { profile, one_sided, .. } => {
                Kernel::Convolution { profile: expr(&format!("{field}.profile"), profile)?, one_sided: *one_sided }
            }
            KernelSpec::Volterra { gamma, inner, .. } => Kernel::volterra(inner.kernel(&format!("{field}.inner"))?, *gamma),
            KernelSpec::VolterraSeparable { outer, inner, alpha, .. } => Kernel::volterra(
                Kernel::separable(expr(&format!("{field}.outer"), outer)?, expr(&format!("{field}.inner"), inner)?),
                *alpha,
            ),
        })
    }

    /// Integration set given in the config, if any.
    pub fn g(&self) -> Option<LebesgueSet> {
        match self {
            KernelSpec::Separable { g, .. }
            | KernelSpec::General { g, .. }
            | KernelSpec::Convolution { g, .. }
            | KernelSpec::Volterra { g, .. } => g.clone(),
            KernelSpec::VolterraSeparable { alpha, beta, .. } => LebesgueSet::interval(*alpha, *beta).ok(),
        }
    }

    /// Operator with `G` from the config (or `X`) and `X` (or `G`).
    pub fn operator(&self, field: &str, x: Option<&LebesgueSet>) -> Result<IntegralOperator> {
        let g = self.g().or_else(|| x.cloned());
        let x = x.cloned().or_else(|| g.clone());
        match (g, x) {
            (Some(g), Some(x)) => IntegralOperator::new(self.kernel(field)?, g, x),
            _ => Err(Error::Config(format!("{field}: neither G nor X given"))),
        }
    }

    fn separable_parts(&self, field: &str) -> Result<(FuncExpr, FuncExpr, f64, f64)> {
        match self {
            KernelSpec::VolterraSeparable { outer, inner, alpha, beta } => {
                Ok((expr(&format!("{field}.outer"), outer)?, expr(&format!("{field}.inner"), inner)?, *alpha, *beta))
            }
            _ => Err(Error::Config(format!("{field}: checker needs a volterra_separable kernel"))),
        }
    }

    fn profile(&self, field: &str) -> Result<(FuncExpr, bool)> {
        match self {
            KernelSpec::Convolution { profile, one_sided, .. } => Ok((expr(&format!("{field}.profile"), profile)?, *one_sided)),
            _ => Err(Error::Config(format!("{field}: checker needs a convolution kernel"))),
        }
    }

    /// Inner kernel and lower limit of a Volterra-type spec.
    fn volterra_parts(&self, field: &str) -> Result<(Kernel, Option<f64>)> {
        let k = self.kernel(field)?;
        let (inner, gamma) = k.split_triangular();
        Ok((inner.clone(), gamma))
    }
}

/// Checker selected by a verify spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckerKind {
    General,
    Affine,
    Monomial,
    Qplane,
    ConvPoly,
    ConvMonomial,
    ConvOneSided,
    VolterraNecessary,
    VolterraSufficient,
    CommutSufficient,
    BothZero,
    DeltaCommutNecessary,
}

/// Tolerance table; missing entries take the defaults of a unit base
/// measure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub eps_value: Option<f64>,
    pub eps_rel: Option<f64>,
    pub eps_measure: Option<f64>,
}

impl ToleranceSpec {
    pub fn is_empty(&self) -> bool {
        self.eps_value.is_none() && self.eps_rel.is_none() && self.eps_measure.is_none()
    }

    pub fn resolve(&self) -> Result<Option<AeTolerance>> {
        if self.is_empty() {
            return Ok(None);
        }
        let d = AeTolerance::default_for(1.0);
        AeTolerance::new(
            self.eps_value.unwrap_or(d.eps_value),
            self.eps_rel.unwrap_or(d.eps_rel),
            self.eps_measure.unwrap_or(d.eps_measure),
        )
        .map(Some)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub nodes_per_panel: Option<usize>,
    pub max_panel_width: Option<f64>,
}

impl QuadratureSpec {
    pub fn resolve(&self) -> Result<QuadratureRule> {
        let d = QuadratureRule::default();
        QuadratureRule::new(self.nodes_per_panel.unwrap_or(d.nodes_per_panel), self.max_panel_width.or(d.max_panel_width))
    }
}

/// Command-line overrides applied on top of a spec.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub eps_value: Option<f64>,
    pub eps_measure: Option<f64>,
    pub nodes_per_panel: Option<usize>,
    pub max_panel_width: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub checker: CheckerKind,
    #[serde(rename = "A")]
    pub a: KernelSpec,
    #[serde(rename = "B")]
    pub b: KernelSpec,
    /// Coefficients `[delta_0, ..., delta_n]`.
    #[serde(default)]
    pub polynomial: Option<Polynomial>,
    #[serde(rename = "X", default)]
    pub x: Option<LebesgueSet>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub gamma_a: Option<f64>,
    #[serde(default)]
    pub gamma_b: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub record_points: bool,
}

impl VerifySpec {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    /// Context with overrides applied and validated.
    pub fn context(&self, ov: &Overrides) -> Result<CheckContext> {
        let mut tol = self.tolerance;
        if ov.eps_value.is_some() {
            tol.eps_value = ov.eps_value;
        }
        if ov.eps_measure.is_some() {
            tol.eps_measure = ov.eps_measure;
        }
        let mut quad = self.quadrature;
        if ov.nodes_per_panel.is_some() {
            quad.nodes_per_panel = ov.nodes_per_panel;
        }
        if ov.max_panel_width.is_some() {
            quad.max_panel_width = ov.max_panel_width;
        }
        Ok(CheckContext {
            tol: tol.resolve()?,
            rule: quad.resolve()?,
            seed: ov.seed.or(self.seed).unwrap_or(0),
            window: self.window,
            record_points: self.record_points,
            ..CheckContext::default()
        })
    }

    fn poly(&self) -> Result<&Polynomial> {
        self.polynomial.as_ref().ok_or_else(|| Error::Config("polynomial is required".into()))
    }

    fn monomial(&self) -> Result<(f64, usize)> {
        self.poly()?.as_monomial().ok_or_else(|| Error::Config(format!("polynomial {} is not a monomial", self.poly().unwrap())))
    }

    /// `delta` field, else the coefficient of a degree-one monomial.
    fn delta(&self) -> Result<f64> {
        if let Some(d) = self.delta {
            return Ok(d);
        }
        match self.monomial()? {
            (d, 1) => Ok(d),
            _ => Err(Error::Config("delta is required".into())),
        }
    }

    fn interval(&self) -> Result<(f64, f64)> {
        let hull = self.x.as_ref().and_then(|x| x.hull());
        let alpha = self.alpha.or(hull.map(|h| h.lo));
        let beta = self.beta.or(hull.map(|h| h.hi));
        match (alpha, beta) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Config("alpha and beta (or X) are required".into())),
        }
    }

    /// Runs the selected checker.
    pub fn run(&self, ov: &Overrides) -> Result<CheckReport> {
        let ctx = self.context(ov)?;
        match self.checker {
            CheckerKind::General | CheckerKind::Affine | CheckerKind::Monomial => {
                let a = self.a.operator("A", self.x.as_ref())?;
                let b = self.b.operator("B", self.x.as_ref())?;
                match self.checker {
                    CheckerKind::General => covariance::check_covariance(&a, &b, self.poly()?, &ctx),
                    CheckerKind::Affine => {
                        let f = self.poly()?;
                        if f.degree() > 1 {
                            return Err(Error::Config(format!("polynomial {f} is not affine")));
                        }
                        covariance::check_affine(&a, &b, f.coeff(0), f.coeff(1), &ctx)
                    }
                    _ => {
                        let (d, n) = self.monomial()?;
                        covariance::check_monomial(&a, &b, d, n, &ctx)
                    }
                }
            }
            CheckerKind::Qplane => {
                let (ka, ga) = self.a.volterra_parts("A")?;
                let (kb, gb) = self.b.volterra_parts("B")?;
                let gamma_a = self.gamma_a.or(ga).ok_or_else(|| Error::Config("gamma_a is required".into()))?;
                let gamma_b = self.gamma_b.or(gb).ok_or_else(|| Error::Config("gamma_b is required".into()))?;
                let beta = self.beta.or(self.x.as_ref().and_then(|x| x.sup())).ok_or_else(|| Error::Config("beta is required".into()))?;
                volterra::check_qplane(&ka, &kb, gamma_a, gamma_b, beta, self.delta()?, &ctx)
            }
            CheckerKind::ConvPoly => {
                let (pa, one_sided) = self.a.profile("A")?;
                let (pb, _) = self.b.profile("B")?;
                convolution::check_conv_poly(&pa, &pb, self.poly()?, one_sided, &ctx)
            }
            CheckerKind::ConvMonomial | CheckerKind::ConvOneSided => {
                let (pa, _) = self.a.profile("A")?;
                let (pb, _) = self.b.profile("B")?;
                let (d, n) = self.monomial()?;
                if self.checker == CheckerKind::ConvMonomial {
                    convolution::check_conv_monomial(&pa, &pb, d, n, &ctx)
                } else {
                    convolution::check_one_sided_monomial(&pa, &pb, d, n, &ctx)
                }
            }
            CheckerKind::VolterraNecessary | CheckerKind::VolterraSufficient | CheckerKind::DeltaCommutNecessary => {
                let (a, c, alpha, beta) = self.a.separable_parts("A")?;
                let (b, e, alpha_b, beta_b) = self.b.separable_parts("B")?;
                if alpha != alpha_b || beta != beta_b {
                    return Err(Error::Config("A and B must share alpha and beta".into()));
                }
                match self.checker {
                    CheckerKind::VolterraNecessary => volterra::check_simple_necessary(&a, &b, &c, &e, self.poly()?, alpha, beta, &ctx),
                    CheckerKind::VolterraSufficient => volterra::check_simple_sufficient(&a, &b, &c, &e, self.poly()?, alpha, beta, &ctx),
                    _ => volterra::check_delta_commut_necessary(&a, &b, &c, &e, self.delta()?, alpha, beta, &ctx),
                }
            }
            CheckerKind::CommutSufficient | CheckerKind::BothZero => {
                let (ka, _) = self.a.volterra_parts("A")?;
                let (kb, _) = self.b.volterra_parts("B")?;
                let (alpha, beta) = match (&self.a, self.alpha, self.beta) {
                    (KernelSpec::VolterraSeparable { alpha, beta, .. }, None, None) => (*alpha, *beta),
                    _ => self.interval()?,
                };
                if self.checker == CheckerKind::CommutSufficient {
                    volterra::check_commut_sufficient(&ka, &kb, alpha, beta, self.lambda, &ctx)
                } else {
                    volterra::check_both_zero(&ka, &kb, alpha, beta, &ctx)
                }
            }
        }
    }
}

/// Spec of `compose`: exactly one of `B`, `m`, `polynomial`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposeSpec {
    #[serde(rename = "A")]
    pub a: KernelSpec,
    #[serde(rename = "B", default)]
    pub b: Option<KernelSpec>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub polynomial: Option<Polynomial>,
    #[serde(rename = "X", default)]
    pub x: Option<LebesgueSet>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

/// Resulting kernel and its norm bounds for `p = 1, 2, inf`.
#[derive(Debug, Clone)]
pub struct ComposeOutput {
    pub kernel: GridKernel,
    pub bounds: NormBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub p1: f64,
    pub p2: f64,
    pub pinf: f64,
}

impl ComposeSpec {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn run(&self, ov: &Overrides) -> Result<ComposeOutput> {
        let mut quad = self.quadrature;
        if ov.nodes_per_panel.is_some() {
            quad.nodes_per_panel = ov.nodes_per_panel;
        }
        if ov.max_panel_width.is_some() {
            quad.max_panel_width = ov.max_panel_width;
        }
        let rule = quad.resolve()?;
        let a = self.a.operator("A", self.x.as_ref())?;
        let chosen = [self.b.is_some(), self.m.is_some(), self.polynomial.is_some()].iter().filter(|x| **x).count();
        if chosen != 1 {
            return Err(Error::Config("compose needs exactly one of B, m, polynomial".into()));
        }
        let (kernel, g_mask, x_mask) = if let Some(bs) = &self.b {
            let b = bs.operator("B", self.x.as_ref())?;
            let grid = common_grid(&[&a, &b], &[], &rule, None)?;
            let k = compose(&a.sample(&grid)?, &grid.mask(a.g()), &b.sample(&grid)?)?;
            (k, grid.mask(b.g()), grid.mask(a.x()))
        } else {
            let grid = common_grid(&[&a], &[], &rule, None)?;
            let ka = a.sample(&grid)?;
            let g = grid.mask(a.g());
            let k = match (self.m, &self.polynomial) {
                (Some(m), _) => iterated_kernel(&ka, &g, m)?,
                (_, Some(f)) => polynomial_kernel(&ka, &g, f)?,
                _ => unreachable!("exactly one option chosen"),
            };
            (k, g, grid.mask(a.x()))
        };
        let bounds = NormBounds {
            p1: kernel_norm_bound(&kernel, &g_mask, &x_mask, 1.0)?,
            p2: kernel_norm_bound(&kernel, &g_mask, &x_mask, 2.0)?,
            pinf: kernel_norm_bound(&kernel, &g_mask, &x_mask, f64::INFINITY)?,
        };
        Ok(ComposeOutput { kernel, bounds })
    }
}

impl ComposeOutput {
    /// CSV `t,s,value`, row-major with `t` outer.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,s,value")?;
        let pts = self.kernel.grid().points();
        let d = self.kernel.dense();
        for (i, t) in pts.iter().enumerate() {
            for (j, s) in pts.iter().enumerate() {
                writeln!(w, "{t:e},{s:e},{:e}", d[[i, j]])?;
            }
        }
        Ok(())
    }
}

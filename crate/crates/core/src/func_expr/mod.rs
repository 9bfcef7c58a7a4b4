//! Expression trees for the functions and kernels used throughout the crate.
//!
//! An expression may mention the variables `t` and `s`. Univariate functions
//! use only `t`; kernels use both. Evaluation is total: every tree evaluates
//! to a number (possibly non-finite for overflowing exponentials).

mod parser;
mod simple;

use std::fmt;

use crate::domain_sets::LebesgueSet;

pub use parser::parse_expr;
pub use simple::SimpleFunction;

/// Free variable of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    S,
}

/// Expression tree. Indicators are closed-set indicators (value 1 on the
/// boundary).
#[derive(Debug, Clone, PartialEq)]
pub enum FuncExpr {
    Const(f64),
    Var(Var),
    Indicator { var: Var, set: LebesgueSet },
    Sin(Box<FuncExpr>),
    Cos(Box<FuncExpr>),
    Exp(Box<FuncExpr>),
    Pow(Box<FuncExpr>, u32),
    Add(Box<FuncExpr>, Box<FuncExpr>),
    Sub(Box<FuncExpr>, Box<FuncExpr>),
    Mul(Box<FuncExpr>, Box<FuncExpr>),
    Scale(f64, Box<FuncExpr>),
}

#[allow(clippy::should_implement_trait)]
impl FuncExpr {
    pub fn t() -> Self {
        FuncExpr::Var(Var::T)
    }

    pub fn s() -> Self {
        FuncExpr::Var(Var::S)
    }

    pub fn constant(c: f64) -> Self {
        FuncExpr::Const(c)
    }

    /// Indicator of `[lo, hi]` in the variable `var`.
    pub fn indicator(var: Var, lo: f64, hi: f64) -> crate::Result<Self> {
        Ok(FuncExpr::Indicator { var, set: LebesgueSet::interval(lo, hi)? })
    }

    pub fn indicator_set(var: Var, set: LebesgueSet) -> Self {
        FuncExpr::Indicator { var, set }
    }

    pub fn sin(e: FuncExpr) -> Self {
        FuncExpr::Sin(Box::new(e))
    }

    pub fn cos(e: FuncExpr) -> Self {
        FuncExpr::Cos(Box::new(e))
    }

    pub fn exp(e: FuncExpr) -> Self {
        FuncExpr::Exp(Box::new(e))
    }

    pub fn pow(e: FuncExpr, n: u32) -> Self {
        FuncExpr::Pow(Box::new(e), n)
    }

    pub fn add(a: FuncExpr, b: FuncExpr) -> Self {
        FuncExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: FuncExpr, b: FuncExpr) -> Self {
        FuncExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: FuncExpr, b: FuncExpr) -> Self {
        FuncExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn scale(c: f64, e: FuncExpr) -> Self {
        FuncExpr::Scale(c, Box::new(e))
    }

    /// Sum of a non-empty list of expressions; the empty sum is zero.
    pub fn sum(terms: Vec<FuncExpr>) -> Self {
        let mut it = terms.into_iter();
        match it.next() {
            None => FuncExpr::Const(0.0),
            Some(first) => it.fold(first, FuncExpr::add),
        }
    }

    /// Evaluates at `(t, s)`.
    pub fn eval2(&self, t: f64, s: f64) -> f64 {
        match self {
            FuncExpr::Const(c) => *c,
            FuncExpr::Var(Var::T) => t,
            FuncExpr::Var(Var::S) => s,
            FuncExpr::Indicator { var, set } => {
                let x = if *var == Var::T { t } else { s };
                if set.contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
            FuncExpr::Sin(e) => e.eval2(t, s).sin(),
            FuncExpr::Cos(e) => e.eval2(t, s).cos(),
            FuncExpr::Exp(e) => e.eval2(t, s).exp(),
            FuncExpr::Pow(e, n) => e.eval2(t, s).powi(*n as i32),
            FuncExpr::Add(a, b) => a.eval2(t, s) + b.eval2(t, s),
            FuncExpr::Sub(a, b) => a.eval2(t, s) - b.eval2(t, s),
            FuncExpr::Mul(a, b) => {
                let x = a.eval2(t, s);
                if x == 0.0 {
                    // indicator factors annihilate even non-finite partners
                    return 0.0;
                }
                x * b.eval2(t, s)
            }
            FuncExpr::Scale(c, e) => c * e.eval2(t, s),
        }
    }

    /// Evaluates a univariate expression at `t`; `s` is bound to `t` as well.
    pub fn eval(&self, t: f64) -> f64 {
        self.eval2(t, t)
    }

    pub fn uses_var(&self, v: Var) -> bool {
        match self {
            FuncExpr::Const(_) => false,
            FuncExpr::Var(w) => *w == v,
            FuncExpr::Indicator { var, .. } => *var == v,
            FuncExpr::Sin(e) | FuncExpr::Cos(e) | FuncExpr::Exp(e) | FuncExpr::Pow(e, _) | FuncExpr::Scale(_, e) => e.uses_var(v),
            FuncExpr::Add(a, b) | FuncExpr::Sub(a, b) | FuncExpr::Mul(a, b) => a.uses_var(v) || b.uses_var(v),
        }
    }

    pub fn has_indicator(&self) -> bool {
        match self {
            FuncExpr::Indicator { .. } => true,
            FuncExpr::Const(_) | FuncExpr::Var(_) => false,
            FuncExpr::Sin(e) | FuncExpr::Cos(e) | FuncExpr::Exp(e) | FuncExpr::Pow(e, _) | FuncExpr::Scale(_, e) => e.has_indicator(),
            FuncExpr::Add(a, b) | FuncExpr::Sub(a, b) | FuncExpr::Mul(a, b) => a.has_indicator() || b.has_indicator(),
        }
    }

    fn collect_breakpoints(&self, var: Option<Var>, out: &mut Vec<f64>) {
        match self {
            FuncExpr::Indicator { var: v, set } => {
                if var.is_none_or(|w| w == *v) {
                    out.extend(set.endpoints());
                }
            }
            FuncExpr::Const(_) | FuncExpr::Var(_) => {}
            FuncExpr::Sin(e) | FuncExpr::Cos(e) | FuncExpr::Exp(e) | FuncExpr::Pow(e, _) | FuncExpr::Scale(_, e) => {
                e.collect_breakpoints(var, out)
            }
            FuncExpr::Add(a, b) | FuncExpr::Sub(a, b) | FuncExpr::Mul(a, b) => {
                a.collect_breakpoints(var, out);
                b.collect_breakpoints(var, out);
            }
        }
    }

    /// Sorted indicator endpoints in either variable lying in `[lo, hi]`,
    /// together with the finite window ends.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut v = Vec::new();
        self.collect_breakpoints(None, &mut v);
        finish_breakpoints(v, lo, hi)
    }

    /// Sorted indicator endpoints of one variable lying in `[lo, hi]`,
    /// together with the finite window ends.
    pub fn breakpoints_of(&self, var: Var, lo: f64, hi: f64) -> Vec<f64> {
        let mut v = Vec::new();
        self.collect_breakpoints(Some(var), &mut v);
        finish_breakpoints(v, lo, hi)
    }

    /// All indicator endpoints in either variable, unfiltered.
    pub fn all_breakpoints(&self) -> Vec<f64> {
        self.breakpoints(f64::NEG_INFINITY, f64::INFINITY)
    }
}

fn finish_breakpoints(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
    v.extend([lo, hi].into_iter().filter(|x| x.is_finite()));
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn var_name(v: Var) -> &'static str {
    match v {
        Var::T => "t",
        Var::S => "s",
    }
}

fn fmt_num(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x == f64::INFINITY {
        write!(f, "inf")
    } else if x == f64::NEG_INFINITY {
        write!(f, "(-inf)")
    } else if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
        write!(f, "(-{:?})", -x)
    } else {
        write!(f, "{x:?}")
    }
}

/// Canonical printer; parsing the printed form of a parsed tree yields the
/// same tree.
impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuncExpr::Const(c) => fmt_num(f, *c),
            FuncExpr::Var(v) => write!(f, "{}", var_name(*v)),
            FuncExpr::Indicator { var, set } => {
                if set.is_empty() {
                    return write!(f, "0.0");
                }
                let ivs = set.intervals();
                if ivs.len() > 1 {
                    write!(f, "(")?;
                }
                for (k, iv) in ivs.iter().enumerate() {
                    if k > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "ind(")?;
                    fmt_num(f, iv.lo)?;
                    write!(f, ",")?;
                    fmt_num(f, iv.hi)?;
                    if *var == Var::S {
                        write!(f, ",s")?;
                    }
                    write!(f, ")")?;
                }
                if ivs.len() > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            FuncExpr::Sin(e) => write!(f, "sin({e})"),
            FuncExpr::Cos(e) => write!(f, "cos({e})"),
            FuncExpr::Exp(e) => write!(f, "exp({e})"),
            FuncExpr::Pow(e, n) => write!(f, "({e})^{n}"),
            FuncExpr::Add(a, b) => write!(f, "(({a})+({b}))"),
            FuncExpr::Sub(a, b) => write!(f, "(({a})-({b}))"),
            FuncExpr::Mul(a, b) => write!(f, "(({a})*({b}))"),
            FuncExpr::Scale(c, e) => {
                write!(f, "(")?;
                fmt_num(f, *c)?;
                write!(f, "*({e}))")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn evaluation() {
        let e = parse_expr("2/3.14159*(cos(t))").unwrap();
        assert!(matches!(e, FuncExpr::Scale(_, ref inner) if matches!(**inner, FuncExpr::Cos(_))));
        assert!((e.eval(0.0) - 2.0 / 3.14159).abs() < 1e-15);
        let k = parse_expr("t*s + ind(0,0.5,s)").unwrap();
        assert_eq!(k.eval2(2.0, 0.25), 1.5);
        assert_eq!(k.eval2(2.0, 0.75), 1.5);
        let ind = parse_expr("ind(0,1)").unwrap();
        assert_eq!(ind.eval(1.0), 1.0);
        assert_eq!(ind.eval(1.0 + 1e-12), 0.0);
    }

    #[test]
    fn breakpoints_are_sorted_and_filtered() {
        let e = parse_expr("ind(0.5,2)*sin(t) + ind(-1,0.25,s)").unwrap();
        assert_eq!(e.breakpoints(0.0, 1.0), vec![0.0, 0.25, 0.5, 1.0]);
        assert_eq!(e.breakpoints_of(Var::T, -5.0, 5.0), vec![-5.0, 0.5, 2.0, 5.0]);
        assert_eq!(e.breakpoints_of(Var::S, -5.0, 5.0), vec![-5.0, -1.0, 0.25, 5.0]);
        assert!(e.has_indicator());
        assert!(e.uses_var(Var::S));
    }

    #[test]
    fn indicator_times_overflow_is_zero() {
        let e = parse_expr("ind(0,1)*exp(t*t)").unwrap();
        assert_eq!(e.eval(100.0), 0.0);
    }
}

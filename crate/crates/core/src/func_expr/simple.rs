use super::{FuncExpr, Var};
use crate::domain_sets::OrderedPartition;
use crate::{Error, Result};

/// Step function taking the value `values[k]` on cell `k` of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction {
    partition: OrderedPartition,
    values: Vec<f64>,
}

impl SimpleFunction {
    pub fn new(partition: OrderedPartition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.cells().len() {
            return Err(Error::InvalidArgument(format!("{} values for {} cells", values.len(), partition.cells().len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("simple function values must be finite".into()));
        }
        Ok(SimpleFunction { partition, values })
    }

    pub fn partition(&self) -> &OrderedPartition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `t`; zero outside the base interval.
    pub fn eval(&self, t: f64) -> f64 {
        self.partition.locate(t).map_or(0.0, |k| self.values[k])
    }

    /// Equivalent expression in `var`: a sum of scaled indicators.
    pub fn to_expr(&self, var: Var) -> FuncExpr {
        let terms = self
            .partition
            .cells()
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| **v != 0.0)
            .map(|(cell, v)| FuncExpr::scale(*v, FuncExpr::indicator_set(var, cell.clone())))
            .collect();
        FuncExpr::sum(terms)
    }
}

//! Measurable subsets of the line represented as finite unions of closed
//! intervals, ordered partitions, and the almost-everywhere zero test.
//!
//! Sets are normalised on construction: intervals are sorted, overlapping or
//! touching intervals are merged and intervals of zero length are dropped.
//! All set algebra is therefore exact up to null sets.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A closed interval `[lo, hi]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidArgument(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

/// A finite union of disjoint closed intervals, sorted by left endpoint.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LebesgueSet {
    intervals: Vec<Interval>,
}

impl LebesgueSet {
    pub fn empty() -> Self {
        LebesgueSet { intervals: Vec::new() }
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self::from_intervals(vec![Interval::new(lo, hi)?]))
    }

    pub fn real_line() -> Self {
        Self::from_intervals(vec![Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }])
    }

    /// Builds a normalised set from arbitrary (possibly overlapping) intervals.
    pub fn from_intervals(mut ivs: Vec<Interval>) -> Self {
        ivs.retain(|iv| iv.hi > iv.lo);
        ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        LebesgueSet { intervals: out }
    }

    /// Builds a set from `[lo, hi]` pairs, validating each pair.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let ivs = pairs.iter().map(|&(a, b)| Interval::new(a, b)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(ivs))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn inf(&self) -> Option<f64> {
        self.intervals.first().map(|iv| iv.lo)
    }

    pub fn sup(&self) -> Option<f64> {
        self.intervals.last().map(|iv| iv.hi)
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<Interval> {
        Some(Interval { lo: self.inf()?, hi: self.sup()? })
    }

    /// All finite interval endpoints, sorted and deduplicated.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.intervals.iter().flat_map(|iv| [iv.lo, iv.hi]).filter(|x| x.is_finite()).collect();
        v.dedup();
        v
    }

    pub fn union(&self, other: &LebesgueSet) -> LebesgueSet {
        let mut ivs = self.intervals.clone();
        ivs.extend_from_slice(&other.intervals);
        Self::from_intervals(ivs)
    }

    pub fn intersect(&self, other: &LebesgueSet) -> LebesgueSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = self.intervals[i];
            let b = other.intervals[j];
            let lo = a.lo.max(b.lo);
            let hi = a.hi.min(b.hi);
            if hi > lo {
                out.push(Interval { lo, hi });
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    /// Closure of `self \ other`.
    pub fn difference(&self, other: &LebesgueSet) -> LebesgueSet {
        let mut out = Vec::new();
        for a in &self.intervals {
            let mut lo = a.lo;
            for b in &other.intervals {
                if b.hi <= lo {
                    continue;
                }
                if b.lo >= a.hi {
                    break;
                }
                if b.lo > lo {
                    out.push(Interval { lo, hi: b.lo });
                }
                lo = lo.max(b.hi);
                if lo >= a.hi {
                    break;
                }
            }
            if lo < a.hi {
                out.push(Interval { lo, hi: a.hi });
            }
        }
        Self::from_intervals(out)
    }

    /// Intersection with the window `[lo, hi]`.
    pub fn truncate(&self, lo: f64, hi: f64) -> LebesgueSet {
        self.intersect(&LebesgueSet::from_intervals(vec![Interval { lo, hi }]))
    }

    /// True when `self \ other` is a null set.
    pub fn is_subset_ae(&self, other: &LebesgueSet) -> bool {
        self.difference(other).is_empty()
    }
}

impl fmt::Display for LebesgueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " u ")?;
            }
            write!(f, "[{}, {}]", iv.lo, iv.hi)?;
        }
        Ok(())
    }
}

fn bound_to_json(x: f64) -> serde_json::Value {
    if x == f64::INFINITY {
        serde_json::Value::from("inf")
    } else if x == f64::NEG_INFINITY {
        serde_json::Value::from("-inf")
    } else {
        serde_json::Value::from(x)
    }
}

fn bound_from_json(v: &serde_json::Value) -> std::result::Result<f64, String> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| format!("bad number {n}")),
        serde_json::Value::String(s) => match s.as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(format!("expected number, \"inf\" or \"-inf\", found \"{other}\"")),
        },
        other => Err(format!("expected interval bound, found {other}")),
    }
}

impl Serialize for LebesgueSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.intervals.len()))?;
        for iv in &self.intervals {
            seq.serialize_element(&[bound_to_json(iv.lo), bound_to_json(iv.hi)])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LebesgueSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<serde_json::Value>> = Vec::deserialize(deserializer)?;
        let mut ivs = Vec::with_capacity(raw.len());
        for pair in raw {
            if pair.len() != 2 {
                return Err(de::Error::custom("each interval must be a [lo, hi] pair"));
            }
            let lo = bound_from_json(&pair[0]).map_err(de::Error::custom)?;
            let hi = bound_from_json(&pair[1]).map_err(de::Error::custom)?;
            ivs.push(Interval::new(lo, hi).map_err(de::Error::custom)?);
        }
        Ok(LebesgueSet::from_intervals(ivs))
    }
}

/// Maximum number of cells in an [`OrderedPartition`].
pub const MAX_CELLS: usize = 64;

/// Cells `M_1 < M_2 < ... < M_N` covering `[alpha, beta]` up to null sets.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedPartition {
    alpha: f64,
    beta: f64,
    cells: Vec<LebesgueSet>,
}

impl OrderedPartition {
    pub fn new(alpha: f64, beta: f64, cells: Vec<LebesgueSet>) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha < beta) {
            return Err(Error::InvalidPartition(format!("bad base interval [{alpha}, {beta}]")));
        }
        if cells.is_empty() || cells.len() > MAX_CELLS {
            return Err(Error::InvalidPartition(format!("partition needs between 1 and {MAX_CELLS} cells, got {}", cells.len())));
        }
        let base = LebesgueSet::interval(alpha, beta)?;
        let scale = beta - alpha;
        let mut union = LebesgueSet::empty();
        for (k, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::InvalidPartition(format!("cell {k} is empty")));
            }
            if !cell.is_subset_ae(&base) {
                return Err(Error::InvalidPartition(format!("cell {k} leaves [{alpha}, {beta}]")));
            }
            if union.intersect(cell).measure() > 1e-12 * scale {
                return Err(Error::InvalidPartition(format!("cell {k} overlaps an earlier cell")));
            }
            if k > 0 && cells[k - 1].sup().unwrap() > cell.inf().unwrap() + 1e-12 * scale {
                return Err(Error::InvalidPartition(format!("cells {} and {k} are not ordered", k - 1)));
            }
            union = union.union(cell);
        }
        if (union.measure() - scale).abs() > 1e-12 * scale {
            return Err(Error::InvalidPartition("cells do not cover the base interval".into()));
        }
        Ok(OrderedPartition { alpha, beta, cells })
    }

    /// Partition of `[alpha, beta]` into consecutive intervals split at `cuts`.
    pub fn from_cuts(alpha: f64, beta: f64, cuts: &[f64]) -> Result<Self> {
        let mut pts = vec![alpha];
        pts.extend_from_slice(cuts);
        pts.push(beta);
        let cells = pts.windows(2).map(|w| LebesgueSet::interval(w[0], w[1])).collect::<Result<Vec<_>>>()?;
        Self::new(alpha, beta, cells)
    }

    pub fn cells(&self) -> &[LebesgueSet] {
        &self.cells
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Index of the cell containing `x`; ties at shared endpoints go to the
    /// lower cell.
    pub fn locate(&self, x: f64) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(x))
    }
}

/// Thresholds of the almost-everywhere zero test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeTolerance {
    pub eps_value: f64,
    pub eps_rel: f64,
    pub eps_measure: f64,
}

impl AeTolerance {
    pub fn new(eps_value: f64, eps_rel: f64, eps_measure: f64) -> Result<Self> {
        for (name, v) in [("eps_value", eps_value), ("eps_rel", eps_rel), ("eps_measure", eps_measure)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerance(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(AeTolerance { eps_value, eps_rel, eps_measure })
    }

    /// Default thresholds for a base domain of the given measure.
    pub fn default_for(base_measure: f64) -> Self {
        let m = if base_measure.is_finite() && base_measure > 0.0 { base_measure } else { 1.0 };
        AeTolerance { eps_value: 1e-9, eps_rel: 1e-9, eps_measure: 1e-6 * m }
    }

    /// Same value thresholds with the measure threshold set for another base.
    pub fn rescaled_measure(&self, base_measure: f64) -> Self {
        let mut t = *self;
        t.eps_measure = AeTolerance::default_for(base_measure).eps_measure;
        t
    }
}

/// Outcome of [`ae_zero`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeVerdict {
    pub is_ae_zero: bool,
    pub violation_measure: f64,
    pub max_abs: f64,
}

/// Decides whether sampled values vanish almost everywhere.
///
/// A sample violates when `|v| > eps_value + eps_rel * max|v|`; the test
/// passes when the weighted measure of violating samples is at most
/// `eps_measure`. Non-finite samples always violate.
pub fn ae_zero(values: &[f64], weights: &[f64], tol: &AeTolerance) -> Result<AeVerdict> {
    if values.len() != weights.len() {
        return Err(Error::InvalidArgument(format!("{} values but {} weights", values.len(), weights.len())));
    }
    if values.is_empty() || weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::EmptyDomain);
    }
    let max_abs = values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = tol.eps_value + tol.eps_rel * max_abs;
    let violation_measure: f64 = values.iter().zip(weights).filter(|(v, _)| !v.is_finite() || v.abs() > threshold).map(|(_, w)| *w).sum();
    let max_abs = if values.iter().any(|v| !v.is_finite()) { f64::INFINITY } else { max_abs };
    Ok(AeVerdict { is_ae_zero: violation_measure <= tol.eps_measure, violation_measure, max_abs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(p: &[(f64, f64)]) -> LebesgueSet {
        LebesgueSet::from_pairs(p).unwrap()
    }

    #[test]
    fn intersection_and_difference() {
        assert!(set(&[(0.0, 1.0)]).intersect(&set(&[(2.0, 3.0)])).is_empty());
        let d = set(&[(0.0, 3.0)]).difference(&set(&[(1.0, 2.0)]));
        assert_eq!(d, set(&[(0.0, 1.0), (2.0, 3.0)]));
        assert_eq!(d.measure(), 2.0);
        let i = set(&[(0.0, 2.0), (3.0, 5.0)]).intersect(&set(&[(1.0, 4.0)]));
        assert_eq!(i, set(&[(1.0, 2.0), (3.0, 4.0)]));
    }

    #[test]
    fn touching_intervals_merge_and_points_vanish() {
        let s = set(&[(1.0, 2.0), (0.0, 1.0), (5.0, 5.0)]);
        assert_eq!(s.intervals().len(), 1);
        assert_eq!(s.measure(), 2.0);
        assert!(set(&[(0.0, 0.5)]).intersect(&set(&[(0.5, 1.0)])).is_empty());
    }

    #[test]
    fn unbounded_sets() {
        let r = LebesgueSet::real_line();
        assert!(!r.is_bounded());
        assert_eq!(r.measure(), f64::INFINITY);
        assert_eq!(r.truncate(-2.0, 3.0).measure(), 5.0);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"[["-inf","inf"]]"#);
        let back: LebesgueSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let parsed: LebesgueSet = serde_json::from_str("[[0,1],[2,3]]").unwrap();
        assert_eq!(parsed.measure(), 2.0);
        assert!(serde_json::from_str::<LebesgueSet>("[[2,1]]").is_err());
        assert!(serde_json::from_str::<LebesgueSet>(r#"[["x",1]]"#).is_err());
    }

    #[test]
    fn partition_validation() {
        let p = OrderedPartition::from_cuts(0.0, 1.0, &[0.25, 0.5]).unwrap();
        assert_eq!(p.cells().len(), 3);
        assert_eq!(p.locate(0.3), Some(1));
        let overlapping = vec![set(&[(0.0, 0.6)]), set(&[(0.5, 1.0)])];
        assert!(OrderedPartition::new(0.0, 1.0, overlapping).is_err());
        let unordered = vec![set(&[(0.5, 1.0)]), set(&[(0.0, 0.5)])];
        assert!(OrderedPartition::new(0.0, 1.0, unordered).is_err());
        let gap = vec![set(&[(0.0, 0.4)]), set(&[(0.5, 1.0)])];
        assert!(OrderedPartition::new(0.0, 1.0, gap).is_err());
        let too_many: Vec<f64> = (1..65).map(|k| k as f64 / 65.0).collect();
        assert!(OrderedPartition::from_cuts(0.0, 1.0, &too_many).is_err());
    }

    #[test]
    fn ae_zero_examples() {
        let tol = AeTolerance::default_for(1.0);
        let w = vec![0.25; 4];
        assert!(ae_zero(&[0.0, 1e-12, -1e-13, 0.0], &w, &tol).unwrap().is_ae_zero);
        let v = ae_zero(&[0.0, 1.0, 0.0, 0.0], &w, &tol).unwrap();
        assert!(!v.is_ae_zero);
        assert_eq!(v.violation_measure, 0.25);
        // a spike carrying negligible weight is a null set
        assert!(ae_zero(&[0.0, 5.0], &[1.0, 1e-9], &tol).unwrap().is_ae_zero);
        assert!(matches!(ae_zero(&[], &[], &tol), Err(Error::EmptyDomain)));
        assert!(!ae_zero(&[f64::NAN, 0.0], &[0.5, 0.5], &tol).unwrap().is_ae_zero);
        assert!(AeTolerance::new(0.0, 1e-9, 1e-6).is_err());
    }
}

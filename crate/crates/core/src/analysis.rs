//! Verdicts over density traces.
//!
//! Limits are replaced by tail windows: the min and max density over the
//! last fraction of checkpoints.

use crate::engine::{burn_cap, DensityTrace, TraceEntry};
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default tail window: the last quarter of the checkpoints.
pub fn default_window() -> Rational {
    Rational::new(1, 4)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("window fraction must lie in (0, 1], got {0}")]
    BadWindow(Rational),
    #[error("alpha = {alpha}, c = {c}: the fire outgrows the grid, so every sequence has density 1")]
    TriviallyFull { c: Rational, alpha: Rational },
    #[error("c and alpha must be positive")]
    NonPositive,
    #[error("check {check} needs exact counts, but the entry at t = {t} is sampled")]
    NotExact { check: &'static str, t: u64 },
}

/// Achievable densities for `f(n) = ceil(c n^alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointTable {
    pub c: Rational,
    pub alpha: Rational,
    pub lo: f64,
    pub hi: f64,
}

impl EndpointTable {
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

impl fmt::Display for EndpointTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{{{}}}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// `(1 + sqrt(6) c)^-2`.
pub fn cubic_density(c: Rational) -> f64 {
    let x = 1.0 + 6f64.sqrt() * c.to_f64();
    1.0 / (x * x)
}

pub fn theoretical_endpoints(c: Rational, alpha: Rational) -> Result<EndpointTable, AnalysisError> {
    if c.is_zero() || alpha.is_zero() {
        return Err(AnalysisError::NonPositive);
    }
    let one = Rational::ONE;
    let three_halves = Rational::new(3, 2);
    let (lo, hi) = if alpha < one || (alpha == one && c < one) {
        return Err(AnalysisError::TriviallyFull { c, alpha });
    } else if alpha == one {
        let cf = c.to_f64();
        (1.0 / (2.0 * cf * cf), 1.0)
    } else if alpha < three_halves {
        (0.0, 1.0)
    } else if alpha == three_halves {
        (0.0, cubic_density(c))
    } else {
        (0.0, 0.0)
    };
    Ok(EndpointTable { c, alpha, lo, hi })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Value { value: f64 },
    Interval { lo: f64, hi: f64 },
    /// Pointwise upper bound `bound + slack_coeff / sqrt(t)`.
    DecayingBound { bound: f64, slack_coeff: f64 },
    /// Pointwise `burned(t) <= (2t³ + t) / 3`.
    BurnCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityVerdict {
    pub check: String,
    pub tail_min: f64,
    pub tail_max: f64,
    /// First and last checkpoint of the tail window.
    pub tail_window: (u64, u64),
    pub target: Option<Target>,
    pub slack: f64,
    pub pass: bool,
    /// Check-specific figure, e.g. the largest slack actually used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn window(trace: &DensityTrace, fraction: Rational) -> Result<&[TraceEntry], AnalysisError> {
    if fraction.is_zero() || fraction > Rational::ONE {
        return Err(AnalysisError::BadWindow(fraction));
    }
    let es = trace.entries();
    if es.is_empty() {
        return Err(AnalysisError::EmptyTrace);
    }
    let n = es.len() as u128;
    let take = (n * fraction.numer() as u128).div_ceil(fraction.denom() as u128).max(1) as usize;
    Ok(&es[es.len() - take..])
}

/// Tail min and max density; always passes.
pub fn tail_density(trace: &DensityTrace, fraction: Rational) -> Result<DensityVerdict, AnalysisError> {
    let tail = window(trace, fraction)?;
    let (lo, hi) = tail
        .iter()
        .map(TraceEntry::density)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)));
    Ok(DensityVerdict {
        check: "tail_density".into(),
        tail_min: lo,
        tail_max: hi,
        tail_window: (tail[0].t, tail[tail.len() - 1].t),
        target: None,
        slack: 0.0,
        pass: true,
        detail: None,
    })
}

/// Passes iff the tail lies within `target ± slack`.
pub fn tail_vs_endpoint(
    trace: &DensityTrace,
    target: f64,
    slack: f64,
    fraction: Rational,
) -> Result<DensityVerdict, AnalysisError> {
    let mut v = tail_density(trace, fraction)?;
    v.check = "tail_vs_endpoint".into();
    v.target = Some(Target::Value { value: target });
    v.slack = slack;
    v.pass = v.tail_min >= target - slack && v.tail_max <= target + slack;
    Ok(v)
}

/// Passes iff the tail lies within `[lo, hi]`.
pub fn tail_in_band(trace: &DensityTrace, lo: f64, hi: f64, fraction: Rational) -> Result<DensityVerdict, AnalysisError> {
    let mut v = tail_density(trace, fraction)?;
    v.check = "tail_in_band".into();
    v.target = Some(Target::Interval { lo, hi });
    v.pass = v.tail_min >= lo && v.tail_max <= hi;
    Ok(v)
}

/// Passes iff `density(t) <= (1 + sqrt(6) c)^-2 + slack_coeff / sqrt(t)` at
/// every checkpoint. The detail reports the largest `(density - bound) sqrt(t)`.
pub fn cubic_upper_bound_check(
    trace: &DensityTrace,
    c: Rational,
    slack_coeff: f64,
) -> Result<DensityVerdict, AnalysisError> {
    let mut v = tail_density(trace, default_window())?;
    let bound = cubic_density(c);
    let used = trace
        .entries()
        .iter()
        .map(|e| (e.density() - bound) * (e.t as f64).sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    v.check = "cubic_upper_bound".into();
    v.target = Some(Target::DecayingBound { bound, slack_coeff });
    v.slack = slack_coeff;
    v.pass = used <= slack_coeff;
    v.detail = Some(format!("max (density - bound) * sqrt(t) = {used:.6}"));
    Ok(v)
}

/// Passes iff `burned(t) <= (2t³ + t) / 3` at every checkpoint.
pub fn burn_cap_check(trace: &DensityTrace) -> Result<DensityVerdict, AnalysisError> {
    let mut v = tail_density(trace, default_window())?;
    let mut worst: Option<u64> = None;
    for e in trace.entries() {
        let b = e.burned.exact().ok_or(AnalysisError::NotExact { check: "burn_cap", t: e.t })?;
        if b as u128 > burn_cap(e.t) && worst.is_none() {
            worst = Some(e.t);
        }
    }
    v.check = "burn_cap".into();
    v.target = Some(Target::BurnCap);
    v.pass = worst.is_none();
    v.detail = worst.map(|t| format!("cap exceeded at t = {t}"));
    Ok(v)
}

/// A set of verdicts with an overall outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub pass: bool,
    pub verdicts: Vec<DensityVerdict>,
}

impl VerdictReport {
    pub fn new(verdicts: Vec<DensityVerdict>) -> Self {
        VerdictReport {
            pass: verdicts.iter().all(|v| v.pass),
            verdicts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Burned, TraceMetadata};

    fn trace(ds: &[f64]) -> DensityTrace {
        let es = ds
            .iter()
            .enumerate()
            .map(|(k, &d)| TraceEntry {
                t: k as u64 + 1,
                burned: Burned::Sampled { estimate: d * 1000.0, ci_halfwidth: 0.0 },
                total: 1000,
            })
            .collect();
        DensityTrace::from_entries(TraceMetadata::default(), es)
    }

    #[test]
    fn endpoints() {
        let t = theoretical_endpoints(Rational::integer(2), Rational::ONE).unwrap();
        assert_eq!((t.lo, t.hi), (0.125, 1.0));
        let t = theoretical_endpoints(Rational::ONE, Rational::new(5, 4)).unwrap();
        assert_eq!((t.lo, t.hi), (0.0, 1.0));
        let t = theoretical_endpoints(Rational::ONE, Rational::new(3, 2)).unwrap();
        assert!((t.hi - 1.0 / (7.0 + 2.0 * 6f64.sqrt())).abs() < 1e-12);
        assert!((t.hi - 0.0840).abs() < 1e-4);
        let t = theoretical_endpoints(Rational::ONE, Rational::integer(2)).unwrap();
        assert!(t.is_point() && t.hi == 0.0);
        assert!(matches!(
            theoretical_endpoints(Rational::new(1, 2), Rational::ONE),
            Err(AnalysisError::TriviallyFull { .. })
        ));
    }

    #[test]
    fn tail_windows() {
        let v = tail_density(&trace(&[0.5; 8]), Rational::new(1, 4)).unwrap();
        assert_eq!((v.tail_min, v.tail_max), (0.5, 0.5));
        let v = tail_density(&trace(&[0.1, 0.2, 0.3, 0.4]), Rational::new(1, 2)).unwrap();
        assert!((v.tail_min - 0.3).abs() < 1e-12 && (v.tail_max - 0.4).abs() < 1e-12);
        assert_eq!(v.tail_window, (3, 4));
        assert!(tail_density(&DensityTrace::default(), Rational::ONE).is_err());
        assert!(tail_density(&trace(&[0.1]), Rational::ZERO).is_err());
    }

    #[test]
    fn cubic_bound() {
        let mut tr = DensityTrace::default();
        tr.push(1_000_000, Burned::Sampled { estimate: 500.0, ci_halfwidth: 1.0 }, 1000);
        assert!(!cubic_upper_bound_check(&tr, Rational::ONE, 1.0).unwrap().pass);
        assert!(cubic_upper_bound_check(&trace(&[0.0; 5]), Rational::ONE, 0.0).unwrap().pass);
    }

    #[test]
    fn burn_cap_needs_exact_counts() {
        assert!(matches!(burn_cap_check(&trace(&[0.1])), Err(AnalysisError::NotExact { .. })));
        let mut tr = DensityTrace::default();
        tr.push(1, Burned::Exact(1), 9);
        tr.push(2, Burned::Exact(6), 25);
        assert!(burn_cap_check(&tr).unwrap().pass);
        tr.push(3, Burned::Exact(20), 49);
        assert!(!burn_cap_check(&tr).unwrap().pass);
    }
}

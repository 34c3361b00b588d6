//! Turn-by-turn execution of the burning process.
//!
//! Each turn `t` the box grows to radius `f(t)`, fire spreads to L1
//! neighbours inside the new box, and then the turn's action is applied.
//! A freshly activated vertex does not spread until the following turn.

mod geometric;
pub mod oracle;
mod trace;

pub use geometric::{burned_count_geometric, GeometricProcess};
pub use oracle::{BitGrid, OracleProcess, Provenance, Rect};
pub use trace::{Burned, DensityTrace, TraceEntry, TraceError, TraceMetadata, TRACE_HEADER};

use crate::geometry::{CountMode, GridBox, LatticePoint, UnionCount};
use crate::growth::{GrowthError, GrowthFunction};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default upper bound on `(2 f(horizon) + 1)^2` for the oracle backend.
pub const DEFAULT_CELL_BUDGET: u64 = 400_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Burn(LatticePoint),
    Pass,
}

impl Action {
    pub fn point(&self) -> Option<LatticePoint> {
        match *self {
            Action::Burn(point) => Some(point),
            Action::Pass => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Burn(point) => write!(f, "Burn{point}"),
            Action::Pass => f.write_str("Pass"),
        }
    }
}

/// A Burn issued on a given turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationRecord {
    pub turn: u64,
    pub point: LatticePoint,
}

/// Anything that can say what to do on turn `t`.
pub trait ActionSource: Sync {
    fn action(&self, t: u64) -> Action;

    fn describe(&self) -> String {
        String::from("custom")
    }
}

impl<F: Fn(u64) -> Action + Sync> ActionSource for F {
    fn action(&self, t: u64) -> Action {
        self(t)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("turn {turn}: activation {point} lies outside the box [-{radius}, {radius}]^2")]
    OutOfBox { turn: u64, point: LatticePoint, radius: u64 },
    #[error("turn {turn}: activation {point} lies outside the region")]
    OutOfRegion { turn: u64, point: LatticePoint },
    #[error("turn {turn}: region exceeds the allocated frame")]
    FrameExceeded { turn: u64 },
    #[error("turn {turn}: region must contain the previous region")]
    RegionShrank { turn: u64 },
    #[error("the geometric backend needs a strictly increasing growth function, got {0}")]
    NotStrictlyIncreasing(String),
    #[error("oracle grid needs {cells} cells, above the budget of {budget}")]
    CellBudget { cells: u64, budget: u64 },
    #[error("growth function must be defined from n = 1 (domain starts at {0})")]
    DomainStart(u64),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("checkpoints must be strictly increasing and within [1, {horizon}]; offending value {t}")]
    BadCheckpoint { t: u64, horizon: u64 },
    #[error("activation record at turn {turn} is after the evaluation turn {t}")]
    FutureRecord { turn: u64, t: u64 },
    #[error("turn {turn}: a ball is clipped by the box, so the ball representation is not certified")]
    Uncertified { turn: u64 },
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

/// Which representation of the burned set to maintain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Explicit cell set. Works for any growth function.
    Oracle,
    /// Ball union over the activation records; needs a strictly increasing `f`.
    #[default]
    Geometric,
    /// Ball union for any `f`, provided a run-time check proves that no ball
    /// is ever clipped by the box, which makes each `B_t[i]` a plain ball.
    CertifiedGeometric,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Oracle => "oracle",
            Backend::Geometric => "geometric",
            Backend::CertifiedGeometric => "certified_geometric",
        })
    }
}

/// How out-of-box activations are handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    #[default]
    Strict,
    /// Clamp to the nearest box point and log the L-infinity distance.
    Lenient,
}

/// Applies the placement policy to a Burn at turn `t` on the box of radius `radius`.
pub fn place(placement: Placement, t: u64, radius: u64, action: Action) -> Result<Action, EngineError> {
    let Action::Burn(point) = action else {
        return Ok(Action::Pass);
    };
    let b = GridBox::new(radius);
    if b.contains(point) {
        return Ok(action);
    }
    match placement {
        Placement::Strict => Err(EngineError::OutOfBox { turn: t, point, radius }),
        Placement::Lenient => {
            let (q, moved) = b.clamp(point);
            log::debug!("turn {t}: clamped {point} to {q} (L-inf distance {moved})");
            Ok(Action::Burn(q))
        }
    }
}

/// Configuration of a single run.
#[derive(Clone, Debug)]
pub struct Run<'a> {
    f: &'a GrowthFunction,
    source: &'a dyn ActionSource,
    horizon: u64,
    checkpoints: Option<Vec<u64>>,
    backend: Backend,
    count_mode: CountMode,
    exact_through: u64,
    placement: Placement,
    cell_budget: u64,
    strategy_label: Option<String>,
}

impl fmt::Debug for dyn ActionSource + '_ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl<'a> Run<'a> {
    pub fn new(f: &'a GrowthFunction, source: &'a dyn ActionSource, horizon: u64) -> Self {
        Run {
            f,
            source,
            horizon,
            checkpoints: None,
            backend: Backend::default(),
            count_mode: CountMode::Exact,
            exact_through: 0,
            placement: Placement::default(),
            cell_budget: DEFAULT_CELL_BUDGET,
            strategy_label: None,
        }
    }

    /// Turns at which to record the burned count. Defaults to every turn.
    pub fn checkpoints(mut self, ts: Vec<u64>) -> Self {
        self.checkpoints = Some(ts);
        self
    }

    pub fn backend(mut self, b: Backend) -> Self {
        self.backend = b;
        self
    }

    /// Counting mode for geometric checkpoints after `exact_through`.
    pub fn count_mode(mut self, mode: CountMode) -> Self {
        self.count_mode = mode;
        self
    }

    /// Checkpoints up to and including this turn are always counted exactly.
    pub fn exact_through(mut self, t: u64) -> Self {
        self.exact_through = t;
        self
    }

    pub fn placement(mut self, p: Placement) -> Self {
        self.placement = p;
        self
    }

    pub fn cell_budget(mut self, cells: u64) -> Self {
        self.cell_budget = cells;
        self
    }

    pub fn strategy_label(mut self, label: impl Into<String>) -> Self {
        self.strategy_label = Some(label.into());
        self
    }

    fn validate(&self) -> Result<Vec<u64>, EngineError> {
        if self.horizon == 0 {
            return Err(EngineError::ZeroHorizon);
        }
        if self.f.domain_start() > 1 {
            return Err(EngineError::DomainStart(self.f.domain_start()));
        }
        if self.backend == Backend::Geometric && !self.f.is_strictly_increasing() {
            return Err(EngineError::NotStrictlyIncreasing(self.f.describe()));
        }
        let cps = self.checkpoints.clone().unwrap_or_else(|| (1..=self.horizon).collect());
        let mut prev = 0;
        for &t in &cps {
            if t <= prev || t > self.horizon {
                return Err(EngineError::BadCheckpoint { t, horizon: self.horizon });
            }
            prev = t;
        }
        Ok(cps)
    }

    fn mode_at(&self, t: u64) -> CountMode {
        match self.count_mode {
            CountMode::Exact => CountMode::Exact,
            _ if t <= self.exact_through => CountMode::Exact,
            CountMode::Sampled { rows, seed } => CountMode::Sampled {
                rows,
                seed: seed ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            },
        }
    }

    /// Executes the run and returns the density trace at the checkpoints.
    pub fn execute(&self) -> Result<DensityTrace, EngineError> {
        let cps = self.validate()?;
        let ftab = self.f.table(self.horizon)?;
        let seed = match self.count_mode {
            CountMode::Sampled { seed, .. } if self.backend != Backend::Oracle => Some(seed),
            _ => None,
        };
        let mut trace = DensityTrace::new(TraceMetadata {
            growth: self.f.describe(),
            strategy: self.strategy_label.clone().unwrap_or_else(|| self.source.describe()),
            backend: self.backend.to_string(),
            seed,
        });
        let mut next_cp = cps.iter().copied().peekable();
        match self.backend {
            Backend::Oracle => {
                let radius = ftab[self.horizon as usize];
                let side = 2 * radius + 1;
                let cells = side.saturating_mul(side);
                if cells > self.cell_budget {
                    return Err(EngineError::CellBudget { cells, budget: self.cell_budget });
                }
                let mut proc = OracleProcess::for_box(radius);
                for t in 1..=self.horizon {
                    let r = ftab[t as usize];
                    let a = place(self.placement, t, r, self.source.action(t))?;
                    proc.step_box(r, a)?;
                    if next_cp.next_if_eq(&t).is_some() {
                        trace.push(t, Burned::Exact(proc.burned_count()), GridBox::new(r).cardinality());
                    }
                }
            }
            Backend::Geometric | Backend::CertifiedGeometric => {
                let certify = self.backend == Backend::CertifiedGeometric;
                let mut proc = GeometricProcess::new();
                // max over records of (|v|_inf - i); every ball stays inside
                // the box at turn s iff this is at most f(s) - s.
                let mut reach = i64::MIN;
                for t in 1..=self.horizon {
                    let r = ftab[t as usize];
                    let a = place(self.placement, t, r, self.source.action(t))?;
                    if let Action::Burn(point) = a {
                        reach = reach.max(point.linf_norm() as i64 - t as i64);
                    }
                    proc.step(t, a);
                    if certify && reach > r as i64 - t as i64 {
                        return Err(EngineError::Uncertified { turn: t });
                    }
                    if next_cp.next_if_eq(&t).is_some() {
                        let count = proc.count(t, r, self.mode_at(t));
                        trace.push(t, Burned::from(count), GridBox::new(r).cardinality());
                    }
                }
            }
        }
        Ok(trace)
    }
}

/// Runs both backends and lists the checkpoints where they disagree.
pub fn compare_backends(run: &Run<'_>) -> Result<(DensityTrace, DensityTrace, Vec<u64>), EngineError> {
    let oracle = run.clone().backend(Backend::Oracle).execute()?;
    let geometric = run.clone().backend(Backend::Geometric).count_mode(CountMode::Exact).execute()?;
    let mismatches = oracle
        .entries()
        .iter()
        .zip(geometric.entries())
        .filter(|(a, b)| a.burned != b.burned)
        .map(|(a, _)| a.t)
        .collect();
    Ok((oracle, geometric, mismatches))
}

impl From<UnionCount> for Burned {
    fn from(c: UnionCount) -> Self {
        match c {
            UnionCount::Exact(n) => Burned::Exact(n),
            UnionCount::Sampled { estimate, ci_halfwidth, .. } => Burned::Sampled { estimate, ci_halfwidth },
        }
    }
}

/// Turns `start, start·ratio, start·ratio², ...` rounded up and deduplicated,
/// always ending with `horizon`.
pub fn geometric_checkpoints(start: u64, ratio: f64, horizon: u64) -> Vec<u64> {
    assert!(ratio > 1.0 && start >= 1, "need start >= 1 and ratio > 1");
    let mut out = Vec::new();
    let mut x = start as f64;
    while x.ceil() < horizon as f64 {
        let t = x.ceil() as u64;
        if out.last() != Some(&t) {
            out.push(t);
        }
        x *= ratio;
    }
    out.push(horizon);
    out
}

/// `(2t^3 + t) / 3`, the largest possible number of burned vertices after `t` turns.
pub fn burn_cap(t: u64) -> u128 {
    let t = t as u128;
    (2 * t * t * t + t) / 3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_checkpoint_spacing() {
        assert_eq!(geometric_checkpoints(8, 1.25, 20), vec![8, 10, 13, 16, 20]);
        assert_eq!(geometric_checkpoints(8, 1.25, 5), vec![5]);
        let cps = geometric_checkpoints(8, 1.25, 100_000);
        assert!((40..=45).contains(&cps.len()), "{}", cps.len());
        assert!(cps.windows(2).all(|w| w[0] < w[1]));
    }

    fn origin(_: u64) -> Action {
        Action::Burn(LatticePoint::ORIGIN)
    }

    fn pass(_: u64) -> Action {
        Action::Pass
    }

    fn counts(trace: &DensityTrace) -> Vec<u64> {
        trace.entries().iter().map(|e| e.burned.exact().unwrap()).collect()
    }

    #[test]
    fn single_burn_then_passes() {
        let f = GrowthFunction::identity();
        let src = |t: u64| if t == 1 { Action::Burn(LatticePoint::ORIGIN) } else { Action::Pass };
        for backend in [Backend::Oracle, Backend::Geometric] {
            let tr = Run::new(&f, &src, 4).backend(backend).execute().unwrap();
            assert_eq!(counts(&tr), vec![1, 5, 13, 25]);
        }
    }

    #[test]
    fn all_pass_burns_nothing() {
        let f = GrowthFunction::identity();
        for backend in [Backend::Oracle, Backend::Geometric] {
            let tr = Run::new(&f, &pass, 10).backend(backend).execute().unwrap();
            assert!(counts(&tr).iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn constant_origin_backends_agree() {
        let f = GrowthFunction::identity();
        let run = Run::new(&f, &origin, 30);
        let (_, _, bad) = compare_backends(&run).unwrap();
        assert!(bad.is_empty());
    }

    #[test]
    fn pathological_rejected_by_geometric() {
        let f = GrowthFunction::pathological();
        let err = Run::new(&f, &origin, 10).execute().unwrap_err();
        assert!(matches!(err, EngineError::NotStrictlyIncreasing(_)));
    }

    #[test]
    fn walking_burns_respect_cap() {
        let f = GrowthFunction::identity();
        let src = |t: u64| Action::Burn(LatticePoint::new(t as i64, 0));
        let tr = Run::new(&f, &src, 20).backend(Backend::Oracle).execute().unwrap();
        for e in tr.entries() {
            assert!(e.burned.exact().unwrap() as u128 <= burn_cap(e.t));
        }
        assert_eq!(burn_cap(20), 5340);
    }

    #[test]
    fn strict_mode_rejects_and_lenient_clamps() {
        let f = GrowthFunction::identity();
        let src = |_: u64| Action::Burn(LatticePoint::new(5, -9));
        let err = Run::new(&f, &src, 3).execute().unwrap_err();
        assert!(matches!(err, EngineError::OutOfBox { turn: 1, radius: 1, .. }));
        let a = place(Placement::Lenient, 1, 1, src(1)).unwrap();
        assert_eq!(a, Action::Burn(LatticePoint::new(1, -1)));
        let lenient = Run::new(&f, &src, 6).placement(Placement::Lenient);
        let (_, _, bad) = compare_backends(&lenient).unwrap();
        assert!(bad.is_empty());
    }

    #[test]
    fn certified_backend_matches_oracle_on_pathological() {
        let f = GrowthFunction::pathological();
        let tr = Run::new(&f, &origin, 64).backend(Backend::CertifiedGeometric).execute().unwrap();
        let or = Run::new(&f, &origin, 64).backend(Backend::Oracle).execute().unwrap();
        assert_eq!(counts(&tr), counts(&or));
    }

    #[test]
    fn certified_backend_refuses_clipped_balls() {
        let f = GrowthFunction::tabulated(1, vec![1, 1, 3, 4]).unwrap();
        let src = |t: u64| if t == 1 { Action::Burn(LatticePoint::new(1, 1)) } else { Action::Pass };
        let err = Run::new(&f, &src, 4).backend(Backend::CertifiedGeometric).execute().unwrap_err();
        assert_eq!(err, EngineError::Uncertified { turn: 2 });
    }

    #[test]
    fn oracle_cell_budget() {
        let f = GrowthFunction::identity();
        let err = Run::new(&f, &origin, 100).backend(Backend::Oracle).cell_budget(1000).execute().unwrap_err();
        assert!(matches!(err, EngineError::CellBudget { cells: 40401, .. }));
    }

    #[test]
    fn checkpoints_validated() {
        let f = GrowthFunction::identity();
        for bad in [vec![0], vec![3, 3], vec![5, 11]] {
            assert!(Run::new(&f, &origin, 10).checkpoints(bad).execute().is_err());
        }
    }

    #[test]
    fn sampled_after_exact_prefix() {
        let f = GrowthFunction::identity();
        let tr = Run::new(&f, &origin, 400)
            .checkpoints(vec![100, 400])
            .count_mode(CountMode::Sampled { rows: 50, seed: 9 })
            .exact_through(100)
            .execute()
            .unwrap();
        assert!(matches!(tr.entries()[0].burned, Burned::Exact(_)));
        assert!(matches!(tr.entries()[1].burned, Burned::Sampled { .. }));
        assert_eq!(tr.metadata().seed, Some(9));
    }
}

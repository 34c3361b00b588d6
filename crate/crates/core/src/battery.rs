//! Cross-check battery: every growth function × strategy pair is run on
//! both backends and compared turn by turn.

use crate::analysis::burn_cap_check;
use crate::engine::{compare_backends, EngineError, Placement, Run};
use crate::geometry::LatticePoint;
use crate::growth::GrowthFunction;
use crate::rational::Rational;
use crate::strategies::{StrategyError, StrategySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Shortest horizon at which every battery strategy burns something; the
/// phase strategy starts at turn 16.
pub const MIN_BATTERY_HORIZON: u64 = 24;

/// `n`, `ceil(3/2 n)` and `repaired(ceil(n^(4/3)))`.
pub fn growth_battery() -> Vec<GrowthFunction> {
    vec![
        GrowthFunction::identity(),
        GrowthFunction::linear(Rational::new(3, 2)),
        GrowthFunction::power_ceil(Rational::ONE, Rational::new(4, 3)).repaired(),
    ]
}

/// Random offsets of L1 norm at most `d` for turns `1..=turns`.
pub fn random_offsets(d: u64, turns: u64, seed: u64) -> BTreeMap<u64, LatticePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = d as i64;
    (1..=turns)
        .map(|t| {
            let dx = rng.random_range(-d..=d);
            let rest = d - dx.abs();
            let dy = rng.random_range(-rest..=rest);
            (t, LatticePoint::new(dx, dy))
        })
        .collect()
}

pub fn strategy_battery(horizon: u64) -> Vec<StrategySpec> {
    let co = StrategySpec::constant_origin;
    let phase = || StrategySpec::phase(Rational::ONE);
    vec![
        co(),
        StrategySpec::single_origin(),
        StrategySpec::full_burn(),
        phase(),
        co().delay(3),
        co().trim(5),
        co().perturb(2, random_offsets(2, horizon, 7)),
        StrategySpec::full_burn().delay(4),
        StrategySpec::full_burn().trim(6),
        StrategySpec::full_burn().perturb(1, random_offsets(1, horizon, 11)),
        phase().delay(2),
        phase().trim(20),
        phase().perturb(3, random_offsets(3, horizon, 13)),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseOutcome {
    pub growth: String,
    pub strategy: String,
    pub horizon: u64,
    /// Turns at which the backends disagree.
    pub mismatches: Vec<u64>,
    pub burn_cap_ok: bool,
    pub error: Option<String>,
}

impl CaseOutcome {
    pub fn pass(&self) -> bool {
        self.error.is_none() && self.mismatches.is_empty() && self.burn_cap_ok
    }
}

#[derive(Debug, thiserror::Error)]
enum CaseError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

fn run_case(f: &GrowthFunction, spec: &StrategySpec, horizon: u64) -> CaseOutcome {
    let result = (|| -> Result<(Vec<u64>, bool), CaseError> {
        let schedule = spec.compile(f, horizon)?;
        // the phase strategy is built for a faster-growing grid; early points are clamped
        let run = Run::new(f, &schedule, horizon).placement(Placement::Lenient);
        let (oracle, _, mismatches) = compare_backends(&run)?;
        let cap = burn_cap_check(&oracle).map(|v| v.pass).unwrap_or(false);
        Ok((mismatches, cap))
    })();
    let (mismatches, burn_cap_ok, error) = match result {
        Ok((m, c)) => (m, c, None),
        Err(e) => (Vec::new(), false, Some(e.to_string())),
    };
    CaseOutcome {
        growth: f.describe(),
        strategy: spec.describe(),
        horizon,
        mismatches,
        burn_cap_ok,
        error,
    }
}

/// Runs the whole battery at every turn up to `horizon`, in parallel.
pub fn run_equivalence_battery(horizon: u64) -> Vec<CaseOutcome> {
    let cases: Vec<(GrowthFunction, StrategySpec)> = growth_battery()
        .into_iter()
        .flat_map(|f| strategy_battery(horizon).into_iter().map(move |s| (f.clone(), s)))
        .collect();
    cases.par_iter().map(|(f, s)| run_case(f, s, horizon)).collect()
}

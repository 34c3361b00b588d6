//! Ball-union representation of the burned set.
//!
//! When `f` is strictly increasing, the vertices burned by the activation of
//! turn `i` form the L1 ball of radius `t - i` around it, intersected with the
//! current box, so `|B_t|` is a clipped union count.

use super::{Action, ActivationRecord, EngineError};
use crate::geometry::{union_card, CountMode, Diamond, GridBox, UnionCount};
use crate::growth::GrowthFunction;

/// Process state that only remembers its Burn records.
#[derive(Clone, Debug, Default)]
pub struct GeometricProcess {
    turn: u64,
    records: Vec<ActivationRecord>,
}

impl GeometricProcess {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn turn(&self) -> u64 {
        self.turn
    }

    pub fn records(&self) -> &[ActivationRecord] {
        &self.records
    }

    /// Records turn `t`. The caller is responsible for box membership.
    pub fn step(&mut self, t: u64, action: Action) {
        assert_eq!(t, self.turn + 1, "turns must be consecutive");
        if let Action::Burn(point) = action {
            self.records.push(ActivationRecord { turn: t, point });
        }
        self.turn = t;
    }

    pub fn diamonds(&self, t: u64) -> Vec<Diamond> {
        diamonds_at(&self.records, t)
    }

    /// `|B_t|` on the box of radius `radius`.
    pub fn count(&self, t: u64, radius: u64, mode: CountMode) -> UnionCount {
        union_card(&self.diamonds(t), GridBox::new(radius), mode)
    }
}

fn diamonds_at(records: &[ActivationRecord], t: u64) -> Vec<Diamond> {
    records
        .iter()
        .filter(|r| r.turn <= t)
        .map(|r| Diamond::new(r.point, t - r.turn))
        .collect()
}

/// `|B_t|` from Burn records, for strictly increasing `f`.
pub fn burned_count_geometric(
    records: &[ActivationRecord],
    t: u64,
    f: &GrowthFunction,
    mode: CountMode,
) -> Result<UnionCount, EngineError> {
    if !f.is_strictly_increasing() {
        return Err(EngineError::NotStrictlyIncreasing(f.describe()));
    }
    if let Some(r) = records.iter().find(|r| r.turn > t) {
        return Err(EngineError::FutureRecord { turn: r.turn, t });
    }
    let radius = f.eval(t)?;
    Ok(union_card(&diamonds_at(records, t), GridBox::new(radius), mode))
}

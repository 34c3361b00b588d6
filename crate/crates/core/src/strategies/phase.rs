//! Phase strategy for `f(n) = ceil(c n^(3/2))`.
//!
//! With `t_i = i⁴`, phase `i` runs over turns `t_{i+1} .. t_{i+2} - 1` and
//! tiles the four rectangles of the annulus `G_{t_{i+1}-1} \ G_{t_i}`, each
//! with `i³` activators, taking the rectangles in turn.

use super::tiling::TilingPlan;
use crate::engine::Action;
use crate::geometry::LatticePoint;
use crate::growth::root::floor_root_u128;
use crate::growth::{eval_power_ceil, GrowthError};
use crate::rational::Rational;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Up,
    Left,
    Right,
    Down,
}

pub const SIDES: [Side; 4] = [Side::Up, Side::Left, Side::Right, Side::Down];

/// One annulus rectangle with its lower-left lattice corner.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseRect {
    pub side: Side,
    pub origin: LatticePoint,
    pub plan: TilingPlan,
}

#[derive(Clone, Debug, Serialize)]
pub struct Phase {
    pub index: u64,
    /// `f(t_i)`, half-width of the inner square.
    pub inner: u64,
    /// `f(t_{i+1} - 1)`, half-width of the outer square.
    pub outer: u64,
    pub rects: Vec<PhaseRect>,
}

impl Phase {
    pub fn first_turn(&self) -> u64 {
        (self.index + 1).pow(4)
    }

    pub fn last_turn(&self) -> u64 {
        (self.index + 2).pow(4) - 1
    }

    pub fn budget(&self) -> u64 {
        self.index.pow(3)
    }

    pub fn action(&self, t: u64) -> Action {
        let k = t - self.first_turn();
        let rect = &self.rects[(k % 4) as usize];
        let idx = (k / 4) as usize;
        if idx < rect.plan.len() {
            Action::Burn(rect.origin.offset(rect.plan.floored(idx)))
        } else {
            Action::Pass
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhasePlan {
    pub c: Rational,
    phases: Vec<Phase>,
}

impl PhasePlan {
    /// Phases that start at or before `horizon`.
    pub fn new(c: Rational, horizon: u64) -> Result<Self, GrowthError> {
        let f = |n| eval_power_ceil(c, Rational::new(3, 2), n);
        let mut phases = Vec::new();
        let mut i = 1u64;
        while (i + 1).pow(4) <= horizon {
            let inner = f(i.pow(4))?;
            let outer = f((i + 1).pow(4) - 1)?;
            let (w, l) = (2 * inner, outer - inner);
            let fi = inner as i64;
            let fo = outer as i64;
            let rects = if l == 0 {
                Vec::new()
            } else {
                let b = i.pow(3);
                vec![
                    PhaseRect { side: Side::Up, origin: LatticePoint::new(-fi, fi), plan: TilingPlan::new(w, l, b) },
                    PhaseRect { side: Side::Left, origin: LatticePoint::new(-fo, -fo), plan: TilingPlan::new(l, 2 * outer, b) },
                    PhaseRect { side: Side::Right, origin: LatticePoint::new(fi, -fo), plan: TilingPlan::new(l, 2 * outer, b) },
                    PhaseRect { side: Side::Down, origin: LatticePoint::new(-fi, -fo), plan: TilingPlan::new(w, l, b) },
                ]
            };
            phases.push(Phase { index: i, inner, outer, rects });
            i += 1;
        }
        Ok(PhasePlan { c, phases })
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    /// Last turn of every phase, `t_{i+2} - 1`.
    pub fn phase_ends(&self) -> impl Iterator<Item = u64> + '_ {
        self.phases.iter().map(Phase::last_turn)
    }

    pub fn action(&self, t: u64) -> Action {
        // phase i covers [ (i+1)^4, (i+2)^4 )
        let q = floor_root_u128(t as u128, 4) as u64;
        if q < 2 {
            return Action::Pass;
        }
        match self.phases.get((q - 2) as usize) {
            Some(p) => p.action(t),
            None => Action::Pass,
        }
    }
}

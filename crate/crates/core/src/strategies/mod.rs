//! Activator sequences: the explicit constructions and their transformers.
//!
//! A [`StrategySpec`] is a serializable description. [`StrategySpec::compile`]
//! turns it into a [`Schedule`] for a given growth function and horizon;
//! a schedule answers `action(t)` in O(log) time or better.

mod full_burn;
mod phase;
mod tiling;

pub use full_burn::{Epoch, FullBurnPlan};
pub use phase::{Phase, PhasePlan, PhaseRect, Side, SIDES};
pub use tiling::TilingPlan;

use crate::engine::{Action, ActionSource, ActivationRecord};
use crate::geometry::{GridBox, LatticePoint};
use crate::growth::{GrowthError, GrowthFunction};
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    /// Burn the origin every turn.
    ConstantOrigin,
    /// Repeatedly burn the whole grid, epoch by epoch.
    FullBurn,
    /// Activate the floored centres of a tiling plan, one per turn from turn 1,
    /// shifted by `origin`.
    RectangleTiling {
        w: u64,
        l: u64,
        budget: u64,
        #[serde(default)]
        origin: LatticePoint,
    },
    /// Phase strategy built for `ceil(c n^(3/2))`, independent of the run's growth.
    Phase { c: Rational },
    /// Burns at the listed turns, Pass elsewhere.
    Explicit { burns: Vec<ActivationRecord> },
    Transformed {
        base: Box<StrategySpec>,
        transform: Transform,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transform", rename_all = "snake_case")]
pub enum Transform {
    /// Pass for `k` turns, then replay the base shifted by `k`.
    Delay { k: u64 },
    /// Pass for turns `1..=k`, then follow the base unchanged.
    Trim { k: u64 },
    /// Pass after turn `after`.
    Truncate { after: u64 },
    /// Shift Burn points by per-turn offsets of L1 norm at most `d`, then clamp to the box.
    Perturb {
        d: u64,
        #[serde(default, with = "offset_table")]
        offsets: BTreeMap<u64, LatticePoint>,
    },
    /// Run the base, built for the smaller grid `base_growth`, unchanged on
    /// the run's grid. Alternatively `factor_sq` (at most 1) builds the base
    /// grid as `repaired(ceil(sqrt(factor_sq) f))`.
    ReuseScaled {
        #[serde(default)]
        base_growth: Option<String>,
        #[serde(default)]
        factor_sq: Option<Rational>,
    },
    /// Replay the base, built for `base_growth`, in order, passing while the
    /// next point is not yet inside the run's box.
    Wait { base_growth: String },
}

/// Offsets travel as a list of `{turn, offset}` entries; JSON object keys
/// would be strings, which internally tagged enums cannot convert back.
mod offset_table {
    use crate::geometry::LatticePoint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        turn: u64,
        offset: LatticePoint,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<u64, LatticePoint>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|(&turn, &offset)| Entry { turn, offset }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, LatticePoint>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?.into_iter().map(|e| (e.turn, e.offset)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error("{0} needs a strictly increasing growth function")]
    NotStrictlyIncreasing(String),
    #[error("perturbation offset {offset} at turn {turn} exceeds d = {d}")]
    OffsetTooLarge { turn: u64, offset: LatticePoint, d: u64 },
    #[error("the run's grid does not contain the base grid at n = {n} ({f} < {g})")]
    NotDominated { n: u64, f: u64, g: u64 },
    #[error("strategy issues no Burn within the horizon {0}")]
    Empty(u64),
    #[error("invalid strategy: {0}")]
    Invalid(String),
}

impl StrategySpec {
    pub fn constant_origin() -> Self {
        StrategySpec::ConstantOrigin
    }

    pub fn full_burn() -> Self {
        StrategySpec::FullBurn
    }

    pub fn phase(c: Rational) -> Self {
        StrategySpec::Phase { c }
    }

    pub fn rectangle_tiling(w: u64, l: u64, budget: u64) -> Self {
        StrategySpec::RectangleTiling { w, l, budget, origin: LatticePoint::ORIGIN }
    }

    /// A single ball grown from the origin.
    pub fn single_origin() -> Self {
        StrategySpec::ConstantOrigin.then(Transform::Truncate { after: 1 })
    }

    pub fn then(self, transform: Transform) -> Self {
        StrategySpec::Transformed { base: Box::new(self), transform }
    }

    pub fn delay(self, k: u64) -> Self {
        self.then(Transform::Delay { k })
    }

    pub fn trim(self, k: u64) -> Self {
        self.then(Transform::Trim { k })
    }

    pub fn perturb(self, d: u64, offsets: BTreeMap<u64, LatticePoint>) -> Self {
        self.then(Transform::Perturb { d, offsets })
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("strategy specs always serialize")
    }

    /// Short human-readable label.
    pub fn describe(&self) -> String {
        match self {
            StrategySpec::ConstantOrigin => "constant_origin".into(),
            StrategySpec::FullBurn => "full_burn".into(),
            StrategySpec::RectangleTiling { w, l, budget, origin } => format!("tiling({w}x{l}, {budget}, at {origin})"),
            StrategySpec::Phase { c } => format!("phase(c={c})"),
            StrategySpec::Explicit { burns } => format!("explicit({} burns)", burns.len()),
            StrategySpec::Transformed { base, transform } => {
                let b = base.describe();
                match transform {
                    Transform::Delay { k } => format!("delay({b}, {k})"),
                    Transform::Trim { k } => format!("trim({b}, {k})"),
                    Transform::Truncate { after } => format!("truncate({b}, {after})"),
                    Transform::Perturb { d, offsets } => format!("perturb({b}, d={d}, {} offsets)", offsets.len()),
                    Transform::ReuseScaled { base_growth: Some(g), .. } => format!("reuse({b}, from {g})"),
                    Transform::ReuseScaled { factor_sq, .. } => {
                        format!("reuse({b}, factor_sq={})", factor_sq.unwrap_or(Rational::ONE))
                    }
                    Transform::Wait { base_growth } => format!("wait({b}, from {base_growth})"),
                }
            }
        }
    }

    /// Builds the schedule for the grid `G(f)` up to `horizon`.
    pub fn compile(&self, f: &GrowthFunction, horizon: u64) -> Result<Schedule, StrategyError> {
        let node = build(self, f, horizon)?;
        let schedule = Schedule {
            node,
            label: self.describe(),
            horizon,
        };
        if let Some(k) = trimmed_past_end(self, &schedule, horizon) {
            // the trim precondition can only be checked up to the horizon
            log::warn!("trim({k}): the base issues no Burn after turn {k} within the horizon {horizon}");
        } else if !(1..=horizon).any(|t| schedule.action(t) != Action::Pass) {
            return Err(StrategyError::Empty(horizon));
        }
        Ok(schedule)
    }
}

fn trimmed_past_end(spec: &StrategySpec, schedule: &Schedule, horizon: u64) -> Option<u64> {
    match spec {
        StrategySpec::Transformed { transform: Transform::Trim { k }, .. } => {
            (!((k + 1)..=horizon).any(|t| schedule.action(t) != Action::Pass)).then_some(*k)
        }
        _ => None,
    }
}

fn build(spec: &StrategySpec, f: &GrowthFunction, horizon: u64) -> Result<Node, StrategyError> {
    Ok(match spec {
        StrategySpec::ConstantOrigin => Node::Constant(LatticePoint::ORIGIN),
        StrategySpec::FullBurn => {
            if !f.is_strictly_increasing() {
                return Err(StrategyError::NotStrictlyIncreasing("full_burn".into()));
            }
            Node::FullBurn(Arc::new(FullBurnPlan::new(f, horizon)?))
        }
        StrategySpec::RectangleTiling { w, l, budget, origin } => {
            if *w == 0 || *l == 0 || *budget == 0 {
                return Err(StrategyError::Invalid("tiling sides and budget must be positive".into()));
            }
            Node::Tiling(Arc::new(TilingPlan::new(*w, *l, *budget)), *origin)
        }
        StrategySpec::Phase { c } => {
            if c.is_zero() {
                return Err(StrategyError::Invalid("phase strategy needs c > 0".into()));
            }
            Node::Phase(Arc::new(PhasePlan::new(*c, horizon)?))
        }
        StrategySpec::Explicit { burns } => {
            let mut table = vec![Action::Pass; horizon as usize];
            for r in burns {
                if r.turn == 0 {
                    return Err(StrategyError::Invalid("turns start at 1".into()));
                }
                if let Some(slot) = table.get_mut(r.turn as usize - 1) {
                    *slot = Action::Burn(r.point);
                }
            }
            Node::Table(table.into())
        }
        StrategySpec::Transformed { base, transform } => match transform {
            Transform::Delay { k } => Node::Delay(*k, Box::new(build(base, f, horizon)?)),
            Transform::Trim { k } => Node::Trim(*k, Box::new(build(base, f, horizon)?)),
            Transform::Truncate { after } => Node::Truncate(*after, Box::new(build(base, f, horizon)?)),
            Transform::Perturb { d, offsets } => {
                if let Some((&turn, &offset)) = offsets.iter().find(|(_, o)| o.l1_distance(LatticePoint::ORIGIN) > *d) {
                    return Err(StrategyError::OffsetTooLarge { turn, offset, d: *d });
                }
                Node::Perturb {
                    offsets: offsets.clone(),
                    radii: f.table(horizon)?.into(),
                    base: Box::new(build(base, f, horizon)?),
                }
            }
            Transform::ReuseScaled { base_growth, factor_sq } => {
                let g = match (base_growth, factor_sq) {
                    (Some(g), None) => g.parse::<GrowthFunction>()?,
                    (None, Some(q)) if *q <= Rational::ONE => GrowthFunction::scaled_sqrt(*q, f.clone()).repaired(),
                    _ => {
                        return Err(StrategyError::Invalid(
                            "reuse_scaled needs exactly one of base_growth or factor_sq (at most 1)".into(),
                        ))
                    }
                };
                if !f.is_strictly_increasing() || !g.is_strictly_increasing() {
                    return Err(StrategyError::NotStrictlyIncreasing("reuse_scaled".into()));
                }
                for n in 1..=horizon {
                    let (fv, gv) = (f.eval(n)?, g.eval(n)?);
                    if fv < gv {
                        return Err(StrategyError::NotDominated { n, f: fv, g: gv });
                    }
                }
                build(base, &g, horizon)?
            }
            Transform::Wait { base_growth } => {
                let g: GrowthFunction = base_growth.parse()?;
                let inner = build(base, &g, horizon)?;
                let radii = f.table(horizon)?;
                let mut table = Vec::with_capacity(horizon as usize);
                let mut next = 1;
                for t in 1..=horizon {
                    let a = inner.action(next);
                    let ready = match a {
                        Action::Pass => true,
                        Action::Burn(p) => GridBox::new(radii[t as usize]).contains(p),
                    };
                    if ready {
                        table.push(a);
                        next += 1;
                    } else {
                        table.push(Action::Pass);
                    }
                }
                Node::Table(table.into())
            }
        },
    })
}

#[derive(Clone, Debug)]
enum Node {
    Constant(LatticePoint),
    Table(Arc<[Action]>),
    Tiling(Arc<TilingPlan>, LatticePoint),
    FullBurn(Arc<FullBurnPlan>),
    Phase(Arc<PhasePlan>),
    Delay(u64, Box<Node>),
    Trim(u64, Box<Node>),
    Truncate(u64, Box<Node>),
    Perturb {
        offsets: BTreeMap<u64, LatticePoint>,
        radii: Arc<[u64]>,
        base: Box<Node>,
    },
}

impl Node {
    fn action(&self, t: u64) -> Action {
        match self {
            Node::Constant(p) => Action::Burn(*p),
            Node::Table(v) => v.get(t as usize - 1).copied().unwrap_or(Action::Pass),
            Node::Tiling(plan, origin) => {
                let k = t as usize - 1;
                if k < plan.len() {
                    Action::Burn(origin.offset(plan.floored(k)))
                } else {
                    Action::Pass
                }
            }
            Node::FullBurn(plan) => plan.action(t),
            Node::Phase(plan) => plan.action(t),
            Node::Delay(k, base) => {
                if t <= *k {
                    Action::Pass
                } else {
                    base.action(t - k)
                }
            }
            Node::Trim(k, base) => {
                if t <= *k {
                    Action::Pass
                } else {
                    base.action(t)
                }
            }
            Node::Truncate(after, base) => {
                if t > *after {
                    Action::Pass
                } else {
                    base.action(t)
                }
            }
            Node::Perturb { offsets, radii, base } => match base.action(t) {
                Action::Pass => Action::Pass,
                Action::Burn(p) => {
                    let q = offsets.get(&t).map_or(p, |o| p.offset(*o));
                    match radii.get(t as usize) {
                        Some(&r) => Action::Burn(GridBox::new(r).clamp(q).0),
                        None => Action::Burn(q),
                    }
                }
            },
        }
    }

    fn checkpoint_hint(&self) -> Option<Vec<u64>> {
        match self {
            Node::FullBurn(plan) => Some(plan.epoch_ends().collect()),
            Node::Phase(plan) => Some(plan.phase_ends().collect()),
            Node::Delay(k, base) => base.checkpoint_hint().map(|v| v.into_iter().map(|t| t + k).collect()),
            Node::Trim(_, base) | Node::Truncate(_, base) | Node::Perturb { base, .. } => base.checkpoint_hint(),
            _ => None,
        }
    }
}

/// A compiled strategy.
#[derive(Clone, Debug)]
pub struct Schedule {
    node: Node,
    label: String,
    horizon: u64,
}

impl Schedule {
    pub fn action(&self, t: u64) -> Action {
        assert!(t >= 1, "turns start at 1");
        self.node.action(t)
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Natural checkpoints: phase ends for the phase strategy, epoch ends for
    /// full burn, restricted to the horizon.
    pub fn phase_ends(&self) -> Option<Vec<u64>> {
        self.node
            .checkpoint_hint()
            .map(|v| v.into_iter().filter(|&t| t <= self.horizon).collect())
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        (1..=self.horizon).map(|t| self.action(t))
    }
}

impl ActionSource for Schedule {
    fn action(&self, t: u64) -> Action {
        Schedule::action(self, t)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

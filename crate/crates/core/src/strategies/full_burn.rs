//! Epoch scheme that repeatedly burns the whole grid.
//!
//! Epoch `i` starts after turn `t_i` (with `t_1 = 1`). It covers the square
//! `G_{t_i}` of side `W = 2 f(t_i) + 1` with diamonds of integer radius
//! `r_i = ceil((W²)^(1/3))` centred on an odd checkerboard of spacing `r_i`,
//! activating one centre per turn and then passing until every ball has
//! radius `r_i`. Epoch `i` ends at `t_{i+1} = t_i + centres + r_i`.

use crate::engine::Action;
use crate::geometry::LatticePoint;
use crate::growth::root::ceil_cbrt;
use crate::growth::{GrowthError, GrowthFunction};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Epoch {
    /// `t_i`; activations start on the next turn.
    pub start: u64,
    /// `f(t_i)`.
    pub radius: u64,
    /// Tile radius `r_i`.
    pub tile: u64,
    /// Largest checkerboard index `K = ceil((W - 1) / r_i)`.
    pub k_max: u64,
}

impl Epoch {
    fn new(start: u64, radius: u64) -> Self {
        let side = 2 * radius as u128 + 1;
        let tile = ceil_cbrt(side * side) as u64;
        Epoch {
            start,
            radius,
            tile,
            k_max: (2 * radius).div_ceil(tile),
        }
    }

    /// Number of centres, the odd cells of the `(K+1) × (K+1)` index grid.
    pub fn centers(&self) -> u64 {
        (self.k_max + 1) * (self.k_max + 1) / 2
    }

    /// `τ_i`.
    pub fn length(&self) -> u64 {
        self.centers() + self.tile
    }

    pub fn end(&self) -> u64 {
        self.start + self.length()
    }

    /// Checks the arithmetic behind the covering argument: the checkerboard
    /// reaches the far side of the square, both parities are present, and
    /// the last ball reaches radius `r_i` by the end of the epoch.
    pub fn covering_conditions_hold(&self) -> bool {
        let spans = self.k_max * self.tile >= 2 * self.radius;
        let has_neighbours = self.k_max >= 1 || self.radius == 0;
        let last = self.start + self.centers();
        spans && has_neighbours && last + self.tile == self.end()
    }

    /// Index pair of centre `k` in row-major order.
    pub fn index(&self, k: u64) -> (u64, u64) {
        let row = self.k_max + 1;
        let even_row = row / 2; // odd i in [0, K]
        let (pair, rem) = (k / row, k % row);
        if rem < even_row {
            (2 * rem + 1, 2 * pair)
        } else {
            (2 * (rem - even_row), 2 * pair + 1)
        }
    }

    /// Lattice point of centre `k`; coordinates beyond the square are pulled
    /// back onto its far side, which only shortens distances to its points.
    pub fn center(&self, k: u64) -> LatticePoint {
        let (i, j) = self.index(k);
        let edge = 2 * self.radius;
        let f = self.radius as i64;
        LatticePoint::new((i * self.tile).min(edge) as i64 - f, (j * self.tile).min(edge) as i64 - f)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FullBurnPlan {
    epochs: Vec<Epoch>,
}

impl FullBurnPlan {
    /// All epochs starting before `horizon`.
    pub fn new(f: &GrowthFunction, horizon: u64) -> Result<Self, GrowthError> {
        let mut epochs = Vec::new();
        let mut t = 1;
        while t < horizon.max(2) {
            let e = Epoch::new(t, f.eval(t)?);
            t = e.end();
            epochs.push(e);
        }
        Ok(FullBurnPlan { epochs })
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    /// Turns `t_2, t_3, ...` at which an epoch completes.
    pub fn epoch_ends(&self) -> impl Iterator<Item = u64> + '_ {
        self.epochs.iter().map(Epoch::end)
    }

    pub fn action(&self, t: u64) -> Action {
        let i = self.epochs.partition_point(|e| e.start < t);
        if i == 0 {
            return Action::Pass;
        }
        let e = &self.epochs[i - 1];
        let k = t - e.start - 1;
        if k < e.centers() {
            Action::Burn(e.center(k))
        } else {
            Action::Pass
        }
    }
}

//! Checkerboard diamond tilings of a rectangle.
//!
//! For a `w × ℓ` rectangle and a budget of `b` activators the tile radius is
//! `r = sqrt(wℓ / 2b)` and the centres are `(r i, r j)` with `i + j` odd,
//! `i r < w` and `j r < ℓ`, listed row by row and cut off at the budget.
//! `r²` is rational, so the floored centres are computed exactly.
//!
//! [`TilingPlan::closed`] builds the variant with `i r <= w`, `j r <= ℓ` and
//! no budget cut-off. It can exceed the budget, but the two-centre covering
//! argument always finds both neighbours in it.

use crate::geometry::LatticePoint;
use crate::growth::root::floor_root_u128;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TilingPlan {
    pub w: u64,
    pub l: u64,
    pub budget: u64,
    /// `r² = r_sq_num / r_sq_den`.
    r_sq_num: u128,
    r_sq_den: u128,
    /// Index pairs `(i, j)` in activation order.
    indices: Vec<(u64, u64)>,
}

impl TilingPlan {
    /// Strict index bounds, cut off at the budget. Panics if any argument is zero.
    pub fn new(w: u64, l: u64, budget: u64) -> Self {
        Self::build(w, l, budget, false)
    }

    /// Closed index bounds, never cut off. Panics if any argument is zero.
    pub fn closed(w: u64, l: u64, budget: u64) -> Self {
        Self::build(w, l, budget, true)
    }

    fn build(w: u64, l: u64, budget: u64, closed: bool) -> Self {
        assert!(w > 0 && l > 0 && budget > 0, "tiling needs positive sides and budget");
        let (w1, l1, b1) = (w as u128, l as u128, budget as u128);
        // i r < w  <=>  i² wℓ < 2b w²  <=>  i² ℓ < 2b w
        let i_max = max_index(l1, 2 * b1 * w1, closed);
        let j_max = max_index(w1, 2 * b1 * l1, closed);
        let cap = if closed { u64::MAX } else { budget };
        let mut indices = Vec::new();
        'rows: for j in 0..=j_max {
            let mut i = (j + 1) % 2;
            while i <= i_max {
                if indices.len() as u64 == cap {
                    break 'rows;
                }
                indices.push((i, j));
                i += 2;
            }
        }
        TilingPlan {
            w,
            l,
            budget,
            r_sq_num: w1 * l1,
            r_sq_den: 2 * b1,
            indices,
        }
    }

    pub fn r(&self) -> f64 {
        (self.r_sq_num as f64 / self.r_sq_den as f64).sqrt()
    }

    /// `r²` as an exact fraction.
    pub fn r_squared(&self) -> (u128, u128) {
        (self.r_sq_num, self.r_sq_den)
    }

    /// `floor(r)` and `ceil(r)`.
    pub fn r_floor_ceil(&self) -> (u64, u64) {
        let fl = floor_root_u128(self.r_sq_num / self.r_sq_den, 2) as u64;
        let exact = (fl as u128 * fl as u128) * self.r_sq_den == self.r_sq_num;
        (fl, if exact { fl } else { fl + 1 })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[(u64, u64)] {
        &self.indices
    }

    /// `floor(r k)`.
    pub fn floor_coord(&self, k: u64) -> u64 {
        let k = k as u128;
        floor_root_u128(self.r_sq_num * k * k / self.r_sq_den, 2) as u64
    }

    /// Real-coordinate centres.
    pub fn centers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let r = self.r();
        self.indices.iter().map(move |&(i, j)| (r * i as f64, r * j as f64))
    }

    /// Centre `k` floored to the lattice, relative to the rectangle corner.
    pub fn floored(&self, k: usize) -> LatticePoint {
        let (i, j) = self.indices[k];
        LatticePoint::new(self.floor_coord(i) as i64, self.floor_coord(j) as i64)
    }

    pub fn floored_centers(&self) -> Vec<LatticePoint> {
        (0..self.len()).map(|k| self.floored(k)).collect()
    }
}

/// Largest `i` with `i² a < bound`, or `i² a <= bound` when `closed`.
fn max_index(a: u128, bound: u128, closed: bool) -> u64 {
    let q = if closed { bound / a } else { (bound - 1) / a };
    floor_root_u128(q, 2) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(i64, i64)]) -> Vec<LatticePoint> {
        v.iter().map(|&(x, y)| LatticePoint::new(x, y)).collect()
    }

    #[test]
    fn four_by_four_budget_four() {
        let p = TilingPlan::new(4, 4, 4);
        assert!((p.r() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.indices(), &[(1, 0), (0, 1), (2, 1), (1, 2)]);
        assert_eq!(p.floored_centers(), pts(&[(1, 0), (0, 1), (2, 1), (1, 2)]));
    }

    #[test]
    fn two_by_two_truncates_to_budget() {
        let p = TilingPlan::new(2, 2, 1);
        assert_eq!(p.indices(), &[(1, 0)]);
        assert_eq!(p.floored_centers(), pts(&[(1, 0)]));
    }

    #[test]
    fn closed_variant_keeps_boundary_centres() {
        // r = 2 divides both sides exactly
        let p = TilingPlan::closed(4, 4, 2);
        assert_eq!(p.indices(), &[(1, 0), (0, 1), (2, 1), (1, 2)]);
        let q = TilingPlan::closed(2, 2, 1);
        assert_eq!(q.indices(), &[(1, 0), (0, 1)]);
    }

    #[test]
    fn hundred_square_fifty() {
        let p = TilingPlan::new(100, 100, 50);
        assert_eq!(p.r_floor_ceil(), (10, 10));
        assert_eq!(p.len(), 50);
        assert!(p.indices().iter().all(|&(i, j)| i < 10 && j < 10 && (i + j) % 2 == 1));
    }

    proptest! {
        #[test]
        fn plan_invariants(w in 1u64..300, l in 1u64..300, b in 1u64..400) {
            let p = TilingPlan::new(w, l, b);
            // the checkerboard always has at least `budget` cells
            prop_assert_eq!(p.len() as u64, b);
            let r = p.r();
            for (k, &(i, j)) in p.indices().iter().enumerate() {
                prop_assert_eq!((i + j) % 2, 1);
                let c = p.floored(k);
                prop_assert!(c.x >= 0 && (c.x as u64) < w && c.y >= 0 && (c.y as u64) < l);
                let x = c.x as f64;
                prop_assert!(x <= i as f64 * r + 1e-9 && x > i as f64 * r - 1.0 - 1e-9);
                for &(i2, j2) in &p.indices()[k + 1..] {
                    prop_assert!(i.abs_diff(i2) + j.abs_diff(j2) >= 2);
                }
            }
        }
    }
}

//! Lattice-point counting for L1 balls ("diamonds"), centred boxes and
//! unions of diamonds clipped to a box.
//!
//! Exact union counts come from one of two independent routes:
//!
//! * a row sweep that intersects every diamond with each row `y`, merges the
//!   resulting integer intervals and sums their lengths, and
//! * a rotated sweep that maps `(x, y) -> (x + y, x - y)`, where every diamond
//!   becomes an axis-aligned square on one of two parity sublattices, and
//!   measures the union of those squares with a coverage segment tree.
//!
//! The rotated sweep is `O(n log n)` in the number of diamonds regardless of
//! their radii, but it cannot clip to the box, so [`union_card`] only uses it
//! when every diamond already lies inside the box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

/// z-score for a two-sided 95% normal confidence interval.
const Z_95: f64 = 1.959_963_984_540_054;

/// A vertex of the integer grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        LatticePoint { x, y }
    }

    pub fn l1_distance(self, other: LatticePoint) -> u64 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    /// Largest absolute coordinate, i.e. the smallest box radius containing the point.
    pub fn linf_norm(self) -> u64 {
        self.x.unsigned_abs().max(self.y.unsigned_abs())
    }

    pub fn offset(self, by: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x + by.x, self.y + by.y)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Closed L1 ball `{p : |p.x - c.x| + |p.y - c.y| <= radius}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diamond {
    pub center: LatticePoint,
    pub radius: u64,
}

impl Diamond {
    pub const fn new(center: LatticePoint, radius: u64) -> Self {
        Diamond { center, radius }
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.center.l1_distance(p) <= self.radius
    }

    fn bottom(&self) -> i64 {
        self.center.y - self.radius as i64
    }

    fn top(&self) -> i64 {
        self.center.y + self.radius as i64
    }

    /// The diamond's intersection with row `y` as an inclusive interval.
    pub fn row_span(&self, y: i64) -> Option<(i64, i64)> {
        let dy = self.center.y.abs_diff(y);
        if dy > self.radius {
            return None;
        }
        let half = (self.radius - dy) as i64;
        Some((self.center.x - half, self.center.x + half))
    }

    /// True when the whole diamond lies inside `b`.
    pub fn inside(&self, b: GridBox) -> bool {
        self.center.linf_norm() + self.radius <= b.radius
    }
}

/// The centred square `[-radius, radius]^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridBox {
    pub radius: u64,
}

impl GridBox {
    pub const fn new(radius: u64) -> Self {
        GridBox { radius }
    }

    pub fn side(self) -> u64 {
        2 * self.radius + 1
    }

    pub fn cardinality(self) -> u64 {
        self.side() * self.side()
    }

    pub fn contains(self, p: LatticePoint) -> bool {
        p.linf_norm() <= self.radius
    }

    /// Nearest point of the box, together with the L-infinity distance moved.
    pub fn clamp(self, p: LatticePoint) -> (LatticePoint, u64) {
        let r = self.radius as i64;
        let q = LatticePoint::new(p.x.clamp(-r, r), p.y.clamp(-r, r));
        let moved = p.x.abs_diff(q.x).max(p.y.abs_diff(q.y));
        (q, moved)
    }
}

/// Number of lattice points in a diamond of the given radius.
pub fn diamond_card(radius: u64) -> u64 {
    (radius + 1) * (radius + 1) + radius * radius
}

/// Exact number of lattice points in `d ∩ b`.
pub fn diamond_box_card(d: &Diamond, b: GridBox) -> u64 {
    if d.inside(b) {
        return diamond_card(d.radius);
    }
    let r = b.radius as i64;
    let lo = d.bottom().max(-r);
    let hi = d.top().min(r);
    (lo..=hi)
        .filter_map(|y| d.row_span(y))
        .map(|(a, z)| clipped_len(a, z, r))
        .sum()
}

fn clipped_len(a: i64, z: i64, r: i64) -> u64 {
    let a = a.max(-r);
    let z = z.min(r);
    if z < a {
        0
    } else {
        (z - a + 1) as u64
    }
}

/// How a union cardinality should be obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CountMode {
    Exact,
    /// Sample `rows` rows uniformly with replacement.
    Sampled { rows: u64, seed: u64 },
}

/// Result of [`union_card`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum UnionCount {
    Exact(u64),
    Sampled {
        estimate: f64,
        ci_halfwidth: f64,
        rows: u64,
        seed: u64,
    },
}

impl UnionCount {
    pub fn value(&self) -> f64 {
        match *self {
            UnionCount::Exact(n) => n as f64,
            UnionCount::Sampled { estimate, .. } => estimate,
        }
    }

    pub fn exact(&self) -> Option<u64> {
        match *self {
            UnionCount::Exact(n) => Some(n),
            UnionCount::Sampled { .. } => None,
        }
    }

    pub fn ci_halfwidth(&self) -> Option<f64> {
        match *self {
            UnionCount::Exact(_) => None,
            UnionCount::Sampled { ci_halfwidth, .. } => Some(ci_halfwidth),
        }
    }
}

/// Cardinality of `(⋃ ds) ∩ b`.
///
/// In sampled mode with at least as many rows as the box has, every row is
/// visited once and the estimate equals the exact count with a zero
/// half-width.
pub fn union_card(ds: &[Diamond], b: GridBox, mode: CountMode) -> UnionCount {
    match mode {
        CountMode::Exact => {
            let ds = dedup_by_center(ds);
            if ds.iter().all(|d| d.inside(b)) {
                UnionCount::Exact(union_card_rotated(&ds))
            } else {
                UnionCount::Exact(sweep_rows(&ds, b))
            }
        }
        CountMode::Sampled { rows, seed } => {
            assert!(rows >= 1, "sampled union counting needs at least one row");
            let ds = dedup_by_center(ds);
            let side = b.side();
            if rows >= side {
                let exact = sweep_rows(&ds, b);
                return UnionCount::Sampled {
                    estimate: exact as f64,
                    ci_halfwidth: 0.0,
                    rows: side,
                    seed,
                };
            }
            let r = b.radius as i64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ys: Vec<i64> = (0..rows).map(|_| rng.random_range(-r..=r)).collect();
            ys.sort_unstable();
            let (sum, sum_sq) = sample_rows(&ds, b, &ys);
            let n = rows as f64;
            let mean = sum as f64 / n;
            let var = if rows > 1 {
                ((sum_sq as f64 - (sum as f64) * mean) / (n - 1.0)).max(0.0)
            } else {
                f64::INFINITY
            };
            let side = side as f64;
            UnionCount::Sampled {
                estimate: side * mean,
                ci_halfwidth: Z_95 * side * (var / n).sqrt(),
                rows,
                seed,
            }
        }
    }
}

/// Exact union count by the row sweep, clipped to `b`.
pub fn union_card_rows(ds: &[Diamond], b: GridBox) -> u64 {
    sweep_rows(&dedup_by_center(ds), b)
}

/// Concentric diamonds are nested, so only the largest per centre matters.
fn dedup_by_center(ds: &[Diamond]) -> Vec<Diamond> {
    let mut best: HashMap<LatticePoint, u64> = HashMap::with_capacity(ds.len());
    for d in ds {
        let r = best.entry(d.center).or_insert(d.radius);
        *r = (*r).max(d.radius);
    }
    let mut out: Vec<Diamond> = best.into_iter().map(|(c, r)| Diamond::new(c, r)).collect();
    out.sort_unstable_by_key(|d| (d.center.y, d.center.x));
    out
}

/// Incremental row cursor: visits only diamonds whose row range covers the
/// current row. Rows must be visited in non-decreasing order.
struct RowCursor<'a> {
    ds: &'a [Diamond],
    by_bottom: &'a [u32],
    next: usize,
    active: Vec<u32>,
    spans: Vec<(i64, i64)>,
}

impl<'a> RowCursor<'a> {
    fn starting_at(ds: &'a [Diamond], by_bottom: &'a [u32], y0: i64) -> Self {
        let next = by_bottom.partition_point(|&i| ds[i as usize].bottom() <= y0);
        let active = by_bottom[..next]
            .iter()
            .copied()
            .filter(|&i| ds[i as usize].top() >= y0)
            .collect();
        RowCursor {
            ds,
            by_bottom,
            next,
            active,
            spans: Vec::new(),
        }
    }

    fn row_len(&mut self, y: i64, clip: i64) -> u64 {
        while self.next < self.by_bottom.len() && self.ds[self.by_bottom[self.next] as usize].bottom() <= y {
            self.active.push(self.by_bottom[self.next]);
            self.next += 1;
        }
        let ds = self.ds;
        self.active.retain(|&i| ds[i as usize].top() >= y);

        self.spans.clear();
        for &i in &self.active {
            if let Some((a, z)) = ds[i as usize].row_span(y) {
                let (a, z) = (a.max(-clip), z.min(clip));
                if a <= z {
                    self.spans.push((a, z));
                }
            }
        }
        merged_length(&mut self.spans)
    }
}

fn merged_length(spans: &mut [(i64, i64)]) -> u64 {
    if spans.is_empty() {
        return 0;
    }
    spans.sort_unstable_by_key(|s| s.0);
    let mut total = 0u64;
    let (mut cur_a, mut cur_z) = spans[0];
    for &(a, z) in &spans[1..] {
        if a > cur_z + 1 {
            total += (cur_z - cur_a + 1) as u64;
            cur_a = a;
            cur_z = z;
        } else if z > cur_z {
            cur_z = z;
        }
    }
    total + (cur_z - cur_a + 1) as u64
}

fn sorted_by_bottom(ds: &[Diamond]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..ds.len() as u32).collect();
    order.sort_unstable_by_key(|&i| ds[i as usize].bottom());
    order
}

fn chunk_count(rows: usize) -> usize {
    let workers = rayon::current_num_threads().max(1);
    if workers == 1 {
        1
    } else {
        (workers * 4).min(rows.max(1))
    }
}

fn sweep_rows(ds: &[Diamond], b: GridBox) -> u64 {
    if ds.is_empty() {
        return 0;
    }
    let r = b.radius as i64;
    let lo = ds.iter().map(Diamond::bottom).min().unwrap_or(0).max(-r);
    let hi = ds.iter().map(Diamond::top).max().unwrap_or(0).min(r);
    if lo > hi {
        return 0;
    }
    let by_bottom = sorted_by_bottom(ds);
    let rows = (hi - lo + 1) as usize;
    let chunks = chunk_count(rows);
    let per = rows.div_ceil(chunks) as i64;
    (0..chunks as i64)
        .into_par_iter()
        .map(|k| {
            let y0 = lo + k * per;
            let y1 = (y0 + per - 1).min(hi);
            if y0 > y1 {
                return 0;
            }
            let mut cursor = RowCursor::starting_at(ds, &by_bottom, y0);
            (y0..=y1).map(|y| cursor.row_len(y, r)).sum::<u64>()
        })
        .sum()
}

/// Sum and sum of squares of row lengths over the (sorted) sample rows.
fn sample_rows(ds: &[Diamond], b: GridBox, ys: &[i64]) -> (u128, u128) {
    if ds.is_empty() {
        return (0, 0);
    }
    let r = b.radius as i64;
    let by_bottom = sorted_by_bottom(ds);
    let chunks = chunk_count(ys.len());
    let per = ys.len().div_ceil(chunks);
    ys.par_chunks(per)
        .map(|chunk| {
            let mut cursor = RowCursor::starting_at(ds, &by_bottom, chunk[0]);
            chunk.iter().fold((0u128, 0u128), |(s, q), &y| {
                let len = cursor.row_len(y, r) as u128;
                (s + len, q + len * len)
            })
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Exact cardinality of the (unclipped) union of diamonds, via the rotated
/// coordinates `u = x + y`, `v = x - y`.
pub fn union_card_rotated(ds: &[Diamond]) -> u64 {
    [0i64, 1]
        .into_par_iter()
        .map(|parity| {
            let rects: Vec<Rect> = ds.iter().filter_map(|d| rotated_rect(d, parity)).collect();
            rect_union_area(&rects)
        })
        .sum()
}

/// Half-open integer rectangle `[a0, a1) × [b0, b1)`.
#[derive(Clone, Copy, Debug)]
struct Rect {
    a0: i64,
    a1: i64,
    b0: i64,
    b1: i64,
}

/// The diamond's image on the sublattice `u ≡ v ≡ parity (mod 2)`, with
/// `u = 2a + parity`, `v = 2b + parity`.
fn rotated_rect(d: &Diamond, parity: i64) -> Option<Rect> {
    let r = d.radius as i64;
    let cu = d.center.x + d.center.y;
    let cv = d.center.x - d.center.y;
    let a0 = ceil_half(cu - r - parity);
    let a1 = floor_half(cu + r - parity);
    let b0 = ceil_half(cv - r - parity);
    let b1 = floor_half(cv + r - parity);
    (a0 <= a1 && b0 <= b1).then_some(Rect {
        a0,
        a1: a1 + 1,
        b0,
        b1: b1 + 1,
    })
}

fn floor_half(n: i64) -> i64 {
    n.div_euclid(2)
}

fn ceil_half(n: i64) -> i64 {
    -((-n).div_euclid(2))
}

fn rect_union_area(rects: &[Rect]) -> u64 {
    if rects.is_empty() {
        return 0;
    }
    let mut ys: Vec<i64> = rects.iter().flat_map(|r| [r.b0, r.b1]).collect();
    ys.sort_unstable();
    ys.dedup();

    let mut events: Vec<(i64, i32, usize, usize)> = Vec::with_capacity(rects.len() * 2);
    for r in rects {
        let lo = ys.binary_search(&r.b0).expect("compressed");
        let hi = ys.binary_search(&r.b1).expect("compressed");
        events.push((r.a0, 1, lo, hi));
        events.push((r.a1, -1, lo, hi));
    }
    events.sort_unstable_by(|p, q| match p.0.cmp(&q.0) {
        Ordering::Equal => p.1.cmp(&q.1),
        o => o,
    });

    let mut tree = CoverTree::new(&ys);
    let mut area = 0u64;
    let mut last_a = events[0].0;
    for (a, delta, lo, hi) in events {
        area += tree.covered() * (a - last_a) as u64;
        last_a = a;
        tree.update(1, 0, ys.len() - 1, lo, hi, delta);
    }
    area
}

/// Segment tree over elementary intervals `[ys[i], ys[i+1])` that tracks how
/// much of the axis is covered by at least one active interval.
struct CoverTree<'a> {
    ys: &'a [i64],
    count: Vec<i32>,
    len: Vec<u64>,
}

impl<'a> CoverTree<'a> {
    fn new(ys: &'a [i64]) -> Self {
        let n = ys.len().max(2) * 4;
        CoverTree {
            ys,
            count: vec![0; n],
            len: vec![0; n],
        }
    }

    fn covered(&self) -> u64 {
        self.len[1]
    }

    /// Adds `delta` over elementary intervals `[lo, hi)`; the node spans `[l, r)`.
    fn update(&mut self, node: usize, l: usize, r: usize, lo: usize, hi: usize, delta: i32) {
        if hi <= l || r <= lo {
            return;
        }
        if lo <= l && r <= hi {
            self.count[node] += delta;
        } else {
            let mid = (l + r) / 2;
            self.update(node * 2, l, mid, lo, hi, delta);
            self.update(node * 2 + 1, mid, r, lo, hi, delta);
        }
        self.len[node] = if self.count[node] > 0 {
            (self.ys[r] - self.ys[l]) as u64
        } else if r - l == 1 {
            0
        } else {
            self.len[node * 2] + self.len[node * 2 + 1]
        };
    }
}

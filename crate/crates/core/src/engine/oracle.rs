//! Cellwise reference implementation of the burning process.
//!
//! Cells are bit-packed row by row; one spread step is a handful of word
//! operations per row. The oracle is meant for correctness checks, so it
//! allocates the full final box up front.

use super::{Action, EngineError};
use crate::geometry::{GridBox, LatticePoint};

/// Inclusive axis-aligned lattice rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, x1: i64, y0: i64, y1: i64) -> Self {
        assert!(x0 <= x1 && y0 <= y1, "empty rectangle");
        Rect { x0, x1, y0, y1 }
    }

    pub fn square(radius: u64) -> Self {
        let r = radius as i64;
        Rect::new(-r, r, -r, r)
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        (self.x0..=self.x1).contains(&p.x) && (self.y0..=self.y1).contains(&p.y)
    }

    pub fn cells(&self) -> u64 {
        (self.x1 - self.x0 + 1) as u64 * (self.y1 - self.y0 + 1) as u64
    }

    pub fn width(&self) -> u64 {
        (self.x1 - self.x0 + 1) as u64
    }

    pub fn height(&self) -> u64 {
        (self.y1 - self.y0 + 1) as u64
    }

    fn within(&self, outer: &Rect) -> bool {
        self.x0 >= outer.x0 && self.x1 <= outer.x1 && self.y0 >= outer.y0 && self.y1 <= outer.y1
    }
}

/// A set of lattice cells inside a fixed rectangular frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitGrid {
    frame: Rect,
    words: usize,
    bits: Vec<u64>,
}

impl BitGrid {
    pub fn new(frame: Rect) -> Self {
        let words = (frame.width() as usize).div_ceil(64);
        BitGrid {
            frame,
            words,
            bits: vec![0; words * frame.height() as usize],
        }
    }

    pub fn frame(&self) -> Rect {
        self.frame
    }

    fn index(&self, p: LatticePoint) -> (usize, u64) {
        let col = (p.x - self.frame.x0) as usize;
        let row = (p.y - self.frame.y0) as usize;
        (row * self.words + col / 64, 1u64 << (col % 64))
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        if !self.frame.contains(p) {
            return false;
        }
        let (w, m) = self.index(p);
        self.bits[w] & m != 0
    }

    /// Panics if `p` is outside the frame.
    pub fn insert(&mut self, p: LatticePoint) {
        assert!(self.frame.contains(p), "{p} outside the grid frame");
        let (w, m) = self.index(p);
        self.bits[w] |= m;
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Number of cells inside `rect`, which must lie in the frame.
    pub fn count_in(&self, rect: Rect) -> u64 {
        assert!(rect.within(&self.frame), "rectangle exceeds the grid frame");
        let mask = column_mask(self.words, (rect.x0 - self.frame.x0) as usize, (rect.x1 - self.frame.x0) as usize);
        let r0 = (rect.y0 - self.frame.y0) as usize;
        let r1 = (rect.y1 - self.frame.y0) as usize;
        (r0..=r1)
            .map(|r| self.row(r).iter().zip(&mask).map(|(w, m)| (w & m).count_ones() as u64).sum::<u64>())
            .sum()
    }

    pub fn is_subset_of(&self, other: &BitGrid) -> bool {
        assert_eq!(self.frame, other.frame, "grids must share a frame");
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &BitGrid) {
        assert_eq!(self.frame, other.frame, "grids must share a frame");
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn intersects(&self, other: &BitGrid) -> bool {
        assert_eq!(self.frame, other.frame, "grids must share a frame");
        self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        let f = self.frame;
        (f.y0..=f.y1).flat_map(move |y| (f.x0..=f.x1).map(move |x| LatticePoint::new(x, y)).filter(|p| self.contains(*p)))
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    /// One spread step: every cell of `mask` at L1 distance at most one from
    /// a current cell joins the set. Cells outside `mask` are dropped.
    pub fn spread_within(&mut self, mask: Rect, scratch: &mut Vec<u64>) {
        assert!(mask.within(&self.frame), "mask exceeds the grid frame");
        scratch.clear();
        scratch.resize(self.bits.len(), 0);
        let words = self.words;
        let row_mask = column_mask(words, (mask.x0 - self.frame.x0) as usize, (mask.x1 - self.frame.x0) as usize);
        let r0 = (mask.y0 - self.frame.y0) as usize;
        let r1 = (mask.y1 - self.frame.y0) as usize;
        let rows = self.frame.height() as usize;
        for r in r0..=r1 {
            let out = &mut scratch[r * words..(r + 1) * words];
            let cur = self.row(r);
            for i in 0..words {
                let left = if i > 0 { cur[i - 1] >> 63 } else { 0 };
                let right = if i + 1 < words { cur[i + 1] << 63 } else { 0 };
                out[i] = cur[i] | (cur[i] << 1) | left | (cur[i] >> 1) | right;
            }
            if r > 0 {
                let below = &self.bits[(r - 1) * words..r * words];
                out.iter_mut().zip(below).for_each(|(o, b)| *o |= b);
            }
            if r + 1 < rows {
                let above = &self.bits[(r + 1) * words..(r + 2) * words];
                out.iter_mut().zip(above).for_each(|(o, a)| *o |= a);
            }
            out.iter_mut().zip(&row_mask).for_each(|(o, m)| *o &= m);
        }
        std::mem::swap(&mut self.bits, scratch);
    }
}

fn column_mask(words: usize, lo: usize, hi: usize) -> Vec<u64> {
    let mut m = vec![0u64; words];
    for (i, w) in m.iter_mut().enumerate() {
        let start = i * 64;
        let end = start + 63;
        if end < lo || start > hi {
            continue;
        }
        let a = lo.max(start) - start;
        let b = hi.min(end) - start;
        *w = if b - a == 63 { u64::MAX } else { ((1u64 << (b - a + 1)) - 1) << a };
    }
    m
}

/// Per-activator burned set `B_t[i]`, the cells that would burn had only the
/// activation on `turn` happened.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub turn: u64,
    pub point: LatticePoint,
    pub cells: BitGrid,
}

/// Cellwise process state. The region at each turn is given by a mask
/// rectangle, which is the centred box `[-f(t), f(t)]^2` for the growing
/// grid, or any fixed rectangle for static runs.
#[derive(Clone, Debug)]
pub struct OracleProcess {
    turn: u64,
    region: Option<Rect>,
    burned: BitGrid,
    provenance: Option<Vec<Provenance>>,
    scratch: Vec<u64>,
}

impl OracleProcess {
    /// A process whose regions all lie inside `frame`.
    pub fn new(frame: Rect) -> Self {
        OracleProcess {
            turn: 0,
            region: None,
            burned: BitGrid::new(frame),
            provenance: None,
            scratch: Vec::new(),
        }
    }

    /// Process for the growing grid whose final box has the given radius.
    pub fn for_box(max_radius: u64) -> Self {
        Self::new(Rect::square(max_radius))
    }

    /// Tracks `B_t[i]` for every activation. Must be enabled before the first step.
    pub fn with_provenance(mut self) -> Self {
        assert_eq!(self.turn, 0, "provenance must be enabled before the first step");
        self.provenance = Some(Vec::new());
        self
    }

    pub fn turn(&self) -> u64 {
        self.turn
    }

    pub fn region(&self) -> Option<Rect> {
        self.region
    }

    pub fn burned(&self) -> &BitGrid {
        &self.burned
    }

    pub fn burned_count(&self) -> u64 {
        self.burned.count()
    }

    pub fn provenance(&self) -> Option<&[Provenance]> {
        self.provenance.as_deref()
    }

    /// Advances one turn on the centred box of radius `radius`.
    pub fn step_box(&mut self, radius: u64, action: Action) -> Result<(), EngineError> {
        let t = self.turn + 1;
        if let Action::Burn(p) = action {
            if !GridBox::new(radius).contains(p) {
                return Err(EngineError::OutOfBox { turn: t, point: p, radius });
            }
        }
        self.step_region(Rect::square(radius), action)
    }

    /// Advances one turn: the region becomes `region`, fire spreads inside
    /// it, then the activation (if any) is applied.
    pub fn step_region(&mut self, region: Rect, action: Action) -> Result<(), EngineError> {
        let t = self.turn + 1;
        if !region.within(&self.burned.frame()) {
            return Err(EngineError::FrameExceeded { turn: t });
        }
        if let Some(prev) = self.region {
            if !prev.within(&region) {
                return Err(EngineError::RegionShrank { turn: t });
            }
        }
        if let Action::Burn(p) = action {
            if !region.contains(p) {
                return Err(EngineError::OutOfRegion { turn: t, point: p });
            }
        }
        self.burned.spread_within(region, &mut self.scratch);
        if let Some(prov) = &mut self.provenance {
            for entry in prov.iter_mut() {
                entry.cells.spread_within(region, &mut self.scratch);
            }
        }
        if let Action::Burn(p) = action {
            self.burned.insert(p);
            if let Some(prov) = &mut self.provenance {
                let mut cells = BitGrid::new(self.burned.frame());
                cells.insert(p);
                prov.push(Provenance { turn: t, point: p, cells });
            }
        }
        self.region = Some(region);
        self.turn = t;
        Ok(())
    }
}

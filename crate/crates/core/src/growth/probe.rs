//! Empirical probe of the three controlled-growth conditions.

use super::{eval_power_ceil, GrowthError, GrowthFunction};
use crate::rational::Rational;
use serde::Serialize;

pub const HEURISTIC_BANNER: &str =
    "HEURISTIC: a finite probe samples only eps(n) = ceil(n^beta) and finitely many n; it cannot certify an asymptotic property";

const MIN_HORIZON: u64 = 16;

#[derive(Clone, Debug, Serialize)]
pub struct ProbeConfig {
    /// `beta` in the sampled shift family `eps(n) = ceil(n^beta)`.
    pub epsilon_exponent: Rational,
    /// Linear shift `c` for condition (iii).
    pub c_probe: Rational,
    pub grid_start: u64,
    pub grid_ratio: f64,
    /// Condition (ii) is flagged when a tail ratio exceeds `1 + shift_tolerance`.
    pub shift_tolerance: f64,
    /// Condition (iii) is flagged when a tail ratio drops below `1 + min_expansion`.
    pub min_expansion: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            epsilon_exponent: Rational::new(1, 3),
            c_probe: Rational::new(1, 2),
            grid_start: MIN_HORIZON,
            grid_ratio: 1.3,
            shift_tolerance: 0.05,
            min_expansion: 0.05,
        }
    }
}

/// Statistics over the turns `start..end` between two consecutive checkpoints.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeWindow {
    pub start: u64,
    pub end: u64,
    /// Condition (i): `f(m+1) > f(m)` for every `m` in the window.
    pub increasing: bool,
    /// Condition (ii): `max f(m + ceil(m^beta)) / f(m)`.
    pub max_shift_ratio: f64,
    /// Condition (iii): `min f(m + ceil(c m)) / f(m)`.
    pub min_linear_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthProbeReport {
    pub label: &'static str,
    pub function: String,
    pub horizon: u64,
    pub config: ProbeConfig,
    pub windows: Vec<ProbeWindow>,
    /// Index of the first window in the tail half.
    pub tail_from: usize,
    pub tail_increasing: bool,
    pub tail_max_shift_ratio: f64,
    pub tail_min_linear_ratio: f64,
    pub flag_increasing: bool,
    pub flag_shift: bool,
    pub flag_expansion: bool,
}

impl GrowthProbeReport {
    pub fn any_flag(&self) -> bool {
        self.flag_increasing || self.flag_shift || self.flag_expansion
    }
}

fn checkpoint_grid(start: u64, ratio: f64, horizon: u64) -> Vec<u64> {
    let mut grid = vec![start];
    loop {
        let last = *grid.last().unwrap();
        let next = ((last as f64 * ratio).ceil() as u64).max(last + 1);
        if next > horizon {
            break;
        }
        grid.push(next);
    }
    grid
}

/// Probes conditions (i)-(iii) on a geometric checkpoint grid up to `horizon`.
///
/// Every turn is examined; checkpoints only group turns into windows so the
/// tail half is measured multiplicatively.
pub fn probe_controlled_growth(
    f: &GrowthFunction,
    horizon: u64,
    config: &ProbeConfig,
) -> Result<GrowthProbeReport, GrowthError> {
    if horizon < MIN_HORIZON {
        return Err(GrowthError::HorizonTooSmall {
            horizon,
            min: MIN_HORIZON,
        });
    }
    let grid = checkpoint_grid(config.grid_start.max(f.domain_start()), config.grid_ratio, horizon);
    let mut windows = Vec::with_capacity(grid.len());
    for (k, &start) in grid.iter().enumerate() {
        let end = grid.get(k + 1).copied().unwrap_or(horizon + 1);
        let mut w = ProbeWindow {
            start,
            end,
            increasing: true,
            max_shift_ratio: f64::MIN,
            min_linear_ratio: f64::MAX,
        };
        for m in start..end {
            let fm = f.eval(m)?;
            if f.eval(m + 1)? <= fm {
                w.increasing = false;
            }
            let eps = eval_power_ceil(Rational::ONE, config.epsilon_exponent, m)?;
            w.max_shift_ratio = w.max_shift_ratio.max(f.eval(m + eps)? as f64 / fm as f64);
            let lin = eval_power_ceil(config.c_probe, Rational::ONE, m)?;
            w.min_linear_ratio = w.min_linear_ratio.min(f.eval(m + lin)? as f64 / fm as f64);
        }
        windows.push(w);
    }

    let tail_from = windows.len() / 2;
    let tail = &windows[tail_from..];
    let tail_increasing = tail.iter().all(|w| w.increasing);
    let tail_max_shift_ratio = tail.iter().map(|w| w.max_shift_ratio).fold(f64::MIN, f64::max);
    let tail_min_linear_ratio = tail.iter().map(|w| w.min_linear_ratio).fold(f64::MAX, f64::min);
    Ok(GrowthProbeReport {
        label: HEURISTIC_BANNER,
        function: f.describe(),
        horizon,
        config: config.clone(),
        tail_from,
        tail_increasing,
        tail_max_shift_ratio,
        tail_min_linear_ratio,
        flag_increasing: !tail_increasing,
        flag_shift: tail_max_shift_ratio > 1.0 + config.shift_tolerance,
        flag_expansion: tail_min_linear_ratio < 1.0 + config.min_expansion,
        windows,
    })
}

//! Averaged utilities of repeated-game traces.

use super::engine::StageRecord;
use crate::error::{invalid, Error, Result};

/// `(1/T) sum_t u_i(t)`.
pub fn averaged_utility_frg(trace: &[StageRecord], i: usize) -> Result<f64> {
    let u = player_utilities(trace, i)?;
    Ok(u.iter().sum::<f64>() / u.len() as f64)
}

/// Truncated discounted average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountedValue {
    /// `sum_{t <= T} lambda (1 - lambda)^{t-1} u_i(t)`.
    pub value: f64,
    /// Bound on the omitted tail: `(1 - lambda)^T max_t u_i(t)`.
    pub tail_bound: f64,
}

pub fn averaged_utility_drg(trace: &[StageRecord], i: usize, lambda: f64) -> Result<DiscountedValue> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return invalid(format!("lambda must lie in (0, 1], got {lambda}"));
    }
    discounted(&player_utilities(trace, i)?, lambda)
}

/// Discounted average of a utility sequence.
pub fn discounted(u: &[f64], lambda: f64) -> Result<DiscountedValue> {
    if u.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut weight = lambda;
    let mut value = 0.0;
    for &x in u {
        value += weight * x;
        weight *= 1.0 - lambda;
    }
    let tail = (1.0 - lambda).powi(u.len() as i32);
    let max = u.iter().copied().fold(0.0, f64::max);
    Ok(DiscountedValue { value, tail_bound: tail * max })
}

fn player_utilities(trace: &[StageRecord], i: usize) -> Result<Vec<f64>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    trace
        .iter()
        .map(|r| r.utilities.get(i).copied().ok_or_else(|| Error::InvalidConfig(format!("player {i} not in trace"))))
        .collect()
}

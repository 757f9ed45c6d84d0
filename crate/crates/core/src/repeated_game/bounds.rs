//! Horizon and discount bounds that sustain the cooperation plans.
//!
//! All quantities are per-stage utilities in units of `R_i N / sigma^2`, so
//! player rates cancel. For player `i`:
//!
//! * `u_bar  = eta_max f(beta*)/beta*`, the interference-free deviation bound,
//! * `u_op   = eta_min phi(gamma~)`, the worst cooperative payoff,
//! * `u_ne   = eta_min phi(beta*)`, the worst endgame payoff,
//! * `u_pun  = eta_max (f(beta*)/beta*) sigma^2 / (sum_{j != i} P_j^max eta_j^min + sigma^2)`,
//!   the best payoff under maximum-power punishment.
//!
//! The finite horizon needs `T0 >= (u_bar - u_op) / (u_ne - u_pun)` and the
//! discounted game needs
//! `lambda <= eta_min delta / (eta_min delta + eta_max (f(beta*)/beta* - phi(gamma~)))`.

use crate::error::{Error, Result};
use crate::solvers::CharacteristicSinrs;
use crate::static_game::NetworkConfig;

/// Variant of the per-stage punishment loss used in the horizon bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum T0Formula {
    /// Punishment payoff scaled by `sigma^2 / (sum_j P_j^max eta_j^min + sigma^2)`.
    #[default]
    Standard,
    /// Punishment payoff `eta_max f(beta*) / (beta* (sum_j P_j^max eta_j^min + sigma^2))`
    /// without the noise factor; only meaningful when `sigma^2 = 1 W`.
    Unscaled,
    /// Standard bound with `u_bar` replaced by the exact best deviation
    /// against the operating point, `eta_max (f(beta*)/beta*) (1 - (K-1) gamma~/N)`.
    ExactDeviation,
}

/// Terms of the horizon bound for one player.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T0Terms {
    pub numerator: f64,
    pub denominator: f64,
    /// `max(1, ceil(numerator / denominator))`.
    pub t0: u64,
}

/// Network-level bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgBounds {
    pub t0: u64,
    pub lambda_max: f64,
    pub delta: f64,
}

fn interference_floor(cfg: &NetworkConfig, i: usize) -> f64 {
    cfg.sigma2
        + (0..cfg.k())
            .filter(|&j| j != i)
            .map(|j| cfg.p_max[j] * cfg.eta_min[j])
            .sum::<f64>()
}

/// Horizon-bound terms for player `i`.
pub fn t0_terms(cfg: &NetworkConfig, s: &CharacteristicSinrs, i: usize, formula: T0Formula) -> Result<T0Terms> {
    if i >= cfg.k() {
        return Err(Error::InvalidConfig(format!("player {i} out of range")));
    }
    let solo = s.solo_scale();
    let (lo, hi) = (cfg.eta_min[i], cfg.eta_max[i]);
    let floor = interference_floor(cfg, i);
    let punish = match formula {
        T0Formula::Standard | T0Formula::ExactDeviation => hi * solo * cfg.sigma2 / floor,
        T0Formula::Unscaled => hi * solo / floor,
    };
    let deviation = match formula {
        T0Formula::ExactDeviation => hi * solo * (1.0 - (s.k as f64 - 1.0) * s.gamma_tilde / s.n),
        _ => hi * solo,
    };
    let numerator = deviation - lo * s.phi(s.gamma_tilde);
    let denominator = lo * s.phi(s.beta_star) - punish;
    if !(denominator > 0.0) {
        return Err(Error::NoFiniteT0 { player: i, denominator });
    }
    let ratio = numerator / denominator;
    let t0 = if ratio <= 1.0 { 1 } else { ratio.ceil() as u64 };
    Ok(T0Terms { numerator, denominator, t0 })
}

/// `max_i T0(i)`: the horizon bound that deters every player.
pub fn t0_bound(cfg: &NetworkConfig, s: &CharacteristicSinrs) -> Result<u64> {
    t0_bound_with(cfg, s, T0Formula::Standard)
}

pub fn t0_bound_with(cfg: &NetworkConfig, s: &CharacteristicSinrs, formula: T0Formula) -> Result<u64> {
    let mut best = 0;
    for i in 0..cfg.k() {
        best = best.max(t0_terms(cfg, s, i, formula)?.t0);
    }
    Ok(best)
}

/// Continuous (un-rounded) `max_i numerator/denominator`.
pub fn t0_ratio(cfg: &NetworkConfig, s: &CharacteristicSinrs, formula: T0Formula) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for i in 0..cfg.k() {
        let t = t0_terms(cfg, s, i, formula)?;
        best = best.max(t.numerator / t.denominator);
    }
    Ok(best)
}

/// Discount bound for player `i`.
pub fn lambda_for_player(cfg: &NetworkConfig, s: &CharacteristicSinrs, i: usize) -> Result<f64> {
    let delta = checked_delta(s)?;
    let (lo, hi) = (cfg.eta_min[i], cfg.eta_max[i]);
    let gain = lo * delta;
    let temptation = hi * (s.solo_scale() - s.phi(s.gamma_tilde));
    if gain == 0.0 {
        return Ok(0.0);
    }
    Ok(gain / (gain + temptation))
}

/// `min_i lambda_max(i)`.
pub fn lambda_bound(cfg: &NetworkConfig, s: &CharacteristicSinrs) -> Result<f64> {
    let mut best = f64::INFINITY;
    for i in 0..cfg.k() {
        best = best.min(lambda_for_player(cfg, s, i)?);
    }
    Ok(best)
}

fn checked_delta(s: &CharacteristicSinrs) -> Result<f64> {
    let delta = s.delta();
    // phi(gamma~) is a maximum of phi, so only rounding can make delta negative.
    if delta < -1e-12 * s.phi(s.gamma_tilde).abs() {
        return Err(Error::Internal(format!("negative cooperation gain {delta}")));
    }
    Ok(delta.max(0.0))
}

pub fn rg_bounds(cfg: &NetworkConfig, s: &CharacteristicSinrs) -> Result<RgBounds> {
    Ok(RgBounds { t0: t0_bound(cfg, s)?, lambda_max: lambda_bound(cfg, s)?, delta: checked_delta(s)? })
}

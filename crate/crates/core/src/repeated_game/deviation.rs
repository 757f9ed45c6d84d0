//! Unilateral deviation and minmax utilities.

use crate::efficiency::EfficiencyModel;
use crate::static_game::{ChannelState, NetworkConfig, PowerProfile};

/// Best unilateral response of one player.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestDeviation {
    pub power: f64,
    pub utility: f64,
    /// The power needed for SINR `beta*` exceeded the cap and was clipped.
    pub saturated: bool,
}

/// Received interference `sum_{j != i} p_j |g_j|^2 + sigma^2` seen by player `i`.
pub fn interference(cfg: &NetworkConfig, ch: &ChannelState, profile: &PowerProfile, i: usize) -> f64 {
    cfg.sigma2
        + profile
            .0
            .iter()
            .zip(&ch.gains2)
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, (p, g))| p * g)
            .sum::<f64>()
}

/// Utility of player `i` transmitting `p` against interference `noise`.
fn utility_against(cfg: &NetworkConfig, model: &EfficiencyModel, gain2: f64, i: usize, p: f64, noise: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    let x = cfg.spreading * p * gain2 / noise;
    cfg.rates[i] * model.eval_unchecked(x) / p
}

/// Power reaching SINR `beta*` against the others' powers in `others`
/// (entry `i` is ignored), capped at `P_i^max`.
///
/// `f(x)/x` is unimodal with its peak at `beta*`, so the capped power is
/// optimal whenever the uncapped one is infeasible.
pub fn best_deviation(
    cfg: &NetworkConfig,
    model: &EfficiencyModel,
    ch: &ChannelState,
    others: &PowerProfile,
    i: usize,
    beta_star: f64,
) -> BestDeviation {
    let noise = interference(cfg, ch, others, i);
    let g = ch.gains2[i];
    let required = beta_star * noise / (cfg.spreading * g);
    let (power, saturated) = if required > cfg.p_max[i] { (cfg.p_max[i], true) } else { (required, false) };
    BestDeviation { power, utility: utility_against(cfg, model, g, i, power, noise), saturated }
}

/// `u_bar_i = R_i N |g_i|^2 f(beta*) / (sigma^2 beta*)`: best utility over all
/// profiles, attained without interference.
pub fn deviation_upper_bound(cfg: &NetworkConfig, model: &EfficiencyModel, ch: &ChannelState, i: usize, beta_star: f64) -> f64 {
    cfg.rates[i] * cfg.spreading * ch.gains2[i] * model.eval_unchecked(beta_star) / (cfg.sigma2 * beta_star)
}

/// `min_{p_-i} max_{p_i} u_i`: the best response when all others transmit at
/// full power. Unsaturated, this is
/// `R_i N f(beta*) |g_i|^2 / (beta* (sum_{j != i} P_j^max |g_j|^2 + sigma^2))`.
pub fn minmax_utility(cfg: &NetworkConfig, model: &EfficiencyModel, ch: &ChannelState, i: usize, beta_star: f64) -> BestDeviation {
    let full = PowerProfile(cfg.p_max.clone());
    best_deviation(cfg, model, ch, &full, i, beta_star)
}

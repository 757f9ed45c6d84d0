//! The one-shot power-control game.
//!
//! `K` transmitters share a spread-spectrum uplink with spreading factor `N`.
//! Player `i` picks a power `p_i` in `[0, P_i^max]`; with received powers
//! (normalized actions) `a_j = p_j |g_j|^2` its SINR is
//!
//! ```text
//! SINR_i = N a_i / (sum_{j != i} a_j + sigma^2)
//! ```
//!
//! and its energy efficiency is `u_i = R_i f(SINR_i) / p_i` bit/J. All
//! closed-form equilibria below assume the non-saturated regime and fail with
//! [`Error::SaturatedRegime`] rather than clipping.

use serde::{Deserialize, Serialize};

use crate::efficiency::EfficiencyModel;
use crate::error::{invalid, Error, Result};
use crate::solvers::CharacteristicSinrs;

/// Static network parameters. Vectors are indexed by player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Spreading factor `N >= 1`.
    pub spreading: f64,
    /// Receiver noise power `sigma^2` (W).
    pub sigma2: f64,
    /// Transmission rates `R_i` (bit/s).
    pub rates: Vec<f64>,
    /// Power caps `P_i^max` (W).
    pub p_max: Vec<f64>,
    /// Lower bounds `eta_i^min` on `|g_i|^2`.
    pub eta_min: Vec<f64>,
    /// Upper bounds `eta_i^max` on `|g_i|^2`.
    pub eta_max: Vec<f64>,
}

impl NetworkConfig {
    /// Identical players.
    pub fn symmetric(k: usize, spreading: f64, sigma2: f64, rate: f64, p_max: f64, eta_min: f64, eta_max: f64) -> Result<Self> {
        let cfg = Self {
            spreading,
            sigma2,
            rates: vec![rate; k],
            p_max: vec![p_max; k],
            eta_min: vec![eta_min; k],
            eta_max: vec![eta_max; k],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn k(&self) -> usize {
        self.rates.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.rates.len();
        if k == 0 {
            return invalid("network needs at least one player");
        }
        if self.p_max.len() != k || self.eta_min.len() != k || self.eta_max.len() != k {
            return invalid("per-player vectors must all have length K");
        }
        if !(self.spreading >= 1.0 && self.spreading.is_finite()) {
            return invalid(format!("spreading factor must be >= 1, got {}", self.spreading));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return invalid(format!("noise power must be positive, got {}", self.sigma2));
        }
        for i in 0..k {
            let positive = |v: f64| v > 0.0 && v.is_finite();
            if !positive(self.rates[i]) || !positive(self.p_max[i]) || !positive(self.eta_min[i]) || !positive(self.eta_max[i]) {
                return invalid(format!("player {i}: rates, caps and gain bounds must be positive"));
            }
            if self.eta_min[i] > self.eta_max[i] {
                return invalid(format!("player {i}: eta_min > eta_max"));
            }
        }
        Ok(())
    }

    /// Upper end of the public-signal range: `sigma^2 + sum_i eta_i^max P_i^max`.
    pub fn max_public_signal(&self) -> f64 {
        self.sigma2 + self.eta_max.iter().zip(&self.p_max).map(|(e, p)| e * p).sum::<f64>()
    }
}

/// Channel power gains `|g_i|^2` for one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub gains2: Vec<f64>,
}

impl ChannelState {
    pub fn new(gains2: Vec<f64>) -> Self {
        Self { gains2 }
    }

    /// Checks `eta_i^min <= |g_i|^2 <= eta_i^max`.
    pub fn check_bounds(&self, cfg: &NetworkConfig) -> Result<()> {
        if self.gains2.len() != cfg.k() {
            return invalid(format!("channel has {} gains for {} players", self.gains2.len(), cfg.k()));
        }
        for (i, &g) in self.gains2.iter().enumerate() {
            if !(g >= cfg.eta_min[i] && g <= cfg.eta_max[i]) {
                return invalid(format!("player {i}: gain {g} outside [{}, {}]", cfg.eta_min[i], cfg.eta_max[i]));
            }
        }
        Ok(())
    }
}

/// Transmit powers (W).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile(pub Vec<f64>);

impl PowerProfile {
    pub fn check_caps(&self, cfg: &NetworkConfig) -> Result<()> {
        for (i, (&p, &cap)) in self.0.iter().zip(&cfg.p_max).enumerate() {
            if !(p >= 0.0 && p <= cap) {
                return invalid(format!("player {i}: power {p} outside [0, {cap}]"));
            }
        }
        Ok(())
    }

    /// Normalized actions `a_i = p_i |g_i|^2`.
    pub fn received(&self, ch: &ChannelState) -> Vec<f64> {
        self.0.iter().zip(&ch.gains2).map(|(p, g)| p * g).collect()
    }
}

/// Energy efficiencies (bit/J).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityProfile(pub Vec<f64>);

impl UtilityProfile {
    /// `u_i / |g_i|^2`.
    pub fn normalized(&self, ch: &ChannelState) -> Vec<f64> {
        self.0.iter().zip(&ch.gains2).map(|(u, g)| u / g).collect()
    }
}

fn spread_sinr(n: f64, own: f64, total: f64, sigma2: f64) -> f64 {
    if own == 0.0 {
        0.0
    } else {
        n * own / (total - own + sigma2)
    }
}

/// SINR of player `i`.
pub fn sinr(cfg: &NetworkConfig, ch: &ChannelState, profile: &PowerProfile, i: usize) -> f64 {
    let received = profile.received(ch);
    let total: f64 = received.iter().sum();
    spread_sinr(cfg.spreading, received[i], total, cfg.sigma2)
}

/// SINRs of all players.
pub fn sinrs(cfg: &NetworkConfig, ch: &ChannelState, profile: &PowerProfile) -> Vec<f64> {
    let received = profile.received(ch);
    let total: f64 = received.iter().sum();
    received.iter().map(|&a| spread_sinr(cfg.spreading, a, total, cfg.sigma2)).collect()
}

/// `u_i = R_i f(SINR_i) / p_i`, with `u_i = 0` at `p_i = 0`.
pub fn utilities(cfg: &NetworkConfig, model: &EfficiencyModel, ch: &ChannelState, profile: &PowerProfile) -> UtilityProfile {
    let s = sinrs(cfg, ch, profile);
    UtilityProfile(
        profile
            .0
            .iter()
            .zip(&s)
            .zip(&cfg.rates)
            .map(|((&p, &x), &r)| if p == 0.0 { 0.0 } else { r * model.eval_unchecked(x) / p })
            .collect(),
    )
}

/// Received power `a` at which `K` equal actions give every player SINR `x`.
fn equal_action_level(cfg: &NetworkConfig, x: f64) -> Result<f64> {
    let k = cfg.k();
    let slack = cfg.spreading - (k as f64 - 1.0) * x;
    if slack <= 0.0 {
        return Err(Error::NoNashEquilibrium { k, n: cfg.spreading, beta_star: x });
    }
    Ok(cfg.sigma2 * x / slack)
}

fn equal_action_profile(cfg: &NetworkConfig, ch: &ChannelState, x: f64) -> Result<PowerProfile> {
    let a = equal_action_level(cfg, x)?;
    let powers = ch.gains2.iter().map(|g| a / g).collect::<Vec<_>>();
    check_saturation(cfg, &powers)?;
    Ok(PowerProfile(powers))
}

fn check_saturation(cfg: &NetworkConfig, powers: &[f64]) -> Result<()> {
    for (i, (&p, &cap)) in powers.iter().zip(&cfg.p_max).enumerate() {
        if p > cap {
            return Err(Error::SaturatedRegime { player: i, required: p, cap });
        }
    }
    Ok(())
}

/// Received power at the one-shot Nash equilibrium.
pub fn ne_action(cfg: &NetworkConfig, beta_star: f64) -> Result<f64> {
    equal_action_level(cfg, beta_star)
}

/// Received power at the cooperative operating point.
pub fn op_action(cfg: &NetworkConfig, gamma_tilde: f64) -> Result<f64> {
    equal_action_level(cfg, gamma_tilde)
}

/// One-shot Nash equilibrium `p_i* = (sigma^2/|g_i|^2) beta* / (N - (K-1) beta*)`.
pub fn ne_profile(cfg: &NetworkConfig, ch: &ChannelState, beta_star: f64) -> Result<PowerProfile> {
    equal_action_profile(cfg, ch, beta_star)
}

/// Operating point `p~_i = (sigma^2/|g_i|^2) gamma~ / (N - (K-1) gamma~)`.
pub fn op_profile(cfg: &NetworkConfig, ch: &ChannelState, gamma_tilde: f64) -> Result<PowerProfile> {
    equal_action_profile(cfg, ch, gamma_tilde)
}

/// Stackelberg equilibrium with one leader.
#[derive(Debug, Clone, PartialEq)]
pub struct StackelbergOutcome {
    pub leader: usize,
    pub powers: PowerProfile,
    /// Closed-form utilities: `u^L` for the leader, `u^F` for the followers.
    pub utilities: UtilityProfile,
}

/// Leader/follower powers and utilities.
///
/// With `b = beta*/N`, `c = gamma*/N` and `D = 1 - (K-1) c b - (K-2) b`:
/// the leader receives `sigma^2 c (1 + b) / D` and every follower
/// `sigma^2 b (1 + c) / D`, so followers sit at `beta*` and the leader at
/// `gamma*`.
pub fn se_profiles(
    cfg: &NetworkConfig,
    model: &EfficiencyModel,
    ch: &ChannelState,
    beta_star: f64,
    gamma_star: f64,
    leader: usize,
) -> Result<StackelbergOutcome> {
    let k = cfg.k();
    if leader >= k {
        return invalid(format!("leader index {leader} out of range for {k} players"));
    }
    let n = cfg.spreading;
    let b = beta_star / n;
    let c = gamma_star / n;
    let d = 1.0 - (k as f64 - 1.0) * c * b - (k as f64 - 2.0) * b;
    if d <= 0.0 {
        return Err(Error::IllPosedHierarchy(format!("1 - (K-1) gamma* beta* - (K-2) beta* = {d} <= 0 (spread by N)")));
    }
    let a_leader = cfg.sigma2 * c * (1.0 + b) / d;
    let a_follower = cfg.sigma2 * b * (1.0 + c) / d;

    let mut powers = Vec::with_capacity(k);
    let mut utils = Vec::with_capacity(k);
    for i in 0..k {
        let (a, x) = if i == leader { (a_leader, gamma_star) } else { (a_follower, beta_star) };
        let p = a / ch.gains2[i];
        powers.push(p);
        utils.push(cfg.rates[i] * model.eval_unchecked(x) / p);
    }
    check_saturation(cfg, &powers)?;
    Ok(StackelbergOutcome { leader, powers: PowerProfile(powers), utilities: UtilityProfile(utils) })
}

/// `omega = sigma^2 + sum_i |g_i|^2 p_i`.
pub fn public_signal(cfg: &NetworkConfig, ch: &ChannelState, profile: &PowerProfile) -> f64 {
    cfg.sigma2 + profile.received(ch).iter().sum::<f64>()
}

/// Rebuilds the public signal from one player's own power, gain and SINR:
/// `omega = a_i (SINR_i + N) / SINR_i`.
pub fn reconstruct_public_signal(p: f64, gain2: f64, sinr: f64, n: f64) -> Result<f64> {
    if !(sinr > 0.0) {
        return Err(Error::UndefinedSignal);
    }
    Ok(p * gain2 * (sinr + n) / sinr)
}

/// NE, OP and SE data for one channel state.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibria {
    pub ne: PowerProfile,
    pub ne_utilities: UtilityProfile,
    pub op: PowerProfile,
    pub op_utilities: UtilityProfile,
    pub se: StackelbergOutcome,
}

/// Builds every closed-form profile for one channel state.
pub fn equilibria(
    cfg: &NetworkConfig,
    sinrs_: &CharacteristicSinrs,
    ch: &ChannelState,
    leader: usize,
) -> Result<Equilibria> {
    let model = &sinrs_.model;
    let ne = ne_profile(cfg, ch, sinrs_.beta_star)?;
    let op = op_profile(cfg, ch, sinrs_.gamma_tilde)?;
    let se = se_profiles(cfg, model, ch, sinrs_.beta_star, sinrs_.gamma_star, leader)?;
    Ok(Equilibria {
        ne_utilities: utilities(cfg, model, ch, &ne),
        op_utilities: utilities(cfg, model, ch, &op),
        ne,
        op,
        se,
    })
}

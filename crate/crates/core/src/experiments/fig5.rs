//! Welfare ratio of the finitely repeated game to the one-shot NE against `T`.
//!
//! On the cooperative path every player's stage utility is
//! `R_i |g_i(t)|^2 N phi(x) / sigma^2`, with `x = gamma~` for the first
//! `T - T0` stages and `x = beta*` afterwards. With `G(t) = sum_i R_i |g_i(t)|^2`
//! and prefix sums `S`, the per-draw ratio is
//!
//! ```text
//! [phi(gamma~) S(T - T0) + phi(beta*) (S(T) - S(T - T0))] / (phi(beta*) S(T))
//! ```
//!
//! which tends to `phi(gamma~)/phi(beta*)` as `T` grows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_body, header, mean_se, ExperimentConfig};
use crate::channel::{ChannelMode, ChannelProcess};
use crate::efficiency::EfficiencyModel;
use crate::error::{invalid, Error, Result};
use crate::numfmt::num;
use crate::repeated_game::bounds::{t0_bound, t0_ratio, T0Formula};
use crate::solvers::CharacteristicSinrs;
use crate::static_game::NetworkConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig5Config {
    pub k: usize,
    pub m: u32,
    pub n: f64,
    pub sigma2: f64,
    pub p_max: f64,
    pub rate: f64,
    pub dynamics_db: f64,
    /// Absolute lower gain bound; `null` calibrates it so that `T0 = t0_target`.
    pub eta_min: Option<f64>,
    pub t0_target: u64,
    pub mean_gain2: f64,
    pub t_grid: Vec<usize>,
    pub replicas: usize,
}

impl Default for Fig5Config {
    fn default() -> Self {
        let mut t_grid = vec![1000, 2000];
        t_grid.extend((2852..=15000).step_by(500));
        t_grid.push(15000);
        Self {
            k: 35,
            m: 10,
            n: 128.0,
            sigma2: 1e-5,
            p_max: 1e-2,
            rate: 1.0,
            dynamics_db: 20.0,
            eta_min: None,
            t0_target: 2852,
            mean_gain2: 1.0,
            t_grid,
            replicas: 1000,
        }
    }
}

impl Fig5Config {
    pub fn network(&self, eta_min: f64) -> Result<NetworkConfig> {
        let ratio = 10f64.powf(self.dynamics_db / 10.0);
        NetworkConfig::symmetric(self.k, self.n, self.sigma2, self.rate, self.p_max, eta_min, eta_min * ratio)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig5Row {
    pub t: usize,
    pub mean: f64,
    pub se: f64,
    /// Ratio of expected welfares, `((T - T0) phi~ + T0 phi*) / (T phi*)`.
    pub expected: f64,
    pub flag: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig5Result {
    pub t0: u64,
    pub eta_min: f64,
    /// `eta_min` solving `T0 = t0_target`, when calibrated.
    pub calibrated_eta_min: Option<f64>,
    /// `T0` at each decade of `eta_min`; `None` where no finite bound exists.
    pub decades: Vec<(f64, Option<u64>)>,
    /// `phi(gamma~)/phi(beta*)`.
    pub limit: f64,
    pub rows: Vec<Fig5Row>,
}

/// `T0` at `eta_min = 10^j` for `j` in `-3..=3`.
pub fn eta_min_decades(c: &Fig5Config, s: &CharacteristicSinrs) -> Result<Vec<(f64, Option<u64>)>> {
    (-3..=3)
        .map(|j| {
            let eta = 10f64.powi(j);
            match t0_bound(&c.network(eta)?, s) {
                Ok(t) => Ok((eta, Some(t))),
                Err(Error::NoFiniteT0 { .. }) => Ok((eta, None)),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Smallest `eta_min` in `[1e-3, 1e3]` with `T0 <= target`; `T0` decreases in `eta_min`.
pub fn calibrate_eta_min(c: &Fig5Config, s: &CharacteristicSinrs, target: u64) -> Result<f64> {
    let ok = |log_eta: f64| -> bool {
        c.network(log_eta.exp()).ok().and_then(|cfg| t0_ratio(&cfg, s, T0Formula::Standard).ok()).is_some_and(|r| r.ceil() <= target as f64)
    };
    let (mut lo, mut hi) = (1e-3f64.ln(), 1e3f64.ln());
    if !ok(hi) || ok(lo) {
        return invalid(format!("no eta_min in [1e-3, 1e3] yields T0 = {target}"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}

/// Per-draw ratio from the prefix sums `prefix[t] = S(t)` (with `prefix[0] = 0`).
pub fn frg_ratio(prefix: &[f64], t: usize, t0: usize, phi_op: f64, phi_ne: f64) -> f64 {
    if t <= t0 {
        return 1.0;
    }
    let coop = prefix[t - t0];
    (phi_op * coop + phi_ne * (prefix[t] - coop)) / (phi_ne * prefix[t])
}

/// Prefix sums of `G(t) = sum_i R_i |g_i(t)|^2` for `t = 0..=horizon`.
pub fn gain_prefix_sums(process: &ChannelProcess, rates: &[f64], horizon: usize) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(horizon + 1);
    prefix.push(0.0);
    let mut g = vec![0.0; rates.len()];
    let mut acc = 0.0;
    for t in 1..=horizon {
        process.draw_into(t, &mut g);
        acc += g.iter().zip(rates).map(|(g, r)| g * r).sum::<f64>();
        prefix.push(acc);
    }
    prefix
}

pub fn fig5_frg_ratio_vs_t(c: &Fig5Config, seed: u64) -> Result<Fig5Result> {
    if c.t_grid.is_empty() || c.replicas == 0 {
        return invalid("fig5 needs a nonempty T grid and at least one replica");
    }
    let model = EfficiencyModel::packet(c.m)?;
    let s = CharacteristicSinrs::solve(model, c.k, c.n)?;
    let decades = eta_min_decades(c, &s)?;
    let (eta_min, calibrated) = match c.eta_min {
        Some(e) => (e, None),
        None => {
            let e = calibrate_eta_min(c, &s, c.t0_target)?;
            (e, Some(e))
        }
    };
    let cfg = c.network(eta_min)?;
    let t0 = t0_bound(&cfg, &s)?;
    let phi_op = s.phi(s.gamma_tilde);
    let phi_ne = s.phi(s.beta_star);
    let process = ChannelProcess::for_network(&cfg, ChannelMode::RedrawPerStage, c.mean_gain2, seed)?;
    let horizon = *c.t_grid.iter().max().expect("nonempty grid");
    let t0u = t0 as usize;

    let per_replica: Vec<Vec<f64>> = (0..c.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let prefix = gain_prefix_sums(&process.with_replica(r), &cfg.rates, horizon);
            c.t_grid.iter().map(|&t| frg_ratio(&prefix, t, t0u, phi_op, phi_ne)).collect()
        })
        .collect();

    let rows = c
        .t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let samples: Vec<f64> = per_replica.iter().map(|v| v[j]).collect();
            let (mean, se) = mean_se(&samples);
            let expected = if t <= t0u { 1.0 } else { ((t - t0u) as f64 * phi_op + t0 as f64 * phi_ne) / (t as f64 * phi_ne) };
            Fig5Row { t, mean, se, expected, flag: if t <= t0u { "no_cooperation" } else { "" } }
        })
        .collect();

    Ok(Fig5Result { t0, eta_min, calibrated_eta_min: calibrated, decades, limit: phi_op / phi_ne, rows })
}

pub(crate) fn render(config: &ExperimentConfig, r: &Fig5Result, seed: u64) -> Result<String> {
    let mut extra = vec![format!("t0={}", r.t0), format!("eta_min={}", num(r.eta_min)), format!("limit={}", num(r.limit))];
    if let Some(e) = r.calibrated_eta_min {
        extra.push(format!("calibrated_eta_min={}", num(e)));
    }
    for (eta, t0) in &r.decades {
        extra.push(format!("decade eta_min={} t0={}", num(*eta), t0.map_or("inf".to_string(), |t| t.to_string())));
    }
    let body = csv_body(
        &["t", "t0", "ratio_mean", "ratio_se", "ratio_expected", "limit", "flag"],
        r.rows.iter().map(|row| {
            vec![row.t.to_string(), r.t0.to_string(), num(row.mean), num(row.se), num(row.expected), num(r.limit), row.flag.to_string()]
        }),
    )?;
    Ok(header(config, seed, &extra) + &body)
}

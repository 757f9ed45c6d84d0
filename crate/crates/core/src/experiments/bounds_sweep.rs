//! Admissible channel-gain dynamics against the horizon and the discount factor.
//!
//! For each network the gain bounds are `[eta_min, r eta_min]`; the runner
//! bisects on `log r` for the largest ratio whose bound still admits the
//! requested `T` (resp. `lambda`). Both bounds are monotone in `r`.

use serde::{Deserialize, Serialize};

use super::{csv_body, header, ExperimentConfig};
use crate::channel::dynamics_db;
use crate::efficiency::EfficiencyModel;
use crate::error::{invalid, Result};
use crate::numfmt::num;
use crate::repeated_game::bounds::{lambda_bound, t0_ratio, T0Formula};
use crate::solvers::CharacteristicSinrs;
use crate::static_game::NetworkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepNetwork {
    pub k: usize,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSweepConfig {
    /// Packet length of `f(x) = (1 - e^{-x})^M`.
    pub m: u32,
    pub networks: Vec<SweepNetwork>,
    pub sigma2: f64,
    pub p_max: f64,
    pub eta_min: f64,
    pub rate: f64,
    /// Horizons (Fig. 2).
    pub t_grid: Vec<usize>,
    /// Discount factors (Fig. 3).
    pub lambda_grid: Vec<f64>,
    /// Upper end of the ratio search.
    pub max_ratio: f64,
}

impl BoundsSweepConfig {
    fn base() -> Self {
        Self {
            m: 2,
            networks: vec![SweepNetwork { k: 2, n: 2.0 }, SweepNetwork { k: 4, n: 5.0 }, SweepNetwork { k: 10, n: 12.0 }],
            sigma2: 1e-5,
            p_max: 1e-2,
            eta_min: 1.0,
            rate: 1.0,
            t_grid: Vec::new(),
            lambda_grid: Vec::new(),
            max_ratio: 1e6,
        }
    }

    pub fn fig2() -> Self {
        Self {
            t_grid: vec![1, 2, 3, 5, 7, 10, 15, 20, 30, 50, 70, 100, 150, 200, 300, 500, 700, 1000],
            ..Self::base()
        }
    }

    pub fn fig3() -> Self {
        Self {
            lambda_grid: vec![0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99],
            ..Self::base()
        }
    }

    fn validate(&self, grid_len: usize) -> Result<()> {
        if self.networks.is_empty() || grid_len == 0 {
            return invalid("sweep needs at least one network and one grid value");
        }
        if !(self.max_ratio > 1.0) {
            return invalid("max_ratio must exceed 1");
        }
        Ok(())
    }

    fn network(&self, net: SweepNetwork, ratio: f64) -> Result<NetworkConfig> {
        NetworkConfig::symmetric(net.k, net.n, self.sigma2, self.rate, self.p_max, self.eta_min, self.eta_min * ratio)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub n: f64,
    /// `T` or `lambda`.
    pub x: f64,
    pub max_ratio: f64,
    pub max_db: f64,
    /// `""`, `"none"` (not even constant gains qualify) or `"capped"`.
    pub flag: &'static str,
}

/// Largest `r` in `[1, hi]` with `ok(r)`, assuming `ok` is monotone decreasing.
fn largest_admissible(ok: impl Fn(f64) -> bool, hi: f64) -> (f64, &'static str) {
    if !ok(1.0) {
        return (1.0, "none");
    }
    if ok(hi) {
        return (hi, "capped");
    }
    let (mut lo, mut up) = (0.0f64, hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if mid <= lo || mid >= up {
            break;
        }
        if ok(mid.exp()) {
            lo = mid;
        } else {
            up = mid;
        }
    }
    (lo.exp(), "")
}

fn sweep(cfg: &BoundsSweepConfig, grid: &[f64], ok: impl Fn(&NetworkConfig, &CharacteristicSinrs, f64) -> bool) -> Result<Vec<SweepRow>> {
    cfg.validate(grid.len())?;
    let model = EfficiencyModel::packet(cfg.m)?;
    let mut rows = Vec::new();
    for &net in &cfg.networks {
        let s = CharacteristicSinrs::solve(model, net.k, net.n)?;
        cfg.network(net, 1.0)?;
        for &x in grid {
            let (r, flag) = largest_admissible(|r| cfg.network(net, r).map(|c| ok(&c, &s, x)).unwrap_or(false), cfg.max_ratio);
            rows.push(SweepRow {
                k: net.k,
                n: net.n,
                x,
                max_ratio: r,
                max_db: if flag == "none" { 0.0 } else { dynamics_db(1.0, r) },
                flag,
            });
        }
    }
    Ok(rows)
}

/// Largest admissible dynamics such that the horizon bound is at most `T`.
pub fn fig2_dynamics_vs_t(cfg: &BoundsSweepConfig) -> Result<Vec<SweepRow>> {
    let grid: Vec<f64> = cfg.t_grid.iter().map(|&t| t as f64).collect();
    sweep(cfg, &grid, |c, s, t| t0_ratio(c, s, T0Formula::Standard).is_ok_and(|r| r <= t))
}

/// Largest admissible dynamics such that the discount bound is at least `lambda`.
pub fn fig3_dynamics_vs_lambda(cfg: &BoundsSweepConfig) -> Result<Vec<SweepRow>> {
    sweep(cfg, &cfg.lambda_grid, |c, s, l| lambda_bound(c, s).is_ok_and(|b| b >= l))
}

pub(crate) fn render(config: &ExperimentConfig, rows: &[SweepRow], seed: u64, x_name: &str) -> Result<String> {
    let body = csv_body(
        &["k", "n", x_name, "max_ratio", "max_db", "flag"],
        rows.iter().map(|r| vec![r.k.to_string(), num(r.n), num(r.x), num(r.max_ratio), num(r.max_db), r.flag.to_string()]),
    )?;
    Ok(header(config, seed, &[]) + &body)
}

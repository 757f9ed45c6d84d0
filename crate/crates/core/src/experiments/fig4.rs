//! Relative social-welfare gain of the operating point and of the Stackelberg
//! equilibrium over the one-shot NE, against the system load `alpha = K/N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_body, header, mean_se, ExperimentConfig};
use crate::channel::{ChannelMode, ChannelProcess};
use crate::efficiency::EfficiencyModel;
use crate::error::{invalid, Error, Result};
use crate::numfmt::num;
use crate::pareto::social_welfare;
use crate::solvers::CharacteristicSinrs;
use crate::static_game::{equilibria, NetworkConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig4Config {
    pub n: f64,
    /// Packet lengths, one curve each.
    pub ms: Vec<u32>,
    /// Player counts; empty means every admissible `K`.
    pub k_grid: Vec<usize>,
    pub replicas: usize,
    pub sigma2: f64,
    pub p_max: f64,
    pub rate: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub mean_gain2: f64,
    pub leader: usize,
}

impl Default for Fig4Config {
    fn default() -> Self {
        Self {
            n: 128.0,
            ms: vec![10, 100],
            k_grid: Vec::new(),
            replicas: 10_000,
            sigma2: 1e-5,
            p_max: 10.0,
            rate: 1.0,
            eta_min: 0.1,
            eta_max: 10.0,
            mean_gain2: 1.0,
            leader: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Row {
    pub m: u32,
    pub k: usize,
    pub alpha: f64,
    pub op_gain: (f64, f64),
    pub se_gain: (f64, f64),
    /// `1/beta* + 1/N`.
    pub alpha_max: f64,
    /// Why the point was skipped, if it was.
    pub note: String,
}

impl Fig4Row {
    pub fn skipped(&self) -> bool {
        !self.note.is_empty()
    }
}

fn admissible_ks(s_beta: f64, n: f64) -> Vec<usize> {
    let limit = n / s_beta + 1.0;
    (2..).take_while(|&k| (k as f64) < limit).collect()
}

/// One row per `(M, K)`; rows outside `2 <= K < N/beta* + 1` carry a note.
pub fn fig4_welfare_vs_load(c: &Fig4Config, seed: u64) -> Result<Vec<Fig4Row>> {
    if c.ms.is_empty() || c.replicas == 0 {
        return invalid("fig4 needs at least one M and one replica");
    }
    let mut rows = Vec::new();
    for &m in &c.ms {
        let model = EfficiencyModel::packet(m)?;
        let beta = crate::solvers::solve_beta_star(&model)?;
        let alpha_max = 1.0 / beta + 1.0 / c.n;
        let ks = if c.k_grid.is_empty() { admissible_ks(beta, c.n) } else { c.k_grid.clone() };
        for k in ks {
            let alpha = k as f64 / c.n;
            let mut row = Fig4Row { m, k, alpha, op_gain: (f64::NAN, 0.0), se_gain: (f64::NAN, 0.0), alpha_max, note: String::new() };
            if k < 2 || (k as f64) >= c.n / beta + 1.0 {
                row.note = "outside 2 <= K < N/beta* + 1".into();
                rows.push(row);
                continue;
            }
            match load_point(c, model, k, seed) {
                Ok((op, se)) => {
                    row.op_gain = op;
                    row.se_gain = se;
                }
                Err(e @ (Error::SaturatedRegime { .. } | Error::IllPosedHierarchy(_))) => row.note = e.to_string(),
                Err(e) => return Err(e),
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

fn load_point(c: &Fig4Config, model: EfficiencyModel, k: usize, seed: u64) -> Result<((f64, f64), (f64, f64))> {
    let s = CharacteristicSinrs::solve(model, k, c.n)?;
    let cfg = NetworkConfig::symmetric(k, c.n, c.sigma2, c.rate, c.p_max, c.eta_min, c.eta_max)?;
    let process = ChannelProcess::for_network(&cfg, ChannelMode::ConstantPerGame, c.mean_gain2, seed)?;
    if c.leader >= k {
        return invalid(format!("leader {} out of range for K = {k}", c.leader));
    }
    let gains: Vec<Result<(f64, f64)>> = (0..c.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let ch = process.with_replica(r).draw(1);
            let e = equilibria(&cfg, &s, &ch, c.leader)?;
            let w_ne = social_welfare(&e.ne_utilities);
            Ok(((social_welfare(&e.op_utilities) - w_ne) / w_ne, (social_welfare(&e.se.utilities) - w_ne) / w_ne))
        })
        .collect();
    let mut op = Vec::with_capacity(gains.len());
    let mut se = Vec::with_capacity(gains.len());
    for g in gains {
        let (a, b) = g?;
        op.push(a);
        se.push(b);
    }
    Ok((mean_se(&op), mean_se(&se)))
}

pub(crate) fn render(config: &ExperimentConfig, rows: &[Fig4Row], seed: u64) -> Result<String> {
    let body = csv_body(
        &["m", "k", "alpha", "op_gain_mean", "op_gain_se", "se_gain_mean", "se_gain_se", "alpha_max", "note"],
        rows.iter().map(|r| {
            vec![
                r.m.to_string(),
                r.k.to_string(),
                num(r.alpha),
                num(r.op_gain.0),
                num(r.op_gain.1),
                num(r.se_gain.0),
                num(r.se_gain.1),
                num(r.alpha_max),
                r.note.clone(),
            ]
        }),
    )?;
    Ok(header(config, seed, &[]) + &body)
}

//! Random instances shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use powergame::channel::{ChannelMode, ChannelProcess};
use powergame::repeated_game::{
    averaged_utility_drg, averaged_utility_frg, run_game, t0_bound, DeviationScenario, Plan, StageRecord, StrategyMachine,
};
use powergame::static_game::equilibria;
use powergame::{ChannelState, CharacteristicSinrs, EfficiencyModel, NetworkConfig};
use rand::Rng;

pub fn random_model<R: Rng>(rng: &mut R) -> EfficiencyModel {
    if rng.gen_bool(0.5) {
        EfficiencyModel::packet(rng.gen_range(2..=50)).unwrap()
    } else {
        EfficiencyModel::info_theoretic(rng.gen_range(0.2..3.0)).unwrap()
    }
}

/// Spreading factor strictly inside the load condition `N > (K-1) beta*`.
pub fn random_spreading<R: Rng>(rng: &mut R, k: usize, beta_star: f64) -> f64 {
    ((k as f64 - 1.0) * beta_star * rng.gen_range(1.2..4.0)).max(rng.gen_range(1.0..2.0))
}

#[derive(Debug, Clone)]
pub struct StaticInstance {
    pub cfg: NetworkConfig,
    pub s: CharacteristicSinrs,
    pub ch: ChannelState,
}

/// Non-saturated instance: the power cap exceeds every closed-form profile
/// at the weakest admissible gains by the factor `headroom`.
pub fn random_static<R: Rng>(rng: &mut R, k: usize, max_db: f64, headroom: (f64, f64)) -> StaticInstance {
    let model = random_model(rng);
    random_static_for(rng, model, k, max_db, headroom)
}

pub fn random_static_for<R: Rng>(rng: &mut R, model: EfficiencyModel, k: usize, max_db: f64, headroom: (f64, f64)) -> StaticInstance {
    let beta = powergame::solvers::solve_beta_star(&model).unwrap();
    let n = random_spreading(rng, k, beta);
    let s = CharacteristicSinrs::solve(model, k, n).unwrap();
    let sigma2 = 10f64.powf(rng.gen_range(-5.0..0.0));
    let eta_min = 10f64.powf(rng.gen_range(-1.0..0.5));
    let eta_max = eta_min * 10f64.powf(rng.gen_range(0.0..max_db / 10.0));
    let uncapped = NetworkConfig::symmetric(k, n, sigma2, 1.0, 1e12, eta_min, eta_max).unwrap();
    let weakest = ChannelState::new(vec![eta_min; k]);
    let e = equilibria(&uncapped, &s, &weakest, 0).unwrap();
    let worst = e.ne.0.iter().chain(&e.op.0).chain(&e.se.powers.0).fold(0.0f64, |a, &p| a.max(p));
    let p_max = worst * rng.gen_range(headroom.0..headroom.1);
    let mut cfg = NetworkConfig::symmetric(k, n, sigma2, 1.0, p_max, eta_min, eta_max).unwrap();
    cfg.rates = (0..k).map(|_| rng.gen_range(0.5..2.0)).collect();
    let ch = ChannelState::new((0..k).map(|_| rng.gen_range(eta_min..=eta_max)).collect());
    StaticInstance { cfg, s, ch }
}

#[derive(Debug, Clone)]
pub struct RepeatedInstance {
    pub cfg: NetworkConfig,
    pub s: CharacteristicSinrs,
    pub t0: u64,
    pub channel: ChannelProcess,
}

/// Instance with a finite horizon bound of at most `max_t0`; returns the
/// number of rejected draws alongside.
pub fn random_repeated<R: Rng>(rng: &mut R, max_t0: u64) -> (RepeatedInstance, usize) {
    let mut rejected = 0;
    loop {
        let k = rng.gen_range(2..=5);
        let inst = random_static(rng, k, 5.0, (10.0, 1000.0));
        match t0_bound(&inst.cfg, &inst.s) {
            Ok(t0) if t0 <= max_t0 => {
                let channel = ChannelProcess::for_network(&inst.cfg, ChannelMode::RedrawPerStage, 1.0, rng.gen()).unwrap();
                return (RepeatedInstance { cfg: inst.cfg, s: inst.s, t0, channel }, rejected);
            }
            _ => rejected += 1,
        }
    }
}

pub fn play(inst: &RepeatedInstance, plan: Plan, scenario: &DeviationScenario) -> Vec<StageRecord> {
    let mut machines = StrategyMachine::for_all(&inst.cfg, &inst.s, plan).unwrap();
    run_game(&inst.cfg, &inst.s.model, inst.s.beta_star, &inst.channel, &mut machines, scenario).unwrap()
}

/// Worst violation `v_dev - v_conf - tol` over every player deviating (best
/// response from `stage` onward); nonpositive means no profitable deviation.
pub fn worst_deviation_gain(inst: &RepeatedInstance, plan: Plan, stage: usize, tol: f64) -> f64 {
    let conform = play(inst, plan, &DeviationScenario::none());
    let horizon = plan.horizon();
    let value = |trace: &[StageRecord], i: usize| match plan {
        Plan::Frg { .. } => averaged_utility_frg(trace, i).unwrap(),
        Plan::Drg { lambda } => averaged_utility_drg(trace, i, lambda).unwrap().value,
    };
    (0..inst.cfg.k())
        .map(|i| {
            let dev = play(inst, plan, &DeviationScenario::best_response_from(i, stage, horizon));
            let (vd, vc) = (value(&dev, i), value(&conform, i));
            vd - vc - tol * vc.abs().max(1.0)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Deviation stages `{1, mid, T - T0, T - T0 + 1}` inside `1..=T`.
pub fn frg_deviation_stages(t: usize, t0: usize) -> Vec<usize> {
    let coop = t.saturating_sub(t0);
    let mut stages: Vec<usize> = [1, coop.div_ceil(2), coop, coop + 1].into_iter().filter(|&s| s >= 1 && s <= t).collect();
    stages.sort_unstable();
    stages.dedup();
    stages
}

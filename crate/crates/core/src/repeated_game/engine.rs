//! Stage-by-stage game engine.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::deviation::best_deviation;
use super::strategy::{Phase, StrategyMachine};
use crate::channel::ChannelSource;
use crate::efficiency::EfficiencyModel;
use crate::error::{invalid, Result};
use crate::numfmt::num;
use crate::static_game::{public_signal, sinrs, utilities, NetworkConfig, PowerProfile};

/// Power used by a scripted deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationPower {
    Fixed(f64),
    Max,
    /// SINR `beta*` against the other players' current powers, capped.
    BestResponse,
}

/// Forces `player` to `power` at `stage` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub player: usize,
    pub stage: usize,
    pub power: DeviationPower,
}

/// Deterministic deviation script.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviationScenario {
    pub deviations: Vec<Deviation>,
}

impl DeviationScenario {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(player: usize, stage: usize, power: DeviationPower) -> Self {
        Self { deviations: vec![Deviation { player, stage, power }] }
    }

    /// `player` best-responds at `stage` and every later stage up to `horizon`.
    pub fn best_response_from(player: usize, stage: usize, horizon: usize) -> Self {
        Self {
            deviations: (stage..=horizon).map(|t| Deviation { player, stage: t, power: DeviationPower::BestResponse }).collect(),
        }
    }

    pub fn validate(&self, cfg: &NetworkConfig, horizon: usize) -> Result<()> {
        for d in &self.deviations {
            if d.player >= cfg.k() {
                return invalid(format!("deviation references player {} of {}", d.player, cfg.k()));
            }
            if d.stage == 0 || d.stage > horizon {
                return invalid(format!("deviation stage {} outside 1..={horizon}", d.stage));
            }
            if let DeviationPower::Fixed(p) = d.power {
                if !(p >= 0.0 && p <= cfg.p_max[d.player]) {
                    return invalid(format!("deviation power {p} outside [0, {}]", cfg.p_max[d.player]));
                }
            }
        }
        Ok(())
    }
}

/// One simulated stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub t: usize,
    pub gains2: Vec<f64>,
    pub powers: Vec<f64>,
    pub sinrs: Vec<f64>,
    pub utilities: Vec<f64>,
    pub omega: f64,
    /// Phase of each machine while the stage was played.
    pub phases: Vec<Phase>,
    /// Players whose power was forced by the scenario.
    pub deviated: Vec<bool>,
    /// Some machine detected a deviation at the end of this stage.
    pub deviation_detected: bool,
}

/// Plays the game to the plan's horizon. Each machine only sees its own gain
/// before acting and its own power, gain and SINR afterwards.
pub fn run_game(
    cfg: &NetworkConfig,
    model: &EfficiencyModel,
    beta_star: f64,
    channel: &dyn ChannelSource,
    machines: &mut [StrategyMachine],
    scenario: &DeviationScenario,
) -> Result<Vec<StageRecord>> {
    let k = cfg.k();
    if machines.len() != k {
        return invalid(format!("{} machines for {k} players", machines.len()));
    }
    if channel.k() != k {
        return invalid(format!("channel has {} players, network has {k}", channel.k()));
    }
    let plan = machines[0].plan;
    if machines.iter().enumerate().any(|(i, m)| m.plan != plan || m.player != i) {
        return invalid("machines must share one plan and be ordered by player");
    }
    let horizon = plan.horizon();
    scenario.validate(cfg, horizon)?;

    let mut trace = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let ch = channel.state(t)?;
        let mut powers = Vec::with_capacity(k);
        for (i, m) in machines.iter_mut().enumerate() {
            powers.push(m.action(t, ch.gains2[i])?);
        }
        let phases: Vec<Phase> = machines.iter().map(|m| m.acting_phase()).collect();

        let mut deviated = vec![false; k];
        let mut responders = Vec::new();
        for d in scenario.deviations.iter().filter(|d| d.stage == t) {
            deviated[d.player] = true;
            match d.power {
                DeviationPower::Fixed(p) => powers[d.player] = p,
                DeviationPower::Max => powers[d.player] = cfg.p_max[d.player],
                DeviationPower::BestResponse => responders.push(d.player),
            }
        }
        let others = PowerProfile(powers.clone());
        for i in responders {
            powers[i] = best_deviation(cfg, model, &ch, &others, i, beta_star).power;
        }

        let profile = PowerProfile(powers);
        let s = sinrs(cfg, &ch, &profile);
        let u = utilities(cfg, model, &ch, &profile);
        let omega = public_signal(cfg, &ch, &profile);
        let mut detected = false;
        for (i, m) in machines.iter_mut().enumerate() {
            detected |= m.observe(profile.0[i], ch.gains2[i], s[i]);
        }
        trace.push(StageRecord {
            t,
            gains2: ch.gains2,
            powers: profile.0,
            sinrs: s,
            utilities: u.0,
            omega,
            phases,
            deviated,
            deviation_detected: detected,
        });
    }
    Ok(trace)
}

/// Writes columns `t, player, gain2, power, sinr, utility, omega, phase, deviated`.
pub fn write_trace_csv<W: Write>(trace: &[StageRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "player", "gain2", "power", "sinr", "utility", "omega", "phase", "deviated"])?;
    for r in trace {
        for i in 0..r.powers.len() {
            w.write_record([
                r.t.to_string(),
                i.to_string(),
                num(r.gains2[i]),
                num(r.powers[i]),
                num(r.sinrs[i]),
                num(r.utilities[i]),
                num(r.omega),
                r.phases[i].as_str().to_string(),
                u8::from(r.deviated[i]).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

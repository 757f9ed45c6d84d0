//! Trigger strategies driven by the public signal.
//!
//! A machine knows the game constants (`K`, `N`, `sigma^2`, the target SINRs)
//! and, at run time, only its own gain, its own power and its own SINR. The
//! received powers prescribed by the plans are the same for every player
//! (`a~` on the cooperative path, `a*` at the one-shot NE), so the expected
//! public signal `sigma^2 + K a` is common knowledge and independent of the
//! channel draw.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::solvers::CharacteristicSinrs;
use crate::static_game::{ne_action, op_action, reconstruct_public_signal, NetworkConfig};

/// Default relative tolerance of deviation detection.
pub const DEFAULT_DETECTION_TOL: f64 = 1e-9;

/// Rounds after which the discounted-game tail weight `(1 - lambda)^T` drops
/// below this value are truncated.
pub const DRG_TAIL_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plan", rename_all = "snake_case")]
pub enum Plan {
    /// `T`-stage game: cooperate for `T - T0` stages, then play the NE;
    /// punish deviations with full power.
    Frg { horizon: usize, t0: usize },
    /// Discounted game: cooperate until a deviation, then play the NE forever.
    Drg { lambda: f64 },
}

impl Plan {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Plan::Frg { horizon, t0 } if horizon == 0 || t0 == 0 => invalid("FRG needs T >= 1 and T0 >= 1"),
            Plan::Drg { lambda } if !(lambda > 0.0 && lambda < 1.0) => invalid(format!("lambda must lie in (0, 1), got {lambda}")),
            _ => Ok(()),
        }
    }

    /// Number of stages to simulate: `T`, or the smallest `T` with
    /// `(1 - lambda)^T < 1e-12` for the discounted game.
    pub fn horizon(&self) -> usize {
        match *self {
            Plan::Frg { horizon, .. } => horizon,
            Plan::Drg { lambda } => drg_truncation_horizon(lambda),
        }
    }
}

pub fn drg_truncation_horizon(lambda: f64) -> usize {
    let t = (DRG_TAIL_WEIGHT.ln() / (-lambda).ln_1p()).floor() as usize + 1;
    let mut t = t.max(1);
    while (1.0 - lambda).powi(t as i32) >= DRG_TAIL_WEIGHT {
        t += 1;
    }
    while t > 1 && (1.0 - lambda).powi(t as i32 - 1) < DRG_TAIL_WEIGHT {
        t -= 1;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Cooperate,
    Endgame,
    Punish,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Cooperate => "cooperate",
            Phase::Endgame => "endgame",
            Phase::Punish => "punish",
        }
    }
}

/// Past public signals and own powers, `h_t` for stage `t`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GameHistory {
    pub omegas: Vec<f64>,
    pub own_powers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMachine {
    pub player: usize,
    pub plan: Plan,
    pub phase: Phase,
    pub detection_tol: f64,
    pub history: GameHistory,
    k: usize,
    spreading: f64,
    sigma2: f64,
    p_max: f64,
    op_level: f64,
    ne_level: f64,
    /// Power prescribed for the stage being played.
    planned: Option<f64>,
    /// Phase in force while the current stage is played.
    acting_phase: Phase,
}

impl StrategyMachine {
    pub fn new(cfg: &NetworkConfig, s: &CharacteristicSinrs, plan: Plan, player: usize) -> Result<Self> {
        plan.validate()?;
        cfg.validate()?;
        if player >= cfg.k() {
            return invalid(format!("player {player} out of range"));
        }
        Ok(Self {
            player,
            plan,
            phase: Phase::Cooperate,
            detection_tol: DEFAULT_DETECTION_TOL,
            history: GameHistory::default(),
            k: cfg.k(),
            spreading: cfg.spreading,
            sigma2: cfg.sigma2,
            p_max: cfg.p_max[player],
            op_level: op_action(cfg, s.gamma_tilde)?,
            ne_level: ne_action(cfg, s.beta_star)?,
            planned: None,
            acting_phase: Phase::Cooperate,
        })
    }

    /// One machine per player.
    pub fn for_all(cfg: &NetworkConfig, s: &CharacteristicSinrs, plan: Plan) -> Result<Vec<Self>> {
        (0..cfg.k()).map(|i| Self::new(cfg, s, plan, i)).collect()
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.detection_tol = tol;
        self
    }

    /// Phase that governs stage `t` (1-based) before any new observation.
    fn phase_at(&self, t: usize) -> Phase {
        match (self.phase, self.plan) {
            (Phase::Punish, _) => Phase::Punish,
            (_, Plan::Frg { horizon, t0 }) if t + t0 > horizon => Phase::Endgame,
            _ => Phase::Cooperate,
        }
    }

    /// Power at stage `t` given the player's own gain at that stage.
    pub fn action(&mut self, t: usize, gain2: f64) -> Result<f64> {
        if t == 0 {
            return invalid("stages are numbered from 1");
        }
        if let Plan::Frg { horizon, .. } = self.plan {
            if t > horizon {
                return Err(Error::GameOver { stage: t, horizon });
            }
        }
        let phase = self.phase_at(t);
        if phase != Phase::Punish {
            self.phase = phase;
        }
        self.acting_phase = phase;
        let power = match (phase, self.plan) {
            (Phase::Cooperate, _) => self.op_level / gain2,
            (Phase::Endgame, _) => self.ne_level / gain2,
            (Phase::Punish, Plan::Frg { .. }) => self.p_max,
            (Phase::Punish, Plan::Drg { .. }) => self.ne_level / gain2,
        };
        self.planned = Some(power);
        Ok(power)
    }

    /// Phase in force for the stage most recently played.
    pub fn acting_phase(&self) -> Phase {
        self.acting_phase
    }

    /// Public signal implied by the plan in the given phase.
    pub fn expected_omega(&self, phase: Phase) -> Option<f64> {
        let level = match phase {
            Phase::Cooperate => self.op_level,
            Phase::Endgame => self.ne_level,
            Phase::Punish => return None,
        };
        Some(self.sigma2 + self.k as f64 * level)
    }

    /// Processes the end-of-stage observation. Returns `true` when a
    /// deviation is detected at this stage; Punish is absorbing.
    pub fn observe(&mut self, own_power: f64, gain2: f64, sinr: f64) -> bool {
        let planned = self.planned.take();
        self.history.own_powers.push(own_power);
        let omega = reconstruct_public_signal(own_power, gain2, sinr, self.spreading).ok();
        self.history.omegas.push(omega.unwrap_or(f64::NAN));
        if self.acting_phase == Phase::Punish {
            return false;
        }
        let own_deviation = planned.is_some_and(|p| (own_power - p).abs() > self.detection_tol * p);
        let detected = own_deviation
            || match (omega, self.expected_omega(self.acting_phase)) {
                (Some(w), Some(expected)) => detect_deviation(w, expected, self.detection_tol),
                _ => true,
            };
        if detected {
            self.phase = Phase::Punish;
        }
        detected
    }
}

/// `|omega - omega~| > tol * omega~`.
pub fn detect_deviation(observed: f64, expected: f64, tol: f64) -> bool {
    (observed - expected).abs() > tol * expected
}

//! Finitely repeated and discounted versions of the power-control game.

pub mod bounds;
pub mod deviation;
pub mod engine;
pub mod payoff;
pub mod strategy;

pub use bounds::{lambda_bound, rg_bounds, t0_bound, t0_bound_with, RgBounds, T0Formula};
pub use deviation::{best_deviation, deviation_upper_bound, minmax_utility, BestDeviation};
pub use engine::{run_game, write_trace_csv, Deviation, DeviationPower, DeviationScenario, StageRecord};
pub use payoff::{averaged_utility_drg, averaged_utility_frg, DiscountedValue};
pub use strategy::{detect_deviation, GameHistory, Phase, Plan, StrategyMachine};

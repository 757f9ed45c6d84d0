//! Energy-efficient power control games on a shared spread-spectrum uplink.

pub mod channel;
pub mod cli;
pub mod efficiency;
pub mod error;
pub mod experiments;
pub mod numfmt;
pub mod pareto;
pub mod repeated_game;
pub mod solvers;
pub mod static_game;

pub use efficiency::EfficiencyModel;
pub use error::{Error, Result};
pub use solvers::CharacteristicSinrs;
pub use static_game::{ChannelState, NetworkConfig, PowerProfile, UtilityProfile};

//! Bounded Rayleigh-fading channel gains.
//!
//! `|g_i|^2` is exponential with mean `mean_gain2[i]` (Rayleigh amplitude),
//! truncated to `[eta_min[i], eta_max[i]]` by rejection. Since the
//! exponential is memoryless, `eta_min + E` with `E ~ Exp(mean)` conditioned
//! on `E <= eta_max - eta_min` has exactly the truncated law, so the sampler
//! draws `E` and rejects only the upper tail.
//!
//! Random streams: every `(seed, replica, stage)` triple owns an independent
//! `Xoshiro256++` generator whose 64-bit seed is the SplitMix64 finalizer
//! applied to the triple in turn; the generator is expanded from that seed
//! by `SeedableRng::seed_from_u64`. Within a stage the players draw in index
//! order. Streams are therefore random-access in the stage index and do not
//! depend on how replicas are spread over worker threads.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_distr::{Distribution, Exp};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::static_game::{ChannelState, NetworkConfig};

/// Smallest accepted per-draw acceptance probability of the rejection sampler.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// One draw per game (stage 1), reused at every stage.
    ConstantPerGame,
    /// Independent draw at every stage.
    RedrawPerStage,
}

/// Source of per-stage channel states; stages are 1-based.
pub trait ChannelSource {
    fn k(&self) -> usize;
    fn state(&self, t: usize) -> Result<ChannelState>;
}

/// Truncated-exponential gain process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProcess {
    pub mode: ChannelMode,
    pub mean_gain2: Vec<f64>,
    pub eta_min: Vec<f64>,
    pub eta_max: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub replica: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit seed of the `(seed, replica, stage)` substream.
pub fn substream_key(seed: u64, replica: u64, stage: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ replica) ^ stage)
}

impl ChannelProcess {
    pub fn new(mode: ChannelMode, mean_gain2: Vec<f64>, eta_min: Vec<f64>, eta_max: Vec<f64>, seed: u64) -> Result<Self> {
        let p = Self { mode, mean_gain2, eta_min, eta_max, seed, replica: 0 };
        p.validate()?;
        Ok(p)
    }

    /// Process with the gain bounds of `cfg` and a common mean gain.
    pub fn for_network(cfg: &NetworkConfig, mode: ChannelMode, mean_gain2: f64, seed: u64) -> Result<Self> {
        Self::new(mode, vec![mean_gain2; cfg.k()], cfg.eta_min.clone(), cfg.eta_max.clone(), seed)
    }

    /// Same process on an independent replica stream.
    pub fn with_replica(&self, replica: u64) -> Self {
        Self { replica, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.mean_gain2.len();
        if k == 0 || self.eta_min.len() != k || self.eta_max.len() != k {
            return invalid("channel process vectors must be nonempty and of equal length");
        }
        for i in 0..k {
            let (mu, a, b) = (self.mean_gain2[i], self.eta_min[i], self.eta_max[i]);
            if !(mu > 0.0 && mu.is_finite() && a > 0.0 && a <= b && b.is_finite()) {
                return invalid(format!("player {i}: need mean > 0 and 0 < eta_min <= eta_max"));
            }
            if a < b && acceptance(mu, a, b) < MIN_ACCEPTANCE {
                return invalid(format!(
                    "player {i}: acceptance probability {} of [{a}, {b}] under mean {mu} is below {MIN_ACCEPTANCE}",
                    acceptance(mu, a, b)
                ));
            }
        }
        Ok(())
    }

    fn fill(&self, stage: u64, out: &mut [f64]) {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(substream_key(self.seed, self.replica, stage));
        for (i, g) in out.iter_mut().enumerate() {
            let (a, b) = (self.eta_min[i], self.eta_max[i]);
            *g = if a == b {
                a
            } else {
                let exp = Exp::new(1.0 / self.mean_gain2[i]).expect("validated mean");
                let width = b - a;
                loop {
                    let e: f64 = exp.sample(&mut rng);
                    if e <= width {
                        break a + e;
                    }
                }
            };
        }
    }

    fn effective_stage(&self, t: usize) -> u64 {
        match self.mode {
            ChannelMode::ConstantPerGame => 1,
            ChannelMode::RedrawPerStage => t as u64,
        }
    }

    /// Gains at stage `t >= 1`, written into `out`.
    pub fn draw_into(&self, t: usize, out: &mut [f64]) {
        self.fill(self.effective_stage(t), out);
    }

    pub fn draw(&self, t: usize) -> ChannelState {
        let mut g = vec![0.0; self.mean_gain2.len()];
        self.draw_into(t, &mut g);
        ChannelState::new(g)
    }

    /// Materializes stages `1..=horizon`.
    pub fn trace(&self, horizon: usize) -> ChannelTrace {
        ChannelTrace { states: (1..=horizon).map(|t| self.draw(t)).collect() }
    }
}

impl ChannelSource for ChannelProcess {
    fn k(&self) -> usize {
        self.mean_gain2.len()
    }

    fn state(&self, t: usize) -> Result<ChannelState> {
        if t == 0 {
            return invalid("stages are numbered from 1");
        }
        Ok(self.draw(t))
    }
}

/// Per-draw acceptance probability `1 - exp(-(b - a)/mean)`.
pub fn acceptance(mean: f64, a: f64, b: f64) -> f64 {
    -(-(b - a) / mean).exp_m1()
}

/// CDF of the truncated law on `[a, b]`.
pub fn truncated_cdf(mean: f64, a: f64, b: f64, x: f64) -> f64 {
    if x <= a {
        0.0
    } else if x >= b {
        1.0
    } else {
        (-(-(x - a) / mean).exp_m1()) / acceptance(mean, a, b)
    }
}

/// Gain dynamics `10 log10(eta_max / eta_min)` in dB.
pub fn dynamics_db(eta_min: f64, eta_max: f64) -> f64 {
    10.0 * (eta_max / eta_min).log10()
}

/// Recorded channel states for replay; stage `t` is `states[t - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    pub states: Vec<ChannelState>,
}

impl ChannelTrace {
    /// Writes columns `t, player, gain2`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "player", "gain2"])?;
        for (s, st) in self.states.iter().enumerate() {
            for (i, g) in st.gains2.iter().enumerate() {
                w.write_record([(s + 1).to_string(), i.to_string(), crate::numfmt::num(*g)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let mut states: Vec<ChannelState> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let field = |j: usize| rec.get(j).ok_or_else(|| Error::InvalidConfig(format!("short row in channel trace: {rec:?}")));
            let parse_err = |e: std::num::ParseIntError| Error::InvalidConfig(format!("bad index in channel trace: {e}"));
            let t: usize = field(0)?.parse().map_err(parse_err)?;
            let i: usize = field(1)?.parse().map_err(parse_err)?;
            let g: f64 = field(2)?.parse().map_err(|e| Error::InvalidConfig(format!("bad gain in channel trace: {e}")))?;
            if t == 0 || t > states.len() + 1 {
                return invalid(format!("channel trace stages must be consecutive from 1, got {t}"));
            }
            if t == states.len() + 1 {
                states.push(ChannelState::new(Vec::new()));
            }
            let st = &mut states[t - 1];
            if i != st.gains2.len() {
                return invalid(format!("stage {t}: players must be listed in order, got {i}"));
            }
            st.gains2.push(g);
        }
        if let Some(first) = states.first() {
            let k = first.gains2.len();
            if states.iter().any(|s| s.gains2.len() != k) {
                return invalid("channel trace has a varying player count");
            }
        }
        Ok(Self { states })
    }
}

impl ChannelSource for ChannelTrace {
    fn k(&self) -> usize {
        self.states.first().map_or(0, |s| s.gains2.len())
    }

    fn state(&self, t: usize) -> Result<ChannelState> {
        if t == 0 || t > self.states.len() {
            return invalid(format!("channel trace has {} stages, stage {t} requested", self.states.len()));
        }
        Ok(self.states[t - 1].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn process(mode: ChannelMode, a: f64, b: f64, seed: u64) -> ChannelProcess {
        ChannelProcess::new(mode, vec![1.0; 3], vec![a; 3], vec![b; 3], seed).unwrap()
    }

    #[test]
    fn dynamics_examples() {
        assert!((dynamics_db(1.0, 100.0) - 20.0).abs() < 1e-12);
        assert_eq!(dynamics_db(0.7, 0.7), 0.0);
        assert!((dynamics_db(0.5, 5.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_bounds_are_deterministic() {
        let p = process(ChannelMode::RedrawPerStage, 0.4, 0.4, 9);
        for t in 1..20 {
            assert_eq!(p.draw(t).gains2, vec![0.4; 3]);
        }
    }

    #[test]
    fn constant_mode_repeats_stage_one() {
        let p = process(ChannelMode::ConstantPerGame, 0.1, 10.0, 3);
        let first = p.draw(1);
        for t in 2..10 {
            assert_eq!(p.draw(t), first);
        }
    }

    #[test]
    fn seeds_and_replicas_separate_streams() {
        let p = process(ChannelMode::RedrawPerStage, 0.1, 10.0, 3);
        assert_eq!(p.trace(50), p.clone().trace(50));
        assert_ne!(p.draw(1), p.draw(2));
        assert_ne!(p.draw(1), p.with_replica(1).draw(1));
        assert_ne!(p.draw(1), process(ChannelMode::RedrawPerStage, 0.1, 10.0, 4).draw(1));
    }

    #[test]
    fn draws_stay_in_bounds() {
        let p = process(ChannelMode::RedrawPerStage, 0.2, 0.6, 11);
        for t in 1..2000 {
            for g in p.draw(t).gains2 {
                assert!((0.2..=0.6).contains(&g));
            }
        }
    }

    #[test]
    fn negligible_acceptance_is_rejected() {
        let err = ChannelProcess::new(ChannelMode::RedrawPerStage, vec![1e3], vec![1.0], vec![1.0 + 1e-4], 0).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn trace_csv_round_trip() {
        let p = process(ChannelMode::RedrawPerStage, 0.1, 10.0, 5);
        let trace = p.trace(4);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t,player,gain2\n1,0,"));
        let back = ChannelTrace::read_csv(&buf[..]).unwrap();
        assert_eq!(back, trace);
        assert_eq!(back.state(3).unwrap(), p.state(3).unwrap());
        assert!(back.state(5).is_err());
    }
}

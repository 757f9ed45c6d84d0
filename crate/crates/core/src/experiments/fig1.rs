//! Two-player utility region with the NE, SE, OP and social-optimum points.

use serde::{Deserialize, Serialize};

use super::{csv_body, header, ExperimentConfig};
use crate::efficiency::EfficiencyModel;
use crate::error::{invalid, Error, Result};
use crate::numfmt::num;
use crate::pareto::{convexity_diagnostic, sample_utility_region, ConvexityReport, RegionPoint};
use crate::solvers::CharacteristicSinrs;
use crate::static_game::{ne_profile, op_profile, se_profiles, utilities, ChannelState, NetworkConfig, PowerProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Config {
    pub m: u32,
    pub n: f64,
    pub sigma2: f64,
    pub rate: f64,
    pub p_max: f64,
    pub gains2: [f64; 2],
    pub resolution: usize,
    pub leader: usize,
    /// Accepted relative deficit of the convexity diagnostic.
    pub convexity_tol: f64,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self { m: 2, n: 2.0, sigma2: 1.0, rate: 1.0, p_max: 2.0, gains2: [1.0, 1.0], resolution: 200, leader: 0, convexity_tol: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPoint {
    /// `ne`, `se`, `op` or `social`.
    pub kind: &'static str,
    pub powers: Vec<f64>,
    pub normalized: Vec<f64>,
    /// `saturated` when the closed-form profile exceeds the power cap.
    pub flag: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Result {
    pub region: Vec<RegionPoint>,
    pub marked: Vec<MarkedPoint>,
    /// Euclidean distance between the OP and the social optimum in normalized utilities.
    pub op_social_gap: f64,
    /// Largest per-player power difference between the OP and the social optimum.
    pub op_social_power_gap: f64,
    /// Power step of the grid.
    pub grid_step: f64,
    pub convexity: ConvexityReport,
}

impl Fig1Result {
    pub fn point(&self, kind: &str) -> &MarkedPoint {
        self.marked.iter().find(|p| p.kind == kind).expect("all four points are marked")
    }
}

fn marked(
    kind: &'static str,
    cfg: &NetworkConfig,
    model: &EfficiencyModel,
    ch: &ChannelState,
    profile: Result<PowerProfile>,
) -> Result<MarkedPoint> {
    match profile {
        Ok(p) => {
            let normalized = utilities(cfg, model, ch, &p).normalized(ch);
            Ok(MarkedPoint { kind, powers: p.0, normalized, flag: "" })
        }
        Err(Error::SaturatedRegime { .. }) => Ok(MarkedPoint { kind, powers: cfg.p_max.clone(), normalized: vec![0.0; cfg.k()], flag: "saturated" }),
        Err(e) => Err(e),
    }
}

pub fn fig1_region(c: &Fig1Config) -> Result<Fig1Result> {
    if c.resolution < 2 {
        return invalid("fig1 needs at least 2 grid points per axis");
    }
    let cfg = NetworkConfig {
        spreading: c.n,
        sigma2: c.sigma2,
        rates: vec![c.rate; 2],
        p_max: vec![c.p_max; 2],
        eta_min: c.gains2.to_vec(),
        eta_max: c.gains2.to_vec(),
    };
    cfg.validate()?;
    let model = EfficiencyModel::packet(c.m)?;
    let s = CharacteristicSinrs::solve(model, 2, c.n)?;
    let ch = ChannelState::new(c.gains2.to_vec());

    let region = sample_utility_region(&cfg, &model, &ch, c.resolution);
    let social = region
        .iter()
        .max_by(|a, b| a.normalized.iter().sum::<f64>().total_cmp(&b.normalized.iter().sum::<f64>()))
        .expect("nonempty grid");

    let ne = marked("ne", &cfg, &model, &ch, ne_profile(&cfg, &ch, s.beta_star))?;
    let se = marked("se", &cfg, &model, &ch, se_profiles(&cfg, &model, &ch, s.beta_star, s.gamma_star, c.leader).map(|o| o.powers))?;
    let op = marked("op", &cfg, &model, &ch, op_profile(&cfg, &ch, s.gamma_tilde))?;
    let social = MarkedPoint { kind: "social", powers: social.powers.clone(), normalized: social.normalized.clone(), flag: "" };

    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let op_social_gap = dist(&op.normalized, &social.normalized);
    let op_social_power_gap = op.powers.iter().zip(&social.powers).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let pts: Vec<(f64, f64)> = region.iter().map(|p| (p.normalized[0], p.normalized[1])).collect();
    let convexity = convexity_diagnostic(&pts, c.convexity_tol);

    Ok(Fig1Result {
        region,
        marked: vec![ne, se, op, social],
        op_social_gap,
        op_social_power_gap,
        grid_step: c.p_max / (c.resolution - 1) as f64,
        convexity,
    })
}

pub(crate) fn render(config: &ExperimentConfig, r: &Fig1Result, seed: u64) -> Result<String> {
    let region = r.region.iter().map(|p| {
        vec!["region".to_string(), num(p.powers[0]), num(p.powers[1]), num(p.normalized[0]), num(p.normalized[1]), String::new()]
    });
    let marks = r.marked.iter().map(|p| {
        vec![p.kind.to_string(), num(p.powers[0]), num(p.powers[1]), num(p.normalized[0]), num(p.normalized[1]), p.flag.to_string()]
    });
    let body = csv_body(&["kind", "p1", "p2", "u1_norm", "u2_norm", "flag"], region.chain(marks))?;
    let extra = [
        format!("op_social_gap={}", num(r.op_social_gap)),
        format!("op_social_power_gap={}", num(r.op_social_power_gap)),
        format!("grid_step={}", num(r.grid_step)),
        format!("convexity_deficit={}", num(r.convexity.max_relative_deficit)),
        format!("convex={}", r.convexity.convex),
    ];
    Ok(header(config, seed, &extra) + &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::pareto_dominates;

    #[test]
    fn default_scenario() {
        let r = fig1_region(&Fig1Config::default()).unwrap();
        assert_eq!(r.marked.len(), 4);
        assert!(r.marked.iter().all(|p| p.flag.is_empty()));
        assert!(r.op_social_power_gap <= r.grid_step, "{} vs {}", r.op_social_power_gap, r.grid_step);
        assert!(pareto_dominates(&r.point("op").normalized, &r.point("ne").normalized));
        assert!(r.convexity.convex, "{:?}", r.convexity);
    }

    #[test]
    fn grid_never_beats_op_welfare() {
        let r = fig1_region(&Fig1Config::default()).unwrap();
        let op: f64 = r.point("op").normalized.iter().sum();
        for p in &r.region {
            assert!(p.normalized.iter().sum::<f64>() <= op * (1.0 + 1e-9));
        }
    }

    #[test]
    fn saturated_points_are_flagged() {
        let c = Fig1Config { p_max: 0.5, resolution: 20, ..Fig1Config::default() };
        let r = fig1_region(&c).unwrap();
        assert_eq!(r.point("ne").flag, "saturated");
        assert_eq!(r.point("ne").normalized, vec![0.0, 0.0]);
    }
}

//! Welfare, Pareto dominance and sampled utility regions.

use std::io::Write;

use crate::efficiency::EfficiencyModel;
use crate::error::Result;
use crate::static_game::{utilities, ChannelState, NetworkConfig, PowerProfile, UtilityProfile};

/// `sum_i u_i`.
pub fn social_welfare(u: &UtilityProfile) -> f64 {
    u.0.iter().sum()
}

/// `sum_i w_i u_i`.
pub fn weighted_welfare(u: &UtilityProfile, weights: &[f64]) -> f64 {
    u.0.iter().zip(weights).map(|(u, w)| u * w).sum()
}

/// Componentwise `>=` with at least one strict inequality.
pub fn pareto_dominates(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y)
}

/// One sample of the utility region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    pub powers: Vec<f64>,
    /// `u_i / |g_i|^2`.
    pub normalized: Vec<f64>,
}

/// Sweeps the power box `[0, P_1^max] x ... x [0, P_K^max]` on a uniform grid
/// with `resolution` points per axis, in row-major order (last player
/// fastest).
pub fn sample_utility_region(
    cfg: &NetworkConfig,
    model: &EfficiencyModel,
    ch: &ChannelState,
    resolution: usize,
) -> Vec<RegionPoint> {
    let k = cfg.k();
    let total = (resolution as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if k >= 4 {
        log::warn!("utility-region grid with K = {k} has {total} points");
    }
    let axes: Vec<Vec<f64>> = cfg
        .p_max
        .iter()
        .map(|&cap| {
            if resolution <= 1 {
                vec![cap]
            } else {
                (0..resolution).map(|j| cap * j as f64 / (resolution - 1) as f64).collect()
            }
        })
        .collect();

    let mut out = Vec::with_capacity(total.min(1 << 24) as usize);
    let mut idx = vec![0usize; k];
    loop {
        let powers: Vec<f64> = idx.iter().zip(&axes).map(|(&j, ax)| ax[j]).collect();
        let profile = PowerProfile(powers);
        let normalized = utilities(cfg, model, ch, &profile).normalized(ch);
        out.push(RegionPoint { powers: profile.0, normalized });

        let mut d = k;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Writes region samples as CSV with columns `p1..pK, u1_norm..uK_norm`.
pub fn write_region_csv<W: Write>(points: &[RegionPoint], k: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (1..=k).map(|i| format!("p{i}")).chain((1..=k).map(|i| format!("u{i}_norm"))).collect();
    w.write_record(&header)?;
    for p in points {
        let row: Vec<String> = p.powers.iter().chain(&p.normalized).map(|v| crate::numfmt::num(*v)).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Convexity diagnostic for a sampled two-player region.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    /// Largest distance by which a point on the convex hull boundary lies
    /// outside the down-closure of the samples, relative to the largest
    /// utility coordinate.
    pub max_relative_deficit: f64,
    pub hull_vertices: usize,
    pub convex: bool,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; returns the hull counter-clockwise.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite utilities"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Tests whether the down-closure of a sampled 2-D region is convex.
///
/// Points along every hull edge are compared against the Pareto frontier of
/// the samples: a hull point that no sample weakly dominates exposes a dent.
/// The deficit is measured along the diagonal direction and normalized by the
/// largest coordinate; `tol` is the accepted relative deficit.
pub fn convexity_diagnostic(points: &[(f64, f64)], tol: f64) -> ConvexityReport {
    let hull = convex_hull(points);
    let scale = points.iter().fold(0.0f64, |m, p| m.max(p.0).max(p.1)).max(f64::MIN_POSITIVE);

    // Pareto frontier sorted by x ascending, y descending.
    let mut frontier: Vec<(f64, f64)> = points.to_vec();
    frontier.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
    let mut staircase = Vec::new();
    let mut best_y = f64::NEG_INFINITY;
    for p in frontier {
        if p.1 > best_y {
            staircase.push(p);
            best_y = p.1;
        }
    }
    staircase.reverse();

    // Largest t >= 0 such that some sample dominates (x+t, y+t) is negative
    // when the query point lies outside the down-closure.
    let slack = |q: (f64, f64)| -> f64 { staircase.iter().map(|s| (s.0 - q.0).min(s.1 - q.1)).fold(f64::NEG_INFINITY, f64::max) };

    let mut worst = 0.0f64;
    let n = hull.len();
    for e in 0..n {
        let a = hull[e];
        let b = hull[(e + 1) % n];
        for j in 0..=64 {
            let s = j as f64 / 64.0;
            let q = (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
            worst = worst.max(-slack(q));
        }
    }
    let max_relative_deficit = worst / scale;
    ConvexityReport { max_relative_deficit, hull_vertices: n, convex: max_relative_deficit <= tol }
}

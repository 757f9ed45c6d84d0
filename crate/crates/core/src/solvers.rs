//! Characteristic SINRs of the power-control games.
//!
//! All three SINRs are positive roots of a stationarity equation
//!
//! ```text
//! x (1 - a x) f'(x) - f(x) = 0
//! ```
//!
//! with `a = 0` for the one-shot Nash SINR `beta*`, `a = (K-1)/N` for the
//! cooperative operating point `gamma~` and the leader coefficient of
//! [`stackelberg_coefficient`] for the Stackelberg leader SINR `gamma*`.
//! Dividing by `f(x) > 0` gives `x (1 - a x) f'(x)/f(x) - 1`, which has the
//! same sign and stays representable when `f` underflows; the bisection
//! runs on that form. `f''` changes sign for sigmoidal `f`, so no Newton
//! steps are taken.

use crate::efficiency::{EfficiencyModel, Order};
use crate::error::{Error, Result};

const BRACKET_FLOOR: f64 = 1e-12;
const BRACKET_CEIL: f64 = 1e12;
const OP_SCAN_POINTS: usize = 100_000;
const UNIQUENESS_SCAN_POINTS: usize = 10_000;

/// Bisection on a bracket with `h(lo) > 0 >= h(hi)`, run until the bracket
/// cannot shrink any further in floating point or its relative width drops
/// below `rel_tol`.
pub fn bisect<F: Fn(f64) -> f64>(h: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= rel_tol * mid.abs() {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sign of `x (1 - coef x) f'(x) - f(x)`, computed through `f'/f`.
fn normalized_stationarity(model: &EfficiencyModel, coef: f64, x: f64) -> f64 {
    x * (1.0 - coef * x) * model.log_deriv(x) - 1.0
}

/// Raw residual `x (1 - coef x) f'(x) - f(x)`.
pub fn stationarity_residual(model: &EfficiencyModel, coef: f64, x: f64) -> f64 {
    let d1 = model.deriv(x, Order::First).unwrap_or(0.0);
    x * (1.0 - coef * x) * d1 - model.eval_unchecked(x)
}

/// Positive root of `x (1 - coef x) f'(x) = f(x)` on `(0, 1/coef)`.
fn solve_stationary(model: &EfficiencyModel, coef: f64, equation: &'static str) -> Result<f64> {
    let h = |x: f64| normalized_stationarity(model, coef, x);
    let upper_limit = if coef > 0.0 { 1.0 / coef } else { f64::INFINITY };

    // Upper end: the limit itself when finite (h = -1 there), else doubling.
    let mut hi = if upper_limit.is_finite() { upper_limit } else { 1.0 };
    if !upper_limit.is_finite() {
        while h(hi) > 0.0 {
            hi *= 2.0;
            if hi > BRACKET_CEIL {
                return Err(Error::Bracketing(equation));
            }
        }
    }
    let mut lo = hi.min(1.0);
    if lo >= hi {
        lo = 0.5 * hi;
    }
    while h(lo) <= 0.0 {
        hi = lo;
        lo *= 0.5;
        if lo < BRACKET_FLOOR {
            return Err(Error::NoInteriorRoot { equation, upper: upper_limit });
        }
    }
    Ok(bisect(h, lo, hi, 4.0 * f64::EPSILON))
}

/// `beta*`: the root of `x f'(x) - f(x) = 0`.
pub fn solve_beta_star(model: &EfficiencyModel) -> Result<f64> {
    model.validate()?;
    solve_stationary(model, 0.0, "x f'(x) - f(x) = 0")
}

/// Interference coefficient `(K-1)/N` of the equal-action SINR.
pub fn op_coefficient(k: usize, n: f64) -> f64 {
    (k.saturating_sub(1)) as f64 / n
}

/// Result of solving for `gamma~`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTilde {
    pub value: f64,
    /// Sufficient condition for uniqueness of the operating point.
    pub condition: OpCondition,
}

/// `gamma~`: the root of `x (1 - (K-1) x / N) f'(x) - f(x) = 0`.
///
/// The root is always returned; `condition.holds == false` flags that
/// uniqueness is not guaranteed for this instance.
pub fn solve_gamma_tilde(model: &EfficiencyModel, k: usize, n: f64) -> Result<GammaTilde> {
    check_kn(k, n)?;
    let value = solve_stationary(model, op_coefficient(k, n), "x (1 - (K-1)x/N) f'(x) - f(x) = 0")?;
    Ok(GammaTilde { value, condition: check_op_condition(model, k, n)? })
}

/// Coefficient `a` of the leader's stationarity equation `x (1 - a x) f' = f`.
///
/// With followers pinned at `beta*`, the leader's utility is proportional to
/// `(f(x)/x) (1 - a x)` where `a = ((K-1) b / N) / (1 - (K-2) b)` and
/// `b = beta*/N`. For `N = 1` this is `(K-1) beta* / (1 - (K-2) beta*)`.
pub fn stackelberg_coefficient(k: usize, n: f64, beta_star: f64) -> Result<f64> {
    check_kn(k, n)?;
    if k < 2 {
        return Ok(0.0);
    }
    let b = beta_star / n;
    let hierarchy = 1.0 - (k as f64 - 2.0) * b;
    if hierarchy <= 0.0 {
        return Err(Error::IllPosedHierarchy(format!(
            "1 - (K-2) beta*/N = {hierarchy} <= 0 for K = {k}, N = {n}, beta* = {beta_star}"
        )));
    }
    Ok((k as f64 - 1.0) * b / (n * hierarchy))
}

/// `gamma*`: the Stackelberg leader SINR.
pub fn solve_gamma_star(model: &EfficiencyModel, k: usize, n: f64, beta_star: f64) -> Result<f64> {
    let coef = stackelberg_coefficient(k, n, beta_star)?;
    if coef == 0.0 {
        return Ok(beta_star);
    }
    let gamma = solve_stationary(model, coef, "leader stationarity x (1 - a x) f'(x) - f(x) = 0")?;
    if gamma > beta_star * (1.0 + 1e-12) {
        return Err(Error::Internal(format!("gamma* = {gamma} exceeds beta* = {beta_star}")));
    }
    Ok(gamma)
}

/// Outcome of the operating-point uniqueness test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpCondition {
    pub holds: bool,
    /// Single `+ -> -` crossing of the test function, when the condition holds
    /// non-vacuously.
    pub crossing: Option<f64>,
}

/// Sign test of `f''/f' - 2(K-1)/(N - (K-1)x)` on `(0, N/(K-1))`.
///
/// Holds iff the sampled signs show exactly one change, from positive to
/// negative. Vacuously true for `K < 2`.
pub fn check_op_condition(model: &EfficiencyModel, k: usize, n: f64) -> Result<OpCondition> {
    check_kn(k, n)?;
    if k < 2 {
        return Ok(OpCondition { holds: true, crossing: None });
    }
    let km1 = k as f64 - 1.0;
    let upper = n / km1;
    let s = |x: f64| model.curvature_ratio(x) - 2.0 * km1 / (n - km1 * x);
    let step = upper / (OP_SCAN_POINTS as f64 + 1.0);

    let mut changes = 0usize;
    let mut bracket = None;
    let mut prev_x = step;
    let mut prev_pos = s(prev_x) > 0.0;
    let first_pos = prev_pos;
    for j in 2..=OP_SCAN_POINTS {
        let x = step * j as f64;
        let pos = s(x) > 0.0;
        if pos != prev_pos {
            changes += 1;
            bracket = Some((prev_x, x));
        }
        prev_pos = pos;
        prev_x = x;
    }
    let holds = first_pos && !prev_pos && changes == 1;
    let crossing = if holds {
        bracket.map(|(lo, hi)| bisect(s, lo, hi, 4.0 * f64::EPSILON))
    } else {
        None
    };
    Ok(OpCondition { holds, crossing })
}

/// `phi(x) = (f(x)/x) (1 - (K-1) x / N)`: the per-player utility scale at an
/// equal-action profile, in units of `R_i N |g_i|^2 / sigma^2`.
pub fn phi(model: &EfficiencyModel, k: usize, n: f64, x: f64) -> f64 {
    model.efficiency_per_sinr(x) * (1.0 - op_coefficient(k, n) * x)
}

fn check_kn(k: usize, n: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("player count K must be at least 1".into()));
    }
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::Domain(format!("spreading factor N must be >= 1, got {n}")));
    }
    Ok(())
}

/// Counts sign changes of the normalized stationarity function on a
/// log-spaced grid over `(0, upper)`.
fn sign_changes(model: &EfficiencyModel, coef: f64, upper: f64) -> usize {
    let lo: f64 = 1e-6;
    let hi = upper * (1.0 - 1e-9);
    let ratio = (hi / lo).ln();
    let mut prev = normalized_stationarity(model, coef, lo) > 0.0;
    let mut changes = 0;
    for j in 1..=UNIQUENESS_SCAN_POINTS {
        let x = lo * (ratio * j as f64 / UNIQUENESS_SCAN_POINTS as f64).exp();
        let pos = normalized_stationarity(model, coef, x) > 0.0;
        if pos != prev {
            changes += 1;
        }
        prev = pos;
    }
    changes
}

/// The three characteristic SINRs of a `(model, K, N)` game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicSinrs {
    pub model: EfficiencyModel,
    pub k: usize,
    pub n: f64,
    pub beta_star: f64,
    pub gamma_star: f64,
    pub gamma_tilde: f64,
    pub op_condition: OpCondition,
    /// Each stationarity equation showed a single sign change on a dense scan.
    pub roots_unique: bool,
}

impl CharacteristicSinrs {
    pub fn solve(model: EfficiencyModel, k: usize, n: f64) -> Result<Self> {
        let beta_star = solve_beta_star(&model)?;
        let tilde = solve_gamma_tilde(&model, k, n)?;
        let gamma_star = solve_gamma_star(&model, k, n, beta_star)?;

        let lead = stackelberg_coefficient(k, n, beta_star)?;
        let scan_upper = |coef: f64, root: f64| if coef > 0.0 { 1.0 / coef } else { 1e3 * root.max(1.0) };
        let op = op_coefficient(k, n);
        let roots_unique = sign_changes(&model, 0.0, scan_upper(0.0, beta_star)) == 1
            && sign_changes(&model, op, scan_upper(op, tilde.value)) == 1
            && sign_changes(&model, lead, scan_upper(lead, gamma_star)) == 1;

        Ok(Self {
            model,
            k,
            n,
            beta_star,
            gamma_star,
            gamma_tilde: tilde.value,
            op_condition: tilde.condition,
            roots_unique,
        })
    }

    pub fn phi(&self, x: f64) -> f64 {
        phi(&self.model, self.k, self.n, x)
    }

    /// Per-stage cooperation gain `phi(gamma~) - phi(beta*)`.
    pub fn delta(&self) -> f64 {
        self.phi(self.gamma_tilde) - self.phi(self.beta_star)
    }

    pub fn f_beta_star(&self) -> f64 {
        self.model.eval_unchecked(self.beta_star)
    }

    /// `f(beta*)/beta*`: the interference-free utility scale.
    pub fn solo_scale(&self) -> f64 {
        self.model.efficiency_per_sinr(self.beta_star)
    }

    /// Upper end of the admissible load: `N/beta* + 1`.
    pub fn max_load(&self) -> f64 {
        self.n / self.beta_star + 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent bisection on `e^x = M x + 1`, the packet-model form of
    /// `x f' = f`.
    fn packet_beta_oracle(m: f64) -> f64 {
        let g = |x: f64| x.exp() - m * x - 1.0;
        let (mut lo, mut hi) = (1e-3, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn beta_star_info_is_c() {
        let model = EfficiencyModel::info_theoretic(0.5).unwrap();
        let b = solve_beta_star(&model).unwrap();
        assert!((b - 0.5).abs() < 1e-14);
    }

    #[test]
    fn beta_star_packet_matches_oracle() {
        for (m, expected) in [(2u32, 1.2564312), (10, 3.6150)] {
            let b = solve_beta_star(&EfficiencyModel::packet(m).unwrap()).unwrap();
            let oracle = packet_beta_oracle(m as f64);
            assert!((b - oracle).abs() < 1e-12 * oracle, "{b} vs {oracle}");
            assert!((b - expected).abs() < 1e-4);
        }
    }

    #[test]
    fn packet_m1_has_no_interior_root() {
        let err = solve_beta_star(&EfficiencyModel::packet(1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NoInteriorRoot { .. }));
    }

    #[test]
    fn gamma_tilde_info_closed_form() {
        let model = EfficiencyModel::info_theoretic(0.5).unwrap();
        let g = solve_gamma_tilde(&model, 2, 1.0).unwrap();
        assert!((g.value - 1.0 / 3.0).abs() < 1e-14);
        assert!(g.condition.holds);
    }

    #[test]
    fn gamma_tilde_single_player_is_beta_star() {
        for model in [EfficiencyModel::packet(4).unwrap(), EfficiencyModel::info_theoretic(2.0).unwrap()] {
            let b = solve_beta_star(&model).unwrap();
            let g = solve_gamma_tilde(&model, 1, 3.0).unwrap();
            assert_eq!(g.value, b);
        }
    }

    #[test]
    fn gamma_tilde_packet_k2_n2_residual() {
        let model = EfficiencyModel::packet(2).unwrap();
        let g = solve_gamma_tilde(&model, 2, 2.0).unwrap().value;
        // Independent bisection on the raw (non-normalized) residual.
        let raw = |x: f64| stationarity_residual(&model, 0.5, x);
        let (mut lo, mut hi) = (0.01, 1.99);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if raw(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((g - 0.5 * (lo + hi)).abs() < 1e-12);
        assert!(raw(g).abs() < 1e-12);
    }

    #[test]
    fn gamma_star_info_k2_n1() {
        let model = EfficiencyModel::info_theoretic(0.4).unwrap();
        let a = stackelberg_coefficient(2, 1.0, 0.4).unwrap();
        assert!((a - 0.4).abs() < 1e-15);
        let g = solve_gamma_star(&model, 2, 1.0, 0.4).unwrap();
        assert!((g - 0.4 / 1.16).abs() < 1e-13, "{g}");
    }

    #[test]
    fn gamma_star_single_player_is_beta_star() {
        let model = EfficiencyModel::packet(3).unwrap();
        let b = solve_beta_star(&model).unwrap();
        assert_eq!(solve_gamma_star(&model, 1, 1.0, b).unwrap(), b);
    }

    #[test]
    fn ill_posed_hierarchy() {
        let err = stackelberg_coefficient(4, 1.0, 0.6).unwrap_err();
        assert!(matches!(err, Error::IllPosedHierarchy(_)));
    }

    #[test]
    fn op_condition_paper_models() {
        let info = check_op_condition(&EfficiencyModel::info_theoretic(0.5).unwrap(), 2, 1.0).unwrap();
        assert!(info.holds);
        let x0 = info.crossing.unwrap();
        assert!(x0 > 0.0 && x0 < 1.0);
        assert!(check_op_condition(&EfficiencyModel::packet(2).unwrap(), 2, 1.0).unwrap().holds);
        let vacuous = check_op_condition(&EfficiencyModel::info_theoretic(0.5).unwrap(), 1, 1.0).unwrap();
        assert!(vacuous.holds && vacuous.crossing.is_none());
    }

    #[test]
    fn op_condition_fails_for_concave_model() {
        // f = 1 - e^{-x} has f''/f' = -1 everywhere.
        let c = check_op_condition(&EfficiencyModel::packet(1).unwrap(), 2, 1.0).unwrap();
        assert!(!c.holds);
    }

    #[test]
    fn phi_peaks_at_gamma_tilde() {
        let model = EfficiencyModel::packet(2).unwrap();
        let (k, n) = (3, 4.0);
        let g = solve_gamma_tilde(&model, k, n).unwrap().value;
        let top = phi(&model, k, n, g);
        let upper = n / (k as f64 - 1.0);
        for j in 1..10_000 {
            let x = upper * j as f64 / 10_000.0;
            assert!(phi(&model, k, n, x) <= top + 1e-9);
        }
    }

    #[test]
    fn characteristic_sinrs_ordering() {
        let s = CharacteristicSinrs::solve(EfficiencyModel::packet(10).unwrap(), 35, 128.0).unwrap();
        assert!(s.gamma_tilde <= s.beta_star && s.gamma_star <= s.beta_star);
        assert!(s.gamma_tilde < 128.0 / 34.0);
        assert!(s.roots_unique);
        assert!(s.delta() > 0.0);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let model = EfficiencyModel::packet(2).unwrap();
        assert!(solve_gamma_tilde(&model, 0, 1.0).is_err());
        assert!(solve_gamma_tilde(&model, 2, 0.5).is_err());
    }
}

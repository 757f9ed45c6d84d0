//! Sigmoidal efficiency functions.
//!
//! The efficiency function `f` maps the SINR of a transmission to its block
//! success probability. Two families are supported:
//!
//! * packet success `f(x) = (1 - e^{-x})^M` for a block of `M` symbols,
//! * information-theoretic outage `f(x) = e^{-c/x}` with `c = 2^R - 1`.
//!
//! Besides values and derivatives, every model exposes the logarithmic
//! derivative `f'/f` and the curvature ratio `f''/f'` in closed form. The
//! root solvers work with those ratios because `f` itself underflows for
//! large `M` near the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block success rate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EfficiencyModel {
    /// `(1 - e^{-x})^M`.
    PacketSuccess { m: u32 },
    /// `e^{-c/x}`, where `c = 2^R - 1` for a rate of `R` bits/s/Hz.
    InfoTheoretic { c: f64 },
}

/// Derivative order accepted by [`EfficiencyModel::deriv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl EfficiencyModel {
    pub fn packet(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("packet length M must be positive".into()));
        }
        Ok(Self::PacketSuccess { m })
    }

    /// Information-theoretic model for a spectral efficiency of `rate` bits/s/Hz.
    pub fn from_rate(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!("rate must be positive, got {rate}")));
        }
        Ok(Self::InfoTheoretic { c: rate.exp2() - 1.0 })
    }

    pub fn info_theoretic(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("c must be positive, got {c}")));
        }
        Ok(Self::InfoTheoretic { c })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PacketSuccess { m } => Self::packet(m).map(drop),
            Self::InfoTheoretic { c } => Self::info_theoretic(c).map(drop),
        }
    }

    /// `f(x)`; `f(0) = 0` by continuity.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("efficiency evaluated at SINR {x} < 0")));
        }
        Ok(self.eval_unchecked(x))
    }

    /// `f(x)` for `x >= 0` without argument validation.
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match *self {
            Self::PacketSuccess { m } => (-(-x).exp_m1()).powi(m as i32),
            Self::InfoTheoretic { c } => {
                if x == 0.0 {
                    0.0
                } else {
                    (-c / x).exp()
                }
            }
        }
    }

    pub fn deriv(&self, x: f64, order: Order) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("derivative requested at SINR {x} <= 0")));
        }
        Ok(match (*self, order) {
            (Self::PacketSuccess { m }, Order::First) => {
                let y = -(-x).exp_m1();
                m as f64 * y.powi(m as i32 - 1) * (-x).exp()
            }
            (Self::PacketSuccess { m }, Order::Second) => {
                let y = -(-x).exp_m1();
                let e = (-x).exp();
                let mf = m as f64;
                let curvature = if m >= 2 {
                    mf * (mf - 1.0) * y.powi(m as i32 - 2) * e * e
                } else {
                    0.0
                };
                curvature - mf * y.powi(m as i32 - 1) * e
            }
            (Self::InfoTheoretic { c }, Order::First) => c / (x * x) * (-c / x).exp(),
            (Self::InfoTheoretic { c }, Order::Second) => {
                let f = (-c / x).exp();
                f * (c * c / x.powi(4) - 2.0 * c / x.powi(3))
            }
        })
    }

    /// `f'(x) / f(x)` for `x > 0`.
    pub fn log_deriv(&self, x: f64) -> f64 {
        match *self {
            Self::PacketSuccess { m } => m as f64 / x.exp_m1(),
            Self::InfoTheoretic { c } => c / (x * x),
        }
    }

    /// `f''(x) / f'(x)` for `x > 0`.
    pub fn curvature_ratio(&self, x: f64) -> f64 {
        match *self {
            Self::PacketSuccess { m } => (m as f64 - 1.0) / x.exp_m1() - 1.0,
            Self::InfoTheoretic { c } => c / (x * x) - 2.0 / x,
        }
    }

    /// `f(x) / x`, continuous at the origin (both families vanish there).
    pub fn efficiency_per_sinr(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            self.eval_unchecked(x) / x
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn eval_at_zero_is_zero() {
        assert_eq!(EfficiencyModel::packet(2).unwrap().eval(0.0).unwrap(), 0.0);
        assert_eq!(EfficiencyModel::info_theoretic(0.5).unwrap().eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_direct_substitution() {
        let f = EfficiencyModel::info_theoretic(0.5).unwrap();
        assert!(close(f.eval(0.5).unwrap(), (-1.0f64).exp(), 1e-15));
    }

    #[test]
    fn eval_packet_m2_at_beta_star() {
        // (1 - e^{-1.2564312})^2 = 0.51169967065149... (40-digit reference)
        let f = EfficiencyModel::packet(2).unwrap();
        let v = f.eval(1.2564312).unwrap();
        assert!((v - 0.511699670651493).abs() < 1e-14, "{v}");
    }

    #[test]
    fn negative_sinr_is_domain_error() {
        let f = EfficiencyModel::packet(2).unwrap();
        assert!(matches!(f.eval(-1e-3), Err(Error::Domain(_))));
        assert!(matches!(f.deriv(0.0, Order::First), Err(Error::Domain(_))));
        assert!(matches!(f.deriv(-2.0, Order::Second), Err(Error::Domain(_))));
    }

    #[test]
    fn first_derivative_closed_forms() {
        let info = EfficiencyModel::info_theoretic(1.0).unwrap();
        assert!(close(info.deriv(1.0, Order::First).unwrap(), (-1.0f64).exp(), 1e-15));
        let pkt = EfficiencyModel::packet(1).unwrap();
        assert!(close(pkt.deriv(2f64.ln(), Order::First).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn ratios_match_derivatives() {
        for model in [
            EfficiencyModel::packet(1).unwrap(),
            EfficiencyModel::packet(7).unwrap(),
            EfficiencyModel::info_theoretic(0.3).unwrap(),
        ] {
            for &x in &[0.05, 0.7, 2.0, 9.0] {
                let f = model.eval(x).unwrap();
                let d1 = model.deriv(x, Order::First).unwrap();
                let d2 = model.deriv(x, Order::Second).unwrap();
                assert!(close(model.log_deriv(x), d1 / f, 1e-12));
                assert!(close(model.curvature_ratio(x), d2 / d1, 1e-10));
            }
        }
    }

    #[test]
    fn from_rate_sets_c() {
        let EfficiencyModel::InfoTheoretic { c } = EfficiencyModel::from_rate(1.0).unwrap() else {
            unreachable!()
        };
        assert_eq!(c, 1.0);
        assert!(EfficiencyModel::from_rate(0.0).is_err());
        assert!(EfficiencyModel::packet(0).is_err());
    }

    #[test]
    fn serde_tagged_layout() {
        let m: EfficiencyModel = serde_json::from_str(r#"{"kind":"packet_success","m":10}"#).unwrap();
        assert_eq!(m, EfficiencyModel::PacketSuccess { m: 10 });
    }
}

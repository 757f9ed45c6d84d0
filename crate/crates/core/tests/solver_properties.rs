mod common;

use powergame::efficiency::Order;
use powergame::solvers::{phi, solve_beta_star, stackelberg_coefficient};
use powergame::{CharacteristicSinrs, EfficiencyModel};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn residual(model: &EfficiencyModel, coef: f64, x: f64) -> f64 {
    let f = model.eval(x).unwrap();
    let d = model.deriv(x, Order::First).unwrap();
    (x * (1.0 - coef * x) * d - f).abs() / f.max(1.0)
}

proptest! {
    #[test]
    fn stationarity_residuals_vanish(seed in any::<u64>(), k in 1usize..10) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = common::random_model(&mut rng);
        let beta = solve_beta_star(&model).unwrap();
        let n = common::random_spreading(&mut rng, k, beta);
        let s = CharacteristicSinrs::solve(model, k, n).unwrap();
        prop_assert!(residual(&model, 0.0, s.beta_star) < 1e-12);
        prop_assert!(residual(&model, (k as f64 - 1.0) / n, s.gamma_tilde) < 1e-12);
        let a = stackelberg_coefficient(k, n, s.beta_star).unwrap();
        prop_assert!(residual(&model, a, s.gamma_star) < 1e-12);
    }

    #[test]
    fn info_theoretic_closed_forms(c in 0.01f64..10.0, k in 1usize..12, n_scale in 1.05f64..20.0) {
        let n = ((k as f64 - 1.0) * c * n_scale).max(1.0);
        let s = CharacteristicSinrs::solve(EfficiencyModel::info_theoretic(c).unwrap(), k, n).unwrap();
        prop_assert!((s.beta_star - c).abs() <= 1e-9 * c);
        let tilde = c / (1.0 + c * (k as f64 - 1.0) / n);
        prop_assert!((s.gamma_tilde - tilde).abs() <= 1e-9 * tilde);
        let b = c / n;
        let a = if k < 2 { 0.0 } else { ((k as f64 - 1.0) * b / n) / (1.0 - (k as f64 - 2.0) * b) };
        let star = c / (1.0 + c * a);
        prop_assert!((s.gamma_star - star).abs() <= 1e-9 * star);
    }

    #[test]
    fn characteristic_ordering(seed in any::<u64>(), k in 2usize..10) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = common::random_model(&mut rng);
        let beta = solve_beta_star(&model).unwrap();
        let s = CharacteristicSinrs::solve(model, k, common::random_spreading(&mut rng, k, beta)).unwrap();
        prop_assert!(s.gamma_tilde <= s.beta_star);
        prop_assert!(s.gamma_star <= s.beta_star);
        prop_assert!(s.delta() >= 0.0);
    }

    #[test]
    fn phi_peaks_at_gamma_tilde(seed in any::<u64>(), k in 2usize..10) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = common::random_model(&mut rng);
        let beta = solve_beta_star(&model).unwrap();
        let n = common::random_spreading(&mut rng, k, beta);
        let s = CharacteristicSinrs::solve(model, k, n).unwrap();
        let peak = s.phi(s.gamma_tilde);
        let upper = n / (k as f64 - 1.0);
        for j in 1..10_000 {
            let x = upper * j as f64 / 10_000.0;
            prop_assert!(phi(&model, k, n, x) <= peak + 1e-9 * peak.max(1.0), "x = {x}");
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = StdRng::seed_from_u64(7);
    let models = [
        EfficiencyModel::packet(1).unwrap(),
        EfficiencyModel::packet(2).unwrap(),
        EfficiencyModel::packet(10).unwrap(),
        EfficiencyModel::packet(100).unwrap(),
        EfficiencyModel::info_theoretic(0.5).unwrap(),
        EfficiencyModel::info_theoretic(rng.gen_range(0.1..5.0)).unwrap(),
    ];
    let h = 1e-6;
    for model in &models {
        for j in 0..100 {
            let x = 10f64.powf(-1.0 + 2.5 * j as f64 / 99.0);
            let f = |y: f64| model.eval(y).unwrap();
            let d1 = model.deriv(x, Order::First).unwrap();
            let d2 = model.deriv(x, Order::Second).unwrap();
            let fd1 = (f(x * (1.0 + h)) - f(x * (1.0 - h))) / (2.0 * h * x);
            let g = |y: f64| model.deriv(y, Order::First).unwrap();
            let fd2 = (g(x * (1.0 + h)) - g(x * (1.0 - h))) / (2.0 * h * x);
            // Relative error against the derivative scale, since f' may cross zero.
            let scale1 = d1.abs().max(f(x) / x).max(1e-300);
            let scale2 = d2.abs().max(d1.abs() / x).max(1e-300);
            assert!((d1 - fd1).abs() < 1e-5 * scale1, "{model:?} f' at {x}: {d1} vs {fd1}");
            assert!((d2 - fd2).abs() < 1e-5 * scale2, "{model:?} f'' at {x}: {d2} vs {fd2}");
        }
    }
}

#[test]
fn sigmoid_free_packet_model_has_no_root() {
    let err = solve_beta_star(&EfficiencyModel::packet(1).unwrap()).unwrap_err();
    assert!(matches!(err, powergame::Error::NoInteriorRoot { .. }), "{err}");
}

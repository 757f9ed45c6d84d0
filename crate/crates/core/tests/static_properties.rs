mod common;

use powergame::pareto::pareto_dominates;
use powergame::repeated_game::best_deviation;
use powergame::static_game::{
    ne_profile, op_profile, public_signal, reconstruct_public_signal, se_profiles, sinrs, utilities,
};
use powergame::{ChannelState, NetworkConfig, PowerProfile};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

proptest! {
    #[test]
    fn normalization_invariance(seed in any::<u64>(), k in 1usize..8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = common::random_static(&mut rng, k, 10.0, (2.0, 10.0));
        let p = PowerProfile((0..k).map(|i| rng.gen_range(0.0..inst.cfg.p_max[i])).collect());
        let scale: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.gen_range(-2.0..2.0))).collect();
        let p2 = PowerProfile(p.0.iter().zip(&scale).map(|(p, s)| p / s).collect());
        let ch2 = ChannelState::new(inst.ch.gains2.iter().zip(&scale).map(|(g, s)| g * s).collect());
        let mut cfg2 = inst.cfg.clone();
        cfg2.p_max = vec![f64::MAX; k];
        let (s1, s2) = (sinrs(&inst.cfg, &inst.ch, &p), sinrs(&cfg2, &ch2, &p2));
        let (a1, a2) = (p.received(&inst.ch), p2.received(&ch2));
        let (u1, u2) = (utilities(&inst.cfg, &inst.s.model, &inst.ch, &p), utilities(&cfg2, &inst.s.model, &ch2, &p2));
        for i in 0..k {
            prop_assert!((s1[i] - s2[i]).abs() <= 1e-12 * s1[i].abs().max(1e-300));
            prop_assert!((a1[i] - a2[i]).abs() <= 1e-12 * a1[i].abs().max(1e-300));
            prop_assert!((u2.0[i] - scale[i] * u1.0[i]).abs() <= 1e-12 * u2.0[i].abs().max(1e-300));
        }
        let (n1, n2) = (u1.normalized(&inst.ch), u2.normalized(&ch2));
        for i in 0..k {
            prop_assert!((n1[i] - n2[i]).abs() <= 1e-12 * n1[i].abs().max(1e-300));
        }
    }

    #[test]
    fn ne_survives_unilateral_grid_deviations(seed in any::<u64>(), k in 2usize..6) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = common::random_static(&mut rng, k, 10.0, (1.5, 10.0));
        let ne = ne_profile(&inst.cfg, &inst.ch, inst.s.beta_star).unwrap();
        let base = utilities(&inst.cfg, &inst.s.model, &inst.ch, &ne);
        for i in 0..k {
            for j in 0..=1000 {
                let mut p = ne.clone();
                p.0[i] = inst.cfg.p_max[i] * j as f64 / 1000.0;
                let u = utilities(&inst.cfg, &inst.s.model, &inst.ch, &p).0[i];
                prop_assert!(u <= base.0[i] * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn closed_form_profiles(seed in any::<u64>(), k in 2usize..10) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = common::random_static(&mut rng, k, 10.0, (1.5, 10.0));
        let model = inst.s.model;
        let ne = ne_profile(&inst.cfg, &inst.ch, inst.s.beta_star).unwrap();
        let op = op_profile(&inst.cfg, &inst.ch, inst.s.gamma_tilde).unwrap();
        for x in sinrs(&inst.cfg, &inst.ch, &ne) {
            prop_assert!((x - inst.s.beta_star).abs() < 1e-9 * inst.s.beta_star);
        }
        for x in sinrs(&inst.cfg, &inst.ch, &op) {
            prop_assert!((x - inst.s.gamma_tilde).abs() < 1e-9 * inst.s.gamma_tilde);
        }
        let a = op.received(&inst.ch);
        prop_assert!(a.iter().all(|x| (x - a[0]).abs() <= 1e-12 * a[0]));

        let u_ne = utilities(&inst.cfg, &model, &inst.ch, &ne);
        let u_op = utilities(&inst.cfg, &model, &inst.ch, &op);
        prop_assert!(pareto_dominates(&u_op.normalized(&inst.ch), &u_ne.normalized(&inst.ch)));
        for leader in 0..k {
            let se = se_profiles(&inst.cfg, &model, &inst.ch, inst.s.beta_star, inst.s.gamma_star, leader).unwrap();
            for i in 0..k {
                prop_assert!(u_op.0[i] >= u_ne.0[i] * (1.0 - 1e-12));
                if i == leader {
                    prop_assert!(u_op.0[i] >= se.utilities.0[i] * (1.0 - 1e-12));
                } else if k >= 3 {
                    prop_assert!(u_op.0[i] >= se.utilities.0[i] * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn followers_best_respond_in_stackelberg(seed in any::<u64>(), k in 2usize..8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = common::random_static(&mut rng, k, 10.0, (1.5, 10.0));
        let se = se_profiles(&inst.cfg, &inst.s.model, &inst.ch, inst.s.beta_star, inst.s.gamma_star, 0).unwrap();
        let x = sinrs(&inst.cfg, &inst.ch, &se.powers);
        prop_assert!((x[0] - inst.s.gamma_star).abs() < 1e-9 * inst.s.gamma_star);
        for (i, xi) in x.iter().enumerate().skip(1) {
            prop_assert!((xi - inst.s.beta_star).abs() < 1e-9 * inst.s.beta_star);
            let br = best_deviation(&inst.cfg, &inst.s.model, &inst.ch, &se.powers, i, inst.s.beta_star);
            prop_assert!((br.power - se.powers.0[i]).abs() < 1e-9 * se.powers.0[i]);
        }
    }

    #[test]
    fn public_signal_is_reconstructible(seed in any::<u64>(), k in 1usize..8, n in prop_oneof![Just(1.0), 1.0f64..64.0]) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = NetworkConfig::symmetric(k, n, 10f64.powf(rng.gen_range(-6.0..0.0)), 1.0, 1.0, 0.1, 10.0).unwrap();
        let ch = ChannelState::new((0..k).map(|_| rng.gen_range(0.1..10.0)).collect());
        let p = PowerProfile((0..k).map(|_| rng.gen_range(1e-6..1.0)).collect());
        let omega = public_signal(&cfg, &ch, &p);
        let x = sinrs(&cfg, &ch, &p);
        for i in 0..k {
            let w = reconstruct_public_signal(p.0[i], ch.gains2[i], x[i], n).unwrap();
            prop_assert!((w - omega).abs() <= 1e-12 * omega);
        }
    }
}

mod common;

use common::{pinned_model, pinned_model_2d, pinned_params, ParamSampler};

use kobol_pricer::sparse::{
    build_ball, cardinality_estimate, decay_rate, effective_radius, enumerate, inverse_order_sum,
    kappa_n, radius_for_budget, threshold_index_set, truncation_error_bound,
    volume_aniso_unit_ball, IndexSet,
};
use kobol_pricer::{FactorModel, KobolParams};

#[test]
fn pinned_decay_rate() {
    // d = -Gamma(-1/2) cos(pi/4) (c_+ + c_-) = 2 sqrt(2 pi)
    let d = decay_rate(&pinned_params()).unwrap();
    assert!((d - 5.01325654926200100485).abs() < 1e-14);
}

#[test]
fn decay_rate_rejects_log_and_linear_regimes() {
    let log = KobolParams::new(0.0, 1.0, 1.0, 8.0, -4.0, 0.0).unwrap();
    let lin = KobolParams::new(1.0, 1.0, 1.0, 8.0, -4.0, 0.0).unwrap();
    assert_eq!(decay_rate(&log).unwrap_err().exit_code(), 1);
    assert_eq!(decay_rate(&lin).unwrap_err().exit_code(), 1);
}

#[test]
fn unit_ball_volume_values() {
    // nu = (1/2, 1/2): 4 Gamma(3)^2 / Gamma(5) = 2/3
    let v = volume_aniso_unit_ball(&[0.5, 0.5]).unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-13);
    // nu = (1, 1): the l^1 cross-polytope, volume 2
    let v = volume_aniso_unit_ball(&[1.0, 1.0]).unwrap();
    assert!((v - 2.0).abs() < 1e-13);
    // nu = 1 in one dimension: the interval [-1, 1]
    let v = volume_aniso_unit_ball(&[1.0]).unwrap();
    assert!((v - 2.0).abs() < 1e-13);
    // nu = (2, 2): the unit disk
    let v = volume_aniso_unit_ball(&[2.0, 2.0]).unwrap();
    assert!((v - std::f64::consts::PI).abs() < 1e-13);
}

#[test]
fn unit_ball_volume_matches_brute_force_area() {
    for nu in [[0.4, 0.7], [0.5, 0.5], [0.8, 1.6]] {
        let formula = volume_aniso_unit_ball(&nu).unwrap();
        // quadrant area by midpoint rule: x2 reach (1 - x1^nu1)^{1/nu2}
        let n = 40_000;
        let mut area = 0.0;
        for i in 0..n {
            let x1 = (i as f64 + 0.5) / n as f64;
            area += (1.0 - x1.powf(nu[0])).powf(1.0 / nu[1]) / n as f64;
        }
        assert!(
            (4.0 * area - formula).abs() < 1e-4 * formula,
            "nu={nu:?}: {formula} vs {}",
            4.0 * area
        );
    }
}

#[test]
fn kappa_reference_value() {
    // n = 1, nu = 1/2, dT = 4: kappa = 2 (dT)^{-2} = 0.125
    let model = pinned_model();
    let d = decay_rate(&pinned_params()).unwrap();
    let t = 4.0 / d;
    let kappa = kappa_n(&model, t).unwrap();
    assert!((kappa - 0.125).abs() < 1e-13);
    // M = kappa  =>  ln R = 1
    let r = radius_for_budget(kappa, &model, t).unwrap();
    assert!((r - std::f64::consts::E).abs() < 1e-12);
    // M = 12.5  =>  R = e^10
    let r = radius_for_budget(12.5, &model, t).unwrap();
    assert!((r - 10f64.exp()).abs() < 1e-8 * r);
}

#[test]
fn budget_radius_round_trip() {
    let model = pinned_model_2d();
    let t = 0.5;
    for &m in &[1e2, 1e3, 1e5] {
        let r = radius_for_budget(m, &model, t).unwrap();
        let back = cardinality_estimate(r, &model, t).unwrap();
        assert!((back - m).abs() < 1e-9 * m);
    }
    assert!((inverse_order_sum(&model) - 4.0).abs() < 1e-14);
}

#[test]
fn enumeration_is_exact_and_negation_closed() {
    let mut sampler = ParamSampler::new(21);
    for _ in 0..20 {
        let model =
            FactorModel::independent(vec![sampler.draw_sub_linear(), sampler.draw_sub_linear()], 0.9)
                .unwrap();
        let t = sampler.uniform(0.3, 1.0);
        let r = sampler.uniform(5.0, 500.0);
        let p = 2 * sampler.uniform(2.0, 12.0) as u32;
        let ball = build_ball(&model, t, r, p).unwrap();
        let set = enumerate(&ball, 10_000_000).unwrap();
        assert!(set.contains(&[0, 0]));
        // membership agrees with the predicate on every enumerated point
        for m in set.iter() {
            assert!(ball.member_index(m));
            let neg: Vec<i64> = m.iter().map(|&v| -v).collect();
            assert!(set.contains(&neg));
        }
        // no member just outside the axis intercepts
        for s in 0..2 {
            let reach = (ball.axis_intercept(s) / ball.freq_scale).floor() as i64;
            let mut probe = [0i64; 2];
            probe[s] = reach + 1;
            assert!(!ball.member_index(&probe));
            assert!(!set.contains(&probe));
        }
    }
}

#[test]
fn enumeration_is_lexicographically_sorted() {
    let model = pinned_model_2d();
    let ball = build_ball(&model, 0.5, 100.0, 16).unwrap();
    let set = enumerate(&ball, 1_000_000).unwrap();
    for i in 1..set.len() {
        assert!(set.point(i - 1) < set.point(i));
    }
}

#[test]
fn cardinality_estimate_tracks_enumeration() {
    // lattice count ~ kappa_n (ln R)^S (P / 2 pi)^n at large R
    let model = pinned_model_2d();
    let t = 0.5;
    let r = 1e4;
    let p = 32;
    let ball = build_ball(&model, t, r, p).unwrap();
    let set = enumerate(&ball, 100_000_000).unwrap();
    let predicted = cardinality_estimate(r, &model, t).unwrap()
        * (p as f64 / (2.0 * std::f64::consts::PI)).powi(2);
    let ratio = set.len() as f64 / predicted;
    assert!((0.5..2.0).contains(&ratio), "ratio = {ratio}");
}

#[test]
fn cap_exceeded_is_a_resource_error() {
    let model = pinned_model_2d();
    let ball = build_ball(&model, 0.5, 1e8, 64).unwrap();
    let err = enumerate(&ball, 1000).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn export_import_round_trip() {
    let model = pinned_model();
    let ball = build_ball(&model, 0.5, 200.0, 12).unwrap();
    let set = enumerate(&ball, 1_000_000).unwrap();
    let text = set.export();
    assert!(text.starts_with("# n,P,R,freq_scale\n"));
    let back = IndexSet::import(&text).unwrap();
    assert_eq!(set, back);
}

#[test]
fn effective_radius_dominates_requested_radius() {
    let mut sampler = ParamSampler::new(22);
    for _ in 0..20 {
        let model = FactorModel::single(sampler.draw_sub_linear(), 0.9).unwrap();
        let t = sampler.uniform(0.2, 1.5);
        let r = sampler.uniform(10.0, 1e5);
        let r_eff = effective_radius(&model, t, r).unwrap();
        assert!(r_eff >= r);
    }
}

#[test]
fn effective_ball_contains_every_large_coefficient() {
    // |Phi(v, T)| >= 1/R on the lattice implies membership of the ball
    // built at the effective radius
    let model = pinned_model_2d();
    let t = 0.5;
    let r = 1e3;
    let p = 16;
    let r_eff = effective_radius(&model, t, r).unwrap();
    let ball = build_ball(&model, t, r_eff, p).unwrap();
    let fs = 2.0 * std::f64::consts::PI / p as f64;
    let reach = (ball.axis_intercept(0) / fs).ceil() as i64 + 3;
    for m0 in -reach..=reach {
        for m1 in -reach..=reach {
            let v = vec![
                num_complex::Complex64::new(fs * m0 as f64, 0.0),
                num_complex::Complex64::new(fs * m1 as f64, 0.0),
            ];
            if model.char_fn(&v, t).unwrap().norm() >= 1.0 / r {
                assert!(
                    ball.member_index(&[m0, m1]),
                    "large coefficient at ({m0}, {m1}) escaped the ball"
                );
            }
        }
    }
}

#[test]
fn truncation_bound_shrinks_with_the_budget() {
    let model = pinned_model_2d();
    let t = 0.5;
    let b1 = truncation_error_bound(1e3, f64::INFINITY, &model, t, 16).unwrap();
    let b2 = truncation_error_bound(1e4, f64::INFINITY, &model, t, 16).unwrap();
    let b3 = truncation_error_bound(1e5, f64::INFINITY, &model, t, 16).unwrap();
    assert!(b1 > b2 && b2 > b3);
    assert!(b3 > 0.0);
    assert!(truncation_error_bound(1e3, 1.5, &model, t, 16).is_err());
}

#[test]
fn threshold_set_contains_the_ball_interior_mass() {
    let model = pinned_model();
    let t = 0.5;
    let p = 12;
    let rho = 1e-3;
    let set = threshold_index_set(&model, t, p, rho, 1_000_000).unwrap();
    assert!(set.contains(&[0]));
    let fs = 2.0 * std::f64::consts::PI / p as f64;
    for m in set.iter() {
        let v = vec![num_complex::Complex64::new(fs * m[0] as f64, 0.0)];
        assert!(model.char_fn(&v, t).unwrap().norm() >= rho);
    }
}

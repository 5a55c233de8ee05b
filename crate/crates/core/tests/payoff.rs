mod common;

use num_complex::Complex64;

use kobol_pricer::kobol::AnalyticTube;
use kobol_pricer::oracle::{payoff_transform_quadrature, QuadCtrl};
use kobol_pricer::payoff::{
    check_admissible, find_damping, payoff_l1_constant, payoff_transform, DampingVector,
};

#[test]
fn l1_constants_in_closed_form() {
    // n = 1: L = Gamma(-1 - eps_1) / Gamma(1 - eps_1) = 1/((-1-eps_1)(-eps_1))
    let l = payoff_l1_constant(&DampingVector::new(vec![-2.0]).unwrap()).unwrap();
    assert!((l - 0.5).abs() < 1e-12);
    let l = payoff_l1_constant(&DampingVector::new(vec![-3.0]).unwrap()).unwrap();
    assert!((l - 1.0 / 6.0).abs() < 1e-12);
    // n = 2, eps = (-3.5, 1): Gamma(1.5) Gamma(1) / Gamma(4.5) = 8/105
    let l = payoff_l1_constant(&DampingVector::new(vec![-3.5, 1.0]).unwrap()).unwrap();
    assert!((l - 8.0 / 105.0).abs() < 1e-12);
}

#[test]
fn admissibility_constraints() {
    assert!(check_admissible(&[-2.0]).is_ok());
    assert!(check_admissible(&[-1.0]).is_err());
    assert!(check_admissible(&[-0.5]).is_err());
    assert!(check_admissible(&[-2.0, -0.1]).is_err());
    assert!(check_admissible(&[-1.2, 0.25]).is_err()); // needs < -1.25
    assert!(check_admissible(&[-1.3, 0.25]).is_ok());
    assert!(check_admissible(&[]).is_err());
}

#[test]
fn transform_rejects_inadmissible_arguments() {
    assert!(payoff_transform(&[Complex64::new(1.0, -0.5)]).is_err());
    assert!(payoff_transform(&[Complex64::new(1.0, -2.0), Complex64::new(0.5, -0.1)]).is_err());
}

#[test]
fn transform_matches_direct_quadrature_1d() {
    let ctrl = QuadCtrl::default();
    for &(x, e) in &[(0.0, -2.0), (1.5, -2.3), (-3.0, -4.0), (7.0, -1.6)] {
        let u = [Complex64::new(x, e)];
        let closed = payoff_transform(&u).unwrap();
        let quad = payoff_transform_quadrature(&u, &ctrl).unwrap();
        assert!(
            (closed - quad).norm() < 1e-8 * closed.norm().max(1e-10),
            "u = {x}+{e}i: {closed} vs {quad}"
        );
    }
}

#[test]
fn transform_matches_direct_quadrature_2d() {
    let ctrl = QuadCtrl::default();
    for &(x1, e1, x2, e2) in &[
        (0.0, -2.425, 0.0, 0.25),
        (1.0, -2.0, -0.5, 0.5),
        (-2.0, -3.0, 1.5, 0.75),
    ] {
        let u = [Complex64::new(x1, e1), Complex64::new(x2, e2)];
        let closed = payoff_transform(&u).unwrap();
        let quad = payoff_transform_quadrature(&u, &ctrl).unwrap();
        assert!(
            (closed - quad).norm() < 1e-6 * closed.norm().max(1e-8),
            "u = ({x1},{e1};{x2},{e2}): {closed} vs {quad}"
        );
    }
}

#[test]
fn default_damping_pinned_values() {
    let tube = AnalyticTube {
        a_minus: -3.6,
        a_plus: 7.2,
    };
    let d = find_damping(&tube, 1).unwrap();
    assert!((d.eps[0] - (-2.3)).abs() < 1e-14);
    let d = find_damping(&tube, 2).unwrap();
    assert!((d.eps[0] - (-2.425)).abs() < 1e-14);
    assert!((d.eps[1] - 0.25).abs() < 1e-14);

    let tube = AnalyticTube {
        a_minus: -4.5,
        a_plus: 4.5,
    };
    let d = find_damping(&tube, 2).unwrap();
    assert!((d.eps[0] - (-2.875)).abs() < 1e-14);
    assert!((d.eps[1] - 0.25).abs() < 1e-14);
}

#[test]
fn damping_infeasible_for_shallow_tube() {
    let tube = AnalyticTube {
        a_minus: -0.45,
        a_plus: 7.2,
    };
    let err = find_damping(&tube, 1).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("a_-"));
}

#[test]
fn tube_membership_is_checked() {
    let tube = AnalyticTube {
        a_minus: -2.0,
        a_plus: 2.0,
    };
    let d = DampingVector::new(vec![-2.5]).unwrap();
    assert!(d.check_tube(&tube).is_err());
    let d = DampingVector::new(vec![-1.5]).unwrap();
    assert!(d.check_tube(&tube).is_ok());
}

#[test]
fn transform_decays_along_the_real_direction() {
    // |FS| must vanish as any real frequency grows (Riemann-Lebesgue)
    let base = payoff_transform(&[Complex64::new(0.0, -2.0)]).unwrap().norm();
    let far = payoff_transform(&[Complex64::new(200.0, -2.0)]).unwrap().norm();
    assert!(far < 1e-3 * base);
}

use num_complex::Complex64;

use kobol_pricer::gamma::{gamma_real, log_gamma, upper_incomplete_gamma};

fn lg(re: f64, im: f64) -> Complex64 {
    log_gamma(Complex64::new(re, im)).unwrap()
}

#[test]
fn real_axis_values() {
    assert!((lg(1.0, 0.0).norm()) < 1e-14);
    assert!((lg(2.0, 0.0).norm()) < 1e-14);
    let half = lg(0.5, 0.0);
    assert!((half.re - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    assert!((gamma_real(5.0).unwrap() - 24.0).abs() < 1e-12);
    assert!((gamma_real(0.5).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-14);
}

#[test]
fn modulus_of_gamma_i() {
    // |Gamma(i)| = sqrt(pi / sinh(pi))
    let g = lg(0.0, 1.0).exp().norm();
    assert!((g - 0.52156404686493984116).abs() < 1e-14);
}

#[test]
fn recurrence_on_the_complex_plane() {
    for &(re, im) in &[(0.3, 1.7), (-1.4, 2.2), (2.5, -0.6), (-3.3, -4.1)] {
        let z = Complex64::new(re, im);
        let lhs = log_gamma(z + 1.0).unwrap();
        let rhs = log_gamma(z).unwrap() + z.ln();
        // both sides may differ by 2 pi i from branch choices; compare exp
        assert!((lhs.exp() - rhs.exp()).norm() < 1e-12 * lhs.exp().norm());
    }
}

#[test]
fn reflection_against_negative_reals() {
    // Gamma(-0.5) = -2 sqrt(pi)
    let g = gamma_real(-0.5).unwrap();
    assert!((g + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    // Gamma(-1.5) = 4 sqrt(pi) / 3
    let g = gamma_real(-1.5).unwrap();
    assert!((g - 4.0 * std::f64::consts::PI.sqrt() / 3.0).abs() < 1e-12);
}

#[test]
fn poles_are_rejected() {
    assert!(log_gamma(Complex64::new(0.0, 0.0)).is_err());
    assert!(log_gamma(Complex64::new(-3.0, 0.0)).is_err());
    assert!(gamma_real(-2.0).is_err());
}

#[test]
fn large_imaginary_part_does_not_overflow() {
    let v = lg(0.25, 250.0);
    assert!(v.re.is_finite() && v.im.is_finite());
    // Stirling modulus check: |Gamma(x+iy)| ~ sqrt(2 pi) |y|^{x-1/2} e^{-pi |y|/2}
    let y: f64 = 250.0;
    let expect = 0.5 * (2.0 * std::f64::consts::PI).ln() + (0.25 - 0.5) * y.ln()
        - std::f64::consts::FRAC_PI_2 * y;
    assert!((v.re - expect).abs() < 1e-3 * expect.abs());
}

#[test]
fn upper_incomplete_gamma_values() {
    // Gamma(1, x) = e^{-x}
    for &x in &[0.1, 1.0, 5.0, 30.0] {
        let g = upper_incomplete_gamma(1.0, x).unwrap();
        assert!((g - (-x as f64).exp()).abs() < 1e-13 * (-x as f64).exp().max(1e-300));
    }
    // Gamma(1/2, x) = sqrt(pi) erfc(sqrt(x)); spot value at x = 1
    let g = upper_incomplete_gamma(0.5, 1.0).unwrap();
    assert!((g - 0.27880558528066197650).abs() < 1e-12);
    // Gamma(s, 0) = Gamma(s)
    let g = upper_incomplete_gamma(0.75, 0.0).unwrap();
    assert!((g - gamma_real(0.75).unwrap()).abs() < 1e-12);
}

#[test]
fn upper_incomplete_gamma_monotone_in_x() {
    let mut prev = f64::INFINITY;
    for i in 0..40 {
        let x = 0.05 * (i as f64 + 1.0);
        let g = upper_incomplete_gamma(0.3, x).unwrap();
        assert!(g < prev);
        prev = g;
    }
}

mod common;

use common::{pinned_model, ParamSampler};

use kobol_pricer::lattice::{
    alias_budget, alias_series_bound, alias_series_direct, build_density_approximant,
    density_error_bound, density_truncation_bound, majorant_mt, select_period,
};
use kobol_pricer::oracle::{density_quadrature, QuadCtrl};
use kobol_pricer::sparse::{build_ball, effective_radius, enumerate};
use kobol_pricer::FactorModel;

#[test]
fn period_selection_example() {
    // M_T = 1, a = 2, eps = 1e-8
    let p = select_period(1.0, &[2.0], 1e-8).unwrap();
    assert_eq!(p, 11);
}

#[test]
fn geometric_bound_dominates_the_direct_series() {
    let mut sampler = ParamSampler::new(31);
    for _ in 0..200 {
        let n = 1 + (sampler.uniform(0.0, 3.0) as usize);
        let a: Vec<f64> = (0..n).map(|_| sampler.uniform(0.05, 4.0)).collect();
        let p = 1 + sampler.uniform(0.0, 30.0) as u32;
        let direct = alias_series_direct(p, &a);
        let bound = alias_series_bound(p, &a);
        assert!(direct <= bound + 1e-16, "P={p} a={a:?}");
    }
}

#[test]
fn selected_period_certifies_the_target() {
    let mut sampler = ParamSampler::new(32);
    for _ in 0..100 {
        let n = 1 + (sampler.uniform(0.0, 3.0) as usize);
        let a: Vec<f64> = (0..n).map(|_| sampler.uniform(0.1, 3.0)).collect();
        let m_t = sampler.uniform(0.01, 10.0);
        let eps = 10f64.powf(sampler.uniform(-10.0, -3.0));
        let p = select_period(m_t, &a, eps).unwrap();
        assert!(m_t * alias_series_direct(p, &a) <= eps);
        if p > 1 {
            // minimality with respect to the certified bound
            assert!(m_t * alias_series_bound(p - 1, &a) > eps);
        }
    }
}

#[test]
fn majorant_is_positive_and_scale_reasonable() {
    let model = pinned_model();
    let tube = model.analytic_tube().unwrap();
    let m_t = majorant_mt(&model, &tube, 0.5, &QuadCtrl::default()).unwrap();
    assert!(m_t.is_finite() && m_t > 0.0);
    // the majorant dominates the density sup (density peak is ~O(1) here)
    assert!(m_t > 0.1);
}

#[test]
fn density_error_bound_formula() {
    let budget = alias_budget(1.0, &[2.0], 1e-8).unwrap();
    assert_eq!(budget.p, 11);
    assert!((density_error_bound(&budget, f64::INFINITY, 1) - 1e-8).abs() < 1e-22);
    let b2 = density_error_bound(&budget, 2.0, 2);
    assert!((b2 - 1e-8 * 11f64.powf(1.0)).abs() < 1e-20);
}

fn pinned_approximant(
    eps_alias: f64,
    r: f64,
) -> (
    FactorModel,
    kobol_pricer::lattice::DensityApproximant,
    f64,
    f64,
) {
    let model = pinned_model();
    let t = 0.5;
    let tube = model.analytic_tube().unwrap();
    let ctrl = QuadCtrl::default();
    let m_t = majorant_mt(&model, &tube, t, &ctrl).unwrap();
    let budget = alias_budget(m_t, &[tube.symmetric()], eps_alias).unwrap();
    let r_eff = effective_radius(&model, t, r).unwrap();
    let ball = build_ball(&model, t, r_eff, budget.p).unwrap();
    let set = enumerate(&ball, 10_000_000).unwrap();
    let approx = build_density_approximant(&model, t, budget.p, &set).unwrap();
    let alias = density_error_bound(&budget, f64::INFINITY, 1);
    let trunc = density_truncation_bound(&model, t, budget.p, &set).unwrap();
    (model, approx, alias, trunc)
}

#[test]
fn density_matches_the_quadrature_oracle() {
    let (model, approx, alias, trunc) = pinned_approximant(1e-8, 1e6);
    let tube = model.analytic_tube().unwrap();
    let ctrl = QuadCtrl::default();
    let bound = alias + trunc;
    for i in 0..21 {
        let x = -3.0 + 0.3 * i as f64;
        let lattice = approx.eval(&[x]).unwrap();
        let oracle = density_quadrature(&model, 0.5, &[x], &tube, &ctrl).unwrap();
        assert!(
            (lattice.value - oracle).abs() <= bound + 1e-10,
            "x={x}: {} vs {oracle} (bound {bound})",
            lattice.value
        );
    }
}

#[test]
fn density_mass_is_one() {
    let (_, approx, _, _) = pinned_approximant(1e-8, 1e6);
    assert!((approx.cube_mass() - 1.0).abs() < 1e-8);
}

#[test]
fn density_values_are_real_and_nonnegative_in_the_bulk() {
    let (_, approx, alias, trunc) = pinned_approximant(1e-8, 1e6);
    for i in 0..31 {
        let x = -3.0 + 0.2 * i as f64;
        let v = approx.eval(&[x]).unwrap();
        assert!(v.imag_residual < 1e-12);
        assert!(v.value >= -(alias + trunc));
    }
}

#[test]
fn eval_outside_the_cube_is_rejected() {
    let (_, approx, _, _) = pinned_approximant(1e-4, 100.0);
    let err = approx.eval(&[approx.p as f64]).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn coefficients_are_hermitian() {
    let (_, approx, _, _) = pinned_approximant(1e-6, 1e4);
    let set = approx.frequencies();
    let len = set.len();
    for i in 0..len {
        let j = len - 1 - i;
        let diff = (approx.coefficient(i) - approx.coefficient(j).conj()).norm();
        assert!(diff < 1e-18, "pair ({i}, {j})");
    }
}

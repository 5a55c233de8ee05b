//! Independent reference implementations via adaptive Gauss-Kronrod
//! quadrature. These evaluate the exact damped Fourier integrals directly,
//! sharing no summation kernel with the lattice pipeline, so agreement
//! between the two is meaningful validation.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::error::{PricerError, Result};
use crate::kobol::{AnalyticTube, FactorModel};
use crate::payoff::{check_admissible, payoff_transform_unchecked};
use crate::pricer::MarketSpec;
use crate::quad::adaptive_gk;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Adaptive-quadrature control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCtrl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub domain_cutoff_tol: f64,
}

impl QuadCtrl {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_subdivisions: usize,
        domain_cutoff_tol: f64,
    ) -> Result<Self> {
        if abs_tol <= 0.0 || rel_tol <= 0.0 || domain_cutoff_tol <= 0.0 {
            return Err(PricerError::Parameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if domain_cutoff_tol > rel_tol / 10.0 {
            return Err(PricerError::Parameter(
                "domain cutoff must be at most rel_tol / 10".into(),
            ));
        }
        Ok(QuadCtrl {
            abs_tol,
            rel_tol,
            max_subdivisions,
            domain_cutoff_tol,
        })
    }
}

impl Default for QuadCtrl {
    fn default() -> Self {
        QuadCtrl {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            domain_cutoff_tol: 1e-14,
        }
    }
}

/// Imaginary shift admissible for the model in the closed strip sense: the
/// reference contours are allowed to sit on the strip boundary itself (the
/// integrand stays locally integrable there).
fn check_shift_closed(model: &FactorModel, eps: &[f64]) -> Result<()> {
    for (s, p) in model.idio.iter().enumerate() {
        if !(p.lambda_minus <= eps[s] && eps[s] <= p.lambda_plus) {
            return Err(PricerError::Domain(format!(
                "oracle shift component {s} = {} outside closed strip [{}, {}]",
                eps[s], p.lambda_minus, p.lambda_plus
            )));
        }
    }
    for (m, p) in model.common.iter().enumerate() {
        if model.loading_column_sum(m) > 0.0 {
            let eta: f64 = (0..model.n).map(|k| model.loadings[k][m] * eps[k]).sum();
            if !(p.lambda_minus <= eta && eta <= p.lambda_plus) {
                return Err(PricerError::Domain(format!(
                    "oracle loaded shift for factor {m} outside closed strip"
                )));
            }
        }
    }
    Ok(())
}

/// Per-coordinate truncation edges for an integrand bounded by the envelope
/// under the given imaginary shifts.
fn truncation_edges(model: &FactorModel, t: f64, shifts: &[Vec<f64>], cutoff: f64) -> Result<Vec<f64>> {
    let mut edges = Vec::with_capacity(model.n);
    for (s, params) in model.idio.iter().enumerate() {
        let level = (1.0 / cutoff).ln() / t + 5.0;
        let rough = params.envelope_inverse(level);
        let x_scan = if rough.is_finite() {
            (10.0 * rough).max(1e4)
        } else {
            1e6
        };
        let mut off: f64 = 0.0;
        for &eta in &shifts[s] {
            // clamp the scan shift strictly inside the strip
            let safe = eta
                .max(params.lambda_minus + 1e-9 * (1.0 + params.lambda_minus.abs()))
                .min(params.lambda_plus - 1e-9 * (1.0 + params.lambda_plus.abs()));
            off = off.max(params.envelope_offset(safe, x_scan)?);
        }
        let edge = params.envelope_inverse(level + off);
        if !edge.is_finite() {
            return Err(PricerError::Accuracy(format!(
                "coordinate {s}: integrand envelope never reaches the cutoff"
            )));
        }
        edges.push(edge);
    }
    Ok(edges)
}

/// Nested adaptive integration over the box prod [-edge_s, edge_s].
fn tensor_adaptive(
    edges: &[f64],
    ctrl: &QuadCtrl,
    f: &dyn Fn(&[f64]) -> Complex64,
) -> Result<(Complex64, f64)> {
    let n = edges.len();
    if n > 3 {
        return Err(PricerError::Resource(format!(
            "oracle quadrature supports n <= 3, got {n}"
        )));
    }
    let point = RefCell::new(vec![0.0f64; n]);
    fn level(
        k: usize,
        edges: &[f64],
        ctrl: &QuadCtrl,
        point: &RefCell<Vec<f64>>,
        f: &dyn Fn(&[f64]) -> Complex64,
    ) -> Complex64 {
        let n = edges.len();
        // tighten inner tolerances: inner errors feed the outer estimate
        let shrink = 5f64.powi((n - 1 - k) as i32);
        let res = adaptive_gk(
            &|x: f64| {
                point.borrow_mut()[k] = x;
                if k + 1 == n {
                    let p = point.borrow();
                    f(&p)
                } else {
                    level(k + 1, edges, ctrl, point, f)
                }
            },
            -edges[k],
            edges[k],
            ctrl.abs_tol / shrink,
            ctrl.rel_tol / shrink,
            ctrl.max_subdivisions,
        );
        match res {
            Ok((v, _)) => v,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    }
    let shrink = 1.0;
    let (val, err) = adaptive_gk(
        &|x: f64| {
            point.borrow_mut()[0] = x;
            if n == 1 {
                let p = point.borrow();
                f(&p)
            } else {
                level(1, edges, ctrl, &point, f)
            }
        },
        -edges[0],
        edges[0],
        ctrl.abs_tol / shrink,
        ctrl.rel_tol / shrink,
        ctrl.max_subdivisions,
    )?;
    if !val.re.is_finite() || !val.im.is_finite() {
        return Err(PricerError::Accuracy(
            "inner quadrature level failed to converge".into(),
        ));
    }
    Ok((val, err))
}

/// Density by direct quadrature of the two-contour damped inverse Fourier
/// integral:
/// p(x) = (2 pi)^{-n} (e^{-<x, a_+ 1>} + e^{-<x, a_- 1>})^{-1}
///        int e^{-i<x,v>} (Phi(v + i a_+ 1) + Phi(v + i a_- 1)) dv.
pub fn density_quadrature(
    model: &FactorModel,
    t: f64,
    x: &[f64],
    tube: &AnalyticTube,
    ctrl: &QuadCtrl,
) -> Result<f64> {
    let n = model.n;
    if x.len() != n {
        return Err(PricerError::Parameter("dimension mismatch".into()));
    }
    let (ap, am) = (tube.a_plus, tube.a_minus);
    let shifts: Vec<Vec<f64>> = (0..n).map(|_| vec![ap, am]).collect();
    let edges = truncation_edges(model, t, &shifts, ctrl.domain_cutoff_tol)?;
    let (integral, _err) = tensor_adaptive(&edges, ctrl, &|v: &[f64]| {
        let vp: Vec<Complex64> = v.iter().map(|&vs| Complex64::new(vs, ap)).collect();
        let vm: Vec<Complex64> = v.iter().map(|&vs| Complex64::new(vs, am)).collect();
        let phase: f64 = v.iter().zip(x).map(|(&vs, &xs)| vs * xs).sum();
        (Complex64::new(0.0, -phase)).exp()
            * (model.char_fn_unchecked(&vp, t) + model.char_fn_unchecked(&vm, t))
    })?;
    let sx: f64 = x.iter().sum();
    let denom = (-sx * ap).exp() + (-sx * am).exp();
    let two_pi = 2.0 * std::f64::consts::PI;
    let val = integral / denom / two_pi.powi(n as i32);
    Ok(val.re)
}

/// Reference price, n = 1:
/// V = K e^{-rT - b eps} (2 pi)^{-1} int Phi(x + i eps) FS(x + i eps) e^{i x b} dx.
pub fn price_quadrature_1d(
    model: &FactorModel,
    market: &MarketSpec,
    eps1: f64,
    ctrl: &QuadCtrl,
) -> Result<f64> {
    if model.n != 1 {
        return Err(PricerError::Parameter("price_quadrature_1d needs n = 1".into()));
    }
    if !(eps1 < -1.0) {
        return Err(PricerError::Domain(format!(
            "damping eps_1 must be below -1, got {eps1}"
        )));
    }
    price_quadrature_nd(model, market, &[eps1], ctrl)
}

/// Reference price for n <= 3 by nested adaptive quadrature of
/// K e^{-rT - <b,eps>} (2 pi)^{-n} int Phi(x + i eps) FS(x + i eps)
/// e^{i<x,b>} dx.
pub fn price_quadrature_nd(
    model: &FactorModel,
    market: &MarketSpec,
    eps: &[f64],
    ctrl: &QuadCtrl,
) -> Result<f64> {
    let n = model.n;
    if eps.len() != n || market.spot.len() != n {
        return Err(PricerError::Parameter("dimension mismatch".into()));
    }
    check_admissible(eps)?;
    check_shift_closed(model, eps)?;
    let b = crate::pricer::log_moneyness(market);
    let t = market.maturity;
    let shifts: Vec<Vec<f64>> = eps.iter().map(|&e| vec![e]).collect();
    let edges = truncation_edges(model, t, &shifts, ctrl.domain_cutoff_tol)?;
    let (integral, _err) = tensor_adaptive(&edges, ctrl, &|x: &[f64]| {
        let u: Vec<Complex64> = x
            .iter()
            .zip(eps)
            .map(|(&xs, &es)| Complex64::new(xs, es))
            .collect();
        let phase: f64 = x.iter().zip(&b).map(|(&xs, &bs)| xs * bs).sum();
        model.char_fn_unchecked(&u, t)
            * payoff_transform_unchecked(&u)
            * Complex64::new(0.0, phase).exp()
    })?;
    let beps: f64 = b.iter().zip(eps).map(|(&bs, &es)| bs * es).sum();
    let pref = market.strike * (-market.rate * t - beps).exp();
    let two_pi = 2.0 * std::f64::consts::PI;
    let val = pref * integral / two_pi.powi(n as i32);
    if val.im.abs() > 1e-6 * (val.re.abs() + market.strike) {
        return Err(PricerError::Accuracy(format!(
            "reference price has imaginary residue {}",
            val.im
        )));
    }
    Ok(val.re)
}

/// Direct quadrature of the damped payoff transform
/// FS(u) = int S(y) e^{-i<u,y>} dy over the payoff support, n <= 2.
pub fn payoff_transform_quadrature(u: &[Complex64], ctrl: &QuadCtrl) -> Result<Complex64> {
    let n = u.len();
    let eps: Vec<f64> = u.iter().map(|z| z.im).collect();
    check_admissible(&eps)?;
    let tol_level = (1.0 / ctrl.domain_cutoff_tol).ln();
    match n {
        1 => {
            // int_0^inf (e^y - 1) e^{-i u y} dy; damping e^{(1 + eps_1) y}
            let decay = -1.0 - eps[0];
            let y_max = tol_level / decay + 5.0;
            let (val, _err) = adaptive_gk(
                &|y: f64| (y.exp() - 1.0) * (-I * u[0] * y).exp(),
                0.0,
                y_max,
                ctrl.abs_tol,
                ctrl.rel_tol,
                ctrl.max_subdivisions,
            )?;
            Ok(val)
        }
        2 => {
            // region y_1 > ln(1 + e^{y_2}); integrate y_2 inside y_1
            let decay1 = -1.0 - eps[0] - eps[1];
            let y1_max = tol_level / decay1 + 5.0;
            let y2_min = -(tol_level / eps[1] + 5.0);
            let (val, _err) = adaptive_gk(
                &|y1: f64| {
                    let upper = if y1 > 1e-12 {
                        (y1.exp() - 1.0).ln()
                    } else {
                        return Complex64::new(0.0, 0.0);
                    };
                    if upper <= y2_min {
                        return Complex64::new(0.0, 0.0);
                    }
                    let inner = adaptive_gk(
                        &|y2: f64| {
                            let s = y1.exp() - y2.exp() - 1.0;
                            if s <= 0.0 {
                                return Complex64::new(0.0, 0.0);
                            }
                            s * (-I * u[1] * y2).exp()
                        },
                        y2_min,
                        upper,
                        ctrl.abs_tol / 10.0,
                        ctrl.rel_tol / 10.0,
                        ctrl.max_subdivisions,
                    );
                    match inner {
                        Ok((v, _)) => v * (-I * u[0] * y1).exp(),
                        Err(_) => Complex64::new(f64::NAN, f64::NAN),
                    }
                },
                0.0,
                y1_max,
                ctrl.abs_tol,
                ctrl.rel_tol,
                ctrl.max_subdivisions,
            )?;
            if !val.re.is_finite() {
                return Err(PricerError::Accuracy(
                    "inner payoff quadrature failed".into(),
                ));
            }
            Ok(val)
        }
        _ => Err(PricerError::Resource(
            "payoff transform quadrature supports n <= 2".into(),
        )),
    }
}

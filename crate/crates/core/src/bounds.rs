//! Certified coefficient-mass bounds shared by the density and pricing error
//! budgets. Everything here produces true upper bounds (possibly loose):
//! per-coordinate modulus tables of the idiosyncratic factors on a lattice
//! column, envelope-integral tails beyond a finite box, and a uniform
//! modulus cap for the common-factor contributions under an imaginary shift.

use num_complex::Complex64;

use crate::error::{PricerError, Result};
use crate::gamma::{gamma_real, upper_incomplete_gamma};
use crate::kobol::{FactorModel, KobolParams};

/// Modulus of one idiosyncratic factor exp(-T psi_s) tabulated on the
/// lattice column freq_scale * m + i eps, for |m| <= box_max, plus a bound
/// on the sum of the moduli beyond the box.
pub struct CoordGrid {
    pub box_max: i64,
    vals: Vec<f64>,
    pub remainder: f64,
    pub total: f64,
}

impl CoordGrid {
    /// Tabulated modulus at index m (zero outside the box, which only makes
    /// a dropped-mass bound larger, never smaller).
    pub fn val(&self, m: i64) -> f64 {
        let i = m + self.box_max;
        if i < 0 || i as usize >= self.vals.len() {
            0.0
        } else {
            self.vals[i as usize]
        }
    }
}

/// Per-coordinate tables plus the common-factor modulus cap; the full
/// coefficient modulus satisfies
/// |Phi(freq_scale*m + i eps)| <= c_common * prod_s grid_s.val(m_s).
pub struct CoordTables {
    pub grids: Vec<CoordGrid>,
    pub c_common: f64,
}

const EDGE_CUTOFF: f64 = 1e-22;

/// Build the per-coordinate modulus tables for the shifted lattice.
pub fn coordinate_tables(
    model: &FactorModel,
    t: f64,
    freq_scale: f64,
    eps: &[f64],
) -> Result<CoordTables> {
    let mut grids = Vec::with_capacity(model.n);
    let mut reaches = Vec::with_capacity(model.n);
    for (s, params) in model.idio.iter().enumerate() {
        let eta = eps[s];
        let level = (1.0 / EDGE_CUTOFF).ln() / t;
        let rough = params.envelope_inverse(level);
        let x_scan = if rough.is_finite() {
            (10.0 * rough).max(1e4)
        } else {
            1e6
        };
        let offset = params.envelope_offset(eta, x_scan)?;
        let reach = params.envelope_inverse(level + offset);
        if !reach.is_finite() {
            return Err(PricerError::Resource(format!(
                "coordinate {s}: modulus table unbounded (vanishing jump intensity)"
            )));
        }
        let box_max = (reach / freq_scale).ceil() as i64 + 1;
        if box_max > 50_000_000 {
            return Err(PricerError::Resource(format!(
                "coordinate {s}: modulus table would need {box_max} entries per side"
            )));
        }
        let mut vals = Vec::with_capacity((2 * box_max + 1) as usize);
        let mut total = 0.0;
        for m in -box_max..=box_max {
            let xi = Complex64::new(freq_scale * m as f64, eta);
            let v = (-t * params.psi_unchecked(xi)).exp().norm();
            vals.push(v);
            total += v;
        }
        // beyond-box remainder via the offset-adjusted envelope
        let mut remainder = 0.0;
        let mut m = box_max + 1;
        loop {
            let x = freq_scale * m as f64;
            let term = (t * offset - t * params.envelope_exponent(x)).exp();
            remainder += 2.0 * term; // both signs
            if term < 1e-30 || m > box_max + 5_000_000 {
                break;
            }
            m += 1;
        }
        total += remainder;
        reaches.push(freq_scale * box_max as f64);
        grids.push(CoordGrid {
            box_max,
            vals,
            remainder,
            total,
        });
    }
    let c_common = common_modulus_cap(model, t, eps, &reaches)?;
    Ok(CoordTables { grids, c_common })
}

/// Uniform cap on prod_m |exp(-T phi_m(y_m + i eta_m))| over real loaded
/// arguments, eta_m = sum_k a_{k,m} eps_k. Numerical sup over a dense scan.
fn common_modulus_cap(
    model: &FactorModel,
    t: f64,
    eps: &[f64],
    reaches: &[f64],
) -> Result<f64> {
    let mut log_cap = 0.0;
    for (m, params) in model.common.iter().enumerate() {
        let col = model.loading_column_sum(m);
        if col <= 0.0 {
            continue;
        }
        let eta: f64 = (0..model.n).map(|k| model.loadings[k][m] * eps[k]).sum();
        if !(params.lambda_minus < eta && eta < params.lambda_plus) {
            return Err(PricerError::Domain(format!(
                "factor {m}: loaded shift {eta} outside common strip"
            )));
        }
        let y_max: f64 = (0..model.n)
            .map(|k| model.loadings[k][m] * reaches[k])
            .sum::<f64>()
            .max(1.0)
            * 1.5;
        let mut sup = -params.psi_unchecked(Complex64::new(0.0, eta)).re;
        let n_scan = 2000;
        for i in 1..=n_scan {
            let y = y_max * i as f64 / n_scan as f64;
            for sign in [-1.0, 1.0] {
                let v = -params.psi_unchecked(Complex64::new(sign * y, eta)).re;
                if v > sup {
                    sup = v;
                }
            }
        }
        log_cap += t * (sup + sup.abs() * 0.02 + 1e-12);
    }
    Ok(log_cap.exp())
}

/// Upper bound on sum over all m outside the retained set of
/// |Phi(freq_scale*m + i eps)|, given the sum of the per-coordinate modulus
/// products over the retained set (computed by the caller from these same
/// tables).
pub fn dropped_mass_bound(tables: &CoordTables, retained_idio_sum: f64) -> f64 {
    let full: f64 = tables.grids.iter().map(|g| g.total).product();
    tables.c_common * (full - retained_idio_sum).max(0.0)
}

/// Full-line integral of the envelope e^{-T e_s(x)} dx (without offset).
pub fn envelope_full_integral(params: &KobolParams, t: f64) -> Result<f64> {
    let c = params.c_plus + params.c_minus;
    if c == 0.0 {
        return Err(PricerError::Accuracy(
            "envelope integral diverges for a driftless degenerate exponent".into(),
        ));
    }
    let nu = params.nu;
    if nu.abs() < 1e-12 {
        // (1+|x|)^{-Tc}
        if t * c <= 1.0 {
            return Err(PricerError::Accuracy(format!(
                "envelope not integrable: T (c_+ + c_-) = {} <= 1",
                t * c
            )));
        }
        Ok(2.0 / (t * c - 1.0))
    } else if (nu - 1.0).abs() < 1e-12 {
        let rate = t * c * std::f64::consts::FRAC_PI_2;
        Ok(2.0 / rate)
    } else {
        let d = params.decay_coefficient().unwrap();
        Ok(2.0 * gamma_real(1.0 + 1.0 / nu)? * (t * d).powf(-1.0 / nu))
    }
}

/// Tail integral of the envelope beyond |x| >= x_edge (both sides).
pub fn envelope_tail_integral(params: &KobolParams, t: f64, x_edge: f64) -> Result<f64> {
    let c = params.c_plus + params.c_minus;
    if c == 0.0 {
        return Err(PricerError::Accuracy(
            "envelope tail diverges for a degenerate exponent".into(),
        ));
    }
    let nu = params.nu;
    if nu.abs() < 1e-12 {
        if t * c <= 1.0 {
            return Err(PricerError::Accuracy(format!(
                "envelope tail not integrable: T (c_+ + c_-) = {} <= 1",
                t * c
            )));
        }
        Ok(2.0 * (1.0 + x_edge).powf(1.0 - t * c) / (t * c - 1.0))
    } else if (nu - 1.0).abs() < 1e-12 {
        let rate = t * c * std::f64::consts::FRAC_PI_2;
        Ok(2.0 * (-rate * x_edge).exp() / rate)
    } else {
        let d = params.decay_coefficient().unwrap();
        // substitute u = T d x^nu
        let a = 1.0 / nu;
        let u0 = t * d * x_edge.powf(nu);
        Ok(2.0 * (t * d).powf(-a) / nu * upper_incomplete_gamma(a, u0)?)
    }
}

//! KoBoL (tempered-stable) characteristic exponents, the multivariate factor
//! model, analyticity strips, and risk-neutral drift calibration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PricerError, Result};
use crate::gamma::gamma_real;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of a one-dimensional KoBoL exponent.
///
/// psi(xi) = -i mu xi
///         + c_plus  Gamma(-nu) [(-lambda_minus)^nu - (-lambda_minus - i xi)^nu]
///         + c_minus Gamma(-nu) [  lambda_plus^nu   - ( lambda_plus  + i xi)^nu]
///
/// with the log variants at nu = 0 and nu = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KobolParams {
    pub nu: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    Log,    // nu = 0
    Linear, // nu = 1
    Power,  // nu in (0,1) or (1,2)
}

impl KobolParams {
    pub fn new(
        nu: f64,
        c_plus: f64,
        c_minus: f64,
        lambda_plus: f64,
        lambda_minus: f64,
        mu: f64,
    ) -> Result<Self> {
        if !(0.0..2.0).contains(&nu) {
            return Err(PricerError::Parameter(format!(
                "nu must lie in [0, 2), got {nu}"
            )));
        }
        if c_plus < 0.0 || c_minus < 0.0 {
            return Err(PricerError::Parameter(
                "c_plus and c_minus must be nonnegative".into(),
            ));
        }
        if !(lambda_minus < 0.0 && 0.0 < lambda_plus) {
            return Err(PricerError::Parameter(format!(
                "need lambda_minus < 0 < lambda_plus, got ({lambda_minus}, {lambda_plus})"
            )));
        }
        Ok(KobolParams {
            nu,
            c_plus,
            c_minus,
            lambda_plus,
            lambda_minus,
            mu,
        })
    }

    fn regime(&self) -> Regime {
        if self.nu.abs() < 1e-12 {
            Regime::Log
        } else if (self.nu - 1.0).abs() < 1e-12 {
            Regime::Linear
        } else {
            Regime::Power
        }
    }

    /// Strict strip membership Im(xi) in (lambda_minus, lambda_plus).
    pub fn in_strip(&self, xi: Complex64) -> bool {
        self.lambda_minus < xi.im && xi.im < self.lambda_plus
    }

    /// Characteristic exponent on the analyticity strip.
    pub fn psi(&self, xi: Complex64) -> Result<Complex64> {
        if !self.in_strip(xi) {
            return Err(PricerError::Domain(format!(
                "Im(xi) = {} outside strip ({}, {})",
                xi.im, self.lambda_minus, self.lambda_plus
            )));
        }
        Ok(self.psi_unchecked(xi))
    }

    /// Exponent without the strip check; arguments of the principal powers /
    /// logs have positive real part whenever Im(xi) is inside the strip.
    pub fn psi_unchecked(&self, xi: Complex64) -> Complex64 {
        let a = -self.lambda_minus; // > 0
        let lp = self.lambda_plus;
        let zp = a - I * xi; // tempered-from-below argument
        let zm = lp + I * xi; // tempered-from-above argument
        let drift = -I * self.mu * xi;
        match self.regime() {
            Regime::Log => {
                drift
                    + self.c_plus * ((zp.ln()) - a.ln())
                    + self.c_minus * ((zm.ln()) - lp.ln())
            }
            Regime::Linear => {
                drift
                    + self.c_plus * (a * a.ln() - zp * zp.ln())
                    + self.c_minus * (lp * lp.ln() - zm * zm.ln())
            }
            Regime::Power => {
                let nu = self.nu;
                let g = gamma_neg_nu(nu);
                drift
                    + self.c_plus * g * (Complex64::new(a.powf(nu), 0.0) - zp.powf(nu))
                    + self.c_minus * g * (Complex64::new(lp.powf(nu), 0.0) - zm.powf(nu))
            }
        }
    }

    /// Exponent with the drift term removed (mu = 0); used by calibration.
    pub(crate) fn psi_jump_part(&self, xi: Complex64) -> Complex64 {
        let no_drift = KobolParams { mu: 0.0, ..*self };
        no_drift.psi_unchecked(xi)
    }

    /// Anisotropic decay coefficient d = -Gamma(-nu) cos(nu pi / 2)
    /// (c_plus + c_minus); positive exactly on (0,1) and (1,2).
    pub fn decay_coefficient(&self) -> Option<f64> {
        let nu = self.nu;
        if matches!(self.regime(), Regime::Power) {
            Some(-gamma_neg_nu(nu) * (nu * std::f64::consts::FRAC_PI_2).cos()
                * (self.c_plus + self.c_minus))
        } else {
            None
        }
    }

    /// Growth exponent of -log|exp(-T psi)| per unit T: a lower envelope
    /// Re psi(x) >= envelope_exponent(x) - envelope_offset holds for real x.
    pub fn envelope_exponent(&self, x: f64) -> f64 {
        let ax = x.abs();
        match self.regime() {
            Regime::Log => (self.c_plus + self.c_minus) * (1.0 + ax).ln(),
            Regime::Linear => {
                (self.c_plus + self.c_minus) * std::f64::consts::FRAC_PI_2 * ax
            }
            Regime::Power => self.decay_coefficient().unwrap() * ax.powf(self.nu),
        }
    }

    /// Smallest |x| with envelope_exponent(x) >= level (infinite when the
    /// jump intensity vanishes).
    pub fn envelope_inverse(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return 0.0;
        }
        let c = self.c_plus + self.c_minus;
        if c == 0.0 {
            return f64::INFINITY;
        }
        match self.regime() {
            Regime::Log => (level / c).exp() - 1.0,
            Regime::Linear => level / (c * std::f64::consts::FRAC_PI_2),
            Regime::Power => {
                let d = self.decay_coefficient().unwrap();
                (level / d).powf(1.0 / self.nu)
            }
        }
    }

    /// Numerical upper bound for sup_x [envelope_exponent(x) - Re psi(x + i eta)]
    /// over |x| <= x_max; eta must lie strictly inside the strip. The scan is
    /// dense in log |x| and mildly inflated.
    pub fn envelope_offset(&self, eta: f64, x_max: f64) -> Result<f64> {
        if !(self.lambda_minus < eta && eta < self.lambda_plus) {
            return Err(PricerError::Domain(format!(
                "shift eta = {eta} outside strip ({}, {})",
                self.lambda_minus, self.lambda_plus
            )));
        }
        let mut sup: f64 = 0.0; // x = 0 with eta = 0 gives exactly 0
        let lo: f64 = 1e-4;
        let hi = x_max.max(1.0);
        let n = 1200;
        let ratio = (hi / lo).ln() / (n as f64);
        for sign in [-1.0f64, 1.0] {
            for k in 0..=n {
                let x = sign * lo * ((k as f64) * ratio).exp();
                let re_psi = self.psi_unchecked(Complex64::new(x, eta)).re;
                let diff = self.envelope_exponent(x) - re_psi;
                if diff > sup {
                    sup = diff;
                }
            }
        }
        // include x = 0 (relevant when eta != 0)
        let diff0 = -self.psi_unchecked(Complex64::new(0.0, eta)).re;
        if diff0 > sup {
            sup = diff0;
        }
        Ok(sup * 1.02 + 1e-12)
    }
}

fn gamma_neg_nu(nu: f64) -> f64 {
    // nu in (0,1) or (1,2): Gamma(-nu) via reflection, never at a pole here
    gamma_real(-nu).expect("nu in (0,1) or (1,2) is never a Gamma pole")
}

/// Analyticity tube bounds for the multivariate characteristic function: all
/// imaginary shifts w with a_minus <= w_s <= a_plus are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTube {
    pub a_minus: f64,
    pub a_plus: f64,
}

impl AnalyticTube {
    /// Symmetric half-width min(a_plus, -a_minus) used by the cosh majorant.
    pub fn symmetric(&self) -> f64 {
        self.a_plus.min(-self.a_minus)
    }
}

/// Multivariate KoBoL factor model: n idiosyncratic exponents psi_s, n
/// common-factor exponents phi_m, and a nonnegative n x n loading matrix A
/// (row k = asset, column m = factor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModel {
    pub n: usize,
    pub idio: Vec<KobolParams>,
    pub common: Vec<KobolParams>,
    pub loadings: Vec<Vec<f64>>,
    pub strip_shrink: f64,
}

impl FactorModel {
    pub fn new(
        idio: Vec<KobolParams>,
        common: Vec<KobolParams>,
        loadings: Vec<Vec<f64>>,
        strip_shrink: f64,
    ) -> Result<Self> {
        let n = idio.len();
        if n == 0 {
            return Err(PricerError::Parameter("need at least one asset".into()));
        }
        if common.len() != n || loadings.len() != n {
            return Err(PricerError::Parameter(format!(
                "dimension mismatch: {} idio, {} common, {} loading rows",
                n,
                common.len(),
                loadings.len()
            )));
        }
        for row in &loadings {
            if row.len() != n {
                return Err(PricerError::Parameter("loadings matrix must be n x n".into()));
            }
            if row.iter().any(|&a| a < 0.0 || !a.is_finite()) {
                return Err(PricerError::Parameter(
                    "loadings must be nonnegative and finite".into(),
                ));
            }
        }
        if !(0.0 < strip_shrink && strip_shrink < 1.0) {
            return Err(PricerError::Parameter(format!(
                "strip_shrink must lie in (0,1), got {strip_shrink}"
            )));
        }
        Ok(FactorModel {
            n,
            idio,
            common,
            loadings,
            strip_shrink,
        })
    }

    /// Single-asset model without common factors.
    pub fn single(params: KobolParams, strip_shrink: f64) -> Result<Self> {
        // inert common factor: zero loading column
        let common = KobolParams {
            c_plus: 0.0,
            c_minus: 0.0,
            mu: 0.0,
            ..params
        };
        FactorModel::new(vec![params], vec![common], vec![vec![0.0]], strip_shrink)
    }

    /// Independent-asset model (A = 0) with the given marginals.
    pub fn independent(idio: Vec<KobolParams>, strip_shrink: f64) -> Result<Self> {
        let n = idio.len();
        let common = idio
            .iter()
            .map(|p| KobolParams {
                c_plus: 0.0,
                c_minus: 0.0,
                mu: 0.0,
                ..*p
            })
            .collect();
        FactorModel::new(idio, common, vec![vec![0.0; n]; n], strip_shrink)
    }

    /// Column sum of loadings for factor m.
    pub fn loading_column_sum(&self, m: usize) -> f64 {
        (0..self.n).map(|k| self.loadings[k][m]).sum()
    }

    /// Loaded argument sum_k a_{k,m} v_k entering factor m.
    pub fn loaded_argument(&self, v: &[Complex64], m: usize) -> Complex64 {
        (0..self.n).map(|k| self.loadings[k][m] * v[k]).sum()
    }

    fn check_tube(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.n {
            return Err(PricerError::Parameter(format!(
                "argument has {} components, model has {}",
                v.len(),
                self.n
            )));
        }
        for (s, p) in self.idio.iter().enumerate() {
            if !p.in_strip(v[s]) {
                return Err(PricerError::Domain(format!(
                    "component {s}: Im = {} outside idio strip ({}, {})",
                    v[s].im, p.lambda_minus, p.lambda_plus
                )));
            }
        }
        for (m, p) in self.common.iter().enumerate() {
            let w = self.loaded_argument(v, m);
            if !p.in_strip(w) {
                return Err(PricerError::Domain(format!(
                    "factor {m}: loaded Im = {} outside common strip ({}, {})",
                    w.im, p.lambda_minus, p.lambda_plus
                )));
            }
        }
        Ok(())
    }

    /// tau(v, T) = -T [ sum_s psi_s(v_s) + sum_m phi_m(sum_k a_{k,m} v_k) ].
    pub fn tau(&self, v: &[Complex64], t: f64) -> Result<Complex64> {
        self.check_tube(v)?;
        Ok(self.tau_unchecked(v, t))
    }

    pub(crate) fn tau_unchecked(&self, v: &[Complex64], t: f64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (s, p) in self.idio.iter().enumerate() {
            total += p.psi_unchecked(v[s]);
        }
        for (m, p) in self.common.iter().enumerate() {
            if self.loading_column_sum(m) > 0.0 {
                total += p.psi_unchecked(self.loaded_argument(v, m));
            }
        }
        -t * total
    }

    /// Characteristic function Phi(v, T) = exp(tau(v, T)).
    pub fn char_fn(&self, v: &[Complex64], t: f64) -> Result<Complex64> {
        Ok(self.tau(v, t)?.exp())
    }

    pub(crate) fn char_fn_unchecked(&self, v: &[Complex64], t: f64) -> Complex64 {
        self.tau_unchecked(v, t).exp()
    }

    /// Replace each idiosyncratic drift mu_s with the unique solution of the
    /// martingale condition E[exp(U_{s,T})] = exp(rT), i.e.
    /// psi_s(-i) + sum_m phi_m(-i a_{s,m}) = -r.
    pub fn calibrate_drift(&self, r: f64) -> Result<FactorModel> {
        let mut out = self.clone();
        for s in 0..self.n {
            let p = &self.idio[s];
            if p.lambda_minus >= -1.0 {
                return Err(PricerError::Feasibility(format!(
                    "asset {s}: lambda_minus = {} >= -1, exp-moment E[e^U] diverges; \
                     drift calibration infeasible",
                    p.lambda_minus
                )));
            }
            let mut jump = p.psi_jump_part(Complex64::new(0.0, -1.0));
            for m in 0..self.n {
                let a = self.loadings[s][m];
                if a > 0.0 {
                    let q = &self.common[m];
                    if q.lambda_minus >= -a {
                        return Err(PricerError::Feasibility(format!(
                            "asset {s}, factor {m}: common lambda_minus = {} >= -a = {}; \
                             drift calibration infeasible",
                            q.lambda_minus, -a
                        )));
                    }
                    jump += q.psi_unchecked(Complex64::new(0.0, -a));
                }
            }
            if jump.im.abs() > 1e-10 * (1.0 + jump.re.abs()) {
                return Err(PricerError::Accuracy(format!(
                    "asset {s}: calibration constant has imaginary residue {}",
                    jump.im
                )));
            }
            out.idio[s].mu = r + jump.re;
        }
        Ok(out)
    }

    /// Shrunken analyticity tube (a_minus, a_plus):
    /// a_plus = min_s kappa_{s,+} over assets and, for every factor with a
    /// positive loading column sum Sigma_m, kappa'_{m,+} min(1, 1/Sigma_m);
    /// a_minus symmetrically.
    pub fn analytic_tube(&self) -> Result<AnalyticTube> {
        let sh = self.strip_shrink;
        let mut a_plus = f64::INFINITY;
        let mut a_minus = f64::NEG_INFINITY;
        for p in &self.idio {
            a_plus = a_plus.min(sh * p.lambda_plus);
            a_minus = a_minus.max(sh * p.lambda_minus);
        }
        for (m, p) in self.common.iter().enumerate() {
            let col = self.loading_column_sum(m);
            if col > 0.0 {
                let scale = 1.0f64.min(1.0 / col);
                a_plus = a_plus.min(sh * p.lambda_plus * scale);
                a_minus = a_minus.max(sh * p.lambda_minus * scale);
            }
        }
        if !(a_minus < 0.0 && 0.0 < a_plus) {
            return Err(PricerError::Feasibility(
                "degenerate analyticity tube".into(),
            ));
        }
        Ok(AnalyticTube { a_minus, a_plus })
    }

    /// Whether an imaginary shift vector is strictly admissible for tau.
    pub fn shift_admissible(&self, eps: &[f64]) -> bool {
        if eps.len() != self.n {
            return false;
        }
        let v: Vec<Complex64> = eps.iter().map(|&e| Complex64::new(0.0, e)).collect();
        self.check_tube(&v).is_ok()
    }
}

//! Fourier transform of the damped basket/spread call payoff
//! (exp(y_1) - sum_{m>=2} exp(y_m) - 1)_+, admissible damping vectors, and
//! the closed-form L^1 constant of the damped payoff.

use num_complex::Complex64;

pub use crate::gamma::log_gamma;

use crate::error::{PricerError, Result};
use crate::kobol::AnalyticTube;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Damping vector eps: eps_m > 0 for m >= 2, eps_1 < -1 - sum_{m>=2} eps_m,
/// and every component strictly inside the analyticity tube.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingVector {
    pub eps: Vec<f64>,
}

impl DampingVector {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        check_admissible(&eps)?;
        Ok(DampingVector { eps })
    }

    pub fn n(&self) -> usize {
        self.eps.len()
    }

    /// Verify every component lies strictly inside the tube.
    pub fn check_tube(&self, tube: &AnalyticTube) -> Result<()> {
        for (s, &e) in self.eps.iter().enumerate() {
            if !(tube.a_minus < e && e < tube.a_plus) {
                return Err(PricerError::Feasibility(format!(
                    "damping component {s} = {e} outside tube ({}, {})",
                    tube.a_minus, tube.a_plus
                )));
            }
        }
        Ok(())
    }
}

/// Payoff-transform admissibility of an imaginary-part vector.
pub fn check_admissible(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(PricerError::Parameter("empty damping vector".into()));
    }
    let rest: f64 = eps[1..].iter().sum();
    if eps[1..].iter().any(|&e| e <= 0.0) {
        return Err(PricerError::Domain(
            "damping components eps_m for m >= 2 must be positive".into(),
        ));
    }
    if !(eps[0] < -1.0 - rest) {
        return Err(PricerError::Domain(format!(
            "need eps_1 < -1 - sum_(m>=2) eps_m = {}, got {}",
            -1.0 - rest,
            eps[0]
        )));
    }
    Ok(())
}

/// Closed-form payoff transform
/// FS(u) = Gamma(i (u_1 + sum_{m>=2} u_m) - 1) prod_{m>=2} Gamma(-i u_m)
///         / Gamma(i u_1 + 1),
/// computed in log space. Requires Im(u) admissible, which makes every
/// Gamma argument have positive real part.
pub fn payoff_transform(u: &[Complex64]) -> Result<Complex64> {
    let im: Vec<f64> = u.iter().map(|z| z.im).collect();
    check_admissible(&im)?;
    Ok(payoff_transform_unchecked(u))
}

/// Log-space evaluation without the admissibility check (hot path; the
/// caller guarantees a fixed admissible imaginary part).
pub fn payoff_transform_unchecked(u: &[Complex64]) -> Complex64 {
    let total: Complex64 = u.iter().sum();
    let mut log_fs = crate::gamma::log_gamma(I * total - 1.0)
        .expect("admissible u keeps Gamma arguments off the poles");
    for um in &u[1..] {
        log_fs += crate::gamma::log_gamma(-I * um).expect("Re(-i u_m) = eps_m > 0");
    }
    log_fs -= crate::gamma::log_gamma(I * u[0] + 1.0).expect("Re(i u_1 + 1) = 1 - eps_1 > 0");
    log_fs.exp()
}

/// Default damping heuristic: eps_m = min(0.25, a_+/4) for m >= 2 and eps_1
/// the midpoint of (a_-, -1 - sum_{m>=2} eps_m); all constraints verified
/// post-hoc.
pub fn find_damping(tube: &AnalyticTube, n: usize) -> Result<DampingVector> {
    if n == 0 {
        return Err(PricerError::Parameter("dimension must be >= 1".into()));
    }
    if tube.a_minus >= -1.0 {
        return Err(PricerError::Feasibility(format!(
            "damping infeasible: tube lower bound a_- = {} >= -1 \
             (model's lambda_- too shallow for the call payoff growth)",
            tube.a_minus
        )));
    }
    let eps_high = (0.25f64).min(tube.a_plus / 4.0);
    if eps_high <= 0.0 {
        return Err(PricerError::Feasibility(
            "damping infeasible: tube upper bound nonpositive".into(),
        ));
    }
    let rest = eps_high * (n as f64 - 1.0);
    let upper = -1.0 - rest;
    if tube.a_minus >= upper {
        return Err(PricerError::Feasibility(format!(
            "damping infeasible: need eps_1 in ({}, {upper}), interval empty",
            tube.a_minus
        )));
    }
    let mut eps = vec![eps_high; n];
    eps[0] = 0.5 * (tube.a_minus + upper);
    let dv = DampingVector::new(eps)?;
    dv.check_tube(tube)?;
    Ok(dv)
}

/// L^1 norm of the damped payoff:
/// L_eps = Gamma(-1 - sum_s eps_s) prod_{m>=2} Gamma(eps_m) / Gamma(1 - eps_1)
///       = FS(i eps), real and positive.
pub fn payoff_l1_constant(eps: &DampingVector) -> Result<f64> {
    let u: Vec<Complex64> = eps.eps.iter().map(|&e| Complex64::new(0.0, e)).collect();
    let v = payoff_transform(&u)?;
    if v.re <= 0.0 || v.im.abs() > 1e-10 * v.re.abs() {
        return Err(PricerError::Accuracy(format!(
            "L_eps should be real positive, got {v}"
        )));
    }
    Ok(v.re)
}

//! Anisotropic sparse frequency truncation: the weighted l^nu ball, its
//! lattice enumeration, cardinality/volume formulas, the M <-> R budget
//! conversion, and the M-term truncation error bound.

use num_complex::Complex64;

use crate::error::{PricerError, Result};
use crate::gamma::gamma_real;
use crate::kobol::FactorModel;

pub const DEFAULT_CARDINALITY_CAP: usize = 100_000_000;

/// Anisotropic decay coefficient d = -Gamma(-nu) cos(nu pi/2)(c_+ + c_-).
pub fn decay_rate(params: &crate::kobol::KobolParams) -> Result<f64> {
    params.decay_coefficient().ok_or_else(|| {
        PricerError::Parameter(format!(
            "nu = {} unsupported by the anisotropic ball (needs nu in (0,1) or (1,2)); \
             use the rectangular threshold fallback",
            params.nu
        ))
    })
}

/// Weighted l^nu ball in physical frequency space:
/// membership(x) iff sum_s |w_s x_s|^{nu_s} <= 1 with
/// w_s = (d_s T / ln R)^{1/nu_s}. Integer index m maps to the physical point
/// freq_scale * m.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisoBall {
    pub n: usize,
    pub nu: Vec<f64>,
    pub weights: Vec<f64>,
    pub r: f64,
    pub freq_scale: f64,
}

impl AnisoBall {
    pub fn membership(&self, x: &[f64]) -> bool {
        let mut acc = 0.0;
        for s in 0..self.n {
            acc += (self.weights[s] * x[s]).abs().powf(self.nu[s]);
            if acc > 1.0 {
                return false;
            }
        }
        acc <= 1.0
    }

    pub fn member_index(&self, m: &[i64]) -> bool {
        let x: Vec<f64> = m.iter().map(|&mi| self.freq_scale * mi as f64).collect();
        self.membership(&x)
    }

    /// Axis intercept of the ball along coordinate s, in physical units.
    pub fn axis_intercept(&self, s: usize) -> f64 {
        1.0 / self.weights[s]
    }
}

/// Construct the ball at threshold level 1/R for period P (freq_scale =
/// 2 pi / P).
pub fn build_ball(model: &FactorModel, t: f64, r: f64, p: u32) -> Result<AnisoBall> {
    if r <= 1.0 {
        return Err(PricerError::Parameter(format!("R must exceed 1, got {r}")));
    }
    if p < 1 {
        return Err(PricerError::Parameter("period P must be >= 1".into()));
    }
    let ln_r = r.ln();
    let mut nu = Vec::with_capacity(model.n);
    let mut weights = Vec::with_capacity(model.n);
    for params in &model.idio {
        let d = decay_rate(params)?;
        nu.push(params.nu);
        weights.push((d * t / ln_r).powf(1.0 / params.nu));
    }
    Ok(AnisoBall {
        n: model.n,
        nu,
        weights,
        r,
        freq_scale: 2.0 * std::f64::consts::PI / p as f64,
    })
}

/// Enumerated integer lattice points, lexicographically sorted, closed under
/// negation, containing 0.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    pub n: usize,
    points: Vec<i64>,
    pub p: u32,
    pub r: f64,
    pub freq_scale: f64,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.points.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> {
        self.points.chunks_exact(self.n)
    }

    pub fn contains(&self, m: &[i64]) -> bool {
        self.iter().any(|q| q == m)
    }

    pub(crate) fn from_points(n: usize, points: Vec<i64>, p: u32, r: f64, freq_scale: f64) -> Self {
        IndexSet {
            n,
            points,
            p,
            r,
            freq_scale,
        }
    }

    /// Delimited text export: header line `# n,P,R,freq_scale` then one
    /// comma-separated integer vector per line.
    pub fn export(&self) -> String {
        let mut out = format!(
            "# n,P,R,freq_scale\n# {},{},{:e},{:e}\n",
            self.n, self.p, self.r, self.freq_scale
        );
        for m in self.iter() {
            let row: Vec<String> = m.iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn import(text: &str) -> Result<IndexSet> {
        let mut lines = text.lines();
        let _title = lines
            .next()
            .ok_or_else(|| PricerError::Parse("empty index set file".into()))?;
        let meta = lines
            .next()
            .ok_or_else(|| PricerError::Parse("missing index set metadata".into()))?;
        let meta = meta.trim_start_matches('#').trim();
        let fields: Vec<&str> = meta.split(',').collect();
        if fields.len() != 4 {
            return Err(PricerError::Parse("malformed index set metadata".into()));
        }
        let n: usize = fields[0]
            .trim()
            .parse()
            .map_err(|e| PricerError::Parse(format!("bad n: {e}")))?;
        let p: u32 = fields[1]
            .trim()
            .parse()
            .map_err(|e| PricerError::Parse(format!("bad P: {e}")))?;
        let r: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|e| PricerError::Parse(format!("bad R: {e}")))?;
        let freq_scale: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|e| PricerError::Parse(format!("bad freq_scale: {e}")))?;
        let mut points = Vec::new();
        for line in lines {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Vec<i64> = line
                .split(',')
                .map(|f| f.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| PricerError::Parse(format!("bad index row: {e}")))?;
            if row.len() != n {
                return Err(PricerError::Parse(format!(
                    "index row has {} entries, expected {n}",
                    row.len()
                )));
            }
            points.extend(row);
        }
        Ok(IndexSet {
            n,
            points,
            p,
            r,
            freq_scale,
        })
    }
}

/// Volume of the unit ball {sum_s |x_s|^{nu_s} <= 1} (Dirichlet):
/// 2^n prod Gamma(1 + 1/nu_s) / Gamma(1 + sum 1/nu_s).
pub fn volume_aniso_unit_ball(nu: &[f64]) -> Result<f64> {
    if nu.iter().any(|&v| v <= 0.0) {
        return Err(PricerError::Parameter("all nu must be positive".into()));
    }
    let mut num = 1.0;
    let mut total = 0.0;
    for &v in nu {
        num *= gamma_real(1.0 + 1.0 / v)?;
        total += 1.0 / v;
    }
    Ok(2f64.powi(nu.len() as i32) * num / gamma_real(1.0 + total)?)
}

/// kappa_n = Vol B(nu) * prod (d_s T)^{-1/nu_s}, so that the physical-space
/// ball at level 1/R has volume kappa_n (ln R)^{sum 1/nu_s}.
pub fn kappa_n(model: &FactorModel, t: f64) -> Result<f64> {
    let nu: Vec<f64> = model.idio.iter().map(|p| p.nu).collect();
    let mut prod = 1.0;
    for params in &model.idio {
        let d = decay_rate(params)?;
        prod *= (d * t).powf(-1.0 / params.nu);
    }
    Ok(volume_aniso_unit_ball(&nu)? * prod)
}

/// Sum of the reciprocal exponents S = sum_s 1/nu_s.
pub fn inverse_order_sum(model: &FactorModel) -> f64 {
    model.idio.iter().map(|p| 1.0 / p.nu).sum()
}

/// Invert the term-budget law M = kappa_n (ln R)^S for R.
pub fn radius_for_budget(m: f64, model: &FactorModel, t: f64) -> Result<f64> {
    let kappa = kappa_n(model, t)?;
    let s = inverse_order_sum(model);
    let ln_r = (m / kappa).powf(1.0 / s);
    if !(ln_r.is_finite() && ln_r > 0.01) {
        return Err(PricerError::Parameter(format!(
            "budget M = {m} too small for kappa_n = {kappa:.6e}"
        )));
    }
    Ok(ln_r.exp())
}

/// Paper-normalized cardinality estimate kappa_n (ln R)^S (physical volume;
/// multiply by (P / 2 pi)^n for the lattice count).
pub fn cardinality_estimate(r: f64, model: &FactorModel, t: f64) -> Result<f64> {
    let kappa = kappa_n(model, t)?;
    let s = inverse_order_sum(model);
    Ok(kappa * r.ln().powf(s))
}

/// Truncation level that certifiably covers |Phi| >= 1/R: the raw radius R
/// is enlarged by the tempering-dependent envelope offset exp(T sum_s C_s),
/// where C_s bounds the gap between the anisotropic envelope exponent and
/// Re psi_s.
pub fn effective_radius(model: &FactorModel, t: f64, r: f64) -> Result<f64> {
    let mut ln_eff = r.ln();
    for _ in 0..2 {
        let mut total_offset = 0.0;
        for params in &model.idio {
            let x_reach = params.envelope_inverse(ln_eff / t + 1.0);
            let x_max = if x_reach.is_finite() {
                (10.0 * x_reach).max(1e4)
            } else {
                1e6
            };
            total_offset += params.envelope_offset(0.0, x_max)?;
        }
        ln_eff = r.ln() + t * total_offset;
    }
    Ok(ln_eff.exp())
}

/// Enumerate the integer lattice points of the ball by recursive coordinate
/// slabs (lexicographic order).
pub fn enumerate(ball: &AnisoBall, cap: usize) -> Result<IndexSet> {
    // cheap volume-based estimate before committing memory
    let vol = volume_aniso_unit_ball(&ball.nu)?
        * ball.weights.iter().map(|w| 1.0 / w).product::<f64>()
        / ball.freq_scale.powi(ball.n as i32);
    if vol > 1.2 * cap as f64 + 1e4 {
        return Err(PricerError::Resource(format!(
            "estimated index-set cardinality {vol:.3e} exceeds cap {cap}"
        )));
    }
    let mut points: Vec<i64> = Vec::new();
    let mut prefix = vec![0i64; ball.n];
    enumerate_rec(ball, 0, 0.0, &mut prefix, &mut points, cap)?;
    let p = (2.0 * std::f64::consts::PI / ball.freq_scale).round() as u32;
    Ok(IndexSet::from_points(
        ball.n,
        points,
        p,
        ball.r,
        ball.freq_scale,
    ))
}

fn enumerate_rec(
    ball: &AnisoBall,
    dim: usize,
    used: f64,
    prefix: &mut Vec<i64>,
    points: &mut Vec<i64>,
    cap: usize,
) -> Result<()> {
    let budget = 1.0 - used;
    if budget < 0.0 {
        return Ok(());
    }
    let w = ball.weights[dim];
    let nu = ball.nu[dim];
    // |w * freq_scale * m|^nu <= budget
    let reach = budget.powf(1.0 / nu) / (w * ball.freq_scale);
    let m_max = reach.floor() as i64;
    for m in -m_max..=m_max {
        let x = (w * ball.freq_scale * m as f64).abs().powf(nu);
        let next = used + x;
        if next > 1.0 {
            continue;
        }
        prefix[dim] = m;
        if dim + 1 == ball.n {
            if points.len() / ball.n >= cap {
                return Err(PricerError::Resource(format!(
                    "index-set cardinality exceeded cap {cap} during enumeration"
                )));
            }
            points.extend_from_slice(prefix);
        } else {
            enumerate_rec(ball, dim + 1, next, prefix, points, cap)?;
        }
    }
    Ok(())
}

/// M-term truncation error bound with the stated constants
/// (p in [2, inf]; p' its conjugate; S = sum 1/nu_s):
/// e_n = P^{-n/p'} (kappa_n S / p')^{1/p'}, eta_n = e_n kappa_n^{(S-1)/p'},
/// bound = eta_n exp(-kappa_n^{-1/S} M^{1/S}) M^{1/((1-S) p')}.
pub fn truncation_error_bound(
    m: f64,
    p_norm: f64,
    model: &FactorModel,
    t: f64,
    p: u32,
) -> Result<f64> {
    if !(p_norm >= 2.0) {
        return Err(PricerError::Parameter(format!(
            "p-norm must lie in [2, inf], got {p_norm}"
        )));
    }
    let p_conj = if p_norm.is_infinite() {
        1.0
    } else {
        p_norm / (p_norm - 1.0)
    };
    let kappa = kappa_n(model, t)?;
    let s = inverse_order_sum(model);
    if (s - 1.0).abs() < 1e-9 {
        return Err(PricerError::Parameter(
            "truncation bound degenerate at sum 1/nu_s = 1".into(),
        ));
    }
    let e_n = (p as f64).powf(-(model.n as f64) / p_conj) * (kappa * s / p_conj).powf(1.0 / p_conj);
    let eta_n = e_n * kappa.powf((s - 1.0) / p_conj);
    Ok(eta_n
        * (-kappa.powf(-1.0 / s) * m.powf(1.0 / s)).exp()
        * m.powf(1.0 / ((1.0 - s) * p_conj)))
}

/// Direct thresholding alternative: all integer m inside an envelope-derived
/// bounding box with |Phi(freq_scale * m, T)| >= rho.
pub fn threshold_index_set(
    model: &FactorModel,
    t: f64,
    p: u32,
    rho: f64,
    cap: usize,
) -> Result<IndexSet> {
    if !(0.0 < rho && rho < 1.0) {
        return Err(PricerError::Parameter(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    let freq_scale = 2.0 * std::f64::consts::PI / p as f64;
    let level = (1.0 / rho).ln() / t;
    // total envelope offset across coordinates; generous scan range
    let mut offset_total = 0.0;
    for params in &model.idio {
        let reach = params.envelope_inverse(level + 1.0);
        let x_max = if reach.is_finite() {
            (10.0 * reach).max(1e4)
        } else {
            1e6
        };
        offset_total += params.envelope_offset(0.0, x_max)?;
    }
    // per-coordinate reach at the offset-adjusted level
    let mut box_max: Vec<i64> = Vec::with_capacity(model.n);
    let mut est: f64 = 1.0;
    for params in &model.idio {
        let reach = params.envelope_inverse(level + offset_total);
        if !reach.is_finite() {
            return Err(PricerError::Resource(
                "threshold bounding box unbounded (vanishing jump intensity)".into(),
            ));
        }
        let m_max = (reach / freq_scale).ceil() as i64 + 1;
        est *= (2 * m_max + 1) as f64;
        box_max.push(m_max);
    }
    if est > 1.2 * cap as f64 + 1e4 {
        return Err(PricerError::Resource(format!(
            "threshold bounding box holds {est:.3e} candidates, exceeds cap {cap}"
        )));
    }
    let mut points: Vec<i64> = Vec::new();
    let mut m = vec![0i64; model.n];
    threshold_rec(
        model, t, freq_scale, rho, &box_max, 0, &mut m, &mut points, cap,
    )?;
    Ok(IndexSet::from_points(model.n, points, p, 1.0 / rho, freq_scale))
}

#[allow(clippy::too_many_arguments)]
fn threshold_rec(
    model: &FactorModel,
    t: f64,
    freq_scale: f64,
    rho: f64,
    box_max: &[i64],
    dim: usize,
    m: &mut Vec<i64>,
    points: &mut Vec<i64>,
    cap: usize,
) -> Result<()> {
    if dim == model.n {
        let v: Vec<Complex64> = m
            .iter()
            .map(|&mi| Complex64::new(freq_scale * mi as f64, 0.0))
            .collect();
        if model.char_fn_unchecked(&v, t).norm() >= rho {
            if points.len() / model.n >= cap {
                return Err(PricerError::Resource(format!(
                    "threshold set cardinality exceeded cap {cap}"
                )));
            }
            points.extend_from_slice(m);
        }
        return Ok(());
    }
    for mi in -box_max[dim]..=box_max[dim] {
        m[dim] = mi;
        threshold_rec(model, t, freq_scale, rho, box_max, dim + 1, m, points, cap)?;
    }
    Ok(())
}

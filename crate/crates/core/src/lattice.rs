//! Damped density representation, the cosh majorant constant M_T,
//! aliasing-driven period selection, and the Poisson-summation lattice
//! density approximant with its L_p error bound.

use num_complex::Complex64;

use crate::bounds::{coordinate_tables, dropped_mass_bound, envelope_full_integral, envelope_tail_integral};
use crate::error::{PricerError, Result};
use crate::kobol::{AnalyticTube, FactorModel};
use crate::oracle::QuadCtrl;
use crate::sparse::IndexSet;
use crate::sum::{par_sum_complex, par_sum_real};

/// Aliasing budget: majorant constant, target aliasing error, and the
/// smallest certified period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasBudget {
    pub m_t: f64,
    pub eps_alias: f64,
    pub p: u32,
}

/// Tensor-product Gauss-Legendre integration over the symmetric box
/// prod [-edge_s, edge_s], with panel doubling until two refinements agree.
fn tensor_gl<F>(edges: &[f64], rel_tol: f64, f: F) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let n = edges.len();
    if n > 3 {
        return Err(PricerError::Resource(format!(
            "tensor quadrature supports n <= 3, got {n}"
        )));
    }
    const XGL: [f64; 8] = [
        0.0950125098376374,
        0.2816035507792589,
        0.4580167776572274,
        0.6178762444026438,
        0.7554044083550030,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const WGL: [f64; 8] = [
        0.1894506104550685,
        0.1826034150449236,
        0.1691565193950025,
        0.1495959888165767,
        0.1246289712555339,
        0.0951585116824928,
        0.0622535239386479,
        0.0271524594117541,
    ];
    let mut prev: Option<Complex64> = None;
    let mut panels = 8usize;
    for _ in 0..10 {
        // nodes/weights per dimension
        let mut nodes: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut weights: Vec<Vec<f64>> = Vec::with_capacity(n);
        for &edge in edges {
            let width = 2.0 * edge / panels as f64;
            let mut xs = Vec::with_capacity(panels * 16);
            let mut ws = Vec::with_capacity(panels * 16);
            for p in 0..panels {
                let c = -edge + (p as f64 + 0.5) * width;
                let h = 0.5 * width;
                for j in 0..8 {
                    xs.push(c - XGL[j] * h);
                    ws.push(WGL[j] * h);
                    xs.push(c + XGL[j] * h);
                    ws.push(WGL[j] * h);
                }
            }
            nodes.push(xs);
            weights.push(ws);
        }
        let per_dim = panels * 16;
        let total: usize = per_dim.pow(n as u32);
        if total > 400_000_000 {
            return Err(PricerError::Resource(
                "tensor quadrature grid exceeds node cap".into(),
            ));
        }
        let cur = par_sum_complex(total, |idx| {
            let mut rem = idx;
            let mut x = [0.0f64; 3];
            let mut w = 1.0f64;
            for k in 0..n {
                let i = rem % per_dim;
                rem /= per_dim;
                x[k] = nodes[k][i];
                w *= weights[k][i];
            }
            w * f(&x[..n])
        });
        if let Some(p) = prev {
            if (cur - p).norm() <= rel_tol * cur.norm().max(1e-300) {
                return Ok(cur);
            }
        }
        prev = Some(cur);
        panels *= 2;
    }
    Err(PricerError::Accuracy(
        "tensor quadrature did not converge".into(),
    ))
}

/// Per-coordinate truncation edges and a certified bound on the discarded
/// envelope mass for an integrand bounded by
/// prod_s e^{T off_s} e^{-T e_s(x_s)}.
fn envelope_box(
    model: &FactorModel,
    t: f64,
    shifts: &[Vec<f64>],
    cutoff: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = model.n;
    let mut edges = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    for (s, params) in model.idio.iter().enumerate() {
        let level = (1.0 / cutoff).ln() / t;
        let rough = params.envelope_inverse(level);
        let x_scan = if rough.is_finite() {
            (10.0 * rough).max(1e4)
        } else {
            1e6
        };
        let mut off: f64 = 0.0;
        for eta in &shifts[s] {
            off = off.max(params.envelope_offset(*eta, x_scan)?);
        }
        let edge = params.envelope_inverse(level + off);
        if !edge.is_finite() {
            return Err(PricerError::Accuracy(format!(
                "coordinate {s}: envelope never reaches the cutoff"
            )));
        }
        edges.push(edge);
        offsets.push(off);
    }
    // discarded mass: union bound over coordinates
    let mut fulls = Vec::with_capacity(n);
    for (s, params) in model.idio.iter().enumerate() {
        fulls.push((t * offsets[s]).exp() * envelope_full_integral(params, t)?);
    }
    let mut tail = 0.0;
    for (s, params) in model.idio.iter().enumerate() {
        let mut piece = (t * offsets[s]).exp() * envelope_tail_integral(params, t, edges[s])?;
        for (k, full) in fulls.iter().enumerate() {
            if k != s {
                piece *= full;
            }
        }
        tail += piece;
    }
    Ok((edges, tail))
}

/// Upper estimate of the symmetric-contour majorant constant
/// M_T = (1/2)(2 pi)^{-n} int |Phi(v + i a 1) + Phi(v - i a 1)| dv with
/// a = min(a_+, -a_-); the discarded envelope tail is added so the result
/// stays an upper bound of the integral.
pub fn majorant_mt(
    model: &FactorModel,
    tube: &AnalyticTube,
    t: f64,
    ctrl: &QuadCtrl,
) -> Result<f64> {
    let a = tube.symmetric();
    let n = model.n;
    let shifts: Vec<Vec<f64>> = (0..n).map(|_| vec![a, -a]).collect();
    let (edges, tail) = envelope_box(model, t, &shifts, ctrl.domain_cutoff_tol)?;
    let plus: Vec<Complex64> = vec![Complex64::new(0.0, a); n];
    let minus: Vec<Complex64> = vec![Complex64::new(0.0, -a); n];
    let integral = tensor_gl(&edges, ctrl.rel_tol, |x| {
        let vp: Vec<Complex64> = (0..n).map(|s| Complex64::new(x[s], 0.0) + plus[s]).collect();
        let vm: Vec<Complex64> = (0..n).map(|s| Complex64::new(x[s], 0.0) + minus[s]).collect();
        Complex64::new(
            (model.char_fn_unchecked(&vp, t) + model.char_fn_unchecked(&vm, t)).norm(),
            0.0,
        )
    })?;
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(0.5 * (integral.re + 2.0 * tail) / two_pi.powi(n as i32))
}

/// Upper estimate of the product-separable majorant constant
/// 2^{-n} (2 pi)^{-n} int |sum_{sigma in {+-1}^n} Phi(v + i(eps - sigma*a))| dv,
/// which certifies the coordinatewise bound
/// |h(x)| <= M prod_s sech(a_s x_s) for the shifted density. With n = 1 and
/// eps = 0 this coincides with M_T.
pub fn majorant_product(
    model: &FactorModel,
    t: f64,
    a: &[f64],
    eps: &[f64],
    ctrl: &QuadCtrl,
) -> Result<f64> {
    let n = model.n;
    if a.len() != n || eps.len() != n {
        return Err(PricerError::Parameter("shift dimension mismatch".into()));
    }
    let mut shifts: Vec<Vec<f64>> = vec![Vec::new(); n];
    for s in 0..n {
        shifts[s].push(eps[s] - a[s]);
        shifts[s].push(eps[s] + a[s]);
    }
    let (edges, tail) = envelope_box(model, t, &shifts, ctrl.domain_cutoff_tol)?;
    let signs = 1usize << n;
    let integral = tensor_gl(&edges, ctrl.rel_tol, |x| {
        let mut acc = Complex64::new(0.0, 0.0);
        for sig in 0..signs {
            let v: Vec<Complex64> = (0..n)
                .map(|s| {
                    let sgn = if (sig >> s) & 1 == 1 { 1.0 } else { -1.0 };
                    Complex64::new(x[s], eps[s] - sgn * a[s])
                })
                .collect();
            acc += model.char_fn_unchecked(&v, t);
        }
        Complex64::new(acc.norm(), 0.0)
    })?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let scale = (2.0f64 * two_pi).powi(n as i32);
    Ok((integral.re + (signs as f64) * tail) / scale)
}

/// Upper estimate of (2 pi)^{-n} int |Phi(v + i eps)| dv (the sup-norm bound
/// for the shifted coefficient function); tail beyond the truncation box is
/// added.
pub fn char_modulus_integral(
    model: &FactorModel,
    t: f64,
    eps: &[f64],
    ctrl: &QuadCtrl,
) -> Result<f64> {
    let n = model.n;
    let shifts: Vec<Vec<f64>> = eps.iter().map(|&e| vec![e]).collect();
    let (edges, tail) = envelope_box(model, t, &shifts, ctrl.domain_cutoff_tol)?;
    let integral = tensor_gl(&edges, ctrl.rel_tol, |x| {
        let v: Vec<Complex64> = (0..n).map(|s| Complex64::new(x[s], eps[s])).collect();
        Complex64::new(model.char_fn_unchecked(&v, t).norm(), 0.0)
    })?;
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok((integral.re + tail) / two_pi.powi(n as i32))
}

/// Geometric-series upper bound of the aliasing sum at period P:
/// sum_{m != 0} prod_s sech((2P-1) m_s a_s / 2)
/// <= prod_s (1 + 4 q_s/(1-q_s)) - 1, q_s = exp(-(2P-1) a_s / 2).
pub fn alias_series_bound(p: u32, a: &[f64]) -> f64 {
    let mut prod = 1.0;
    for &a_s in a {
        let q = (-(2.0 * p as f64 - 1.0) * a_s / 2.0).exp();
        if q >= 1.0 {
            return f64::INFINITY;
        }
        prod *= 1.0 + 4.0 * q / (1.0 - q);
    }
    prod - 1.0
}

/// Direct numerical evaluation of the factorized cosh aliasing series at
/// period P (always <= alias_series_bound).
pub fn alias_series_direct(p: u32, a: &[f64]) -> f64 {
    let mut prod = 1.0;
    for &a_s in a {
        let c = (2.0 * p as f64 - 1.0) * a_s / 2.0;
        let mut col = 0.0;
        for k in 1..100_000 {
            let term = 2.0 / (c * k as f64).cosh();
            col += term;
            if term < 1e-22 {
                break;
            }
        }
        prod *= 1.0 + col;
    }
    prod - 1.0
}

/// Smallest integer period P >= 1 whose certified aliasing bound satisfies
/// M_T * bound(P) <= eps_alias.
pub fn select_period(m_t: f64, a: &[f64], eps_alias: f64) -> Result<u32> {
    if eps_alias <= 0.0 || m_t <= 0.0 {
        return Err(PricerError::Parameter(
            "select_period needs positive M_T and eps_alias".into(),
        ));
    }
    if a.iter().any(|&x| x <= 0.0) {
        return Err(PricerError::Parameter(
            "select_period needs positive damping components".into(),
        ));
    }
    let target = eps_alias / m_t;
    let ok = |p: u32| alias_series_bound(p, a) <= target;
    if ok(1) {
        return Ok(1);
    }
    let mut hi = 2u32;
    while !ok(hi) {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| PricerError::Resource("period overflow".into()))?;
    }
    let mut lo = hi / 2; // fails
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest period together with its budget record.
pub fn alias_budget(m_t: f64, a: &[f64], eps_alias: f64) -> Result<AliasBudget> {
    let p = select_period(m_t, a, eps_alias)?;
    Ok(AliasBudget { m_t, eps_alias, p })
}

/// The value of an evaluated density approximant: real part plus the
/// imaginary residual left by rounding.
#[derive(Debug, Clone, Copy)]
pub struct DensityValue {
    pub value: f64,
    pub imag_residual: f64,
}

/// Truncated Poisson-summation density approximant
/// sum_m Phi(-2 pi m / P, T) / P^n * exp(i <2 pi m / P, x>).
#[derive(Debug, Clone)]
pub struct DensityApproximant {
    pub p: u32,
    pub n: usize,
    pub t: f64,
    freqs: IndexSet,
    coeffs: Vec<Complex64>,
    zero_index: usize,
}

pub fn build_density_approximant(
    model: &FactorModel,
    t: f64,
    p: u32,
    freq_set: &IndexSet,
) -> Result<DensityApproximant> {
    if p < 1 {
        return Err(PricerError::Parameter("period must be >= 1".into()));
    }
    if freq_set.n != model.n {
        return Err(PricerError::Parameter(
            "frequency set dimension mismatch".into(),
        ));
    }
    let n = model.n;
    let fs = 2.0 * std::f64::consts::PI / p as f64;
    let len = freq_set.len();
    let scale = (p as f64).powi(-(n as i32));
    // mirrored layout check: negation-closed lexicographic sets pair i with
    // len-1-i, which lets us enforce Hermitian symmetry exactly
    let mirrored = (0..len.min(64)).all(|i| {
        let a = freq_set.point(i);
        let b = freq_set.point(len - 1 - i);
        a.iter().zip(b).all(|(x, y)| *x == -*y)
    });
    let raw: Vec<Complex64> = (0..len)
        .map(|i| {
            let m = freq_set.point(i);
            let v: Vec<Complex64> = m
                .iter()
                .map(|&mi| Complex64::new(-fs * mi as f64, 0.0))
                .collect();
            model.char_fn_unchecked(&v, t) * scale
        })
        .collect();
    let coeffs: Vec<Complex64> = if mirrored {
        (0..len)
            .map(|i| {
                let j = len - 1 - i;
                if i <= j {
                    raw[i]
                } else {
                    raw[j].conj()
                }
            })
            .collect()
    } else {
        raw
    };
    let zero_index = (0..len)
        .find(|&i| freq_set.point(i).iter().all(|&mi| mi == 0))
        .ok_or_else(|| PricerError::Parameter("frequency set must contain 0".into()))?;
    Ok(DensityApproximant {
        p,
        n,
        t,
        freqs: freq_set.clone(),
        coeffs,
        zero_index,
    })
}

impl DensityApproximant {
    /// Raw trigonometric sum without the cube domain check.
    pub fn eval_raw(&self, x: &[f64]) -> Complex64 {
        let fs = 2.0 * std::f64::consts::PI / self.p as f64;
        par_sum_complex(self.freqs.len(), |i| {
            let m = self.freqs.point(i);
            let phase: f64 = m
                .iter()
                .zip(x)
                .map(|(&mi, &xs)| fs * mi as f64 * xs)
                .sum();
            self.coeffs[i] * Complex64::new(0.0, phase).exp()
        })
    }

    /// Evaluate on the periodization cube [-P/2, P/2]^n.
    pub fn eval(&self, x: &[f64]) -> Result<DensityValue> {
        if x.len() != self.n {
            return Err(PricerError::Parameter("dimension mismatch".into()));
        }
        let half = self.p as f64 / 2.0;
        if x.iter().any(|&xs| xs.abs() > half) {
            return Err(PricerError::Domain(format!(
                "x outside the periodization cube [-{half}, {half}]^n"
            )));
        }
        let z = self.eval_raw(x);
        Ok(DensityValue {
            value: z.re,
            imag_residual: z.im.abs(),
        })
    }

    /// Integral over the periodization cube: only the m = 0 term survives.
    pub fn cube_mass(&self) -> f64 {
        (self.coeffs[self.zero_index] * (self.p as f64).powi(self.n as i32)).re
    }

    pub fn coefficient(&self, i: usize) -> Complex64 {
        self.coeffs[i]
    }

    pub fn frequencies(&self) -> &IndexSet {
        &self.freqs
    }
}

/// L_p aliasing error bound eps * P^{n/p} (P^{n/inf} = 1).
pub fn density_error_bound(budget: &AliasBudget, p_norm: f64, n: usize) -> f64 {
    if p_norm.is_infinite() {
        budget.eps_alias
    } else {
        budget.eps_alias * (budget.p as f64).powf(n as f64 / p_norm)
    }
}

/// Certified sup-norm bound on the frequency-truncation part of the density
/// approximant error: P^{-n} * (dropped coefficient modulus mass).
pub fn density_truncation_bound(
    model: &FactorModel,
    t: f64,
    p: u32,
    freq_set: &IndexSet,
) -> Result<f64> {
    let fs = 2.0 * std::f64::consts::PI / p as f64;
    let eps = vec![0.0; model.n];
    let tables = coordinate_tables(model, t, fs, &eps)?;
    let retained = par_sum_real(freq_set.len(), |i| {
        let m = freq_set.point(i);
        m.iter()
            .enumerate()
            .map(|(s, &mi)| tables.grids[s].val(mi))
            .product::<f64>()
    });
    Ok(dropped_mass_bound(&tables, retained) * (p as f64).powi(-(model.n as i32)))
}

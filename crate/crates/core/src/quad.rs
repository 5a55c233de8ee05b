//! One-dimensional quadrature kernels. Two deliberately independent rules
//! are provided: a globally adaptive Gauss-Kronrod 7/15 scheme (used by the
//! reference oracles) and a panel-doubling 16-point Gauss-Legendre scheme
//! (used by the majorant/budget estimators), so that cross-checks between
//! the two never share a code path.

use num_complex::Complex64;

use crate::error::{PricerError, Result};

// QUADPACK dqk15 nodes/weights on [-1, 1] (positive half; symmetric).
const XGK: [f64; 8] = [
    0.9914553711208126,
    0.9491079123427585,
    0.8648644233597691,
    0.7415311855993944,
    0.5860872354676911,
    0.4058451513773972,
    0.2077849550078985,
    0.0,
];
const WGK: [f64; 8] = [
    0.02293532201052922,
    0.06309209262997855,
    0.1047900103222502,
    0.1406532597155259,
    0.1690047266392679,
    0.1903505780647854,
    0.2044329400752989,
    0.2094821410847278,
];
const WG: [f64; 4] = [
    0.1294849661688697,
    0.2797053914892767,
    0.3818300505051189,
    0.4179591836734694,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = Complex64::new(0.0, 0.0);
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..8 {
        let x = XGK[j] * h;
        let fv = if j == 7 {
            f(c)
        } else {
            f(c - x) + f(c + x)
        };
        kron += WGK[j] * fv;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fv;
        }
    }
    kron *= h;
    gauss *= h;
    (kron, (kron - gauss).norm())
}

struct Segment {
    a: f64,
    b: f64,
    val: Complex64,
    err: f64,
}

/// Globally adaptive Gauss-Kronrod integration of a complex-valued function
/// over a finite interval. Returns (integral, error estimate).
pub fn adaptive_gk<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<(Complex64, f64)> {
    let (val, err) = gk15(f, a, b);
    let mut segs = vec![Segment { a, b, val, err }];
    for _ in 0..max_subdivisions {
        let total: Complex64 = segs.iter().map(|s| s.val).sum();
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        if total_err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok((total, total_err));
        }
        // split the worst segment
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        let (v1, e1) = gk15(f, s.a, m);
        let (v2, e2) = gk15(f, m, s.b);
        segs.push(Segment {
            a: s.a,
            b: m,
            val: v1,
            err: e1,
        });
        segs.push(Segment {
            a: m,
            b: s.b,
            val: v2,
            err: e2,
        });
    }
    let total: Complex64 = segs.iter().map(|s| s.val).sum();
    let total_err: f64 = segs.iter().map(|s| s.err).sum();
    if total_err <= abs_tol.max(rel_tol * total.norm()) {
        Ok((total, total_err))
    } else {
        Err(PricerError::Accuracy(format!(
            "adaptive quadrature did not converge: error estimate {total_err:.3e} over [{a}, {b}]"
        )))
    }
}

// 16-point Gauss-Legendre nodes/weights (positive half; symmetric).
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

fn gl16_panels<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, panels: usize) -> Complex64 {
    let width = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let c = lo + 0.5 * width;
        let h = 0.5 * width;
        for j in 0..8 {
            acc += WGL[j] * h * (f(c - XGL[j] * h) + f(c + XGL[j] * h));
        }
    }
    acc
}

/// Composite Gauss-Legendre with panel doubling until two successive
/// refinements agree to the requested relative tolerance.
pub fn gl_doubling<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_levels: usize,
) -> Result<(Complex64, f64)> {
    let mut panels = 4usize;
    let mut prev = gl16_panels(f, a, b, panels);
    for _ in 0..max_levels {
        panels *= 2;
        let cur = gl16_panels(f, a, b, panels);
        let diff = (cur - prev).norm();
        if diff <= rel_tol * cur.norm().max(1e-300) {
            return Ok((cur, diff));
        }
        prev = cur;
    }
    Err(PricerError::Accuracy(format!(
        "panel-doubling quadrature did not converge over [{a}, {b}]"
    )))
}

//! Compensated (Neumaier) accumulation and a deterministic chunked parallel
//! reduction. Chunk boundaries are fixed by index, and chunk results are
//! combined sequentially in index order, so totals are bit-identical across
//! thread counts.

use num_complex::Complex64;
use rayon::prelude::*;

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Sum f(i) for i in 0..len, data-parallel over fixed-size chunks with a
/// sequential compensated combine in chunk order.
pub fn par_sum_complex<F>(len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let n_chunks = len.div_ceil(CHUNK.max(1));
    let partials: Vec<Complex64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(len);
            let mut acc = KahanComplex::default();
            for i in lo..hi {
                acc.add(f(i));
            }
            acc.value()
        })
        .collect();
    let mut total = KahanComplex::default();
    for p in partials {
        total.add(p);
    }
    total.value()
}

/// Real-valued variant of [`par_sum_complex`].
pub fn par_sum_real<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let n_chunks = len.div_ceil(CHUNK.max(1));
    let partials: Vec<f64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(len);
            let mut acc = Kahan::default();
            for i in lo..hi {
                acc.add(f(i));
            }
            acc.value()
        })
        .collect();
    let mut total = Kahan::default();
    for p in partials {
        total.add(p);
    }
    total.value()
}

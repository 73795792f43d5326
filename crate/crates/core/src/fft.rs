//! Exact linear (non-periodic) 2D convolution on square grids via zero-padded FFTs.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Discrete convolution `out[k] = Σ_l K(k − l)·src[l]` on an `n × n` grid, with
/// the kernel spectrum precomputed once.
///
/// The kernel is sampled at integer offsets `(dx, dy) ∈ [−(n−1), n−1]²`. The
/// padded transform size is `pad_factor·n` per axis; `pad_factor ≥ 2` makes the
/// circular convolution coincide with the linear one on the physical grid.
pub struct Convolver {
    n: usize,
    m: usize,
    spectrum: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver").field("n", &self.n).field("m", &self.m).finish()
    }
}

impl Convolver {
    pub fn new<F>(n: usize, pad_factor: usize, kernel: F) -> Result<Self>
    where
        F: Fn(i64, i64) -> Complex64,
    {
        if pad_factor < 2 {
            return Err(Error::InsufficientPadding { pad_factor });
        }
        let m = pad_factor * n;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); m * m];
        let reach = n as i64 - 1;
        for dy in -reach..=reach {
            let row = dy.rem_euclid(m as i64) as usize;
            for dx in -reach..=reach {
                let col = dx.rem_euclid(m as i64) as usize;
                spectrum[row * m + col] = kernel(dx, dy);
            }
        }
        let mut conv = Self { n, m, spectrum, fwd, inv };
        let mut s = std::mem::take(&mut conv.spectrum);
        conv.transform(&mut s, false);
        conv.spectrum = s;
        Ok(conv)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let m = self.m;
        let plan = if inverse { &self.inv } else { &self.fwd };
        plan.process(buf);
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for c in 0..m {
            for r in 0..m {
                col[r] = buf[r * m + c];
            }
            plan.process(&mut col);
            for r in 0..m {
                buf[r * m + c] = col[r];
            }
        }
    }

    pub fn apply(&self, src: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(src.len(), self.n * self.n, "source does not match convolver grid");
        let (n, m) = (self.n, self.m);
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for iy in 0..n {
            buf[iy * m..iy * m + n].copy_from_slice(&src[iy * n..(iy + 1) * n]);
        }
        self.transform(&mut buf, false);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.transform(&mut buf, true);
        let scale = 1.0 / (m * m) as f64;
        let mut out = Vec::with_capacity(n * n);
        for iy in 0..n {
            out.extend(buf[iy * m..iy * m + n].iter().map(|v| v * scale));
        }
        out
    }

    pub fn apply_real(&self, src: &[f64]) -> Vec<Complex64> {
        let c: Vec<Complex64> = src.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.apply(&c)
    }
}

/// Unnormalised forward 2D DFT of an `n × n` row-major array.
pub fn fft2(values: &[Complex64], n: usize) -> Vec<Complex64> {
    assert_eq!(values.len(), n * n, "input is not n × n");
    let plan = FftPlanner::new().plan_fft_forward(n);
    let mut buf = values.to_vec();
    plan.process(&mut buf);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = buf[r * n + c];
        }
        plan.process(&mut col);
        for r in 0..n {
            buf[r * n + c] = col[r];
        }
    }
    buf
}

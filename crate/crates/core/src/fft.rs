//! Radix-2 complex FFT and FFT-based linear convolution.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::prelude::*;

/// Precomputed twiddles and bit-reversal table for one power-of-two size.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    rev: Vec<u32>,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT size must be a power of two");
        let bits = n.trailing_zeros();
        let rev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        // Each twiddle is evaluated directly rather than by recurrence.
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        Self { n, twiddles, rev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform, no scaling.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, false);
    }

    /// In-place inverse transform, scaled by `1/n`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, true);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.n, "buffer length must equal FFT size");
        for i in 0..self.n {
            let j = self.rev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let half = len / 2;
            let step = self.n / len;
            for start in (0..self.n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    /// Forward transform of a zero-padded real sequence.
    pub fn forward_real(&self, input: &[f64]) -> Vec<Complex64> {
        assert!(input.len() <= self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for (b, &x) in buf.iter_mut().zip(input) {
            b.re = x;
        }
        self.forward(&mut buf);
        buf
    }
}

/// Streaming overlap-add convolver holding the spectrum of one kernel.
#[derive(Debug, Clone)]
pub struct Convolver {
    fft: Fft,
    kernel_len: usize,
    block: usize,
    kernel_spectrum: Vec<Complex64>,
}

impl Convolver {
    pub fn new(kernel: &[f64]) -> Self {
        assert!(!kernel.is_empty(), "kernel must be non-empty");
        let n = (2 * kernel.len()).next_power_of_two().max(1024);
        let fft = Fft::new(n);
        let kernel_spectrum = fft.forward_real(kernel);
        Self {
            block: n - kernel.len() + 1,
            kernel_len: kernel.len(),
            fft,
            kernel_spectrum,
        }
    }

    pub fn kernel_len(&self) -> usize {
        self.kernel_len
    }

    /// Full linear convolution, length `|x| + |h| - 1`.
    pub fn convolve(&self, x: &[f64]) -> Vec<f64> {
        if x.is_empty() {
            return Vec::new();
        }
        let out_len = x.len() + self.kernel_len - 1;
        let mut out = vec![0.0; out_len];
        let n = self.fft.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for start in (0..x.len()).step_by(self.block) {
            let chunk = &x[start..(start + self.block).min(x.len())];
            for (i, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(chunk.get(i).copied().unwrap_or(0.0), 0.0);
            }
            self.fft.forward(&mut buf);
            for (b, h) in buf.iter_mut().zip(&self.kernel_spectrum) {
                *b *= h;
            }
            self.fft.inverse(&mut buf);
            let valid = (chunk.len() + self.kernel_len - 1).min(out_len - start);
            for (o, b) in out[start..start + valid].iter_mut().zip(&buf) {
                *o += b.re;
            }
        }
        out
    }
}

/// Full linear convolution of two real sequences via overlap-add.
pub fn fft_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    // The shorter operand becomes the kernel.
    if h.len() > x.len() {
        return Convolver::new(x).convolve(h);
    }
    Convolver::new(h).convolve(x)
}

//! Discrete Fourier transforms for real signals.
//!
//! Convention: the forward transform is unnormalized,
//! `X_k = sum_j x_j exp(-2 pi i j k / n)`, and the inverse carries the `1/n`.
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform; every
//! other length goes through Bluestein's chirp-z convolution on a padded
//! power-of-two transform, so any `n >= 1` is supported.
//!
//! Half-spectrum inputs to [`irfft`] are read with the usual real-signal
//! policy: the imaginary parts of the DC bin and (for even `n`) the Nyquist
//! bin are discarded.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FftError {
    #[error("transform length must be positive")]
    Empty,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("half spectrum for n = {n} needs {expected} coefficients, got {got}")]
    SpectrumLength { n: usize, expected: usize, got: usize },
}

/// Number of half-spectrum coefficients of a real signal of length `n`.
pub fn half_len(n: usize) -> usize {
    n / 2 + 1
}

enum Algorithm {
    Radix2 { twiddles: Vec<Complex64>, bitrev: Vec<usize> },
    Bluestein { chirp: Vec<Complex64>, kernel_fft: Vec<Complex64>, inner: Box<FftPlan> },
}

/// Precomputed complex transform of one length.
pub struct FftPlan {
    n: usize,
    algo: Algorithm,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "fft length must be positive");
        if n.is_power_of_two() {
            Self { n, algo: radix2_tables(n) }
        } else {
            Self { n, algo: bluestein_tables(n) }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place unnormalized forward transform.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n);
        match &self.algo {
            Algorithm::Radix2 { twiddles, bitrev } => radix2(buf, twiddles, bitrev),
            Algorithm::Bluestein { chirp, kernel_fft, inner } => {
                let m = inner.len();
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for (j, w) in work.iter_mut().take(self.n).enumerate() {
                    *w = buf[j] * chirp[j].conj();
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel_fft) {
                    *w *= k;
                }
                inner.inverse_unnormalized(&mut work);
                let scale = 1.0 / m as f64;
                for (k, out) in buf.iter_mut().enumerate() {
                    *out = work[k] * chirp[k].conj() * scale;
                }
            }
        }
    }

    /// In-place inverse transform without the `1/n` factor.
    pub fn inverse_unnormalized(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        for v in buf.iter_mut() {
            *v = v.conj();
        }
    }
}

fn radix2_tables(n: usize) -> Algorithm {
    let bits = n.trailing_zeros();
    let bitrev = (0..n)
        .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
        .collect();
    let twiddles = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    Algorithm::Radix2 { twiddles, bitrev }
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], bitrev: &[usize]) {
    let n = buf.len();
    for i in 0..n {
        let j = bitrev[i];
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let t = twiddles[k * stride] * buf[start + k + half];
                let u = buf[start + k];
                buf[start + k] = u + t;
                buf[start + k + half] = u - t;
            }
        }
        len <<= 1;
    }
}

fn bluestein_tables(n: usize) -> Algorithm {
    // chirp_j = exp(i pi j^2 / n); j^2 is reduced mod 2n to keep the angle small.
    let two_n = 2 * n as u128;
    let chirp: Vec<Complex64> = (0..n)
        .map(|j| {
            let r = (j as u128 * j as u128) % two_n;
            Complex64::from_polar(1.0, PI * r as f64 / n as f64)
        })
        .collect();
    let m = (2 * n - 1).next_power_of_two();
    let inner = Box::new(FftPlan::new(m));
    let mut kernel = vec![Complex64::new(0.0, 0.0); m];
    kernel[0] = chirp[0];
    for j in 1..n {
        kernel[j] = chirp[j];
        kernel[m - j] = chirp[j];
    }
    inner.forward(&mut kernel);
    Algorithm::Bluestein { chirp, kernel_fft: kernel, inner }
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Rc<FftPlan>>> = RefCell::new(HashMap::new());
}

/// Cached plan for length `n` on the current thread.
pub fn plan(n: usize) -> Rc<FftPlan> {
    PLANS.with(|p| p.borrow_mut().entry(n).or_insert_with(|| Rc::new(FftPlan::new(n))).clone())
}

/// Forward transform of a real signal, returning the `n/2 + 1` non-redundant bins.
pub fn rfft(x: &[f64]) -> Result<Vec<Complex64>, FftError> {
    if x.is_empty() {
        return Err(FftError::Empty);
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(FftError::NonFinite(i));
    }
    Ok(rfft_unchecked(x))
}

pub(crate) fn rfft_unchecked(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n).forward(&mut buf);
    buf.truncate(half_len(n));
    buf
}

/// Inverse of [`rfft`] for a signal of length `n`, including the `1/n` factor.
pub fn irfft(spectrum: &[Complex64], n: usize) -> Result<Vec<f64>, FftError> {
    if n == 0 {
        return Err(FftError::Empty);
    }
    let expected = half_len(n);
    if spectrum.len() != expected {
        return Err(FftError::SpectrumLength { n, expected, got: spectrum.len() });
    }
    if let Some(i) = spectrum.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(FftError::NonFinite(i));
    }
    Ok(irfft_unchecked(spectrum, n))
}

pub(crate) fn irfft_unchecked(spectrum: &[Complex64], n: usize) -> Vec<f64> {
    let h = half_len(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(spectrum[0].re, 0.0);
    for k in 1..h {
        buf[k] = spectrum[k];
        if n - k != k {
            buf[n - k] = spectrum[k].conj();
        }
    }
    if n % 2 == 0 {
        buf[n / 2] = Complex64::new(spectrum[n / 2].re, 0.0);
    }
    plan(n).inverse_unnormalized(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Unnormalized complex forward transform of arbitrary length.
pub fn fft_complex(x: &mut [Complex64]) {
    if !x.is_empty() {
        plan(x.len()).forward(x);
    }
}

//! The kernel-module contract: a black-box linear map `y = K x` over fields,
//! plus a dense matrix kernel and a Fourier-multiplier kernel.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fft::{half_len, irfft_unchecked, rfft_unchecked};
use crate::grid::{Field, Grid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel of size {expected} applied to {got} points")]
    SizeMismatch { expected: usize, got: usize },
    #[error("kernel expects {expected} input channels, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("{modes} retained modes exceed the {available} available at n = {n}")]
    TooManyModes { modes: usize, available: usize, n: usize },
    #[error("spectral kernels act on 1D grids only")]
    NotOneDimensional,
    #[error("input field has non-finite entries")]
    NonFinite,
    #[error("dense kernel needs {expected} entries, got {got}")]
    BadMatrix { expected: usize, got: usize },
}

/// Monotone apply counter, safe to bump from parallel readers.
#[derive(Debug, Default)]
pub struct CallCounter(AtomicU64);

impl CallCounter {
    pub fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

impl Clone for CallCounter {
    fn clone(&self) -> Self {
        Self(AtomicU64::new(self.get()))
    }
}

/// Linear map `y = K x` that may never materialize `K`.
///
/// Implementations must be linear in `x`, must not mutate it, and must bump
/// their call counter by exactly one per [`apply`](KernelModule::apply).
pub trait KernelModule: Send + Sync {
    fn apply(&self, x: &Field) -> Result<Field, KernelError>;

    /// Fixed resolution, or `None` when the kernel works at any resolution.
    fn size(&self) -> Option<usize>;

    fn calls(&self) -> u64;
}

/// Explicit `N x N` kernel applied to each channel independently.
#[derive(Debug, Clone)]
pub struct DenseKernel {
    n: usize,
    matrix: Vec<f64>,
    counter: CallCounter,
}

impl DenseKernel {
    /// Row-major `n x n` matrix.
    pub fn new(n: usize, matrix: Vec<f64>) -> Result<Self, KernelError> {
        if matrix.len() != n * n {
            return Err(KernelError::BadMatrix { expected: n * n, got: matrix.len() });
        }
        Ok(Self { n, matrix, counter: CallCounter::default() })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        Self { n, matrix: m, counter: CallCounter::default() }
    }

    /// Entries uniform in `[-1, 1)`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self { n, matrix: m, counter: CallCounter::default() }
    }

    /// Materializes a single-channel kernel column by column from unit impulses.
    pub fn from_module(kernel: &dyn KernelModule, grid: &Grid) -> Result<Self, KernelError> {
        let n = grid.len();
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            let col = kernel.apply(&Field::impulse(grid.clone(), 1, j))?;
            for i in 0..n {
                m[i * n + j] = col.values()[i];
            }
        }
        Ok(Self { n, matrix: m, counter: CallCounter::default() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.matrix[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.n..(i + 1) * self.n]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseKernel) -> DenseKernel {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.matrix[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &other.matrix[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        DenseKernel { n, matrix: out, counter: CallCounter::default() }
    }

    /// Plain matrix-vector product, not counted as a kernel call.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

impl KernelModule for DenseKernel {
    fn apply(&self, x: &Field) -> Result<Field, KernelError> {
        if x.points() != self.n {
            return Err(KernelError::SizeMismatch { expected: self.n, got: x.points() });
        }
        if !x.is_finite() {
            return Err(KernelError::NonFinite);
        }
        self.counter.bump();
        let mut out = Vec::with_capacity(x.values().len());
        for c in 0..x.channels() {
            out.extend(self.mul_vec(x.channel(c)));
        }
        Ok(Field::from_parts(x.grid().clone(), x.channels(), out))
    }

    fn size(&self) -> Option<usize> {
        Some(self.n)
    }

    fn calls(&self) -> u64 {
        self.counter.get()
    }
}

/// Fourier-multiplier kernel: FFT, keep the lowest `modes` bins, mix channels
/// with one complex `c_in x c_out` matrix per bin, inverse FFT.
///
/// The output is real by construction (only the half spectrum is stored).
/// Because the forward transform is unnormalized and the inverse carries
/// `1/n`, the same multipliers describe the same operator at any resolution.
#[derive(Debug, Clone)]
pub struct SpectralKernel {
    modes: usize,
    c_in: usize,
    c_out: usize,
    /// Index `(k * c_in + i) * c_out + o`.
    weights: Vec<Complex64>,
    counter: CallCounter,
}

impl SpectralKernel {
    pub fn new(modes: usize, c_in: usize, c_out: usize, weights: Vec<Complex64>) -> Self {
        assert_eq!(weights.len(), modes * c_in * c_out, "weight count");
        Self { modes, c_in, c_out, weights, counter: CallCounter::default() }
    }

    /// Real and imaginary parts uniform in `[0, 1/(c_in c_out))`.
    pub fn random(modes: usize, c_in: usize, c_out: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (c_in * c_out) as f64;
        let weights = (0..modes * c_in * c_out)
            .map(|_| Complex64::new(scale * rng.random::<f64>(), scale * rng.random::<f64>()))
            .collect();
        Self::new(modes, c_in, c_out, weights)
    }

    /// Random weights with both parts uniform in `[-1, 1)`.
    pub fn random_signed(modes: usize, c_in: usize, c_out: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..modes * c_in * c_out)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Self::new(modes, c_in, c_out, weights)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn channels(&self) -> (usize, usize) {
        (self.c_in, self.c_out)
    }
}

impl KernelModule for SpectralKernel {
    fn apply(&self, x: &Field) -> Result<Field, KernelError> {
        if x.grid().dims() != 1 {
            return Err(KernelError::NotOneDimensional);
        }
        if x.channels() != self.c_in {
            return Err(KernelError::ChannelMismatch { expected: self.c_in, got: x.channels() });
        }
        let n = x.points();
        if self.modes > half_len(n) {
            return Err(KernelError::TooManyModes { modes: self.modes, available: half_len(n), n });
        }
        if !x.is_finite() {
            return Err(KernelError::NonFinite);
        }
        self.counter.bump();
        let out = spectral_forward(&self.weights, self.modes, self.c_in, self.c_out, x.values(), n);
        Ok(Field::from_parts(x.grid().clone(), self.c_out, out))
    }

    fn size(&self) -> Option<usize> {
        None
    }

    fn calls(&self) -> u64 {
        self.counter.get()
    }
}

/// Channel-major spectral convolution `y = irfft(W . rfft(x))` on raw buffers.
pub(crate) fn spectral_forward(
    weights: &[Complex64],
    modes: usize,
    c_in: usize,
    c_out: usize,
    x: &[f64],
    n: usize,
) -> Vec<f64> {
    let spectra: Vec<Vec<Complex64>> = (0..c_in).map(|i| rfft_unchecked(&x[i * n..(i + 1) * n])).collect();
    let h = half_len(n);
    let mut out = Vec::with_capacity(c_out * n);
    let mut y = vec![Complex64::new(0.0, 0.0); h];
    for o in 0..c_out {
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (k, yk) in y.iter_mut().take(modes).enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, s) in spectra.iter().enumerate() {
                acc += weights[(k * c_in + i) * c_out + o] * s[k];
            }
            *yk = acc;
        }
        out.extend(irfft_unchecked(&y, n));
    }
    out
}

/// Adjoint of [`spectral_forward`] with respect to its input: the same
/// transform pair with conjugate-transposed multipliers.
pub(crate) fn spectral_adjoint(
    weights: &[Complex64],
    modes: usize,
    c_in: usize,
    c_out: usize,
    gy: &[f64],
    n: usize,
) -> Vec<f64> {
    let spectra: Vec<Vec<Complex64>> = (0..c_out).map(|o| rfft_unchecked(&gy[o * n..(o + 1) * n])).collect();
    let h = half_len(n);
    let mut out = Vec::with_capacity(c_in * n);
    let mut g = vec![Complex64::new(0.0, 0.0); h];
    for i in 0..c_in {
        g.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (k, gk) in g.iter_mut().take(modes).enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (o, s) in spectra.iter().enumerate() {
                acc += weights[(k * c_in + i) * c_out + o].conj() * s[k];
            }
            *gk = acc;
        }
        out.extend(irfft_unchecked(&g, n));
    }
    out
}

/// Accumulates the gradient of `<gy, spectral_forward(W, x)>` with respect to
/// the real and imaginary parts of every multiplier into `grad` (interleaved
/// `re, im` in weight order).
pub(crate) fn spectral_weight_grad(
    modes: usize,
    c_in: usize,
    c_out: usize,
    x: &[f64],
    gy: &[f64],
    n: usize,
    grad: &mut [f64],
) {
    let xs: Vec<Vec<Complex64>> = (0..c_in).map(|i| rfft_unchecked(&x[i * n..(i + 1) * n])).collect();
    let gs: Vec<Vec<Complex64>> = (0..c_out).map(|o| rfft_unchecked(&gy[o * n..(o + 1) * n])).collect();
    for k in 0..modes {
        // Bins other than DC and Nyquist appear twice in the real inverse.
        let weight = if k == 0 || 2 * k == n { 1.0 } else { 2.0 } / n as f64;
        for (i, xi) in xs.iter().enumerate() {
            let xc = xi[k].conj();
            for (o, go) in gs.iter().enumerate() {
                let g = xc * go[k] * weight;
                let idx = 2 * ((k * c_in + i) * c_out + o);
                grad[idx] += g.re;
                grad[idx + 1] += g.im;
            }
        }
    }
}

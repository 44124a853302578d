//! Gaussian random fields `N(0, 625 (-Laplacian + 25 I)^-2)` on a periodic line.
//!
//! The grid is endpoint-duplicated: `N` points of which the last repeats the
//! first, so `P = N - 1` points are distinct. Mode `k` has standard
//! deviation `25 / (4 pi^2 k^2 + 25)`; the Nyquist mode of an even `P` is
//! dropped so every retained mode is a genuine complex pair.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::fft::{half_len, irfft_unchecked};
use crate::grid::{Field, Grid};

/// Standard deviation of Fourier mode `k` on the unit period.
pub fn mode_std(k: usize) -> f64 {
    25.0 / (4.0 * PI * PI * (k * k) as f64 + 25.0)
}

/// Fills `N` samples (endpoint-duplicated) from `rng`.
pub fn grf_values(n: usize, period: f64, rng: &mut impl Rng) -> Vec<f64> {
    let p = n - 1;
    let h = half_len(p);
    let mut c = vec![Complex64::new(0.0, 0.0); h];
    let scale = |k: usize| {
        // Wavenumber in units of the unit period.
        let kk = k as f64 / period;
        25.0 / (4.0 * PI * PI * kk * kk + 25.0) / period.sqrt()
    };
    c[0] = Complex64::new(p as f64 * scale(0) * rng.sample::<f64, _>(StandardNormal), 0.0);
    for (k, ck) in c.iter_mut().enumerate().skip(1) {
        if 2 * k == p {
            break;
        }
        let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        *ck = Complex64::new(a, b) * (p as f64 * scale(k) / 2f64.sqrt());
    }
    let mut u = irfft_unchecked(&c, p);
    u.push(u[0]);
    u
}

/// One sample on `grid`, reproducible from `seed`.
pub fn grf_sample(grid: &Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = grid.extent(0);
    Field::from_parts(grid.clone(), 1, grf_values(grid.n(0), hi - lo, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::rfft;

    #[test]
    fn periodic_and_reproducible() {
        let g = Grid::unit_1d(65).unwrap();
        let a = grf_sample(&g, 7);
        let b = grf_sample(&g, 7);
        assert_eq!(a, b);
        assert_eq!(a.values()[0], a.values()[64]);
        assert_ne!(a, grf_sample(&g, 8));
    }

    #[test]
    fn per_mode_variance() {
        let n = 33;
        let p = n - 1;
        let trials = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut acc = vec![0.0; 6];
        for _ in 0..trials {
            let u = grf_values(n, 1.0, &mut rng);
            let c = rfft(&u[..p]).unwrap();
            for (k, a) in acc.iter_mut().enumerate() {
                *a += (c[k] / p as f64).norm_sqr();
            }
        }
        for (k, a) in acc.iter().enumerate() {
            let emp = a / trials as f64;
            let want = mode_std(k).powi(2);
            assert!((emp / want - 1.0).abs() < 0.05, "mode {k}: {emp} vs {want}");
        }
    }
}

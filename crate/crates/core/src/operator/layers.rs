//! Pointwise maps, exact GeLU, and spectral convolution on flat parameters.

use num_complex::Complex64;

use crate::kernel::{spectral_adjoint, spectral_forward, spectral_weight_grad};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x / SQRT_2))
}

pub fn gelu_grad(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / SQRT_2)) + x * INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `y[o] = sum_i w[o * cin + i] x[i] + b[o]` at every point.
pub fn pointwise(w: &[f64], b: &[f64], cin: usize, cout: usize, x: &[f64], n: usize) -> Vec<f64> {
    let mut y = vec![0.0; cout * n];
    for o in 0..cout {
        let yo = &mut y[o * n..(o + 1) * n];
        yo.fill(b[o]);
        for i in 0..cin {
            let a = w[o * cin + i];
            for (v, xv) in yo.iter_mut().zip(&x[i * n..(i + 1) * n]) {
                *v += a * xv;
            }
        }
    }
    y
}

/// Backward of [`pointwise`]: accumulates weight and bias gradients and
/// returns the input gradient.
#[allow(clippy::too_many_arguments)]
pub fn pointwise_backward(
    w: &[f64],
    cin: usize,
    cout: usize,
    x: &[f64],
    gy: &[f64],
    n: usize,
    gw: &mut [f64],
    gb: &mut [f64],
) -> Vec<f64> {
    let mut gx = vec![0.0; cin * n];
    for o in 0..cout {
        let go = &gy[o * n..(o + 1) * n];
        gb[o] += go.iter().sum::<f64>();
        for i in 0..cin {
            let xi = &x[i * n..(i + 1) * n];
            gw[o * cin + i] += go.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
            let a = w[o * cin + i];
            for (g, gv) in gx[i * n..(i + 1) * n].iter_mut().zip(go) {
                *g += a * gv;
            }
        }
    }
    gx
}

/// Spectral multipliers of one layer, unpacked from interleaved storage.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub weights: Vec<Complex64>,
    pub modes: usize,
    pub channels: usize,
}

impl Spectral {
    pub fn from_flat(flat: &[f64], modes: usize, channels: usize) -> Self {
        let weights = flat.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Self { weights, modes, channels }
    }

    pub fn apply(&self, x: &[f64], n: usize) -> Vec<f64> {
        spectral_forward(&self.weights, self.modes, self.channels, self.channels, x, n)
    }

    pub fn adjoint(&self, gy: &[f64], n: usize) -> Vec<f64> {
        spectral_adjoint(&self.weights, self.modes, self.channels, self.channels, gy, n)
    }

    pub fn weight_grad(&self, x: &[f64], gy: &[f64], n: usize, grad: &mut [f64]) {
        spectral_weight_grad(self.modes, self.channels, self.channels, x, gy, n, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gelu_values_and_derivative() {
        assert_eq!(gelu(0.0), 0.0);
        // x * Phi(x) at x = 1 with Phi(1) = 0.8413447460685429.
        assert!((gelu(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        for &x in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
            let h = 1e-6;
            let fd = (gelu(x + h) - gelu(x - h)) / (2.0 * h);
            assert!((fd - gelu_grad(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn pointwise_backward_matches_transpose() {
        let (cin, cout, n) = (3, 2, 5);
        let w: Vec<f64> = (0..6).map(|i| i as f64 * 0.3 - 0.7).collect();
        let x: Vec<f64> = (0..15).map(|i| (i as f64).sin()).collect();
        let gy: Vec<f64> = (0..10).map(|i| (i as f64).cos()).collect();
        let (mut gw, mut gb) = (vec![0.0; 6], vec![0.0; 2]);
        let gx = pointwise_backward(&w, cin, cout, &x, &gy, n, &mut gw, &mut gb);
        // <gy, W x> == <W^T gy, x>
        let y = pointwise(&w, &[0.0, 0.0], cin, cout, &x, n);
        let lhs: f64 = gy.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = gx.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
        assert!((gb[0] - gy[..5].iter().sum::<f64>()).abs() < 1e-15);
    }
}

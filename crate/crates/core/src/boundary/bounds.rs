//! Closed-form distances between uncorrected and corrected outputs.
//!
//! Periodic: `||u - u~|| = sqrt(alpha^2 + beta^2) |u[0] - u[N-1]|`, smallest
//! at `alpha = beta = 1/2` where the factor is `1/sqrt(2)`.
//! Dirichlet: `sqrt((u[0] - a)^2 + (u[0] - K00 u0[0])^2 (sum_i Ki0^2 / K00^2 - 1))`.
//! Neumann: `sqrt(f1^2 + f2^2)` with `f2` the Dirichlet second term and `f1`
//! the change of the boundary entry.

use crate::kernel::DenseKernel;

use super::spec::check_weights;
use super::stencil::FdStencil;
use super::BoundaryError;

pub fn bound_periodic(u: &[f64], alpha: f64, beta: f64) -> Result<f64, BoundaryError> {
    check_weights(alpha, beta)?;
    let n = u.len();
    Ok((alpha * alpha + beta * beta).sqrt() * (u[0] - u[n - 1]).abs())
}

fn pivot(k: &DenseKernel, p: usize) -> Result<f64, BoundaryError> {
    let kpp = k.get(p, p);
    if kpp == 0.0 {
        return Err(BoundaryError::ZeroPivot { index: p, channel: 0 });
    }
    Ok(kpp)
}

/// The second term shared by the Dirichlet and Neumann bounds.
fn column_term(k: &DenseKernel, u: &[f64], u0: &[f64], p: usize, kpp: f64) -> f64 {
    let col: f64 = (0..k.n()).map(|i| (k.get(i, p) / kpp).powi(2)).sum();
    (u[p] - kpp * u0[p]).powi(2) * (col - 1.0)
}

/// Distance after a left Dirichlet correction to `alpha`.
pub fn bound_dirichlet(k: &DenseKernel, u0: &[f64], alpha: f64) -> Result<f64, BoundaryError> {
    if u0.len() != k.n() {
        return Err(BoundaryError::Shape(format!("kernel {} vs input {}", k.n(), u0.len())));
    }
    let k00 = pivot(k, 0)?;
    let u = k.mul_vec(u0);
    Ok(((u[0] - alpha).powi(2) + column_term(k, &u, u0, 0, k00)).sqrt())
}

/// Upper bound on the distance after a Neumann correction on the stencil's edge.
pub fn bound_neumann(k: &DenseKernel, u0: &[f64], alpha: f64, stencil: &FdStencil) -> Result<f64, BoundaryError> {
    let n = k.n();
    if u0.len() != n {
        return Err(BoundaryError::Shape(format!("kernel {} vs input {}", n, u0.len())));
    }
    if stencil.len() > n {
        return Err(BoundaryError::StencilTooLong { len: stencil.len(), n });
    }
    let edge = stencil.edge();
    let p = edge.pivot(n);
    let kpp = pivot(k, p)?;
    let u = k.mul_vec(u0);
    let c = stencil.coeffs();
    let c0 = c[0];
    let mut f1 = u[p] - alpha / c0;
    for (kk, ck) in c.iter().enumerate().skip(1) {
        let i = edge.inward(n, kk);
        f1 += ck / c0 * u[i] + ck * k.get(i, p) / (c0 * kpp) * (kpp * u0[p] - u[p]);
    }
    Ok((f1 * f1 + column_term(k, &u, u0, p, kpp)).sqrt())
}

//! Corrected spectral kernels inside the layers, the final boundary
//! assignment on the output, and their reverse-mode derivatives.
//!
//! Inside a layer the correction is asked to reproduce the input's own
//! boundary data: the Dirichlet target of channel `c` is `v[c][p]`, the
//! Neumann target is the stencil applied to `v[c]`. The output assignment uses
//! the problem's boundary values.

use crate::boundary::{fd_coefficients, BoundaryError, Edge, FdStencil, Side};

use super::layers::Spectral;
use super::params::Wiring;
use super::OperatorError;

#[derive(Debug, Clone)]
pub(crate) struct EdgeRule {
    pub edge: Edge,
    /// `None` for Dirichlet.
    pub stencil: Option<FdStencil>,
}

impl EdgeRule {
    fn pivot(&self, n: usize) -> usize {
        self.edge.pivot(n)
    }

    /// Overwrites the pivot so the rule holds with value `t`.
    pub fn edit(&self, u: &mut [f64], t: f64) {
        let p = self.pivot(u.len());
        u[p] = match &self.stencil {
            None => t,
            Some(s) => s.solve_pivot(u, t),
        };
    }

    /// Reverse of [`edit`](Self::edit): clears the pivot gradient, routes it to
    /// the stencil points, and returns the gradient of the target.
    pub fn edit_backward(&self, g: &mut [f64]) -> f64 {
        let n = g.len();
        let p = self.pivot(n);
        let gp = std::mem::take(&mut g[p]);
        match &self.stencil {
            None => gp,
            Some(s) => {
                let c = s.coeffs();
                for (k, ck) in c.iter().enumerate().skip(1) {
                    g[self.edge.inward(n, k)] -= ck / c[0] * gp;
                }
                gp / c[0]
            }
        }
    }

    fn own_target(&self, v: &[f64]) -> f64 {
        match &self.stencil {
            None => v[self.pivot(v.len())],
            Some(s) => s.apply(v),
        }
    }

    fn own_target_backward(&self, gv: &mut [f64], gt: f64) {
        let n = gv.len();
        match &self.stencil {
            None => gv[self.pivot(n)] += gt,
            Some(s) => {
                for (k, ck) in s.coeffs().iter().enumerate() {
                    gv[self.edge.inward(n, k)] += ck * gt;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Plan {
    Plain,
    Periodic { alpha: f64, beta: f64 },
    /// One rule, or left then right.
    Sides(Vec<EdgeRule>),
}

impl Plan {
    pub fn new(wiring: &Wiring, corrected: bool, n: usize, dx: f64) -> Result<Self, OperatorError> {
        if !corrected {
            return Ok(Plan::Plain);
        }
        let rules = |side: Side, order: Option<usize>| -> Result<Plan, OperatorError> {
            let mut out = Vec::new();
            for edge in side.edges() {
                let stencil = order.map(|o| fd_coefficients(o, dx, edge)).transpose()?;
                if let Some(s) = &stencil {
                    let limit = if side == Side::Both { n - 1 } else { n };
                    if s.len() > limit {
                        return Err(BoundaryError::StencilTooLong { len: s.len(), n }.into());
                    }
                }
                out.push(EdgeRule { edge, stencil });
            }
            Ok(Plan::Sides(out))
        };
        match *wiring {
            Wiring::Dirichlet { side } => rules(side, None),
            Wiring::Neumann { side, order } => rules(side, Some(order)),
            Wiring::Periodic { alpha, beta } => Ok(Plan::Periodic { alpha, beta }),
        }
    }

    /// `K E_p` for every constrained edge, where `E_p` is one at the pivot of
    /// every channel. These depend only on the weights and the resolution.
    pub fn probes(&self, k: &Spectral, n: usize) -> Vec<Vec<f64>> {
        let Plan::Sides(rules) = self else { return Vec::new() };
        rules
            .iter()
            .map(|r| {
                let mut e = vec![0.0; k.channels * n];
                let p = r.pivot(n);
                for c in 0..k.channels {
                    e[c * n + p] = 1.0;
                }
                k.apply(&e, n)
            })
            .collect()
    }

    pub fn probe_inputs(&self, channels: usize, n: usize) -> Vec<Vec<f64>> {
        let Plan::Sides(rules) = self else { return Vec::new() };
        rules
            .iter()
            .map(|r| {
                let mut e = vec![0.0; channels * n];
                for c in 0..channels {
                    e[c * n + r.pivot(n)] = 1.0;
                }
                e
            })
            .collect()
    }
}

fn pivot(v: f64, index: usize, channel: usize) -> Result<f64, OperatorError> {
    if v == 0.0 || !v.is_finite() {
        return Err(BoundaryError::ZeroPivot { index, channel }.into());
    }
    Ok(v)
}

/// Values kept from the forward pass of one corrected kernel.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tape {
    z: Vec<f64>,
    w: Vec<f64>,
}

/// Per-channel scalars of the two-sided elimination.
struct TwoSided {
    a: f64,
    pl_n: f64,
    pr_0: f64,
    s1: f64,
    y1n: f64,
    k1: f64,
    s2: f64,
    ky2_0: f64,
}

fn two_sided(v0: f64, vn: f64, z0: f64, zn: f64, a: f64, pl_n: f64, pr_0: f64, pr_n: f64) -> (TwoSided, f64, f64) {
    let s1 = v0 - z0 / a;
    let y1n = zn + s1 * pl_n;
    let k1 = pr_n - pl_n * pr_0 / a;
    let y2n = 2.0 * vn - y1n / k1;
    let s2 = y2n - vn;
    let ky2_0 = z0 + s2 * pr_0;
    let w0 = 2.0 * v0 - ky2_0 / a;
    (TwoSided { a, pl_n, pr_0, s1, y1n, k1, s2, ky2_0 }, w0, y2n)
}

/// Corrected kernel applied to `v` (`channels x n`). Returns the output and
/// the tape needed by [`backward`].
pub(crate) fn forward(
    k: &Spectral,
    plan: &Plan,
    probes: &[Vec<f64>],
    v: &[f64],
    n: usize,
) -> Result<(Vec<f64>, Tape), OperatorError> {
    let ch = k.channels;
    match plan {
        Plan::Plain => Ok((k.apply(v, n), Tape::default())),
        Plan::Periodic { alpha, beta } => {
            let mut y = k.apply(v, n);
            for c in 0..ch {
                let u = &mut y[c * n..(c + 1) * n];
                let e = alpha * u[0] + beta * u[n - 1];
                u[0] = e;
                u[n - 1] = e;
            }
            Ok((y, Tape::default()))
        }
        Plan::Sides(rules) => {
            let z = k.apply(v, n);
            let mut w = v.to_vec();
            let last = n - 1;
            for c in 0..ch {
                let at = c * n;
                if rules.len() == 1 {
                    let p = rules[0].pivot(n);
                    let d = pivot(probes[0][at + p], p, c)?;
                    w[at + p] = 2.0 * v[at + p] - z[at + p] / d;
                } else {
                    let (pl, pr) = (&probes[0], &probes[1]);
                    let a = pivot(pl[at], 0, c)?;
                    let (s, w0, y2n) =
                        two_sided(v[at], v[at + last], z[at], z[at + last], a, pl[at + last], pr[at], pr[at + last]);
                    pivot(s.k1, last, c)?;
                    w[at] = w0;
                    w[at + last] = y2n;
                }
            }
            let mut y = k.apply(&w, n);
            for c in 0..ch {
                let vc = &v[c * n..(c + 1) * n];
                let targets: Vec<f64> = rules.iter().map(|r| r.own_target(vc)).collect();
                let yc = &mut y[c * n..(c + 1) * n];
                for (r, t) in rules.iter().zip(targets) {
                    r.edit(yc, t);
                }
            }
            Ok((y, Tape { z, w }))
        }
    }
}

/// Reverse of [`forward`]. Accumulates the multiplier gradient into `gk`
/// (interleaved) and the probe gradients into `gprobes`; returns the input
/// gradient.
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward(
    k: &Spectral,
    plan: &Plan,
    probes: &[Vec<f64>],
    v: &[f64],
    tape: &Tape,
    g_out: &[f64],
    n: usize,
    gk: &mut [f64],
    gprobes: &mut [Vec<f64>],
) -> Vec<f64> {
    let ch = k.channels;
    match plan {
        Plan::Plain => {
            k.weight_grad(v, g_out, n, gk);
            k.adjoint(g_out, n)
        }
        Plan::Periodic { alpha, beta } => {
            let mut g = g_out.to_vec();
            for c in 0..ch {
                let u = &mut g[c * n..(c + 1) * n];
                let s = u[0] + u[n - 1];
                u[0] = alpha * s;
                u[n - 1] = beta * s;
            }
            k.weight_grad(v, &g, n, gk);
            k.adjoint(&g, n)
        }
        Plan::Sides(rules) => {
            let mut gv = vec![0.0; ch * n];
            let mut gy = g_out.to_vec();
            for c in 0..ch {
                let gyc = &mut gy[c * n..(c + 1) * n];
                let gts: Vec<f64> = rules.iter().rev().map(|r| r.edit_backward(gyc)).collect();
                for (r, gt) in rules.iter().rev().zip(gts) {
                    r.own_target_backward(&mut gv[c * n..(c + 1) * n], gt);
                }
            }
            k.weight_grad(&tape.w, &gy, n, gk);
            let gw = k.adjoint(&gy, n);
            let (z, w) = (&tape.z, &tape.w);
            let mut gz = vec![0.0; ch * n];
            let last = n - 1;
            for c in 0..ch {
                let at = c * n;
                for i in 0..n {
                    gv[at + i] += gw[at + i];
                }
                if rules.len() == 1 {
                    let p = rules[0].pivot(n);
                    let d = probes[0][at + p];
                    let g = gw[at + p];
                    // w[p] = 2 v[p] - z[p] / d replaced the identity entry.
                    gv[at + p] += g;
                    gz[at + p] = -g / d;
                    gprobes[0][at + p] += g * z[at + p] / (d * d);
                } else {
                    let (pl, pr) = (&probes[0], &probes[1]);
                    let (s, _, _) =
                        two_sided(v[at], v[at + last], z[at], z[at + last], pl[at], pl[at + last], pr[at], pr[at + last]);
                    debug_assert!(w[at].is_finite());
                    let (g_w0, g_y2n) = (gw[at], gw[at + last]);
                    gv[at] -= g_w0;
                    gv[at + last] -= g_y2n;
                    let (mut g_v0, mut g_vn, mut g_z0, mut g_zn) = (0.0, 0.0, 0.0, 0.0);
                    let (mut g_a, mut g_pln, mut g_pr0, mut g_prn) = (0.0, 0.0, 0.0, 0.0);
                    g_v0 += 2.0 * g_w0;
                    let g_ky = -g_w0 / s.a;
                    g_a += g_w0 * s.ky2_0 / (s.a * s.a);
                    g_z0 += g_ky;
                    let g_s2 = g_ky * s.pr_0;
                    g_pr0 += g_ky * s.s2;
                    let g_y2 = g_y2n + g_s2;
                    g_vn -= g_s2;
                    g_vn += 2.0 * g_y2;
                    let g_y1n = -g_y2 / s.k1;
                    let g_k1 = g_y2 * s.y1n / (s.k1 * s.k1);
                    g_prn += g_k1;
                    g_pln -= g_k1 * s.pr_0 / s.a;
                    g_pr0 -= g_k1 * s.pl_n / s.a;
                    g_a += g_k1 * s.pl_n * s.pr_0 / (s.a * s.a);
                    g_zn += g_y1n;
                    let g_s1 = g_y1n * s.pl_n;
                    g_pln += g_y1n * s.s1;
                    g_v0 += g_s1;
                    g_z0 -= g_s1 / s.a;
                    g_a += g_s1 * z[at] / (s.a * s.a);
                    gv[at] += g_v0;
                    gv[at + last] += g_vn;
                    gz[at] = g_z0;
                    gz[at + last] = g_zn;
                    gprobes[0][at] += g_a;
                    gprobes[0][at + last] += g_pln;
                    gprobes[1][at] += g_pr0;
                    gprobes[1][at + last] += g_prn;
                }
            }
            k.weight_grad(v, &gz, n, gk);
            for (a, b) in gv.iter_mut().zip(k.adjoint(&gz, n)) {
                *a += b;
            }
            gv
        }
    }
}

/// Output assignment with the problem's values: `targets[m]` holds the left
/// and right values of time channel `m`.
pub(crate) fn assign(plan: &Plan, out: &mut [f64], n: usize, targets: &[(Option<f64>, Option<f64>)]) {
    match plan {
        Plan::Plain => {}
        Plan::Periodic { alpha, beta } => {
            for u in out.chunks_exact_mut(n) {
                let e = alpha * u[0] + beta * u[n - 1];
                u[0] = e;
                u[n - 1] = e;
            }
        }
        Plan::Sides(rules) => {
            for (u, &(l, r)) in out.chunks_exact_mut(n).zip(targets) {
                for rule in rules {
                    let t = match rule.edge {
                        Edge::Left => l,
                        Edge::Right => r,
                    };
                    rule.edit(u, t.expect("boundary value for a constrained edge"));
                }
            }
        }
    }
}

pub(crate) fn assign_backward(plan: &Plan, g: &mut [f64], n: usize) {
    match plan {
        Plan::Plain => {}
        Plan::Periodic { alpha, beta } => {
            for u in g.chunks_exact_mut(n) {
                let s = u[0] + u[n - 1];
                u[0] = alpha * s;
                u[n - 1] = beta * s;
            }
        }
        Plan::Sides(rules) => {
            for u in g.chunks_exact_mut(n) {
                for rule in rules.iter().rev() {
                    rule.edit_backward(u);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{correct_sides, Rule};
    use crate::grid::{Field, Grid};
    use crate::kernel::SpectralKernel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(ch: usize, n: usize, seed: u64) -> (Spectral, SpectralKernel, Vec<f64>) {
        let sk = SpectralKernel::random_signed(6, ch, ch, seed);
        let flat: Vec<f64> = sk.weights().iter().flat_map(|c| [c.re, c.im]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let v = (0..ch * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (Spectral::from_flat(&flat, 6, ch), sk, v)
    }

    #[test]
    fn matches_boundary_fast_path() {
        let (n, ch) = (16, 3);
        let (k, sk, v) = setup(ch, n, 4);
        let grid = Grid::unit_1d(n).unwrap();
        let dx = grid.dx(0);
        let field = Field::new(grid, ch, v.clone()).unwrap();
        for wiring in [
            Wiring::Dirichlet { side: Side::Left },
            Wiring::Dirichlet { side: Side::Both },
            Wiring::Neumann { side: Side::Right, order: 2 },
            Wiring::Neumann { side: Side::Both, order: 1 },
        ] {
            let plan = Plan::new(&wiring, true, n, dx).unwrap();
            let probes = plan.probes(&k, n);
            let (y, _) = forward(&k, &plan, &probes, &v, n).unwrap();
            let Plan::Sides(rules) = &plan else { unreachable!() };
            let targets: Vec<Vec<f64>> =
                rules.iter().map(|r| (0..ch).map(|c| r.own_target(&v[c * n..(c + 1) * n])).collect()).collect();
            let rule = |i: usize| {
                let r: &EdgeRule = &rules[i];
                match &r.stencil {
                    None => Rule::Dirichlet(&targets[i]),
                    Some(s) => Rule::Neumann(&targets[i], s),
                }
            };
            let (l, r) = match rules.len() {
                2 => (Some(rule(0)), Some(rule(1))),
                _ if rules[0].edge == Edge::Left => (Some(rule(0)), None),
                _ => (None, Some(rule(0))),
            };
            let want = correct_sides(&sk, &field, l, r).unwrap();
            for (a, b) in y.iter().zip(want.values()) {
                assert!((a - b).abs() < 1e-12, "{wiring:?}");
            }
        }
    }

    /// Directional finite difference of `<g, forward(v)>` against the
    /// analytic input and probe gradients.
    #[test]
    fn backward_matches_finite_differences() {
        let (n, ch) = (12, 2);
        for wiring in [
            Wiring::Dirichlet { side: Side::Left },
            Wiring::Dirichlet { side: Side::Both },
            Wiring::Neumann { side: Side::Both, order: 2 },
            Wiring::Periodic { alpha: 0.3, beta: 0.7 },
        ] {
            let (k, _, v) = setup(ch, n, 9);
            let plan = Plan::new(&wiring, true, n, 1.0 / (n - 1) as f64).unwrap();
            let probes = plan.probes(&k, n);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let g: Vec<f64> = (0..ch * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dv: Vec<f64> = (0..ch * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, tape) = forward(&k, &plan, &probes, &v, n).unwrap();
            let mut gk = vec![0.0; 2 * k.weights.len()];
            let mut gp: Vec<Vec<f64>> = probes.iter().map(|p| vec![0.0; p.len()]).collect();
            let gv = backward(&k, &plan, &probes, &v, &tape, &g, n, &mut gk, &mut gp);
            let f = |v: &[f64]| -> f64 {
                let (y, _) = forward(&k, &plan, &probes, v, n).unwrap();
                y.iter().zip(&g).map(|(a, b)| a * b).sum()
            };
            let h = 1e-6;
            let plus: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a + h * b).collect();
            let minus: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a - h * b).collect();
            let fd = (f(&plus) - f(&minus)) / (2.0 * h);
            let an: f64 = gv.iter().zip(&dv).map(|(a, b)| a * b).sum();
            assert!((fd - an).abs() < 1e-7 * (1.0 + an.abs()), "{wiring:?}: {fd} vs {an}");
        }
    }
}

//! Reference solver for `u_t + (u^2/2)_x = nu u_xx` on a periodic line.
//!
//! Conservative central flux `(f_j + f_{j+1})/2` and a central second
//! difference in space, Heun (explicit RK2) in time. Both space and time are
//! second order; the flux differences telescope, so the discrete mass is
//! conserved to round-off. The central flux needs a cell Peclet number
//! `max|u| dx / nu` below 2, which is checked up front.

use crate::grid::Field;

use super::PdeError;

/// Stable step for the data `u` (distinct points only): `0.4 min(dx/max|u|, dx^2/(2 nu))`.
pub fn stable_dt(u: &[f64], dx: f64, nu: f64) -> f64 {
    let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = dx * dx / (2.0 * nu);
    let adv = if umax > 0.0 { dx / umax } else { f64::INFINITY };
    0.4 * diff.min(adv)
}

fn rhs(u: &[f64], dx: f64, nu: f64, out: &mut [f64]) {
    let p = u.len();
    for j in 0..p {
        let (l, r) = (u[(j + p - 1) % p], u[(j + 1) % p]);
        let c = u[j];
        let fr = 0.25 * (c * c + r * r);
        let fl = 0.25 * (l * l + c * c);
        out[j] = -(fr - fl) / dx + nu * (r - 2.0 * c + l) / (dx * dx);
    }
}

/// One Heun step on the distinct points.
pub fn heun_step(u: &mut [f64], dt: f64, dx: f64, nu: f64, k1: &mut [f64], k2: &mut [f64], tmp: &mut [f64]) {
    rhs(u, dx, nu, k1);
    for j in 0..u.len() {
        tmp[j] = u[j] + dt * k1[j];
    }
    rhs(tmp, dx, nu, k2);
    for j in 0..u.len() {
        u[j] += 0.5 * dt * (k1[j] + k2[j]);
    }
}

/// Solution at `t_j = j t_final / nt`, `j = 1..=nt`, as an `nt`-channel field.
///
/// `u0` lives on an endpoint-duplicated grid (`u0[0] == u0[N-1]`). `dt`
/// overrides the internal step and must not exceed [`stable_dt`].
pub fn burgers_periodic_fd_solve(
    u0: &Field,
    nu: f64,
    nt: usize,
    t_final: f64,
    dt: Option<f64>,
) -> Result<Field, PdeError> {
    if !(nu > 0.0) {
        return Err(PdeError::BadParam(format!("nu must be positive, got {nu}")));
    }
    if nt == 0 || !(t_final > 0.0) {
        return Err(PdeError::BadParam("need nt >= 1 and t_final > 0".into()));
    }
    let grid = u0.grid();
    if grid.dims() != 1 || u0.channels() != 1 {
        return Err(PdeError::BadParam("periodic Burgers takes one 1D channel".into()));
    }
    let n = grid.n(0);
    let v = u0.values();
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if (v[0] - v[n - 1]).abs() > 1e-12 * scale {
        return Err(PdeError::BadParam("initial data is not periodic (u[0] != u[N-1])".into()));
    }
    let dx = grid.dx(0);
    let mut u = v[..n - 1].to_vec();
    let umax = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let peclet = umax * dx / nu;
    if peclet >= 2.0 {
        let length = grid.extent(0).1 - grid.extent(0).0;
        return Err(PdeError::Peclet { peclet, min_points: (umax * length / (2.0 * nu)).ceil() as usize + 2 });
    }
    let max_dt = stable_dt(&u, dx, nu);
    let interval = t_final / nt as f64;
    let target = match dt {
        Some(d) if d > max_dt || d <= 0.0 => return Err(PdeError::Cfl { dt: d, max_dt }),
        Some(d) => d,
        None => max_dt,
    };
    let sub = (interval / target).ceil().max(1.0) as usize;
    let h = interval / sub as f64;
    let p = u.len();
    let (mut k1, mut k2, mut tmp) = (vec![0.0; p], vec![0.0; p], vec![0.0; p]);
    let mut out = Vec::with_capacity(nt * n);
    for j in 1..=nt {
        for _ in 0..sub {
            heun_step(&mut u, h, dx, nu, &mut k1, &mut k2, &mut tmp);
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(PdeError::Diverged(j as f64 * interval));
        }
        out.extend_from_slice(&u);
        out.push(u[0]);
    }
    Ok(Field::from_parts(grid.clone(), nt, out))
}

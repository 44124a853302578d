//! Closed-form solutions.

use std::f64::consts::PI;

use super::PdeError;

fn positive(name: &str, v: f64) -> Result<(), PdeError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(PdeError::BadParam(format!("{name} must be positive, got {v}")))
    }
}

/// Oscillating plate: `U exp(-k y) cos(k y - omega t)` with `k = sqrt(omega / (2 nu))`.
pub fn stokes_exact(y: f64, t: f64, u: f64, omega: f64, nu: f64) -> Result<f64, PdeError> {
    positive("nu", nu)?;
    let k = (omega / (2.0 * nu)).sqrt();
    Ok(u * (-k * y).exp() * (k * y - omega * t).cos())
}

/// Viscous Riemann shock centred at `x = 0.5` moving with speed `(uL + uR)/2`.
pub fn burgers_riemann_exact(x: f64, t: f64, ul: f64, ur: f64, nu: f64) -> Result<f64, PdeError> {
    positive("nu", nu)?;
    if ul <= ur {
        return Err(PdeError::BadParam(format!("need uL > uR for a shock, got {ul} <= {ur}")));
    }
    let s = 0.5 * (ul + ur);
    Ok(s - 0.5 * (ul - ur) * ((x - 0.5 - s * t) * (ul - ur) / (4.0 * nu)).tanh())
}

/// Cosine-series coefficient of `cos(omega pi x)` on `[0, 1]` for `n >= 1`.
pub fn heat_coefficient(n: usize, omega: f64) -> f64 {
    let nf = n as f64;
    if (omega - nf).abs() < 1e-12 {
        return 1.0;
    }
    let sinc = |a: f64| if a.abs() < 1e-300 { 1.0 } else { (a * PI).sin() / (a * PI) };
    sinc(omega + nf) + sinc(omega - nf)
}

/// Terms needed at time `t`: stop once `2/(pi (n - omega)) exp(-k (n pi)^2 t)`,
/// an upper bound on every later term, drops below 1e-14. Capped at 10^4, and
/// fixed at 2000 for `t = 0` where the series only converges like `1/n^2`.
pub fn heat_terms(t: f64, k: f64, omega: f64) -> usize {
    if t <= 0.0 {
        return 2000;
    }
    let start = omega.abs().ceil() as usize + 1;
    for n in start..=10_000 {
        let nf = n as f64;
        let bound = 2.0 / (PI * (nf - omega.abs())) * (-k * (nf * PI).powi(2) * t).exp();
        if bound < 1e-14 {
            return n;
        }
    }
    10_000
}

/// Heated rod with `u_x(0,t) = 0`, `u_x(1,t) = U sin(pi t)` and source
/// `U pi x^2/2 cos(pi t)`, started from `cos(omega pi x)`; series truncated
/// after `n_terms` cosine modes.
pub fn heat_exact(x: f64, t: f64, k: f64, u: f64, omega: f64, n_terms: usize) -> Result<f64, PdeError> {
    positive("k", k)?;
    if n_terms == 0 {
        return Err(PdeError::BadParam("n_terms must be at least 1".into()));
    }
    let a0 = if omega.abs() < 1e-300 { 1.0 } else { (omega * PI).sin() / (omega * PI) };
    let mut v = u * x * x / 2.0 * (PI * t).sin() - u * k / PI * ((PI * t).cos() - 1.0) + a0;
    for n in 1..=n_terms {
        let nf = n as f64;
        v += heat_coefficient(n, omega) * (nf * PI * x).cos() * (-k * (nf * PI).powi(2) * t).exp();
    }
    Ok(v)
}

/// Heat source matching [`heat_exact`].
pub fn heat_source(x: f64, t: f64, u: f64) -> f64 {
    u * PI * x * x / 2.0 * (PI * t).cos()
}

/// Standing wave `k cos(pi x) cos(pi y) cos(c sqrt(2) pi t)`.
pub fn wave_exact(x: f64, y: f64, t: f64, c: f64, k: f64) -> f64 {
    k * (PI * x).cos() * (PI * y).cos() * (c * 2f64.sqrt() * PI * t).cos()
}

/// Largest central-difference PDE residual of each closed form over random
/// interior points, divided by the solution amplitude. Order: Stokes,
/// Riemann Burgers, heat (with source), wave.
pub fn residual_report(points: usize, seed: u64) -> Result<[f64; 4], PdeError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-4;
    let mut worst = [0.0f64; 4];
    for _ in 0..points {
        let (x, t) = (rng.random_range(0.05..0.95), rng.random_range(0.2..1.9));
        let (om, nu) = (rng.random_range(3.0..4.0), 0.1);
        let f = |y: f64, t: f64| stokes_exact(y, t, 2.0, om, nu);
        let ut = (f(x, t + h)? - f(x, t - h)?) / (2.0 * h);
        let uyy = (f(x + h, t)? - 2.0 * f(x, t)? + f(x - h, t)?) / (h * h);
        worst[0] = worst[0].max((ut - nu * uyy).abs() / 2.0);

        let ul = 0.8 + 0.01 * rng.random_range(-1.0..1.0);
        let g = |x: f64, t: f64| burgers_riemann_exact(x, t, ul, 0.0, 0.02);
        let ut = (g(x, t + h)? - g(x, t - h)?) / (2.0 * h);
        let fx = (g(x + h, t)?.powi(2) - g(x - h, t)?.powi(2)) / (4.0 * h);
        let uxx = (g(x + h, t)? - 2.0 * g(x, t)? + g(x - h, t)?) / (h * h);
        worst[1] = worst[1].max((ut + fx - 0.02 * uxx).abs() / ul);

        let (k, u, om) = (0.01, 5.0, rng.random_range(2.01..3.99));
        let n = heat_terms(t - h, k, om);
        let q = |x: f64, t: f64| heat_exact(x, t, k, u, om, n);
        let ut = (q(x, t + h)? - q(x, t - h)?) / (2.0 * h);
        let uxx = (q(x + h, t)? - 2.0 * q(x, t)? + q(x - h, t)?) / (h * h);
        worst[2] = worst[2].max((ut - k * uxx - heat_source(x, t, u)).abs() / u);

        let (y, amp) = (rng.random_range(0.05..0.95), rng.random_range(3.0..4.0));
        let hw = 1e-3;
        let w = |x: f64, y: f64, t: f64| wave_exact(x, y, t, 1.0, amp);
        let utt = (w(x, y, t + hw) - 2.0 * w(x, y, t) + w(x, y, t - hw)) / (hw * hw);
        let lap = (w(x + hw, y, t) + w(x - hw, y, t) + w(x, y + hw, t) + w(x, y - hw, t) - 4.0 * w(x, y, t)) / (hw * hw);
        worst[3] = worst[3].max((utt - lap).abs() / amp);
    }
    Ok(worst)
}

//! Lid-driven cavity: divergence after each projection and how the vorticity
//! settles toward a steady state.
//!
//!     cargo run --release --example lid_cavity -- [n] [re]

use boonkit::pde::cavity::lid_cavity_solve;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n = args.next().map(|s| s.parse()).transpose()?.unwrap_or(64);
    let re = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100.0);
    let nt = 10;
    let t = std::time::Instant::now();
    let run = lid_cavity_solve(n, re, 1.0, nt, 2.0)?;
    let max_div = run.divergence.iter().fold(0.0f64, |m, d| m.max(*d));
    println!("N={n} Re={re}: {} steps in {:.2} s, max divergence {max_div:.2e}", run.steps, t.elapsed().as_secs_f64());
    let per = n * n;
    let w = run.vorticity.values();
    for j in 1..nt {
        let change: f64 = w[(j - 1) * per..j * per].iter().zip(&w[j * per..(j + 1) * per]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let peak = w[j * per..(j + 1) * per].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("t={:.1}  max|w| {peak:8.3}  change {change:.3e}", 2.0 * (j + 1) as f64 / nt as f64);
    }
    Ok(())
}

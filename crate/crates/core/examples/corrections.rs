//! The three one-sided corrections and the two-sided one, applied to a random
//! spectral kernel. Prints the boundary data before and after and the number
//! of kernel applies each correction used.
//!
//!     cargo run --release --example corrections

use boonkit::boundary::{correct_dirichlet, correct_neumann, correct_periodic, correct_sides, fd_coefficients, Edge, Rule};
use boonkit::{Field, Grid, KernelModule, SpectralKernel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 128;
    let grid = Grid::unit_1d(n)?;
    let k = SpectralKernel::random_signed(16, 1, 1, 3);
    let u0 = Field::from_fn_1d(grid.clone(), |x| (3.0 * x).sin() + 0.5)?;
    let plain = k.apply(&u0)?;
    let dx = grid.dx(0);
    let left = fd_coefficients(2, dx, Edge::Left)?;
    let right = fd_coefficients(2, dx, Edge::Right)?;
    let v = plain.values();
    println!("K u0: u[0] = {:.6}, u[N-1] = {:.6}, left flux = {:.6}", v[0], v[n - 1], left.apply(v));

    let mut calls = k.calls();
    let mut report = |name: &str, k: &SpectralKernel, line: String| {
        println!("{name:<10} {line}  ({} applies)", k.calls() - calls);
        calls = k.calls();
    };
    let d = correct_dirichlet(&k, &u0, 0.25)?;
    report("dirichlet", &k, format!("u[0] = {}", d.values()[0]));
    let nm = correct_neumann(&k, &u0, -1.0, &left)?;
    report("neumann", &k, format!("left flux = {:.3e}", left.apply(nm.values())));
    let p = correct_periodic(&k, &u0, 0.5, 0.5)?;
    report("periodic", &k, format!("u[0] - u[N-1] = {:e}", p.values()[0] - p.values()[n - 1]));
    let (lv, rv) = ([0.0], [2.0]);
    let both = correct_sides(&k, &u0, Some(Rule::Dirichlet(&lv)), Some(Rule::Neumann(&rv, &right)))?;
    report("two-sided", &k, format!("u[0] = {}, right flux = {:.3e}", both.values()[0], right.apply(both.values())));
    Ok(())
}

//! Distance between the plain and corrected outputs against the closed-form
//! bounds, over random kernels and inputs.
//!
//!     cargo run --release --example bounds -- [trials]

use boonkit::boundary::BcKind;
use boonkit::harness::checks::bound_trials;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1000);
    println!("{:<10} {:>8} {:>22} {:>11} {:>14}", "family", "trials", "max rel. residual", "violations", "max distance");
    for kind in [BcKind::Periodic, BcKind::Dirichlet, BcKind::Neumann] {
        let s = bound_trials(kind, trials, 0)?;
        println!("{:<10} {:>8} {:>22.3e} {:>11} {:>14.3e}", s.family, s.trials, s.max_rel_residual, s.violations, s.max_distance);
    }
    println!("periodic and dirichlet are equalities; neumann is an upper bound");
    Ok(())
}

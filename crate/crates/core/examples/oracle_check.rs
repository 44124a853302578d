//! Fast corrections against the explicitly assembled corrected kernels, over
//! random dense kernels at several sizes.
//!
//!     cargo run --release --example oracle_check -- [instances]

use boonkit::boundary::BcKind;
use boonkit::harness::checks::oracle_equivalence;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(100);
    for kind in [BcKind::Dirichlet, BcKind::Neumann, BcKind::Periodic] {
        let t = std::time::Instant::now();
        let err = oracle_equivalence(kind, &[8, 16, 32, 64], trials, 1, false)?;
        println!("{:<9} max relative difference {err:.2e} over {} instances ({:.2} s)", kind.name(), 4 * trials, t.elapsed().as_secs_f64());
    }
    let broken = oracle_equivalence(BcKind::Dirichlet, &[16], 10, 1, true)?;
    println!("with a sign flip in the dense Dirichlet transform: {broken:.2e}");
    Ok(())
}

//! Trains the corrected operator and the plain baseline on viscous Burgers
//! with Dirichlet data on both ends, printing test errors per epoch.
//!
//!     cargo run --release --example train_burgers -- [epochs]

use boonkit::operator::{train, Arch, TrainConfig, Wiring};
use boonkit::pde::{build_dataset, Problem, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20);
    let mut spec = ProblemSpec::standard(Problem::BurgersRiemann, 128, false).with_size(120);
    spec.nu = 0.1;
    spec.n_train = 100;
    let data = build_dataset(&spec)?;
    let wiring = Wiring::from_spec(&spec.bc_template());
    let config = TrainConfig { epochs, ..TrainConfig::standard(1, false) };
    for corrected in [true, false] {
        let arch = Arch { corrected, ..Arch::standard(1, false, spec.m, wiring) };
        let t = std::time::Instant::now();
        let out = train(arch, &config, &data)?;
        let name = if corrected { "corrected" } else { "baseline" };
        for e in &out.history {
            println!("{name} epoch {:3}  train {:.5}  test {:.5} ({:.2e})", e.epoch, e.train_rel_l2, e.test_rel_l2, e.boundary_l2);
        }
        println!("{name}: {:.1}s", t.elapsed().as_secs_f64());
    }
    Ok(())
}

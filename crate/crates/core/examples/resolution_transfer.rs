//! Trains on heat data with zero-flux and prescribed-flux ends at N=64, then
//! evaluates the same checkpoint at N=128 and N=256.
//!
//!     cargo run --release --example resolution_transfer -- [epochs] [--baseline]

use boonkit::operator::{evaluate, train, Arch, TrainConfig, Wiring};
use boonkit::pde::{build_dataset, Dataset, PdeError, Problem, ProblemSpec};

fn heat(n: usize) -> Result<Dataset, PdeError> {
    let mut s = ProblemSpec::standard(Problem::Heat1D, n, false).with_size(120);
    s.n_train = 100;
    s.seed = 8;
    build_dataset(&s)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let epochs = args.iter().find_map(|a| a.parse().ok()).unwrap_or(30);
    let corrected = !args.iter().any(|a| a == "--baseline");
    let data = heat(64)?;
    let wiring = Wiring::from_spec(&data.meta.spec.bc_template());
    let arch = Arch { corrected, ..Arch::standard(1, false, 1, wiring) };
    let out = train(arch, &TrainConfig { epochs, ..TrainConfig::standard(1, false) }, &data)?;
    for n in [64, 128, 256] {
        let d = if n == 64 { heat(64)? } else { heat(n)? };
        let m = evaluate(&out.params, &d, &d.meta.test)?;
        println!("N={n:4}  test {:.4e}  boundary {:.3e}  stencil residual {:.1e}", m.rel_l2, m.boundary_l2, m.bc_residual);
    }
    Ok(())
}

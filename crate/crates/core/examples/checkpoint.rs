//! Trains briefly, saves a checkpoint with its optimizer state, reloads it and
//! checks the predictions are unchanged.
//!
//!     cargo run --release --example checkpoint

use boonkit::operator::{evaluate, read_checkpoint, train, write_checkpoint, Arch, Checkpoint, TrainConfig, Wiring};
use boonkit::pde::{build_dataset, Problem, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProblemSpec::standard(Problem::BurgersPeriodic, 64, false).with_size(30);
    let data = build_dataset(&spec)?;
    let arch = Arch { width: 16, modes: 8, ..Arch::standard(1, false, 1, Wiring::from_spec(&spec.bc_template())) };
    let out = train(arch, &TrainConfig { epochs: 3, ..TrainConfig::standard(1, false) }, &data)?;
    let path = std::env::temp_dir().join("boonkit_example.boonmodl");
    write_checkpoint(&path, &Checkpoint { params: out.params.clone(), resolution: spec.n, adam: out.adam })?;
    let back = read_checkpoint(&path)?;
    let a = evaluate(&out.params, &data, &data.meta.test)?;
    let b = evaluate(&back.params, &data, &data.meta.test)?;
    println!("{} parameters, Adam step {}", back.params.values.len(), back.adam.step);
    println!("before save {} ({}), after reload {} ({})", a.rel_l2, a.boundary_l2, b.rel_l2, b.boundary_l2);
    assert_eq!(a.rel_l2, b.rel_l2);
    Ok(())
}
